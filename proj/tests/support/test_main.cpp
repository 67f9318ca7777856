#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <iostream>

#include "ergkit/gateway.hpp"

// Every suite doubles as an offline check: no test may open a connection.
int main(int argc, char** argv) {
  doctest::Context context(argc, argv);
  const int code = context.run();
  if (context.shouldExit()) return code;
  if (ergkit::network_connection_count() != 0) {
    std::cerr << "network connections opened: " << ergkit::network_connection_count() << "\n";
    return 1;
  }
  return code;
}
