#include "ergkit/parameter.hpp"

#include <array>

namespace ergkit {
namespace {

constexpr std::array<std::pair<Property, std::string_view>, 7> kProperties = {{
    {Property::positive, "positive"},
    {Property::even, "even"},
    {Property::odd, "odd"},
    {Property::prime, "prime"},
    {Property::composite, "composite"},
    {Property::square, "square"},
    {Property::distinct, "distinct"},
}};

bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::int64_t d = 3; d <= n / d; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

bool is_square(std::int64_t n) {
  if (n < 0) return false;
  std::int64_t r = 0;
  while ((r + 1) <= n / (r + 1)) ++r;
  return r * r == n;
}

}  // namespace

std::string_view to_string(Property p) noexcept {
  for (const auto& [id, name] : kProperties) {
    if (id == p) return name;
  }
  return "unknown";
}

std::optional<Property> property_from_string(std::string_view name) noexcept {
  for (const auto& [id, n] : kProperties) {
    if (n == name) return id;
  }
  return std::nullopt;
}

bool is_numeric_property(Property p) noexcept { return p != Property::distinct; }

bool has_property(const Rational& x, Property p) {
  if (!x.is_integer()) return false;
  const std::int64_t n = x.num();
  switch (p) {
    case Property::positive:
      return n > 0;
    case Property::even:
      return n % 2 == 0;
    case Property::odd:
      return n % 2 != 0;
    case Property::prime:
      return is_prime(n);
    case Property::composite:
      return n > 3 && !is_prime(n);
    case Property::square:
      return is_square(n);
    case Property::distinct:
      return false;
  }
  return false;
}

std::string describe(const Parameter& p) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Rational>) {
          return v.to_string();
        } else if constexpr (std::is_same_v<T, std::string>) {
          return "\"" + v + "\"";
        } else if constexpr (std::is_same_v<T, TextList>) {
          std::string out = "[";
          for (std::size_t i = 0; i < v.items.size(); ++i) {
            if (i) out += ", ";
            out += "\"" + v.items[i] + "\"";
          }
          return out + "]";
        } else if constexpr (std::is_same_v<T, PropertyList>) {
          std::string out = "{";
          for (std::size_t i = 0; i < v.items.size(); ++i) {
            if (i) out += ", ";
            out += std::string(to_string(v.items[i]));
          }
          return out + "}";
        } else {
          return "dim:" + std::string(to_string(v));
        }
      },
      p);
}

std::string describe(const NodeValue& v) {
  if (const auto* r = std::get_if<Rational>(&v)) return r->to_string();
  return "\"" + std::get<std::string>(v) + "\"";
}

}  // namespace ergkit
