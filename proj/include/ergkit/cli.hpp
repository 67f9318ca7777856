#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "ergkit/config.hpp"
#include "ergkit/verifier.hpp"

namespace ergkit {

/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name. Output files named by flags are
/// written directly; everything else goes to `out` / `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const Settings& environment = process_environment());

/// A verify report line: id, level, PASS/FAIL verdict and per-item verdicts.
struct ReportLine {
  std::string id;
  VerificationReport report;
  friend bool operator==(const ReportLine&, const ReportLine&) = default;
};

std::string serialize_report_line(const ReportLine& line);
/// Throws ParseError carrying the line number.
std::vector<ReportLine> parse_report_lines(std::string_view text);

}  // namespace ergkit
