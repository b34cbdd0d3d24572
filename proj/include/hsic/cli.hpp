#pragma once

#include "hsic/kernel.hpp"
#include "hsic/nulldist.hpp"

#include <iosfwd>
#include <string>

namespace hsic::cli {

enum class GridSource { first_row, uniform };
enum class OutputFormat { json, csv, text };

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitDegenerate = 3;
inline constexpr int kExitNumeric = 4;

/// Rectangular numeric CSV, no quoting. Blank lines are skipped; with
/// `skip_header` the first non-blank line is dropped. Errors name the
/// source, line and column.
RowMatrix parse_csv(std::istream& in, const std::string& source, bool skip_header = false);

/// Reads observations one per row. For functional data with
/// GridSource::first_row the first data row is the time grid; otherwise the
/// grid is (r-1)/(k-1).
Sample load_sample(const std::string& path, SampleKind kind, GridSource grid, bool skip_header = false);

/// Renders a test result. p-values get 6 significant digits in csv/text;
/// json keeps full precision.
std::string format_result(const TestResult& r, OutputFormat format, double alpha);

/// Entry point shared by the executable and the tests; returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hsic::cli
