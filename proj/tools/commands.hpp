#pragma once

// Subcommands of the bbdg driver. run_cli is the whole program minus main(),
// so tests can drive it in-process.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbdg::cli {

enum ExitCode : int { kSuccess = 0, kNumericalFailure = 1, kUsageError = 2 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DegreeRange {
  int lo = 1;
  int hi = 1;
  std::vector<int> values() const;
};

/// "4" or "1..9"; rejects empty and out-of-range ranges.
DegreeRange parse_degree_range(const std::string& s, int min_degree, int max_degree);
/// "2,4,8"
std::vector<int> parse_int_list(const std::string& s);

/// Applies BBDG_NUM_THREADS if set.
void configure_threads();

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bbdg::cli
