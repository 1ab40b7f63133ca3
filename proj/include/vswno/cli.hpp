#pragma once

#include <iosfwd>
#include <stdexcept>

namespace vswno::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kMissingInput = 3,
  kNanAbort = 4,
  kMismatch = 5,
};

/// Checkpoint/dataset or log incompatibility (grid, channels).
class MismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Worker threads for generation and evaluation: hardware concurrency,
/// capped by VSWNO_THREADS when set.
std::size_t thread_limit();

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vswno::cli
