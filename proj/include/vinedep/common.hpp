#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace vinedep {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ErrorCode {
  DegenerateColumn,
  InputOutOfRange,
  InvalidParameter,
  NumericalOverflow,
  ConvergenceFailure,
  UnattainableTau,
  LengthMismatch,
  AllCandidatesFailed,
  ProximityViolation,
  SingularCurvature,
  TestUnreliable,
  CollinearDesign,
  SingularCovariance,
  NoOffScheduleUploads,
  MalformedInput,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Seed derivation: child = hash(seed, purpose, index). splitmix64 finaliser
// over an FNV-1a digest of the purpose label.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0);

/// Small deterministic generator producing doubles strictly inside (0, 1).
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed);

  double next();
  double normal();

 private:
  std::uint64_t next_u64();
  std::uint64_t state_[4];
};

/// Worker count: VINEDEP_THREADS if set (>= 1), otherwise hardware concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Exceptions from the body are rethrown on the
/// calling thread (the one with the lowest index wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace vinedep
