#ifndef MIXB2D_ERRORS_HPP
#define MIXB2D_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mixb2d {

/// Shape mismatches, dimension caps, malformed arguments.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Dataset ingestion failures: bad magic, truncated files, label mismatches.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failures: eigensolver non-convergence, singular moment sums,
/// responsibilities underflowing to zero everywhere.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A symmetric factorization hit a non-positive pivot.
class NotPositiveDefiniteError : public NumericalError {
 public:
  NotPositiveDefiniteError(const std::string& msg, int pivot)
      : NumericalError(msg + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

}  // namespace mixb2d

#endif  // MIXB2D_ERRORS_HPP
