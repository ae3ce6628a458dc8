#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bilex {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define BILEX_DEFINE_ERROR(Name)             \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

BILEX_DEFINE_ERROR(InvalidArgument);
BILEX_DEFINE_ERROR(EmptyCorpus);
BILEX_DEFINE_ERROR(InvalidRank);
BILEX_DEFINE_ERROR(NumericError);
BILEX_DEFINE_ERROR(DimensionError);
BILEX_DEFINE_ERROR(EmptyCandidates);
BILEX_DEFINE_ERROR(RequiresFactorized);
BILEX_DEFINE_ERROR(EmptySplit);
BILEX_DEFINE_ERROR(DataError);
BILEX_DEFINE_ERROR(UnknownWord);
BILEX_DEFINE_ERROR(DegenerateVector);
BILEX_DEFINE_ERROR(EmptyData);
BILEX_DEFINE_ERROR(InsufficientData);
BILEX_DEFINE_ERROR(VersionError);
BILEX_DEFINE_ERROR(RepresentationMismatch);

#undef BILEX_DEFINE_ERROR

/// Training produced a non-finite or runaway objective.
class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, double step_size, const std::string& detail)
      : Error("training diverged at epoch " + std::to_string(epoch) +
              " (step size " + std::to_string(step_size) + "): " + detail),
        epoch_(epoch),
        step_size_(step_size) {}

  int epoch() const { return epoch_; }
  double step_size() const { return step_size_; }

 private:
  int epoch_;
  double step_size_;
};

/// Malformed input. Carries the 1-based line number (0 when not
/// attributable to a line, e.g. a truncated binary payload).
class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace bilex
