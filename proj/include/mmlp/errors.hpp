#pragma once

#include <stdexcept>
#include <string>

namespace mmlp {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFinite : NumericError {
  explicit NonFinite(const std::string& what) : NumericError(what) {}
};

struct NoConvergence : NumericError {
  explicit NoConvergence(const std::string& what) : NumericError(what) {}
};

struct NotPositiveDefinite : NumericError {
  explicit NotPositiveDefinite(const std::string& what) : NumericError(what) {}
};

struct DegenerateSpectrum : NumericError {
  explicit DegenerateSpectrum(const std::string& what) : NumericError(what) {}
};

struct DimensionMismatch : NumericError {
  explicit DimensionMismatch(const std::string& what) : NumericError(what) {}
};

struct TraceUnderflow : NumericError {
  explicit TraceUnderflow(const std::string& what) : NumericError(what) {}
};

struct RankDeficient : NumericError {
  explicit RankDeficient(const std::string& what) : NumericError(what) {}
};

struct DivergedTraining : NumericError {
  explicit DivergedTraining(const std::string& what) : NumericError(what) {}
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : IoError {
  explicit FormatError(const std::string& what) : IoError(what) {}
};

}  // namespace mmlp
