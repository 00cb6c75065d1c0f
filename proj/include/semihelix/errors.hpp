#pragma once

#include <stdexcept>
#include <string>

namespace semihelix {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Linear algebra / frame errors.
class DegenerateBasis : public Error { public: using Error::Error; };
class RankDeficient : public Error { public: using Error::Error; };
class OrientationConflict : public Error { public: using Error::Error; };

// Surface evaluation errors.
class EvaluationFailure : public Error { public: using Error::Error; };
class WindowViolation : public Error { public: using Error::Error; };

// Curve / fitting errors.
class TangentDegenerate : public Error { public: using Error::Error; };
class DegenerateGeometry : public Error { public: using Error::Error; };
class EmptySlice : public Error { public: using Error::Error; };
class FitFailure : public Error { public: using Error::Error; };
class InsufficientData : public Error { public: using Error::Error; };

// Configuration / input errors.
class ParseError : public Error { public: using Error::Error; };
class ValidationError : public Error { public: using Error::Error; };

}  // namespace semihelix
