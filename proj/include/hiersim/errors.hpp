#pragma once

#include <stdexcept>

namespace hiersim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// matkit
struct SingularSystem : Error { using Error::Error; };
struct NotSymmetric : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };

// synthesis
struct NotStabilizable : Error { using Error::Error; };
struct NotHurwitz : Error { using Error::Error; };
struct DecayTooLarge : Error { using Error::Error; };
struct NoExactEmbedding : Error { using Error::Error; };
struct InvalidSpec : Error { using Error::Error; };

// simcore
struct NonFinite : Error { using Error::Error; };
struct GridTooCoarse : Error { using Error::Error; };

// planner
struct SamplingExhausted : Error { using Error::Error; };
struct NoPath : Error { using Error::Error; };
struct DegeneratePath : Error { using Error::Error; };

}  // namespace hiersim
