#pragma once

#include <cstdint>
#include <random>

#include "sgldv/types.hpp"

namespace sgldv {

// Random stream keyed by (seed, stream id). Streams with distinct keys are
// independent, so results do not depend on which thread runs which chain.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  double uniform();                    // [0, 1)
  double normal();                     // standard Gaussian
  std::uint64_t below(std::uint64_t n);  // uniform integer in [0, n)
  Vector normal_vector(int d);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace sgldv
