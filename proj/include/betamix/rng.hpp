#pragma once

#include <cstdint>

namespace betamix {

// Keyed splitmix64 stream. Each (seed, key...) tuple opens an independent
// deterministic substream, so parallel generation over sites stays
// bit-identical for any thread count: every site draws from its own stream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t k1 = 0, std::uint64_t k2 = 0,
                     std::uint64_t k3 = 0);

  std::uint64_t next_u64();
  double next_unit();               // uniform on (0,1)
  std::uint64_t next_below(std::uint64_t bound);  // uniform on [0, bound)
  double next_normal();             // standard normal (Box-Muller)
  double next_gamma(double shape);  // Marsaglia-Tsang, any shape > 0
  double next_beta(double alpha, double delta);

 private:
  std::uint64_t state_;
};

}  // namespace betamix
