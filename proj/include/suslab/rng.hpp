#ifndef SUSLAB_RNG_HPP_
#define SUSLAB_RNG_HPP_

#include <cstdint>

namespace suslab {

// Counter-based splittable generator. Draw i of stream s under master seed m
// is a pure function of (m, s, i), so any part of a run can be replayed or
// parallelized without sharing generator state. Streams derived via split()
// from distinct ids never collide in practice (64-bit avalanche mixing).
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0);

  uint64_t next_u64();
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  int uniform_int(int lo, int hi);        // inclusive bounds
  double gaussian();                      // standard normal, 2 draws per call

  // Independent child stream; does not advance this generator.
  Rng split(uint64_t stream_id) const;

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }
  uint64_t cursor() const { return counter_; }

 private:
  uint64_t seed_;
  uint64_t stream_;
  uint64_t base_;
  uint64_t counter_ = 0;
};

}  // namespace suslab

#endif  // SUSLAB_RNG_HPP_
