#include "suslab/rng.hpp"

#include <cmath>

namespace suslab {

namespace {

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer.
uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

Rng::Rng(uint64_t seed, uint64_t stream)
    : seed_(seed), stream_(stream), base_(mix64(mix64(seed + kGolden) ^ mix64(stream + 0x6a09e667f3bcc909ULL))) {}

uint64_t Rng::next_u64() {
  ++counter_;
  return mix64(base_ + counter_ * kGolden);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

int Rng::uniform_int(int lo, int hi) {
  uint64_t span = static_cast<uint64_t>(static_cast<int64_t>(hi) - static_cast<int64_t>(lo)) + 1;
  // Multiply-shift range reduction; bias is negligible for the tiny ranges used here.
  uint64_t r = static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * span) >> 64);
  return lo + static_cast<int>(r);
}

double Rng::gaussian() {
  // Box-Muller, cosine branch only: fixed two-draw cost keeps replay trivial.
  double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

Rng Rng::split(uint64_t stream_id) const {
  return Rng(seed_, mix64(stream_ ^ mix64(stream_id + kGolden)));
}

}  // namespace suslab
