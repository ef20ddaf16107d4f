#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace prompt {

// Philox4x32-10 counter-based generator emitting 64-bit words. The seed is
// the key; the counter's high half holds the stream id, so (seed, stream)
// pairs give independent, platform-independent sequences.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double normal(double mean = 0.0, double sd = 1.0);
  // Shape/rate parameterization, matching gamma_log_pdf.
  double gamma(double shape, double rate);
  int binomial(int trials, double p);
  bool bernoulli(double p);
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t seed() const { return key_; }
  std::uint64_t stream() const { return stream_; }

  // Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> counter,
                                                   std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int cursor_ = 4;  // in 32-bit words; 4 means the buffer is exhausted
};

// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix64(std::uint64_t x);

// Seed of the index-th child of a parent seed (simulation i of a run, or
// component k of a simulation).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

}  // namespace prompt
