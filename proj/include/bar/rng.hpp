#pragma once

#include <cstdint>

namespace bar {

/// Counter-based generator. A draw is a pure function of
/// (seed, replica, step, node, lane), so replicas and steps can be produced in
/// any order or on any thread and still reproduce bit-for-bit.
class CounterRng {
 public:
  /// Lanes used by the step functions. Distinct lanes give independent draws
  /// for the same (step, node).
  enum Lane : std::uint32_t {
    kUniform = 0,  // U_i of the update rule
    kNoise = 1,    // W_i
    kSite = 2,     // node choice of the hypercube walk
    kLazy = 3,     // hold decision of the lazy walk
    kInit = 4,     // initial-state draws
    kAux = 5,
  };

  class Step {
   public:
    double uniform(std::uint32_t node, std::uint32_t lane) const noexcept;
    std::uint64_t bits(std::uint32_t node, std::uint32_t lane) const noexcept;
    bool bernoulli(std::uint32_t node, std::uint32_t lane, double prob) const noexcept {
      return uniform(node, lane) < prob;
    }

   private:
    friend class CounterRng;
    explicit Step(std::uint64_t key) : key_(key) {}
    std::uint64_t key_;
  };

  explicit CounterRng(std::uint64_t seed, std::uint64_t replica = 0) noexcept;

  Step at(std::uint64_t step) const noexcept;

  /// Generator for an independent sub-stream, e.g. one trial of a sweep.
  CounterRng split(std::uint64_t stream) const noexcept;

  std::uint64_t key() const noexcept { return key_; }

 private:
  struct FromKey {};
  CounterRng(FromKey, std::uint64_t key) noexcept : key_(key) {}
  std::uint64_t key_;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Sequential convenience stream layered on CounterRng, for generators that
/// consume an a-priori unknown number of draws (model and network builders).
class SeqRng {
 public:
  explicit SeqRng(std::uint64_t seed) noexcept : rng_(seed, 0x5eed) {}
  double uniform() noexcept { return rng_.at(counter_++).uniform(0, CounterRng::kAux); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  CounterRng rng_;
  std::uint64_t counter_ = 0;
};

}  // namespace bar
