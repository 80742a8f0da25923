#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "bar/model.hpp"
#include "bar/rng.hpp"

namespace bar {

enum class TrajectoryKind { Bar, RandomWalk, LazyRandomWalk, BooleanNet };

std::string_view to_string(TrajectoryKind kind) noexcept;
TrajectoryKind trajectory_kind_from_string(std::string_view name);

/// n states of length p, stored row-major.
class Trajectory {
 public:
  Trajectory(std::size_t p, TrajectoryKind kind, std::uint64_t seed, std::uint64_t model_id)
      : p_(p), kind_(kind), seed_(seed), model_id_(model_id) {}

  std::size_t p() const noexcept { return p_; }
  std::size_t n() const noexcept { return p_ == 0 ? 0 : bits_.size() / p_; }
  std::span<const Bit> state(std::size_t k) const noexcept { return {bits_.data() + k * p_, p_}; }
  std::span<const Bit> bits() const noexcept { return bits_; }
  TrajectoryKind kind() const noexcept { return kind_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t model_id() const noexcept { return model_id_; }

  void reserve(std::size_t n) { bits_.reserve(n * p_); }
  void push_back(std::span<const Bit> x);

  /// States first..last-1 as a new trajectory (same metadata).
  Trajectory slice(std::size_t first, std::size_t last) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::size_t p_;
  TrajectoryKind kind_;
  std::uint64_t seed_;
  std::uint64_t model_id_;
  std::vector<Bit> bits_;
};

/// Explicit draws for one synchronous update: u_i ~ Unif[0,1], w_i ~ Ber(rho_w).
struct StepDraws {
  std::span<const double> u;
  std::span<const Bit> w;
};

/// x'_i = 1{u_i <= sum_j a_ij f_i(x_j) + b_i w_i} for every node.
/// Throws ParameterOutOfRange if a Bernoulli parameter leaves [0,1].
StateVector bar_step(const BarModel& model, std::span<const Bit> x, StepDraws draws);
StateVector bar_step(const BarModel& model, std::span<const Bit> x, CounterRng::Step rng);
void bar_step_into(const BarModel& model, std::span<const Bit> x, std::span<Bit> out,
                   CounterRng::Step rng);

/// Grand coupling: both chains consume the same (u, w).
std::pair<StateVector, StateVector> coupled_step(const BarModel& model, std::span<const Bit> x,
                                                 std::span<const Bit> y, CounterRng::Step rng);
std::pair<StateVector, StateVector> coupled_step(const BarModel& model, std::span<const Bit> x,
                                                 std::span<const Bit> y, StepDraws draws);

/// Single-site hypercube walk: hold with probability lazy_prob, otherwise
/// refresh one uniformly chosen coordinate with the BAR rule.
StateVector rw_step(const BarModel& model, std::span<const Bit> x, CounterRng::Step rng,
                    double lazy_prob = 0.0);
std::pair<StateVector, StateVector> coupled_rw_step(const BarModel& model, std::span<const Bit> x,
                                                    std::span<const Bit> y, CounterRng::Step rng,
                                                    double lazy_prob = 0.0);

struct InitSpec {
  enum class Mode { Explicit, BurnIn, ExactStationary };
  Mode mode = Mode::BurnIn;
  StateVector state;    // Explicit only
  double theta = 0.125;  // BurnIn: burn for the mixing bound at this theta

  static InitSpec explicit_state(StateVector x) { return {Mode::Explicit, std::move(x), 0.125}; }
  static InitSpec burn_in(double theta = 0.125) { return {Mode::BurnIn, {}, theta}; }
  static InitSpec stationary() { return {Mode::ExactStationary, {}, 0.125}; }
};

/// Largest p for which exact stationary initialisation is attempted.
inline constexpr std::size_t kMaxExactNodes = 20;

/// Draws n states. `replica` selects an independent stream for the same seed.
/// Stationary starts build the exact chain unless `stationary` is supplied.
Trajectory sample_trajectory(const BarModel& model, std::size_t n, const InitSpec& init,
                             std::uint64_t seed, std::uint64_t replica = 0,
                             TrajectoryKind kind = TrajectoryKind::Bar, double lazy_prob = 0.0,
                             std::span<const double> stationary = {});

/// Index of a state in the exact chain: bit i of the index is x_i.
std::size_t state_index(std::span<const Bit> x) noexcept;
StateVector state_from_index(std::size_t index, std::size_t p);

/// Coalescence times T = min{n >= 0 : X^n = Y^n}. Censored replicas are
/// recorded as max_steps + 1.
struct CouplingTimes {
  std::vector<std::size_t> times;
  std::size_t max_steps = 0;

  bool censored(std::size_t r) const noexcept { return times[r] > max_steps; }
  std::size_t censored_count() const noexcept;
  /// Empirical P(T > n).
  double survival(std::size_t n) const noexcept;
  /// Mean with censored replicas counted at max_steps + 1.
  double mean() const noexcept;
  /// Smallest n with empirical P(T > n) <= theta, or nullopt if censoring hides it.
  std::optional<std::size_t> quantile_time(double theta) const;
};

enum class Walk { Synchronous, RandomWalk };

struct CouplingOptions {
  std::size_t max_steps = 10000;
  std::size_t replicas = 1000;
  std::uint64_t seed = 0;
  Walk walk = Walk::Synchronous;
  double lazy_prob = 0.0;
};

CouplingTimes coupling_time(const BarModel& model, std::span<const Bit> x0,
                            std::span<const Bit> y0, std::size_t max_steps, std::uint64_t seed,
                            std::size_t replicas);
CouplingTimes coupling_time(const BarModel& model, std::span<const Bit> x0,
                            std::span<const Bit> y0, const CouplingOptions& options);

/// Heuristic lower estimate of the worst-case coupling behaviour: the
/// all-zeros/all-ones pair plus `random_pairs` uniform pairs; returns the
/// sample of the pair with the largest mean coalescence time.
struct WorstPairEstimate {
  StateVector x0, y0;
  CouplingTimes times;
  double max_mean = 0.0;
};
WorstPairEstimate worst_pair_coupling(const BarModel& model, const CouplingOptions& options,
                                      std::size_t random_pairs);

/// One header line "# model_hash=<hex> seed=<n> kind=<kind>", a column line
/// x1..xp, then one row of bits per step.
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);
Trajectory read_trajectory_csv(std::istream& in);

}  // namespace bar
