#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "bar/model.hpp"

namespace bar {

/// Hard cap on p for the dense 2^p x 2^p chain.
inline constexpr std::size_t kMaxChainNodes = 20;

/// Dense transition matrix and stationary law of a small BAR chain.
/// State index bit i holds x_i (see state_index).
class ExactChain {
 public:
  const BarModel& model() const noexcept { return model_; }
  std::size_t p() const noexcept { return model_.p(); }
  std::size_t states() const noexcept { return std::size_t{1} << model_.p(); }

  /// Row-stochastic: transition()(x, y) = P(X^{k+1} = y | X^k = x).
  const Eigen::MatrixXd& transition() const noexcept { return transition_; }
  std::span<const double> stationary() const noexcept {
    return {stationary_.data(), static_cast<std::size_t>(stationary_.size())};
  }
  /// next_probability(x, i) = P(X_i^{+1} = 1 | X = x).
  double next_probability(std::size_t x, NodeId i) const noexcept { return next_prob_(x, i); }

  /// max_x |sum_y P(x,y) - 1|
  double row_residual() const;
  /// || pi P - pi ||_1
  double stationarity_residual() const;
  /// Power iteration did not reach its tolerance and a direct solve was used.
  bool used_direct_solve() const noexcept { return used_direct_solve_; }
  std::size_t power_iterations() const noexcept { return power_iterations_; }

 private:
  friend ExactChain build_transition(const BarModel& model);
  explicit ExactChain(BarModel model) : model_(std::move(model)) {}

  BarModel model_;
  Eigen::MatrixXd transition_;
  Eigen::MatrixXd next_prob_;  // states x p
  Eigen::VectorXd stationary_;
  bool used_direct_solve_ = false;
  std::size_t power_iterations_ = 0;
};

/// Throws TooLarge for p > kMaxChainNodes or when the matrix cannot be allocated.
ExactChain build_transition(const BarModel& model);

/// d(n) = max_{x0} || P^n(x0, .) - pi ||_TV
double tv_to_stationarity(const ExactChain& chain, std::size_t n);
/// d(0), ..., d(n_max)
std::vector<double> tv_curve(const ExactChain& chain, std::size_t n_max);
/// min{n : d(n) <= theta}; throws InvalidParameter if not reached by max_steps.
std::size_t exact_mixing_time(const ExactChain& chain, double theta, std::size_t max_steps = 100000);

/// nu_{m|l} = P(X_m^{+1}=1 | X_l=1) - P(X_m^{+1}=1 | X_l=0) under pi.
double exact_nu(const ExactChain& chain, NodeId m, NodeId l);
/// p x p matrix with entry (m, l) = nu_{m|l}.
Eigen::MatrixXd exact_nu_matrix(const ExactChain& chain);

/// P(X_i^{+1} = 1 | X_subset = x_subset) under pi. An empty subset gives the
/// stationary marginal of X_i^{+1}. Throws DegenerateConditioning if the
/// conditioning event has zero probability.
double exact_conditional(const ExactChain& chain, NodeId i, std::span<const NodeId> subset,
                         std::span<const Bit> x_subset);

/// P(X_subset = x_subset) under pi.
double subset_probability(const ExactChain& chain, std::span<const NodeId> subset,
                          std::span<const Bit> x_subset);
/// P(X_i^{+1} = next, X_subset = x_subset) under pi.
double joint_with_next(const ExactChain& chain, NodeId i, Bit next, std::span<const NodeId> subset,
                       std::span<const Bit> x_subset);
/// P(X_j = 1 | X_l = v) under pi.
double conditional_bit_mean(const ExactChain& chain, NodeId j, NodeId l, Bit v);

/// P(X_i = 1) under the exact stationary vector.
std::vector<double> exact_marginals(const ExactChain& chain);

/// Stationary marginals from the fixed point p = A-hat p + A f-bar + rho_w b,
/// solved directly. Throws SingularSystem if I - A-hat is singular.
std::vector<double> stationary_marginals(const BarModel& model);

/// A-bar with sign-inverting entries negated.
Eigen::MatrixXd signed_weight_matrix(const BarModel& model);
/// A-bar (nonnegative weights).
Eigen::MatrixXd weight_matrix(const BarModel& model);

/// Upper estimate of the spectral radius: min over k = 1, 2, 4, ... of
/// ||M^k||_inf^{1/k}, which converges to rho(M) from above.
double spectral_radius_estimate(const Eigen::MatrixXd& m, int squarings = 12);

struct IdentifiabilityMargin {
  std::vector<double> chi;       // chi_m per node
  std::vector<bool> sign_ok;     // nu agrees with the edge signs at node m
  bool identifiable = false;     // all chi_m > 0 and all sign flags hold
  double min_chi() const;
};

/// chi_m = min_{l in S(m)} |nu_{m|l}| - max_{l' not in S(m)} |nu_{m|l'}|.
IdentifiabilityMargin identifiability_margin(const ExactChain& chain, const GraphTruth& truth);

/// Same margin computed from an arbitrary nu matrix (e.g. a long-run estimate).
IdentifiabilityMargin margin_from_nu(const Eigen::MatrixXd& nu, const GraphTruth& truth);

void write_stationary_csv(const ExactChain& chain, std::ostream& out);
void write_tv_curve_csv(std::span<const double> curve, std::ostream& out);

}  // namespace bar
