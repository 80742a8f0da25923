#include "bar/exactchain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <new>
#include <ostream>

#include "bar/simulate.hpp"

namespace bar {

namespace {

constexpr double kPowerTolerance = 1e-12;
constexpr std::size_t kPowerIterationCap = 1'000'000;

std::size_t subset_mask(std::span<const NodeId> subset) {
  std::size_t mask = 0;
  for (NodeId l : subset) mask |= std::size_t{1} << l;
  return mask;
}

std::size_t subset_pattern(std::span<const NodeId> subset, std::span<const Bit> x_subset) {
  std::size_t pattern = 0;
  for (std::size_t k = 0; k < subset.size(); ++k)
    if (x_subset[k]) pattern |= std::size_t{1} << subset[k];
  return pattern;
}

void check_subset(const ExactChain& chain, std::span<const NodeId> subset,
                  std::span<const Bit> x_subset) {
  if (subset.size() != x_subset.size())
    throw Error(ErrorKind::InvalidParameter, "subset and values differ in length");
  for (NodeId l : subset)
    if (l >= chain.p()) throw Error(ErrorKind::InvalidParameter, "subset node out of range");
}

double tv_row_max(const Eigen::MatrixXd& m, const Eigen::VectorXd& pi) {
  double worst = 0.0;
  for (Eigen::Index x = 0; x < m.rows(); ++x)
    worst = std::max(worst, 0.5 * (m.row(x).transpose() - pi).cwiseAbs().sum());
  return worst;
}

}  // namespace

double ExactChain::row_residual() const {
  return (transition_.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

double ExactChain::stationarity_residual() const {
  return (transition_.transpose() * stationary_ - stationary_).cwiseAbs().sum();
}

ExactChain build_transition(const BarModel& model) {
  const std::size_t p = model.p();
  if (p > kMaxChainNodes) {
    throw Error(ErrorKind::TooLarge,
                "exact chain needs p <= " + std::to_string(kMaxChainNodes) + ", got " + std::to_string(p));
  }
  const std::size_t n = std::size_t{1} << p;

  ExactChain chain(model);
  try {
    chain.transition_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    chain.next_prob_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  } catch (const std::bad_alloc&) {
    throw Error(ErrorKind::TooLarge, "cannot allocate the 2^p x 2^p transition matrix");
  }

  std::vector<double> row(n);
  for (std::size_t x = 0; x < n; ++x) {
    const StateVector state = state_from_index(x, p);
    // Expand the product of independent Bernoulli masses one coordinate at a time.
    row[0] = 1.0;
    std::size_t filled = 1;
    for (NodeId i = 0; i < p; ++i) {
      const double q = model.expected_parameter(i, state);
      chain.next_prob_(static_cast<Eigen::Index>(x), i) = q;
      for (std::size_t y = 0; y < filled; ++y) {
        row[y + filled] = row[y] * q;
        row[y] *= 1.0 - q;
      }
      filled *= 2;
    }
    for (std::size_t y = 0; y < n; ++y)
      chain.transition_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = row[y];
  }

  // Stationary vector by power iteration on pi <- pi P.
  const Eigen::MatrixXd pt = chain.transition_.transpose();
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
  bool converged = false;
  std::size_t it = 0;
  for (; it < kPowerIterationCap; ++it) {
    Eigen::VectorXd next = pt * pi;
    next /= next.sum();
    const double residual = (next - pi).cwiseAbs().sum();
    pi.swap(next);
    if (residual < kPowerTolerance) {
      converged = true;
      ++it;
      break;
    }
  }
  chain.power_iterations_ = it;
  if (!converged) {
    // Solve (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    Eigen::MatrixXd system = pt - Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    system.row(static_cast<Eigen::Index>(n) - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    rhs(static_cast<Eigen::Index>(n) - 1) = 1.0;
    pi = system.fullPivLu().solve(rhs);
    chain.used_direct_solve_ = true;
  }
  chain.stationary_ = std::move(pi);
  return chain;
}

double tv_to_stationarity(const ExactChain& chain, std::size_t n) {
  const auto& pmat = chain.transition();
  Eigen::Map<const Eigen::VectorXd> pi(chain.stationary().data(), static_cast<Eigen::Index>(chain.states()));
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(pmat.rows(), pmat.cols());
  Eigen::MatrixXd power = pmat;
  for (std::size_t k = n; k > 0; k >>= 1) {
    if (k & 1) result = result * power;
    if (k > 1) power = power * power;
  }
  return tv_row_max(result, pi);
}

std::vector<double> tv_curve(const ExactChain& chain, std::size_t n_max) {
  const auto& pmat = chain.transition();
  Eigen::Map<const Eigen::VectorXd> pi(chain.stationary().data(), static_cast<Eigen::Index>(chain.states()));
  std::vector<double> curve;
  curve.reserve(n_max + 1);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(pmat.rows(), pmat.cols());
  for (std::size_t k = 0; k <= n_max; ++k) {
    if (k > 0) m = m * pmat;
    curve.push_back(tv_row_max(m, pi));
  }
  return curve;
}

std::size_t exact_mixing_time(const ExactChain& chain, double theta, std::size_t max_steps) {
  if (!(theta > 0.0 && theta < 1.0)) throw Error(ErrorKind::InvalidParameter, "theta must lie in (0,1)");
  const auto& pmat = chain.transition();
  Eigen::Map<const Eigen::VectorXd> pi(chain.stationary().data(), static_cast<Eigen::Index>(chain.states()));
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(pmat.rows(), pmat.cols());
  for (std::size_t k = 0; k <= max_steps; ++k) {
    if (k > 0) m = m * pmat;
    if (tv_row_max(m, pi) <= theta) return k;
  }
  throw Error(ErrorKind::InvalidParameter, "d(n) did not reach theta within max_steps");
}

double subset_probability(const ExactChain& chain, std::span<const NodeId> subset,
                          std::span<const Bit> x_subset) {
  check_subset(chain, subset, x_subset);
  const std::size_t mask = subset_mask(subset);
  const std::size_t pattern = subset_pattern(subset, x_subset);
  const auto pi = chain.stationary();
  double total = 0.0;
  for (std::size_t x = 0; x < chain.states(); ++x)
    if ((x & mask) == pattern) total += pi[x];
  return total;
}

double joint_with_next(const ExactChain& chain, NodeId i, Bit next, std::span<const NodeId> subset,
                       std::span<const Bit> x_subset) {
  check_subset(chain, subset, x_subset);
  const std::size_t mask = subset_mask(subset);
  const std::size_t pattern = subset_pattern(subset, x_subset);
  const auto pi = chain.stationary();
  double total = 0.0;
  for (std::size_t x = 0; x < chain.states(); ++x) {
    if ((x & mask) != pattern) continue;
    const double q = chain.next_probability(x, i);
    total += pi[x] * (next ? q : 1.0 - q);
  }
  return total;
}

double exact_conditional(const ExactChain& chain, NodeId i, std::span<const NodeId> subset,
                         std::span<const Bit> x_subset) {
  if (i >= chain.p()) throw Error(ErrorKind::InvalidParameter, "node out of range");
  const double denom = subset_probability(chain, subset, x_subset);
  if (!(denom > 0.0)) throw Error(ErrorKind::DegenerateConditioning, "conditioning event has probability 0");
  return joint_with_next(chain, i, 1, subset, x_subset) / denom;
}

double exact_nu(const ExactChain& chain, NodeId m, NodeId l) {
  if (m >= chain.p() || l >= chain.p()) throw Error(ErrorKind::InvalidParameter, "node out of range");
  const NodeId subset[] = {l};
  const Bit one[] = {1};
  const Bit zero[] = {0};
  return exact_conditional(chain, m, subset, one) - exact_conditional(chain, m, subset, zero);
}

Eigen::MatrixXd exact_nu_matrix(const ExactChain& chain) {
  const auto p = static_cast<Eigen::Index>(chain.p());
  const auto pi = chain.stationary();
  // Accumulate sum_x pi(x) q_m(x) split by x_l in one pass over the states.
  Eigen::MatrixXd mass1 = Eigen::MatrixXd::Zero(p, p);  // (m, l): x_l = 1
  Eigen::MatrixXd mass0 = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd ones = Eigen::VectorXd::Zero(p);
  double total = 0.0;
  for (std::size_t x = 0; x < chain.states(); ++x) {
    total += pi[x];
    for (Eigen::Index l = 0; l < p; ++l)
      if ((x >> l) & 1U) ones(l) += pi[x];
    for (Eigen::Index m = 0; m < p; ++m) {
      const double w = pi[x] * chain.next_probability(x, static_cast<NodeId>(m));
      for (Eigen::Index l = 0; l < p; ++l) ((x >> l) & 1U ? mass1 : mass0)(m, l) += w;
    }
  }
  Eigen::MatrixXd nu(p, p);
  for (Eigen::Index m = 0; m < p; ++m) {
    for (Eigen::Index l = 0; l < p; ++l) {
      const double p1 = ones(l);
      const double p0 = total - ones(l);
      if (!(p1 > 0.0 && p0 > 0.0))
        throw Error(ErrorKind::DegenerateConditioning, "a node is constant under pi");
      nu(m, l) = mass1(m, l) / p1 - mass0(m, l) / p0;
    }
  }
  return nu;
}

double conditional_bit_mean(const ExactChain& chain, NodeId j, NodeId l, Bit v) {
  const NodeId cond[] = {l};
  const Bit val[] = {v};
  const double denom = subset_probability(chain, cond, val);
  if (!(denom > 0.0)) throw Error(ErrorKind::DegenerateConditioning, "conditioning event has probability 0");
  if (j == l) return v ? 1.0 : 0.0;
  const NodeId both[] = {l, j};
  const Bit vals[] = {v, 1};
  return subset_probability(chain, both, vals) / denom;
}

std::vector<double> exact_marginals(const ExactChain& chain) {
  std::vector<double> out(chain.p(), 0.0);
  const auto pi = chain.stationary();
  for (std::size_t x = 0; x < chain.states(); ++x)
    for (NodeId i = 0; i < chain.p(); ++i)
      if ((x >> i) & 1U) out[i] += pi[x];
  return out;
}

Eigen::MatrixXd weight_matrix(const BarModel& model) {
  const auto p = static_cast<Eigen::Index>(model.p());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (NodeId i = 0; i < model.p(); ++i)
    for (const auto& e : model.parents(i)) a(i, e.source) = e.weight;
  return a;
}

Eigen::MatrixXd signed_weight_matrix(const BarModel& model) {
  const auto p = static_cast<Eigen::Index>(model.p());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (NodeId i = 0; i < model.p(); ++i)
    for (const auto& e : model.parents(i))
      a(i, e.source) = e.sign == Sign::Positive ? e.weight : -e.weight;
  return a;
}

double spectral_radius_estimate(const Eigen::MatrixXd& m, int squarings) {
  auto inf_norm = [](const Eigen::MatrixXd& x) { return x.cwiseAbs().rowwise().sum().maxCoeff(); };
  Eigen::MatrixXd power = m;
  double best = inf_norm(power);
  double exponent = 1.0;
  // Rescale each square to keep the entries representable; track the log scale.
  double log_scale = 0.0;
  for (int k = 0; k < squarings; ++k) {
    power = power * power;
    log_scale *= 2.0;
    exponent *= 2.0;
    const double norm = inf_norm(power);
    if (norm == 0.0) return 0.0;
    best = std::min(best, std::exp((std::log(norm) + log_scale) / exponent));
    power /= norm;
    log_scale += std::log(norm);
  }
  return best;
}

std::vector<double> stationary_marginals(const BarModel& model) {
  const auto p = static_cast<Eigen::Index>(model.p());
  const Eigen::MatrixXd a_hat = signed_weight_matrix(model);
  Eigen::VectorXd rhs(p);
  for (NodeId i = 0; i < model.p(); ++i) {
    double inverted = 0.0;
    for (const auto& e : model.parents(i))
      if (e.sign == Sign::Negative) inverted += e.weight;
    rhs(i) = inverted + model.rho_w() * model.b(i);
  }
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(p, p) - a_hat;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible() || !(spectral_radius_estimate(a_hat) < 1.0))
    throw Error(ErrorKind::SingularSystem, "I - A_hat is singular; the model violates the weight constraints");
  const Eigen::VectorXd sol = lu.solve(rhs);
  return {sol.data(), sol.data() + sol.size()};
}

double IdentifiabilityMargin::min_chi() const {
  return chi.empty() ? 0.0 : *std::min_element(chi.begin(), chi.end());
}

IdentifiabilityMargin margin_from_nu(const Eigen::MatrixXd& nu, const GraphTruth& truth) {
  const std::size_t p = truth.p();
  IdentifiabilityMargin out;
  out.chi.resize(p);
  out.sign_ok.resize(p);
  bool all = true;
  for (NodeId m = 0; m < p; ++m) {
    std::vector<bool> is_parent(p, false);
    for (NodeId l : truth.parents[m]) is_parent[l] = true;
    double weakest = std::numeric_limits<double>::infinity();
    double strongest_other = 0.0;
    for (NodeId l = 0; l < p; ++l) {
      const double mag = std::abs(nu(m, l));
      if (is_parent[l]) weakest = std::min(weakest, mag);
      else strongest_other = std::max(strongest_other, mag);
    }
    if (truth.parents[m].empty()) weakest = 0.0;
    out.chi[m] = weakest - strongest_other;
    bool ok = true;
    for (NodeId l : truth.positive[m]) ok = ok && nu(m, l) > 0.0;
    for (NodeId l : truth.negative[m]) ok = ok && nu(m, l) < 0.0;
    out.sign_ok[m] = ok;
    all = all && ok && out.chi[m] > 0.0;
  }
  out.identifiable = all;
  return out;
}

IdentifiabilityMargin identifiability_margin(const ExactChain& chain, const GraphTruth& truth) {
  if (truth.p() != chain.p()) throw Error(ErrorKind::InvalidParameter, "truth and chain differ in p");
  return margin_from_nu(exact_nu_matrix(chain), truth);
}

void write_stationary_csv(const ExactChain& chain, std::ostream& out) {
  out << "state";
  for (NodeId i = 0; i < chain.p(); ++i) out << ",x" << (i + 1);
  out << ",pi\n";
  const auto pi = chain.stationary();
  const auto old = out.precision(17);
  for (std::size_t x = 0; x < chain.states(); ++x) {
    out << x;
    for (NodeId i = 0; i < chain.p(); ++i) out << ',' << ((x >> i) & 1U);
    out << ',' << pi[x] << '\n';
  }
  out.precision(old);
}

void write_tv_curve_csv(std::span<const double> curve, std::ostream& out) {
  out << "n,d_n\n";
  const auto old = out.precision(17);
  for (std::size_t k = 0; k < curve.size(); ++k) out << k << ',' << curve[k] << '\n';
  out.precision(old);
}

}  // namespace bar
