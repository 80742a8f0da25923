#include "bar/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

#include "bar/exactchain.hpp"

namespace bar {

namespace {

void require_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw Error(ErrorKind::InvalidParameter, "theta must lie in (0,1)");
}

// ceil that ignores rounding noise just above an integer.
long long tolerant_ceil(double x) { return static_cast<long long>(std::ceil(x - 1e-9)); }

}  // namespace

MixingBound mixing_bound(std::size_t p, double r, double theta) {
  require_theta(theta);
  if (p == 0) throw Error(ErrorKind::InvalidParameter, "p must be >= 1");
  if (!(r >= 0.0 && r < 1.0)) throw Error(ErrorKind::InvalidParameter, "max row sum must lie in [0,1)");
  const double lp = std::log(static_cast<double>(p));
  const double floor_term = std::log(theta * (1.0 - r));
  MixingBound out;
  // r = 0 means the next state ignores the current one: one step mixes.
  out.primary = r == 0.0 ? 1 : static_cast<long long>(std::ceil((floor_term - lp) / std::log(r)));
  out.loose = static_cast<long long>(std::ceil((lp - floor_term) / (1.0 - r)));
  out.primary = std::max<long long>(out.primary, 0);
  out.loose = std::max(out.loose, out.primary);
  return out;
}

MixingBound mixing_bound(const BarModel& model, double theta) {
  return mixing_bound(model.p(), model.max_row_sum(), theta);
}

const char* to_string(BetaBranch branch) noexcept {
  switch (branch) {
    case BetaBranch::RowSumFloor: return "row_sum_floor";
    case BetaBranch::SignFree: return "sign_free";
    case BetaBranch::Refined: return "refined";
  }
  return "?";
}

BoundsReport stationary_floors(const BarModel& model, std::size_t d, double theta, FloorOptions options) {
  require_theta(theta);
  if (d < model.max_degree())
    throw Error(ErrorKind::InvalidParameter, "d must be at least the largest in-degree");

  BoundsReport rep;
  rep.theta = theta;
  rep.rho_w = model.rho_w();
  rep.d = d;
  rep.max_row_sum = model.max_row_sum();
  const auto cols = model.column_sums();
  rep.max_col_sum = cols.empty() ? 0.0 : *std::max_element(cols.begin(), cols.end());

  const double r = rep.max_row_sum;
  const double rho = model.rho_w();
  double max_bias = 0.0;  // max_i (rowsum_i + rho_w b_i)
  for (NodeId i = 0; i < model.p(); ++i) max_bias = std::max(max_bias, model.row_sum(i) + rho * model.b(i));

  rep.beta_basic = std::min(rho * (1.0 - r), 1.0 - max_bias);
  rep.beta = rep.beta_basic;
  rep.beta_branch = BetaBranch::RowSumFloor;
  if (model.sign_free()) {
    const double v = std::min(rho, 1.0 - rho);
    if (v > rep.beta) {
      rep.beta = v;
      rep.beta_branch = BetaBranch::SignFree;
    }
  }
  if (options.refine) {
    const auto marg = stationary_marginals(model);
    double v = 1.0;
    for (double pi : marg) v = std::min({v, pi, 1.0 - pi});
    rep.beta_refined = v;
    if (v > rep.beta) {
      rep.beta = v;
      rep.beta_branch = BetaBranch::Refined;
    }
  }

  const double one_step = std::min((1.0 - r) * rho, 1.0 - max_bias);
  rep.beta_tilde = rep.beta * (1.0 - r) * rho;
  rep.beta_check = rep.beta * one_step;
  rep.c_bar = 1.0 / one_step;
  rep.beta_bar = std::pow(one_step, static_cast<double>(d)) * (1.0 - r) * rho;

  const auto mb = mixing_bound(model, theta);
  rep.mixing_bound_primary = mb.primary;
  rep.mixing_bound_loose = mb.loose;
  return rep;
}

std::string to_json(const BoundsReport& r, int indent) {
  nlohmann::ordered_json j;
  j["theta"] = r.theta;
  j["rho_w"] = r.rho_w;
  j["max_row_sum"] = r.max_row_sum;
  j["max_col_sum"] = r.max_col_sum;
  j["d"] = r.d;
  j["beta"] = r.beta;
  j["beta_branch"] = to_string(r.beta_branch);
  j["beta_basic"] = r.beta_basic;
  j["beta_refined"] = r.beta_refined ? nlohmann::ordered_json(*r.beta_refined) : nlohmann::ordered_json();
  j["beta_tilde"] = r.beta_tilde;
  j["beta_check"] = r.beta_check;
  j["beta_bar"] = r.beta_bar;
  j["c_bar"] = r.c_bar;
  j["mixing_bound_primary"] = r.mixing_bound_primary;
  j["mixing_bound_loose"] = r.mixing_bound_loose;
  return j.dump(indent);
}

double sample_complexity_selection(std::size_t p, double gamma, double theta, double eps,
                                   double beta_tilde, double t_mix, double C) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorKind::InvalidParameter, "gamma must lie in (0,1)");
  require_theta(theta);
  if (theta > 0.125) throw Error(ErrorKind::InvalidParameter, "theta must be at most 1/8");
  if (!(eps > 0.0) || !(beta_tilde > 0.0) || !(C > 0.0) || !(t_mix > 0.0) || p == 0)
    throw Error(ErrorKind::InvalidParameter, "eps, beta_tilde, C, t_mix and p must be positive");
  const double pp = static_cast<double>(p);
  const double v = 1.0 + 1152.0 * std::log(4.0 * pp * pp * C / gamma) * t_mix /
                             (eps * eps * beta_tilde * beta_tilde * beta_tilde);
  return std::ceil(v);
}

double sample_complexity_trimming(std::size_t p, std::size_t d, double gamma, double eps_tilde,
                                  double beta_bar, double t_mix, double C) {
  if (d == 0) throw Error(ErrorKind::InvalidParameter, "d must be >= 1");
  if (d > p) throw Error(ErrorKind::InvalidParameter, "d must not exceed p");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorKind::InvalidParameter, "gamma must lie in (0,1)");
  if (!(eps_tilde > 0.0) || !(beta_bar > 0.0) || !(C > 0.0) || !(t_mix > 0.0))
    throw Error(ErrorKind::InvalidParameter, "eps, beta_bar, C and t_mix must be positive");
  const double log_term = static_cast<double>(d + 1) * std::log(2.0) + std::log(C) +
                          std::log(static_cast<double>(p)) + log_binomial(p, d) - std::log(gamma);
  const double v = 1.0 + 288.0 * log_term * t_mix / (eps_tilde * eps_tilde * beta_bar * beta_bar * beta_bar);
  return std::ceil(v);
}

double log_binomial(std::size_t n, std::size_t k) {
  if (k > n) throw Error(ErrorKind::InvalidParameter, "binomial with k > n");
  if (k == 0 || k == n) return 0.0;
  const auto dn = static_cast<double>(n);
  const auto dk = static_cast<double>(k);
  return std::lgamma(dn + 1.0) - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0);
}

double fano_lower_bound_real(std::size_t p, std::span<const std::size_t> degrees, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::InvalidParameter, "eps must lie in (0,1)");
  if (p == 0 || degrees.size() != p) throw Error(ErrorKind::InvalidParameter, "need one degree per node");
  double total = 0.0;
  for (std::size_t di : degrees) {
    if (di < 1 || di > p) throw Error(ErrorKind::InvalidParameter, "degrees must lie in [1, p]");
    total += log_binomial(p, di);
  }
  return (1.0 - eps) / static_cast<double>(p) * total;
}

long long fano_lower_bound(std::size_t p, std::span<const std::size_t> degrees, double eps) {
  return std::max<long long>(0, tolerant_ceil(fano_lower_bound_real(p, degrees, eps)));
}

long long rw_mixing_bound(std::size_t p, double max_col_sum, double theta, double lazy_prob) {
  require_theta(theta);
  if (!(lazy_prob >= 0.0 && lazy_prob < 1.0))
    throw Error(ErrorKind::InvalidParameter, "lazy_prob must lie in [0,1)");
  if (!(max_col_sum < 1.0))
    throw Error(ErrorKind::NotColumnSubstochastic, "max column sum " + std::to_string(max_col_sum) + " >= 1");
  const double pp = static_cast<double>(p);
  const double v = pp / (1.0 - max_col_sum) * (std::log(pp) + std::log(1.0 / theta)) / (1.0 - lazy_prob);
  return static_cast<long long>(std::ceil(v));
}

double column_weight_ceiling(std::size_t p, std::span<const std::size_t> degrees, double c) {
  if (p < 2) throw Error(ErrorKind::InvalidParameter, "p must be >= 2");
  const double mean_degree =
      static_cast<double>(std::accumulate(degrees.begin(), degrees.end(), std::size_t{0})) / static_cast<double>(p);
  const double pp = static_cast<double>(p);
  return 1.0 / (mean_degree + std::sqrt(c * pp * std::log(pp)));
}

RwAnalysis rw_analysis(const BarModel& model, double theta, double lazy_prob, double c) {
  require_theta(theta);
  RwAnalysis out;
  out.c = c;
  out.column_sums = model.column_sums();
  const double pp = static_cast<double>(model.p());
  out.contraction.reserve(model.p());
  for (double s : out.column_sums) out.contraction.push_back((s + pp - 1.0) / pp);
  out.max_col_sum = *std::max_element(out.column_sums.begin(), out.column_sums.end());
  out.col_substochastic = out.max_col_sum < 1.0;
  if (out.col_substochastic) {
    out.bound_rw = rw_mixing_bound(model.p(), out.max_col_sum, theta, 0.0);
    out.bound_lazy = rw_mixing_bound(model.p(), out.max_col_sum, theta, lazy_prob);
  }
  if (model.p() >= 2) {
    std::vector<std::size_t> degrees(model.p());
    for (NodeId i = 0; i < model.p(); ++i) degrees[i] = model.parents(i).size();
    out.weight_ceiling = column_weight_ceiling(model.p(), degrees, c);
  }
  return out;
}

}  // namespace bar
