#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bar/model.hpp"

namespace bar {

struct MixingBound {
  long long primary = 0;
  long long loose = 0;
};

/// Coupling bound on t_mix(theta) with r = max row sum (natural logs):
///   primary = ceil(log(theta (1 - r) / p) / log r)
///   loose   = ceil((log p - log(theta (1 - r))) / (1 - r))
MixingBound mixing_bound(std::size_t p, double max_row_sum, double theta);
MixingBound mixing_bound(const BarModel& model, double theta);

/// Which lower bound on the stationary marginals ended up in `beta`.
enum class BetaBranch { RowSumFloor, SignFree, Refined };
const char* to_string(BetaBranch branch) noexcept;

struct BoundsReport {
  double theta = 0.125;
  double rho_w = 0.5;
  double max_row_sum = 0.0;
  double max_col_sum = 0.0;
  std::size_t d = 0;
  double beta = 0.0;        // floor on P(X_i = x_i)
  double beta_basic = 0.0;  // min(rho_w (1 - r), 1 - max_i(rowsum_i + rho_w b_i))
  std::optional<double> beta_refined;  // min_i min(p_i, 1 - p_i) from the fixed-point solve
  BetaBranch beta_branch = BetaBranch::RowSumFloor;
  double beta_tilde = 0.0;  // floor on P(X_i = x_i, X_j = x_j)
  double beta_check = 0.0;  // floor on P(X_m^{+1} = x_m, X_l = x_l)
  double beta_bar = 0.0;    // floor on joints over d nodes
  double c_bar = 0.0;
  long long mixing_bound_primary = 0;
  long long mixing_bound_loose = 0;
};

struct FloorOptions {
  /// Also try the fixed-point marginals and keep the larger beta.
  bool refine = true;
};

/// Throws InvalidParameter if d < max degree or theta is outside (0,1).
BoundsReport stationary_floors(const BarModel& model, std::size_t d, double theta = 0.125,
                               FloorOptions options = {});

std::string to_json(const BoundsReport& report, int indent = 2);

/// Lower bounds on n for the selection / trimming stages, up to the unknown
/// concentration constant C. Returned as doubles holding integral values; the
/// numbers overflow 64-bit integers for realistic inputs.
///   selection: ceil(1 + 1152 log(4 p^2 C / gamma) t_mix / (eps^2 beta_tilde^3))
///   trimming:  ceil(1 + 288 log(2^{d+1} C p binom(p,d) / gamma) t_mix / (eps^2 beta_bar^3))
double sample_complexity_selection(std::size_t p, double gamma, double theta, double eps,
                                   double beta_tilde, double t_mix, double C = 1.0);
double sample_complexity_trimming(std::size_t p, std::size_t d, double gamma, double eps_tilde,
                                  double beta_bar, double t_mix, double C = 1.0);

/// ln binom(n, k) via lgamma.
double log_binomial(std::size_t n, std::size_t k);

/// (1 - eps) / p * sum_i ln binom(p, d_i), before rounding.
double fano_lower_bound_real(std::size_t p, std::span<const std::size_t> degrees, double eps);
/// ceil of fano_lower_bound_real. Exactly 0 when every d_i = p.
long long fano_lower_bound(std::size_t p, std::span<const std::size_t> degrees, double eps);

struct RwAnalysis {
  bool col_substochastic = false;
  std::vector<double> column_sums;
  std::vector<double> contraction;  // (colsum_j + p - 1) / p
  double max_col_sum = 0.0;
  std::optional<long long> bound_rw;
  std::optional<long long> bound_lazy;
  double weight_ceiling = 0.0;  // 1 / (sum_i d_i / p + sqrt(c p log p))
  double c = 1.0;
};

/// Hypercube-walk analysis. Bounds are left empty when some column sum is >= 1.
RwAnalysis rw_analysis(const BarModel& model, double theta, double lazy_prob, double c = 1.0);

/// ceil(p / (1 - maxcol) (log p + log(1/theta)) / (1 - lazy_prob)).
/// Throws NotColumnSubstochastic when maxcol >= 1.
long long rw_mixing_bound(std::size_t p, double max_col_sum, double theta, double lazy_prob = 0.0);

/// Largest uniform weight that keeps a random support column-substochastic
/// with high probability: 1 / (sum_i d_i / p + sqrt(c p log p)).
double column_weight_ceiling(std::size_t p, std::span<const std::size_t> degrees, double c = 1.0);

}  // namespace bar
