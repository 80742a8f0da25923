#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bar/error.hpp"

namespace bar {

/// Node indices are 0-based in the API; files and the CLI use 1-based ids.
using NodeId = std::uint32_t;

/// One coordinate of the chain's state, 0 or 1.
using Bit = std::uint8_t;
using StateVector = std::vector<Bit>;

enum class Sign : std::uint8_t { Positive, Negative };

constexpr char sign_char(Sign s) noexcept { return s == Sign::Positive ? '+' : '-'; }

/// Edge source -> target with weight a_{target,source}. A negative edge enters
/// the update of `target` through 1 - x_source.
struct SignedParent {
  NodeId target = 0;
  NodeId source = 0;
  double weight = 0.0;
  Sign sign = Sign::Positive;

  friend bool operator==(const SignedParent&, const SignedParent&) = default;
};

/// Unvalidated model description, as read from a file or assembled by hand.
struct ModelParams {
  std::size_t p = 0;
  std::vector<std::vector<SignedParent>> rows;  // rows[i] = parents of node i
  std::vector<double> b;                        // diagonal noise gains
  double rho_w = 0.5;
  double a_min = 0.1;
  double b_min = 0.1;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// First violated constraint found by `validate`.
struct Violation {
  ErrorKind kind;
  std::optional<NodeId> node;
  std::string detail;
};

/// Additive slack accepted on the row-sum identity before a model is rejected.
inline constexpr double kRowSumTolerance = 1e-12;

std::optional<Violation> validate(const ModelParams& params);

/// True parental structure of a model (or of a boolean network).
struct GraphTruth {
  std::vector<std::vector<NodeId>> parents;   // S(i), ascending
  std::vector<std::vector<NodeId>> positive;  // S+(i), ascending
  std::vector<std::vector<NodeId>> negative;  // S-(i), ascending
  std::vector<std::size_t> degree;            // d_i
  std::size_t d = 0;                          // max_i d_i

  std::size_t p() const noexcept { return parents.size(); }
  std::size_t edge_count() const noexcept;
};

/// Validated, immutable BAR model. Row sums satisfy sum_j a_ij + b_i = 1
/// up to rounding of the final rescale.
class BarModel {
 public:
  /// Validates and rescales each weight row so that it sums exactly to
  /// 1 - b_i. Throws `Error` carrying the first violation.
  static BarModel create(ModelParams params);

  std::size_t p() const noexcept { return params_.p; }
  std::span<const SignedParent> parents(NodeId i) const noexcept { return params_.rows[i]; }
  double b(NodeId i) const noexcept { return params_.b[i]; }
  double rho_w() const noexcept { return params_.rho_w; }
  double a_min() const noexcept { return params_.a_min; }
  double b_min() const noexcept { return params_.b_min; }
  const ModelParams& params() const noexcept { return params_; }

  /// sum_j a_ij, the i-th row sum of A-bar.
  double row_sum(NodeId i) const noexcept { return row_sums_[i]; }
  double max_row_sum() const noexcept;
  std::vector<double> column_sums() const;
  std::size_t max_degree() const noexcept;
  /// No edge is sign-inverting.
  bool sign_free() const noexcept;

  /// sum_j a_ij f_i(x_j): the deterministic part of node i's Bernoulli
  /// parameter at state x.
  double drive(NodeId i, std::span<const Bit> x) const noexcept {
    double s = 0.0;
    for (const auto& e : params_.rows[i]) {
      const double v = x[e.source];
      s += e.weight * (e.sign == Sign::Positive ? v : 1.0 - v);
    }
    return s;
  }

  /// Next-step probability P(X_i^{+1} = 1 | X = x) after averaging out W.
  double expected_parameter(NodeId i, std::span<const Bit> x) const noexcept {
    return drive(i, x) + params_.b[i] * params_.rho_w;
  }

  GraphTruth truth() const;

  /// Stable 64-bit fingerprint of the canonical JSON form.
  std::uint64_t hash() const;

 private:
  explicit BarModel(ModelParams params);
  ModelParams params_;
  std::vector<double> row_sums_;
};

/// Largest degree admitted by the floors: max{d : a_min d + b_min <= 1}.
/// Throws Infeasible if a_min + b_min > 1.
std::size_t d_star(double a_min, double b_min);

struct RandomModelSpec {
  std::size_t p = 0;
  std::vector<std::size_t> degrees;  // d_i per node
  double a_min = 0.1;
  double b_min = 0.1;
  double b_max = 0.2;
  double rho_w = 0.5;
  double sign_prob = 0.5;  // probability that a parent is positive
};

struct GeneratedModel {
  BarModel model;
  GraphTruth truth;
};

/// Uniform d_i-subset supports, b_i uniform on its feasible interval, and
/// weights a_min + (1 - b_i - d_i a_min) * w with w uniform on the simplex.
GeneratedModel random_model(const RandomModelSpec& spec, std::uint64_t seed);

std::string model_to_json(const BarModel& model, int indent = 2);
ModelParams model_params_from_json(const std::string& text);
BarModel model_from_json(const std::string& text);

}  // namespace bar
