#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bar/model.hpp"
#include "bar/simulate.hpp"

namespace bar {

/// Marginal and lagged-pair counts over the transition window k = 0..n-2.
class EmpiricalStats {
 public:
  EmpiricalStats() = default;
  EmpiricalStats(std::size_t p, std::size_t n);

  std::size_t p() const noexcept { return p_; }
  /// Trajectory length the counts came from.
  std::size_t n() const noexcept { return n_; }
  /// Number of transitions, n - 1.
  std::uint64_t window() const noexcept { return n_ == 0 ? 0 : n_ - 1; }

  /// #{k : X_l^k = bit}
  std::uint64_t marginal_count(NodeId l, Bit bit) const noexcept {
    return bit ? ones_[l] : window() - ones_[l];
  }
  /// #{k : X_m^{k+1} = 1}
  std::uint64_t next_ones(NodeId m) const noexcept { return next_ones_[m]; }
  /// #{k : X_m^{k+1} = 1, X_l^k = bit}
  std::uint64_t pair_count(NodeId m, NodeId l, Bit bit) const noexcept {
    const auto both = n11_[static_cast<std::size_t>(m) * p_ + l];
    return bit ? both : next_ones_[m] - both;
  }

  /// Counts of a trajectory that continues this one: `other` must start
  /// with the last state seen here, so n = n_a + n_b - 1.
  void merge(const EmpiricalStats& other);

 private:
  friend EmpiricalStats accumulate(const Trajectory& trajectory);
  std::size_t p_ = 0;
  std::size_t n_ = 0;
  std::vector<std::uint64_t> ones_;
  std::vector<std::uint64_t> next_ones_;
  std::vector<std::uint64_t> n11_;  // m * p + l
};

/// Single pass over the trajectory, O(n p^2 / 64) word operations.
/// Throws InvalidParameter if n < 2.
EmpiricalStats accumulate(const Trajectory& trajectory);

/// Counts of X_{S(m)} configurations and of X_m^{+1} = 1 within each, per node.
/// Cell bit k is the value of the k-th smallest node of the candidate set.
struct SubsetCounts {
  std::vector<NodeId> candidates;  // ascending
  std::vector<std::uint64_t> cell;
  std::vector<std::uint64_t> cell_next_ones;

  /// P-hat(X_m^{+1} = 1 | X_S = cell), or nullopt for an unseen cell.
  std::optional<double> conditional(std::size_t c) const noexcept {
    if (cell[c] == 0) return std::nullopt;
    return static_cast<double>(cell_next_ones[c]) / static_cast<double>(cell[c]);
  }
};

struct SubsetStats {
  std::size_t n = 0;
  std::vector<SubsetCounts> nodes;
};

/// Candidate sets must be ascending and hold at most 24 nodes each.
SubsetStats accumulate_subsets(const Trajectory& trajectory,
                               std::span<const std::vector<NodeId>> candidate_sets);

/// nu-hat_{m|l}; nullopt when one of the two conditioning cells is empty.
std::optional<double> nu_hat(const EmpiricalStats& stats, NodeId m, NodeId l);
/// Dense p x p matrix (row m, column l) with empty cells as 0.
std::vector<double> nu_hat_matrix(const EmpiricalStats& stats);

enum class Stage { SelectionOnly, SelectionSigned, Full };
std::string_view to_string(Stage stage) noexcept;

struct GraphEstimate {
  std::size_t p = 0;
  Stage stage = Stage::SelectionOnly;
  std::vector<std::vector<NodeId>> ranked;    // selection order, strongest first
  std::vector<std::vector<double>> scores;    // nu-hat matching `ranked`
  std::vector<std::vector<NodeId>> parents;   // S-hat(m), ascending
  std::vector<std::vector<NodeId>> positive;  // S-hat+(m)
  std::vector<std::vector<NodeId>> negative;  // S-hat-(m)
  std::vector<std::string> warnings;

  std::size_t degree(NodeId m) const noexcept { return parents[m].size(); }
};

/// Keeps the d largest |nu-hat_{m|l}| per node, self-loops included; ties go
/// to the smaller node index. Throws InvalidParameter unless 1 <= d <= p.
GraphEstimate supergraph_select(const EmpiricalStats& stats, std::size_t d);
/// Same ranking applied to a row-major p x p matrix of nu values.
GraphEstimate select_from_nu(std::span<const double> nu, std::size_t p, std::size_t d);

/// Labels each selected parent by the sign of nu-hat. With `degrees`, each
/// S-hat(m) is first cut to its top d_m entries.
GraphEstimate sign_from_selection(const GraphEstimate& selection,
                                  std::optional<std::span<const std::size_t>> degrees = std::nullopt);

/// Keeps the coordinates that are constant over all near-maximal cells
/// (value > v-hat* - 2 tau). Throws AllCellsEmpty if some node saw no cell.
GraphEstimate trim(const SubsetStats& stats, const GraphEstimate& selection, double tau);

enum class ObserverMode { SelectionOnly, KnownDegrees, Full };
std::string_view to_string(ObserverMode mode) noexcept;
ObserverMode observer_mode_from_string(std::string_view name);

struct ObserverConfig {
  ObserverMode mode = ObserverMode::Full;
  std::size_t d = 1;
  double tau = 0.025;
  std::vector<std::size_t> degrees;  // KnownDegrees only
};

/// Whole pipeline on one trajectory.
GraphEstimate observe(const Trajectory& trajectory, const ObserverConfig& config);

struct RecoveryMetrics {
  bool exact_unsigned = false;
  bool exact_signed = false;
  double edge_recall = 0.0;
  double edge_accuracy = 0.0;
};

RecoveryMetrics metrics(const GraphEstimate& estimate, const GraphTruth& truth);

/// {"p", "stage", "nodes": [{"id", "parents": [{"j", "sign"}]}]}, 1-based ids.
std::string estimate_to_json(const GraphEstimate& estimate, int indent = 2);

}  // namespace bar
