#include "bar/infer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "json.hpp"

namespace bar {

namespace {

constexpr std::size_t kMaxCandidates = 24;

// Column-major bit matrix: one packed row of `words` words per node.
struct BitColumns {
  std::size_t words = 0;
  std::vector<std::uint64_t> data;

  const std::uint64_t* row(std::size_t i) const noexcept { return data.data() + i * words; }
};

// Packs X_i^k for k = 0..n-1 into bit k of node i's row.
BitColumns pack(const Trajectory& t) {
  BitColumns out;
  const std::size_t n = t.n(), p = t.p();
  out.words = (n + 63) / 64;
  out.data.assign(out.words * p, 0);
  const Bit* bits = t.bits().data();
  for (std::size_t k = 0; k < n; ++k) {
    const Bit* x = bits + k * p;
    const unsigned shift = static_cast<unsigned>(k & 63);
    std::uint64_t* col = out.data.data() + (k >> 6);
    for (std::size_t i = 0; i < p; ++i) col[i * out.words] |= std::uint64_t{x[i]} << shift;
  }
  return out;
}

// Rows of X^{k+1} for k = 0..len-1 and of X^k restricted to the same window.
void split_window(const BitColumns& all, std::size_t p, std::size_t len, BitColumns& cur, BitColumns& next) {
  cur.words = next.words = (len + 63) / 64;
  cur.data.assign(cur.words * p, 0);
  next.data.assign(next.words * p, 0);
  const std::uint64_t tail = (len & 63) ? (std::uint64_t{1} << (len & 63)) - 1 : ~std::uint64_t{0};
  for (std::size_t i = 0; i < p; ++i) {
    const std::uint64_t* a = all.row(i);
    std::uint64_t* c = cur.data.data() + i * cur.words;
    std::uint64_t* nx = next.data.data() + i * next.words;
    for (std::size_t w = 0; w < cur.words; ++w) {
      const std::uint64_t hi = (w + 1 < all.words) ? a[w + 1] << 63 : 0;
      c[w] = a[w];
      nx[w] = (a[w] >> 1) | hi;
    }
    c[cur.words - 1] &= tail;
    nx[next.words - 1] &= tail;
  }
}

std::uint64_t popcount_row(const std::uint64_t* a, std::size_t words) noexcept {
  std::uint64_t s = 0;
  for (std::size_t w = 0; w < words; ++w) s += static_cast<std::uint64_t>(std::popcount(a[w]));
  return s;
}

std::uint64_t popcount_and(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) noexcept {
  std::uint64_t s = 0;
  for (std::size_t w = 0; w < words; ++w) s += static_cast<std::uint64_t>(std::popcount(a[w] & b[w]));
  return s;
}

std::string node_name(NodeId i) { return std::to_string(i + 1); }

}  // namespace

EmpiricalStats::EmpiricalStats(std::size_t p, std::size_t n)
    : p_(p), n_(n), ones_(p, 0), next_ones_(p, 0), n11_(p * p, 0) {}

void EmpiricalStats::merge(const EmpiricalStats& other) {
  if (other.p_ != p_) throw Error(ErrorKind::InvalidParameter, "cannot merge counts with different p");
  if (n_ == 0) {
    *this = other;
    return;
  }
  if (other.n_ == 0) return;
  for (std::size_t i = 0; i < p_; ++i) {
    ones_[i] += other.ones_[i];
    next_ones_[i] += other.next_ones_[i];
  }
  for (std::size_t k = 0; k < n11_.size(); ++k) n11_[k] += other.n11_[k];
  n_ = n_ + other.n_ - 1;
}

EmpiricalStats accumulate(const Trajectory& t) {
  if (t.n() < 2) throw Error(ErrorKind::InvalidParameter, "need at least two states");
  const std::size_t p = t.p();
  const std::size_t len = t.n() - 1;
  EmpiricalStats s(p, t.n());
  BitColumns cur, next;
  split_window(pack(t), p, len, cur, next);
  for (std::size_t i = 0; i < p; ++i) {
    s.ones_[i] = popcount_row(cur.row(i), cur.words);
    s.next_ones_[i] = popcount_row(next.row(i), next.words);
  }
  for (std::size_t m = 0; m < p; ++m) {
    const std::uint64_t* a = next.row(m);
    std::uint64_t* out = s.n11_.data() + m * p;
    for (std::size_t l = 0; l < p; ++l) out[l] = popcount_and(a, cur.row(l), cur.words);
  }
  return s;
}

SubsetStats accumulate_subsets(const Trajectory& t, std::span<const std::vector<NodeId>> candidate_sets) {
  if (t.n() < 2) throw Error(ErrorKind::InvalidParameter, "need at least two states");
  if (candidate_sets.size() != t.p()) throw Error(ErrorKind::InvalidParameter, "need one candidate set per node");
  SubsetStats out;
  out.n = t.n();
  out.nodes.resize(t.p());
  for (std::size_t m = 0; m < t.p(); ++m) {
    const auto& c = candidate_sets[m];
    if (c.size() > kMaxCandidates) throw Error(ErrorKind::InvalidParameter, "candidate set larger than 24");
    if (!std::is_sorted(c.begin(), c.end()) || std::adjacent_find(c.begin(), c.end()) != c.end())
      throw Error(ErrorKind::InvalidParameter, "candidate sets must be strictly ascending");
    for (NodeId l : c)
      if (l >= t.p()) throw Error(ErrorKind::InvalidParameter, "candidate node out of range");
    out.nodes[m].candidates = c;
    out.nodes[m].cell.assign(std::size_t{1} << c.size(), 0);
    out.nodes[m].cell_next_ones.assign(std::size_t{1} << c.size(), 0);
  }
  for (std::size_t k = 0; k + 1 < t.n(); ++k) {
    const auto x = t.state(k);
    const auto y = t.state(k + 1);
    for (std::size_t m = 0; m < t.p(); ++m) {
      auto& node = out.nodes[m];
      std::size_t cell = 0;
      for (std::size_t b = 0; b < node.candidates.size(); ++b) cell |= std::size_t{x[node.candidates[b]]} << b;
      ++node.cell[cell];
      node.cell_next_ones[cell] += y[m];
    }
  }
  return out;
}

std::optional<double> nu_hat(const EmpiricalStats& s, NodeId m, NodeId l) {
  const auto c1 = s.marginal_count(l, 1);
  const auto c0 = s.marginal_count(l, 0);
  if (c1 == 0 || c0 == 0) return std::nullopt;
  return static_cast<double>(s.pair_count(m, l, 1)) / static_cast<double>(c1) -
         static_cast<double>(s.pair_count(m, l, 0)) / static_cast<double>(c0);
}

std::vector<double> nu_hat_matrix(const EmpiricalStats& s) {
  const std::size_t p = s.p();
  std::vector<double> out(p * p, 0.0);
  for (NodeId m = 0; m < p; ++m)
    for (NodeId l = 0; l < p; ++l) out[m * p + l] = nu_hat(s, m, l).value_or(0.0);
  return out;
}

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::SelectionOnly: return "selection_only";
    case Stage::SelectionSigned: return "selection_signed";
    case Stage::Full: return "full";
  }
  return "selection_only";
}

GraphEstimate select_from_nu(std::span<const double> nu_all, std::size_t p, std::size_t d) {
  if (d < 1 || d > p) throw Error(ErrorKind::InvalidParameter, "d must lie in [1, p]");
  if (nu_all.size() != p * p) throw Error(ErrorKind::InvalidParameter, "nu must hold p * p values");
  GraphEstimate est;
  est.p = p;
  est.stage = Stage::SelectionOnly;
  est.ranked.resize(p);
  est.scores.resize(p);
  est.parents.resize(p);
  est.positive.resize(p);
  est.negative.resize(p);
  std::vector<NodeId> order(p);
  for (NodeId m = 0; m < p; ++m) {
    const double* nu = nu_all.data() + static_cast<std::size_t>(m) * p;
    std::iota(order.begin(), order.end(), NodeId{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(d), order.end(),
                      [&](NodeId a, NodeId b) {
                        const double fa = std::abs(nu[a]), fb = std::abs(nu[b]);
                        return fa != fb ? fa > fb : a < b;
                      });
    est.ranked[m].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(d));
    for (NodeId l : est.ranked[m]) est.scores[m].push_back(nu[l]);
    est.parents[m] = est.ranked[m];
    std::sort(est.parents[m].begin(), est.parents[m].end());
  }
  return est;
}

GraphEstimate supergraph_select(const EmpiricalStats& s, std::size_t d) {
  const std::size_t p = s.p();
  if (d < 1 || d > p) throw Error(ErrorKind::InvalidParameter, "d must lie in [1, p]");
  GraphEstimate est = select_from_nu(nu_hat_matrix(s), p, d);
  for (NodeId l = 0; l < p; ++l)
    if (s.marginal_count(l, 1) == 0 || s.marginal_count(l, 0) == 0)
      est.warnings.push_back("DegenerateCell: node " + node_name(l) + " is constant over the window; |nu| taken as 0");
  return est;
}

GraphEstimate sign_from_selection(const GraphEstimate& selection, std::optional<std::span<const std::size_t>> degrees) {
  GraphEstimate est = selection;
  const std::size_t p = est.p;
  if (degrees && degrees->size() != p) throw Error(ErrorKind::InvalidParameter, "need one known degree per node");
  for (NodeId m = 0; m < p; ++m) {
    std::size_t keep = est.ranked[m].size();
    if (degrees) {
      keep = (*degrees)[m];
      if (keep > est.ranked[m].size())
        throw Error(ErrorKind::InvalidParameter, "known degree of node " + node_name(m) + " exceeds the selection size");
      est.ranked[m].resize(keep);
      est.scores[m].resize(keep);
    }
    est.parents[m] = est.ranked[m];
    std::sort(est.parents[m].begin(), est.parents[m].end());
    est.positive[m].clear();
    est.negative[m].clear();
    for (std::size_t k = 0; k < keep; ++k) {
      const NodeId l = est.ranked[m][k];
      const double v = est.scores[m][k];
      if (v < 0.0) {
        est.negative[m].push_back(l);
      } else {
        if (v == 0.0)
          est.warnings.push_back("nu-hat is exactly 0 for " + node_name(l) + " -> " + node_name(m) + "; labelled +");
        est.positive[m].push_back(l);
      }
    }
    std::sort(est.positive[m].begin(), est.positive[m].end());
    std::sort(est.negative[m].begin(), est.negative[m].end());
  }
  est.stage = Stage::SelectionSigned;
  return est;
}

GraphEstimate trim(const SubsetStats& stats, const GraphEstimate& selection, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidParameter, "tau must be positive");
  const std::size_t p = selection.p;
  if (stats.nodes.size() != p) throw Error(ErrorKind::InvalidParameter, "subset counts do not match the estimate");
  GraphEstimate est = selection;
  est.stage = Stage::Full;
  for (NodeId m = 0; m < p; ++m) {
    const SubsetCounts& node = stats.nodes[m];
    if (node.candidates != selection.parents[m])
      throw Error(ErrorKind::InvalidParameter, "subset counts of node " + node_name(m) + " were taken on another set");
    const std::size_t d = node.candidates.size();
    const std::size_t cells = node.cell.size();

    double best = -1.0;
    std::size_t unseen = 0;
    for (std::size_t c = 0; c < cells; ++c) {
      if (const auto v = node.conditional(c)) best = std::max(best, *v);
      else ++unseen;
    }
    if (unseen == cells)
      throw Error(ErrorKind::AllCellsEmpty, "node " + node_name(m) + " has no observed configuration");
    if (unseen > 0)
      est.warnings.push_back("node " + node_name(m) + ": " + std::to_string(unseen) + " of " +
                             std::to_string(cells) + " configurations unseen, excluded from the maximizer search");

    // Bits that agree across every maximizer: AND of maximizers and AND of their complements.
    std::uint64_t all_one = ~std::uint64_t{0};
    std::uint64_t all_zero = ~std::uint64_t{0};
    for (std::size_t c = 0; c < cells; ++c) {
      const auto v = node.conditional(c);
      if (!v || !(*v > best - 2.0 * tau)) continue;
      all_one &= c;
      all_zero &= ~static_cast<std::uint64_t>(c);
    }
    est.parents[m].clear();
    est.positive[m].clear();
    est.negative[m].clear();
    for (std::size_t b = 0; b < d; ++b) {
      const NodeId l = node.candidates[b];
      if ((all_one >> b) & 1U) {
        est.parents[m].push_back(l);
        est.positive[m].push_back(l);
      } else if ((all_zero >> b) & 1U) {
        est.parents[m].push_back(l);
        est.negative[m].push_back(l);
      }
    }
    if (est.parents[m].empty())
      est.warnings.push_back("EmptyResult: node " + node_name(m) + " has no coordinate constant across maximizers");
  }
  return est;
}

std::string_view to_string(ObserverMode mode) noexcept {
  switch (mode) {
    case ObserverMode::SelectionOnly: return "selection_only";
    case ObserverMode::KnownDegrees: return "known_degrees";
    case ObserverMode::Full: return "full";
  }
  return "full";
}

ObserverMode observer_mode_from_string(std::string_view name) {
  if (name == "selection_only") return ObserverMode::SelectionOnly;
  if (name == "known_degrees") return ObserverMode::KnownDegrees;
  if (name == "full") return ObserverMode::Full;
  throw Error(ErrorKind::ConfigError, "unknown observer mode '" + std::string(name) + "'");
}

GraphEstimate observe(const Trajectory& t, const ObserverConfig& cfg) {
  const EmpiricalStats stats = accumulate(t);
  switch (cfg.mode) {
    case ObserverMode::SelectionOnly:
      return sign_from_selection(supergraph_select(stats, cfg.d));
    case ObserverMode::KnownDegrees: {
      if (cfg.degrees.size() != t.p()) throw Error(ErrorKind::ConfigError, "known_degrees needs one degree per node");
      const std::size_t d = *std::max_element(cfg.degrees.begin(), cfg.degrees.end());
      return sign_from_selection(supergraph_select(stats, std::max(d, cfg.d)), std::span(cfg.degrees));
    }
    case ObserverMode::Full: {
      const GraphEstimate sel = supergraph_select(stats, cfg.d);
      const SubsetStats sub = accumulate_subsets(t, sel.parents);
      return trim(sub, sel, cfg.tau);
    }
  }
  throw Error(ErrorKind::ConfigError, "unknown observer mode");
}

RecoveryMetrics metrics(const GraphEstimate& est, const GraphTruth& truth) {
  if (est.p != truth.p()) throw Error(ErrorKind::InvalidParameter, "estimate and truth differ in p");
  const std::size_t p = est.p;
  RecoveryMetrics out;
  out.exact_unsigned = true;
  out.exact_signed = true;
  std::size_t true_edges = 0, found = 0, false_pos = 0;
  std::vector<char> is_parent(p);
  for (NodeId m = 0; m < p; ++m) {
    std::fill(is_parent.begin(), is_parent.end(), 0);
    for (NodeId l : truth.parents[m]) is_parent[l] = 1;
    true_edges += truth.parents[m].size();
    for (NodeId l : est.parents[m]) (is_parent[l] ? found : false_pos) += 1;
    if (est.parents[m] != truth.parents[m]) out.exact_unsigned = false;
    if (est.positive[m] != truth.positive[m] || est.negative[m] != truth.negative[m]) out.exact_signed = false;
  }
  out.exact_signed = out.exact_signed && out.exact_unsigned;
  out.edge_recall = true_edges == 0 ? 1.0 : static_cast<double>(found) / static_cast<double>(true_edges);
  const double cells = static_cast<double>(p) * static_cast<double>(p);
  const double true_neg = cells - static_cast<double>(true_edges) - static_cast<double>(false_pos);
  out.edge_accuracy = (static_cast<double>(found) + true_neg) / cells;
  return out;
}

std::string estimate_to_json(const GraphEstimate& est, int indent) {
  nlohmann::ordered_json j;
  j["p"] = est.p;
  j["stage"] = std::string(to_string(est.stage));
  auto nodes = nlohmann::ordered_json::array();
  for (NodeId m = 0; m < est.p; ++m) {
    nlohmann::ordered_json node;
    node["id"] = m + 1;
    auto parents = nlohmann::ordered_json::array();
    for (NodeId l : est.parents[m]) {
      nlohmann::ordered_json e;
      e["j"] = l + 1;
      if (est.stage != Stage::SelectionOnly) {
        const bool neg = std::binary_search(est.negative[m].begin(), est.negative[m].end(), l);
        e["sign"] = neg ? "-" : "+";
      }
      parents.push_back(std::move(e));
    }
    node["parents"] = std::move(parents);
    nodes.push_back(std::move(node));
  }
  j["nodes"] = std::move(nodes);
  if (!est.warnings.empty()) j["warnings"] = est.warnings;
  return j.dump(indent);
}

}  // namespace bar
