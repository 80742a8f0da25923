#include "bar/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "bar/rng.hpp"
#include "json.hpp"

namespace bar {

namespace {

bool open_unit(double v) { return v > 0.0 && v < 1.0; }

Violation violation(ErrorKind kind, std::optional<NodeId> node, std::string detail) {
  return Violation{kind, node, std::move(detail)};
}

std::string describe(const Violation& v) {
  std::ostringstream os;
  if (v.node) os << "node " << (*v.node + 1) << ": ";
  os << v.detail;
  return os.str();
}

}  // namespace

std::optional<Violation> validate(const ModelParams& m) {
  if (m.p == 0) return violation(ErrorKind::InvalidParameter, std::nullopt, "p must be >= 1");
  if (m.rows.size() != m.p || m.b.size() != m.p)
    return violation(ErrorKind::InvalidParameter, std::nullopt, "rows and b must have p entries");
  if (!open_unit(m.rho_w))
    return violation(ErrorKind::InvalidParameter, std::nullopt, "rho_w must lie in (0,1)");
  if (!open_unit(m.a_min) || !open_unit(m.b_min))
    return violation(ErrorKind::InvalidParameter, std::nullopt, "a_min and b_min must lie in (0,1)");

  for (NodeId i = 0; i < m.p; ++i) {
    const auto& row = m.rows[i];
    if (row.empty()) return violation(ErrorKind::EmptyParentSet, i, "no parents");

    std::set<NodeId> seen;
    double sum = 0.0;
    for (const auto& e : row) {
      if (e.target != i || e.source >= m.p) {
        return violation(ErrorKind::InvalidParameter, i, "edge endpoint out of range");
      }
      if (!seen.insert(e.source).second) {
        return violation(ErrorKind::DuplicateEdge, i,
                         "duplicate parent " + std::to_string(e.source + 1));
      }
      if (!(e.weight >= m.a_min)) {
        return violation(ErrorKind::WeightBelowFloor, i,
                         "weight of parent " + std::to_string(e.source + 1) + " below a_min");
      }
      if (!(e.weight < 1.0)) {
        return violation(ErrorKind::InvalidParameter, i, "weight must be < 1");
      }
      sum += e.weight;
    }
    if (!(m.b[i] >= m.b_min)) return violation(ErrorKind::NoiseBelowFloor, i, "b below b_min");
    if (!(m.b[i] < 1.0)) return violation(ErrorKind::InvalidParameter, i, "b must be < 1");
    if (!(std::abs(sum + m.b[i] - 1.0) <= kRowSumTolerance)) {
      std::ostringstream os;
      os.precision(17);
      os << "sum_j a_ij + b_i = " << (sum + m.b[i]) << " != 1";
      return violation(ErrorKind::RowSumViolation, i, os.str());
    }
  }
  return std::nullopt;
}

std::size_t GraphTruth::edge_count() const noexcept {
  std::size_t n = 0;
  for (const auto& s : parents) n += s.size();
  return n;
}

BarModel BarModel::create(ModelParams params) {
  if (auto v = validate(params)) throw Error(v->kind, describe(*v));

  for (NodeId i = 0; i < params.p; ++i) {
    auto& row = params.rows[i];
    std::sort(row.begin(), row.end(),
              [](const SignedParent& x, const SignedParent& y) { return x.source < y.source; });
    double sum = 0.0;
    for (const auto& e : row) sum += e.weight;
    const double target = 1.0 - params.b[i];
    // Already exact up to a few ulps: leave untouched so load/save is idempotent.
    if (std::abs(sum - target) <= 4.0 * std::numeric_limits<double>::epsilon()) continue;
    const double scale = target / sum;
    for (auto& e : row) {
      const double original = e.weight;
      e.weight *= scale;
      // The rescale moves weights by at most ~1e-12; never let it cross the floor.
      if (e.weight < params.a_min && original >= params.a_min) e.weight = params.a_min;
    }
  }
  return BarModel(std::move(params));
}

BarModel::BarModel(ModelParams params) : params_(std::move(params)), row_sums_(params_.p, 0.0) {
  for (NodeId i = 0; i < params_.p; ++i)
    for (const auto& e : params_.rows[i]) row_sums_[i] += e.weight;
}

double BarModel::max_row_sum() const noexcept {
  return *std::max_element(row_sums_.begin(), row_sums_.end());
}

std::vector<double> BarModel::column_sums() const {
  std::vector<double> cols(p(), 0.0);
  for (const auto& row : params_.rows)
    for (const auto& e : row) cols[e.source] += e.weight;
  return cols;
}

std::size_t BarModel::max_degree() const noexcept {
  std::size_t d = 0;
  for (const auto& row : params_.rows) d = std::max(d, row.size());
  return d;
}

bool BarModel::sign_free() const noexcept {
  for (const auto& row : params_.rows)
    for (const auto& e : row)
      if (e.sign == Sign::Negative) return false;
  return true;
}

GraphTruth BarModel::truth() const {
  GraphTruth t;
  t.parents.resize(p());
  t.positive.resize(p());
  t.negative.resize(p());
  t.degree.resize(p());
  for (NodeId i = 0; i < p(); ++i) {
    for (const auto& e : params_.rows[i]) {
      t.parents[i].push_back(e.source);
      (e.sign == Sign::Positive ? t.positive[i] : t.negative[i]).push_back(e.source);
    }
    t.degree[i] = t.parents[i].size();
    t.d = std::max(t.d, t.degree[i]);
  }
  return t;
}

std::uint64_t BarModel::hash() const {
  const std::string text = model_to_json(*this, -1);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t d_star(double a_min, double b_min) {
  if (!open_unit(a_min) || !open_unit(b_min))
    throw Error(ErrorKind::InvalidParameter, "a_min and b_min must lie in (0,1)");
  if (a_min + b_min > 1.0)
    throw Error(ErrorKind::Infeasible, "a_min + b_min > 1 admits no parent");
  // floor((1 - b_min) / a_min), corrected for rounding in either direction.
  auto d = static_cast<std::size_t>(std::floor((1.0 - b_min) / a_min));
  constexpr double slack = 1e-12;
  while (a_min * static_cast<double>(d + 1) + b_min <= 1.0 + slack) ++d;
  while (d > 1 && a_min * static_cast<double>(d) + b_min > 1.0 + slack) --d;
  return d;
}

GeneratedModel random_model(const RandomModelSpec& spec, std::uint64_t seed) {
  if (spec.p == 0 || spec.degrees.size() != spec.p)
    throw Error(ErrorKind::InvalidParameter, "degrees must list one entry per node");
  if (!(spec.b_min <= spec.b_max) || !(spec.b_max < 1.0))
    throw Error(ErrorKind::InvalidParameter, "need b_min <= b_max < 1");
  if (!(spec.sign_prob >= 0.0 && spec.sign_prob <= 1.0))
    throw Error(ErrorKind::InvalidParameter, "sign_prob must lie in [0,1]");
  const std::size_t cap = d_star(spec.a_min, spec.b_min);

  SeqRng rng(seed);
  ModelParams params;
  params.p = spec.p;
  params.rows.resize(spec.p);
  params.b.resize(spec.p);
  params.rho_w = spec.rho_w;
  params.a_min = spec.a_min;
  params.b_min = spec.b_min;

  std::vector<NodeId> pool(spec.p);
  for (NodeId i = 0; i < spec.p; ++i) {
    const std::size_t di = spec.degrees[i];
    if (di == 0 || di > spec.p || di > cap) {
      throw Error(ErrorKind::DegreeTooLarge,
                  "node " + std::to_string(i + 1) + ": degree " + std::to_string(di) +
                      " outside [1, min(p, d*=" + std::to_string(cap) + ")]");
    }

    // Partial Fisher-Yates: the first di entries form a uniform di-subset.
    std::iota(pool.begin(), pool.end(), NodeId{0});
    for (std::size_t k = 0; k < di; ++k) {
      const auto r = k + rng.below(spec.p - k);
      std::swap(pool[k], pool[r]);
    }

    const double b_hi =
        std::max(spec.b_min, std::min(spec.b_max, 1.0 - static_cast<double>(di) * spec.a_min));
    const double b = spec.b_min + (b_hi - spec.b_min) * rng.uniform();
    params.b[i] = b;

    // Uniform point of the simplex from the spacings of sorted uniforms.
    std::vector<double> cuts(di - 1);
    for (auto& c : cuts) c = rng.uniform();
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> w(di);
    double prev = 0.0;
    for (std::size_t k = 0; k + 1 < di; ++k) {
      w[k] = cuts[k] - prev;
      prev = cuts[k];
    }
    w[di - 1] = 1.0 - prev;

    const double spare = std::max(0.0, 1.0 - b - static_cast<double>(di) * spec.a_min);
    for (std::size_t k = 0; k < di; ++k) {
      const Sign s = rng.uniform() < spec.sign_prob ? Sign::Positive : Sign::Negative;
      params.rows[i].push_back(SignedParent{i, pool[k], spec.a_min + spare * w[k], s});
    }
  }

  BarModel model = BarModel::create(std::move(params));
  GraphTruth truth = model.truth();
  return GeneratedModel{std::move(model), std::move(truth)};
}

std::string model_to_json(const BarModel& model, int indent) {
  nlohmann::ordered_json j;
  j["p"] = model.p();
  j["rho_w"] = model.rho_w();
  j["a_min"] = model.a_min();
  j["b_min"] = model.b_min();
  auto nodes = nlohmann::ordered_json::array();
  for (NodeId i = 0; i < model.p(); ++i) {
    nlohmann::ordered_json node;
    node["id"] = i + 1;
    node["b"] = model.b(i);
    auto parents = nlohmann::ordered_json::array();
    for (const auto& e : model.parents(i)) {
      nlohmann::ordered_json pj;
      pj["j"] = e.source + 1;
      pj["a"] = e.weight;
      pj["sign"] = std::string(1, sign_char(e.sign));
      parents.push_back(std::move(pj));
    }
    node["parents"] = std::move(parents);
    nodes.push_back(std::move(node));
  }
  j["nodes"] = std::move(nodes);
  return j.dump(indent);
}

ModelParams model_params_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("model JSON: ") + e.what());
  }
  try {
    ModelParams m;
    m.p = j.at("p").get<std::size_t>();
    m.rho_w = j.at("rho_w").get<double>();
    m.a_min = j.at("a_min").get<double>();
    m.b_min = j.at("b_min").get<double>();
    m.rows.resize(m.p);
    m.b.assign(m.p, 0.0);
    std::vector<bool> seen(m.p, false);
    for (const auto& node : j.at("nodes")) {
      const auto id = node.at("id").get<std::int64_t>();
      if (id < 1 || static_cast<std::size_t>(id) > m.p)
        throw Error(ErrorKind::UnknownNode, "node id " + std::to_string(id) + " out of range");
      const auto i = static_cast<NodeId>(id - 1);
      if (seen[i]) throw Error(ErrorKind::DuplicateEdge, "node " + std::to_string(id) + " listed twice");
      seen[i] = true;
      m.b[i] = node.at("b").get<double>();
      for (const auto& pj : node.at("parents")) {
        const auto src = pj.at("j").get<std::int64_t>();
        if (src < 1 || static_cast<std::size_t>(src) > m.p)
          throw Error(ErrorKind::UnknownNode, "parent id " + std::to_string(src) + " out of range");
        const auto sign = pj.at("sign").get<std::string>();
        if (sign != "+" && sign != "-")
          throw Error(ErrorKind::ParseError, "sign must be \"+\" or \"-\"");
        m.rows[i].push_back(SignedParent{i, static_cast<NodeId>(src - 1), pj.at("a").get<double>(),
                                         sign == "+" ? Sign::Positive : Sign::Negative});
      }
    }
    for (NodeId i = 0; i < m.p; ++i)
      if (!seen[i]) throw Error(ErrorKind::UnknownNode, "node " + std::to_string(i + 1) + " missing");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("model JSON: ") + e.what());
  }
}

BarModel model_from_json(const std::string& text) {
  return BarModel::create(model_params_from_json(text));
}

}  // namespace bar
