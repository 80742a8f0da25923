#include "bar/boolnet.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numeric>
#include <optional>

namespace bar {

namespace {

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t lineno) : s_(line), lineno_(lineno) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno_) + ": " + what);
  }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  std::string word() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }
  long long integer() {
    skip_ws();
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc{}) fail("expected a node id");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }
  double real() {
    skip_ws();
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc{}) fail("expected a number");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }
  std::size_t lineno() const noexcept { return lineno_; }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t lineno_;
};

struct RawRule {
  long long head;
  BoolOp op;
  std::vector<std::pair<long long, bool>> lits;
  std::size_t lineno;
};

}  // namespace

std::string_view to_string(BoolOp op) noexcept {
  switch (op) {
    case BoolOp::And: return "AND";
    case BoolOp::Or: return "OR";
    case BoolOp::Id: return "ID";
  }
  return "ID";
}

BooleanNetwork parse_rules(std::string_view text) {
  std::vector<RawRule> raw;
  double noise = 0.0;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    LineParser in(line, lineno);
    if (in.at_end()) {
      if (end == text.size()) break;
      continue;
    }
    // `noise = x` directive
    {
      LineParser probe(line, lineno);
      if (probe.word() == "noise") {
        probe.expect('=');
        noise = probe.real();
        if (!probe.at_end()) probe.fail("trailing characters");
        if (!(noise >= 0.0 && noise < 0.5)) probe.fail("noise must lie in [0, 0.5)");
        if (end == text.size()) break;
        continue;
      }
    }
    RawRule r{in.integer(), BoolOp::Id, {}, lineno};
    in.expect('=');
    const std::string op = in.word();
    if (op == "AND") r.op = BoolOp::And;
    else if (op == "OR") r.op = BoolOp::Or;
    else if (op == "ID") r.op = BoolOp::Id;
    else in.fail("unsupported operator '" + op + "'");
    in.expect('(');
    do {
      const bool neg = in.accept('!');
      r.lits.emplace_back(in.integer(), neg);
    } while (in.accept(','));
    in.expect(')');
    if (!in.at_end()) in.fail("trailing characters after ')'");
    if (r.op == BoolOp::Id && r.lits.size() != 1) in.fail("ID takes exactly one literal");
    raw.push_back(std::move(r));
    if (end == text.size()) break;
  }
  if (raw.empty()) throw Error(ErrorKind::ParseError, "no rules found");

  BooleanNetwork net;
  net.p = raw.size();
  net.noise = noise;
  net.rules.resize(net.p);
  std::vector<bool> seen(net.p, false);
  auto check_id = [&](long long id, std::size_t line) -> NodeId {
    if (id < 1 || static_cast<std::size_t>(id) > net.p)
      throw Error(ErrorKind::UnknownNode,
                  "line " + std::to_string(line) + ": node " + std::to_string(id) + " outside 1.." + std::to_string(net.p));
    return static_cast<NodeId>(id - 1);
  };
  for (const auto& r : raw) {
    const NodeId head = check_id(r.head, r.lineno);
    if (seen[head]) throw Error(ErrorKind::ParseError, "line " + std::to_string(r.lineno) + ": node " + std::to_string(r.head) + " defined twice");
    seen[head] = true;
    BoolRule rule{r.op, {}};
    for (const auto& [id, neg] : r.lits) {
      const NodeId j = check_id(id, r.lineno);
      for (const auto& l : rule.literals)
        if (l.node == j) throw Error(ErrorKind::ParseError, "line " + std::to_string(r.lineno) + ": node " + std::to_string(id) + " repeated");
      rule.literals.push_back({j, neg});
    }
    net.rules[head] = std::move(rule);
  }
  return net;
}

std::string rules_to_text(const BooleanNetwork& net) {
  std::string out;
  if (net.noise > 0.0) out += "noise = " + std::to_string(net.noise) + "\n";
  for (NodeId i = 0; i < net.p; ++i) {
    out += std::to_string(i + 1) + " = " + std::string(to_string(net.rules[i].op)) + "(";
    for (std::size_t k = 0; k < net.rules[i].literals.size(); ++k) {
      const auto& l = net.rules[i].literals[k];
      if (k) out += ", ";
      if (l.negated) out += "!";
      out += std::to_string(l.node + 1);
    }
    out += ")\n";
  }
  return out;
}

bool evaluate(const BoolRule& rule, std::span<const Bit> x) noexcept {
  auto value = [&](const Literal& l) { return (x[l.node] != 0) != l.negated; };
  switch (rule.op) {
    case BoolOp::And: return std::all_of(rule.literals.begin(), rule.literals.end(), value);
    case BoolOp::Or: return std::any_of(rule.literals.begin(), rule.literals.end(), value);
    case BoolOp::Id: return value(rule.literals.front());
  }
  return false;
}

StateVector boolean_step(const BooleanNetwork& net, std::span<const Bit> x, CounterRng::Step rng) {
  if (x.size() != net.p) throw Error(ErrorKind::InvalidParameter, "state length does not match the network");
  StateVector out(net.p);
  for (NodeId i = 0; i < net.p; ++i) {
    const bool v = evaluate(net.rules[i], x);
    const bool flip = net.noise > 0.0 && rng.bernoulli(i, CounterRng::kNoise, net.noise);
    out[i] = (v != flip) ? 1 : 0;
  }
  return out;
}

BooleanNetwork random_andor_network(std::size_t p, std::size_t fan_in, double noise, std::uint64_t seed) {
  if (p == 0 || fan_in < 1 || fan_in > p) throw Error(ErrorKind::InvalidParameter, "fan_in must lie in [1, p]");
  if (!(noise >= 0.0 && noise < 0.5)) throw Error(ErrorKind::InvalidParameter, "noise must lie in [0, 0.5)");
  SeqRng rng(seed);
  BooleanNetwork net;
  net.p = p;
  net.noise = noise;
  net.rules.resize(p);
  std::vector<NodeId> pool(p);
  for (NodeId i = 0; i < p; ++i) {
    std::iota(pool.begin(), pool.end(), NodeId{0});
    for (std::size_t k = 0; k < fan_in; ++k) std::swap(pool[k], pool[k + rng.below(p - k)]);
    std::vector<NodeId> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(fan_in));
    std::sort(chosen.begin(), chosen.end());
    BoolRule& rule = net.rules[i];
    rule.op = fan_in == 1 ? BoolOp::Id : (rng.uniform() < 0.5 ? BoolOp::And : BoolOp::Or);
    for (NodeId j : chosen) rule.literals.push_back({j, rng.uniform() < 0.5});
  }
  return net;
}

GraphTruth truth_from_network(const BooleanNetwork& net) {
  GraphTruth t;
  t.parents.resize(net.p);
  t.positive.resize(net.p);
  t.negative.resize(net.p);
  t.degree.resize(net.p);
  for (NodeId i = 0; i < net.p; ++i) {
    for (const auto& l : net.rules[i].literals) {
      t.parents[i].push_back(l.node);
      (l.negated ? t.negative[i] : t.positive[i]).push_back(l.node);
    }
    std::sort(t.parents[i].begin(), t.parents[i].end());
    std::sort(t.positive[i].begin(), t.positive[i].end());
    std::sort(t.negative[i].begin(), t.negative[i].end());
    t.degree[i] = t.parents[i].size();
    t.d = std::max(t.d, t.degree[i]);
  }
  return t;
}

std::uint64_t network_hash(const BooleanNetwork& net) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : rules_to_text(net)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Trajectory sample_boolean(const BooleanNetwork& net, std::size_t n, std::size_t burn_in, std::uint64_t seed,
                          std::uint64_t replica) {
  if (n == 0) throw Error(ErrorKind::InvalidParameter, "n must be >= 1");
  const CounterRng rng(seed, replica);
  const CounterRng prelude = rng.split(1);
  StateVector x(net.p);
  const auto init = prelude.at(0);
  for (NodeId i = 0; i < net.p; ++i) x[i] = init.bernoulli(i, CounterRng::kInit, 0.5) ? 1 : 0;
  for (std::size_t k = 0; k < burn_in; ++k) x = boolean_step(net, x, prelude.at(k + 1));
  Trajectory t(net.p, TrajectoryKind::BooleanNet, seed, network_hash(net));
  t.reserve(n);
  t.push_back(x);
  for (std::size_t k = 1; k < n; ++k) {
    x = boolean_step(net, x, rng.at(k - 1));
    t.push_back(x);
  }
  return t;
}

}  // namespace bar
