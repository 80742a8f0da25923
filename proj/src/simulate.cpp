#include "bar/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "bar/bounds.hpp"
#include "bar/exactchain.hpp"

namespace bar {

namespace {

constexpr double kParamSlack = 1e-12;

double checked_parameter(const BarModel& model, NodeId i, std::span<const Bit> x, bool w) {
  const double q = model.drive(i, x) + (w ? model.b(i) : 0.0);
  if (q < -kParamSlack || q > 1.0 + kParamSlack) {
    throw Error(ErrorKind::ParameterOutOfRange,
                "node " + std::to_string(i + 1) + " parameter " + std::to_string(q));
  }
  return q;
}

// u in [0,1): P(u < q) = q exactly. Explicit draws may pass u = 1, hence the q >= 1 case.
Bit fire(double u, double q) noexcept { return (u < q || q >= 1.0) ? 1 : 0; }

void check_state(const BarModel& model, std::span<const Bit> x) {
  if (x.size() != model.p())
    throw Error(ErrorKind::InvalidParameter, "state length " + std::to_string(x.size()) + " != p");
}

NodeId pick_site(CounterRng::Step rng, std::size_t p) noexcept {
  const std::uint64_t r = rng.bits(0, CounterRng::kSite) >> 32;
  return static_cast<NodeId>((r * p) >> 32);
}

StateVector uniform_state(std::size_t p, CounterRng::Step rng) {
  StateVector x(p);
  for (NodeId i = 0; i < p; ++i) x[i] = rng.bernoulli(i, CounterRng::kInit, 0.5) ? 1 : 0;
  return x;
}

StateVector draw_stationary(std::span<const double> pi, std::size_t p, CounterRng::Step rng) {
  const double u = rng.uniform(0, CounterRng::kInit);
  double acc = 0.0;
  for (std::size_t s = 0; s < pi.size(); ++s) {
    acc += pi[s];
    if (u < acc) return state_from_index(s, p);
  }
  return state_from_index(pi.size() - 1, p);
}

}  // namespace

std::string_view to_string(TrajectoryKind kind) noexcept {
  switch (kind) {
    case TrajectoryKind::Bar: return "bar";
    case TrajectoryKind::RandomWalk: return "rw";
    case TrajectoryKind::LazyRandomWalk: return "lazy_rw";
    case TrajectoryKind::BooleanNet: return "boolean_net";
  }
  return "bar";
}

TrajectoryKind trajectory_kind_from_string(std::string_view name) {
  if (name == "bar") return TrajectoryKind::Bar;
  if (name == "rw") return TrajectoryKind::RandomWalk;
  if (name == "lazy_rw") return TrajectoryKind::LazyRandomWalk;
  if (name == "boolean_net") return TrajectoryKind::BooleanNet;
  throw Error(ErrorKind::ParseError, "unknown trajectory kind '" + std::string(name) + "'");
}

void Trajectory::push_back(std::span<const Bit> x) {
  if (x.size() != p_) throw Error(ErrorKind::InvalidParameter, "state length does not match trajectory");
  bits_.insert(bits_.end(), x.begin(), x.end());
}

Trajectory Trajectory::slice(std::size_t first, std::size_t last) const {
  if (first > last || last > n()) throw Error(ErrorKind::InvalidParameter, "slice out of range");
  Trajectory out(p_, kind_, seed_, model_id_);
  out.bits_.assign(bits_.begin() + static_cast<std::ptrdiff_t>(first * p_),
                   bits_.begin() + static_cast<std::ptrdiff_t>(last * p_));
  return out;
}

StateVector bar_step(const BarModel& model, std::span<const Bit> x, StepDraws draws) {
  check_state(model, x);
  if (draws.u.size() != model.p() || draws.w.size() != model.p())
    throw Error(ErrorKind::InvalidParameter, "need one (u, w) draw per node");
  StateVector out(model.p());
  for (NodeId i = 0; i < model.p(); ++i) out[i] = fire(draws.u[i], checked_parameter(model, i, x, draws.w[i] != 0));
  return out;
}

void bar_step_into(const BarModel& model, std::span<const Bit> x, std::span<Bit> out, CounterRng::Step rng) {
  const double rho = model.rho_w();
  for (NodeId i = 0; i < model.p(); ++i) {
    const bool w = rng.bernoulli(i, CounterRng::kNoise, rho);
    out[i] = fire(rng.uniform(i, CounterRng::kUniform), checked_parameter(model, i, x, w));
  }
}

StateVector bar_step(const BarModel& model, std::span<const Bit> x, CounterRng::Step rng) {
  check_state(model, x);
  StateVector out(model.p());
  bar_step_into(model, x, out, rng);
  return out;
}

std::pair<StateVector, StateVector> coupled_step(const BarModel& model, std::span<const Bit> x,
                                                 std::span<const Bit> y, CounterRng::Step rng) {
  check_state(model, x);
  check_state(model, y);
  StateVector nx(model.p()), ny(model.p());
  const double rho = model.rho_w();
  for (NodeId i = 0; i < model.p(); ++i) {
    const bool w = rng.bernoulli(i, CounterRng::kNoise, rho);
    const double u = rng.uniform(i, CounterRng::kUniform);
    nx[i] = fire(u, checked_parameter(model, i, x, w));
    ny[i] = fire(u, checked_parameter(model, i, y, w));
  }
  return {std::move(nx), std::move(ny)};
}

std::pair<StateVector, StateVector> coupled_step(const BarModel& model, std::span<const Bit> x,
                                                 std::span<const Bit> y, StepDraws draws) {
  return {bar_step(model, x, draws), bar_step(model, y, draws)};
}

StateVector rw_step(const BarModel& model, std::span<const Bit> x, CounterRng::Step rng, double lazy_prob) {
  check_state(model, x);
  StateVector out(x.begin(), x.end());
  if (lazy_prob > 0.0 && rng.bernoulli(0, CounterRng::kLazy, lazy_prob)) return out;
  const NodeId i = pick_site(rng, model.p());
  const bool w = rng.bernoulli(i, CounterRng::kNoise, model.rho_w());
  out[i] = fire(rng.uniform(i, CounterRng::kUniform), checked_parameter(model, i, x, w));
  return out;
}

std::pair<StateVector, StateVector> coupled_rw_step(const BarModel& model, std::span<const Bit> x,
                                                    std::span<const Bit> y, CounterRng::Step rng,
                                                    double lazy_prob) {
  return {rw_step(model, x, rng, lazy_prob), rw_step(model, y, rng, lazy_prob)};
}

std::size_t state_index(std::span<const Bit> x) noexcept {
  std::size_t s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i]) s |= std::size_t{1} << i;
  return s;
}

StateVector state_from_index(std::size_t index, std::size_t p) {
  StateVector x(p);
  for (std::size_t i = 0; i < p; ++i) x[i] = static_cast<Bit>((index >> i) & 1U);
  return x;
}

Trajectory sample_trajectory(const BarModel& model, std::size_t n, const InitSpec& init, std::uint64_t seed,
                             std::uint64_t replica, TrajectoryKind kind, double lazy_prob,
                             std::span<const double> stationary) {
  if (n == 0) throw Error(ErrorKind::InvalidParameter, "n must be >= 1");
  if (kind == TrajectoryKind::BooleanNet)
    throw Error(ErrorKind::InvalidParameter, "boolean networks are simulated by the harness");
  if (!(lazy_prob >= 0.0 && lazy_prob < 1.0)) throw Error(ErrorKind::InvalidParameter, "lazy_prob must lie in [0,1)");
  const std::size_t p = model.p();
  const CounterRng rng(seed, replica);
  const CounterRng prelude = rng.split(1);

  auto advance = [&](std::span<const Bit> x, std::span<Bit> out, CounterRng::Step step) {
    if (kind == TrajectoryKind::Bar) {
      bar_step_into(model, x, out, step);
    } else {
      const auto next = rw_step(model, x, step, kind == TrajectoryKind::LazyRandomWalk ? lazy_prob : 0.0);
      std::copy(next.begin(), next.end(), out.begin());
    }
  };

  StateVector x;
  switch (init.mode) {
    case InitSpec::Mode::Explicit:
      check_state(model, init.state);
      x = init.state;
      break;
    case InitSpec::Mode::BurnIn: {
      x = uniform_state(p, prelude.at(0));
      const auto burn = mixing_bound(model, init.theta).primary;
      StateVector next(p);
      for (long long k = 0; k < burn; ++k) {
        advance(x, next, prelude.at(static_cast<std::uint64_t>(k) + 1));
        x.swap(next);
      }
      break;
    }
    case InitSpec::Mode::ExactStationary: {
      if (p > kMaxExactNodes)
        throw Error(ErrorKind::ExactTooLarge, "exact stationary start needs p <= " + std::to_string(kMaxExactNodes));
      if (!stationary.empty()) {
        if (stationary.size() != (std::size_t{1} << p))
          throw Error(ErrorKind::InvalidParameter, "stationary vector must have 2^p entries");
        x = draw_stationary(stationary, p, prelude.at(0));
      } else {
        const ExactChain chain = build_transition(model);
        x = draw_stationary(chain.stationary(), p, prelude.at(0));
      }
      break;
    }
  }

  Trajectory traj(p, kind, seed, model.hash());
  traj.reserve(n);
  traj.push_back(x);
  StateVector next(p);
  for (std::size_t k = 1; k < n; ++k) {
    advance(x, next, rng.at(k - 1));
    traj.push_back(next);
    x.swap(next);
  }
  return traj;
}

std::size_t CouplingTimes::censored_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(times.begin(), times.end(), [&](std::size_t t) { return t > max_steps; }));
}

double CouplingTimes::survival(std::size_t n) const noexcept {
  if (times.empty()) return 0.0;
  const auto above = std::count_if(times.begin(), times.end(), [&](std::size_t t) { return t > n; });
  return static_cast<double>(above) / static_cast<double>(times.size());
}

double CouplingTimes::mean() const noexcept {
  if (times.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t t : times) s += static_cast<double>(t);
  return s / static_cast<double>(times.size());
}

std::optional<std::size_t> CouplingTimes::quantile_time(double theta) const {
  if (times.empty()) return std::nullopt;
  std::vector<std::size_t> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  // Smallest n with #{T > n} <= theta * R, i.e. n = T_(k) where k replicas may exceed it.
  const auto r = sorted.size();
  const auto allowed = static_cast<std::size_t>(theta * static_cast<double>(r) + 1e-9);
  if (allowed >= r) return 0;
  const std::size_t n = sorted[r - 1 - allowed];
  if (n > max_steps) return std::nullopt;
  return n;
}

CouplingTimes coupling_time(const BarModel& model, std::span<const Bit> x0, std::span<const Bit> y0,
                            const CouplingOptions& options) {
  check_state(model, x0);
  check_state(model, y0);
  if (options.max_steps == 0) throw Error(ErrorKind::InvalidParameter, "max_steps must be >= 1");
  CouplingTimes out;
  out.max_steps = options.max_steps;
  out.times.resize(options.replicas);
  for (std::size_t r = 0; r < options.replicas; ++r) {
    const CounterRng rng(options.seed, r);
    StateVector x(x0.begin(), x0.end()), y(y0.begin(), y0.end());
    std::size_t t = 0;
    while (x != y && t < options.max_steps) {
      auto next = options.walk == Walk::Synchronous ? coupled_step(model, x, y, rng.at(t))
                                                    : coupled_rw_step(model, x, y, rng.at(t), options.lazy_prob);
      x = std::move(next.first);
      y = std::move(next.second);
      ++t;
    }
    out.times[r] = x == y ? t : options.max_steps + 1;
  }
  return out;
}

CouplingTimes coupling_time(const BarModel& model, std::span<const Bit> x0, std::span<const Bit> y0,
                            std::size_t max_steps, std::uint64_t seed, std::size_t replicas) {
  CouplingOptions opt;
  opt.max_steps = max_steps;
  opt.seed = seed;
  opt.replicas = replicas;
  return coupling_time(model, x0, y0, opt);
}

WorstPairEstimate worst_pair_coupling(const BarModel& model, const CouplingOptions& options,
                                      std::size_t random_pairs) {
  const std::size_t p = model.p();
  SeqRng pick(options.seed ^ 0x7061697273ULL);
  WorstPairEstimate best;
  best.max_mean = -1.0;
  for (std::size_t k = 0; k <= random_pairs; ++k) {
    StateVector x(p, 0), y(p, 1);
    if (k > 0) {
      for (std::size_t i = 0; i < p; ++i) {
        x[i] = pick.uniform() < 0.5 ? 1 : 0;
        y[i] = pick.uniform() < 0.5 ? 1 : 0;
      }
    }
    CouplingOptions opt = options;
    opt.seed = mix64(options.seed + k);
    auto times = coupling_time(model, x, y, opt);
    const double m = times.mean();
    if (m > best.max_mean) {
      best.x0 = std::move(x);
      best.y0 = std::move(y);
      best.times = std::move(times);
      best.max_mean = m;
    }
  }
  return best;
}

void write_trajectory_csv(const Trajectory& t, std::ostream& out) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(t.model_id()));
  out << "# model_hash=" << hash << " seed=" << t.seed() << " kind=" << to_string(t.kind()) << '\n';
  for (std::size_t i = 0; i < t.p(); ++i) out << (i ? "," : "") << 'x' << (i + 1);
  out << '\n';
  std::string line;
  for (std::size_t k = 0; k < t.n(); ++k) {
    line.clear();
    const auto s = t.state(k);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) line.push_back(',');
      line.push_back(s[i] ? '1' : '0');
    }
    line.push_back('\n');
    out << line;
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("# ", 0) != 0)
    throw Error(ErrorKind::ParseError, "line 1: expected '# model_hash=... seed=... kind=...'");
  std::uint64_t hash = 0, seed = 0;
  TrajectoryKind kind = TrajectoryKind::Bar;
  std::istringstream fields(header.substr(2));
  std::string field;
  while (fields >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "line 1: malformed field '" + field + "'");
    const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    const char* b = value.data();
    const char* e = value.data() + value.size();
    if (key == "model_hash") {
      if (std::from_chars(b, e, hash, 16).ec != std::errc{}) throw Error(ErrorKind::ParseError, "line 1: bad model_hash");
    } else if (key == "seed") {
      if (std::from_chars(b, e, seed).ec != std::errc{}) throw Error(ErrorKind::ParseError, "line 1: bad seed");
    } else if (key == "kind") {
      kind = trajectory_kind_from_string(value);
    }
  }
  std::string cols;
  if (!std::getline(in, cols)) throw Error(ErrorKind::ParseError, "line 2: missing column header");
  const std::size_t p = static_cast<std::size_t>(std::count(cols.begin(), cols.end(), ',')) + 1;
  Trajectory t(p, kind, seed, hash);
  StateVector x(p);
  std::string line;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::size_t i = 0;
    for (char c : line) {
      if (c == ',') continue;
      if ((c != '0' && c != '1') || i >= p)
        throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected " + std::to_string(p) + " bits");
      x[i++] = static_cast<Bit>(c - '0');
    }
    if (i != p) throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected " + std::to_string(p) + " bits");
    t.push_back(x);
  }
  return t;
}

}  // namespace bar
