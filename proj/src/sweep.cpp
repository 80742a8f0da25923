#include "bar/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <thread>

#include "bar/exactchain.hpp"
#include "json.hpp"

namespace bar {

namespace {

using json = nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

std::uint64_t model_seed(std::uint64_t seed, std::size_t trial) {
  return mix64(seed ^ (0x9e3779b97f4a7c15ULL * (trial + 1)));
}

std::uint64_t trajectory_seed(std::uint64_t seed, std::size_t n, std::size_t trial) {
  return mix64(model_seed(seed, trial) ^ (0xc2b2ae3d27d4eb4fULL * (n + 1)));
}

// One trial's model or network plus its truth.
struct Instance {
  std::optional<BarModel> model;
  std::optional<BooleanNetwork> network;
  GraphTruth truth;
  std::vector<double> stationary;  // only for exact-stationary starts
};

Instance make_instance(const SweepConfig& cfg, std::size_t trial) {
  Instance inst;
  const std::uint64_t s = cfg.per_trial ? model_seed(cfg.seed, trial) : model_seed(cfg.seed, 0);
  switch (cfg.source) {
    case SweepConfig::Source::Model:
      inst.model = *cfg.model;
      inst.truth = inst.model->truth();
      break;
    case SweepConfig::Source::Generator: {
      auto g = random_model(cfg.generator, s);
      inst.model = std::move(g.model);
      inst.truth = std::move(g.truth);
      break;
    }
    case SweepConfig::Source::BooleanNet:
      inst.network = cfg.network ? *cfg.network : random_andor_network(cfg.net_p, cfg.net_fan_in, cfg.net_noise, s);
      inst.truth = truth_from_network(*inst.network);
      break;
  }
  if (inst.model && cfg.init.mode == InitSpec::Mode::ExactStationary) {
    const auto chain = build_transition(*inst.model);
    inst.stationary.assign(chain.stationary().begin(), chain.stationary().end());
  }
  return inst;
}

SweepRow run_cell(const SweepConfig& cfg, const Instance& inst, std::size_t n, std::size_t trial) {
  SweepRow row;
  row.n = n;
  row.trial = trial;
  row.seed = trajectory_seed(cfg.seed, n, trial);
  row.signed_scored = !inst.network || cfg.score_signs;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Trajectory t = inst.model
        ? sample_trajectory(*inst.model, n, cfg.init, row.seed, 0, TrajectoryKind::Bar, 0.0, inst.stationary)
        : sample_boolean(*inst.network, n, cfg.net_burn_in, row.seed);
    ObserverConfig obs = cfg.observer;
    if (obs.mode == ObserverMode::KnownDegrees && obs.degrees.empty()) obs.degrees = inst.truth.degree;
    row.metrics = metrics(observe(t, obs), inst.truth);
  } catch (const Error& e) {
    row.error = e.what();
  }
  const auto stop = std::chrono::steady_clock::now();
  if (cfg.record_wall_time) row.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return row;
}

std::string fmt(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void validate(const SweepConfig& cfg) {
  if (cfg.n_grid.empty()) config_error("n_grid is empty");
  for (std::size_t k = 0; k < cfg.n_grid.size(); ++k) {
    if (cfg.n_grid[k] < 2) config_error("every n must be >= 2");
    if (k > 0 && cfg.n_grid[k] <= cfg.n_grid[k - 1]) config_error("n_grid must be strictly increasing");
  }
  if (cfg.trials < 1) config_error("trials must be >= 1");
  if (cfg.threads < 1) config_error("threads must be >= 1");
  if (cfg.source == SweepConfig::Source::Model && !cfg.model) config_error("source 'model' needs a model");
  if (cfg.observer.d < 1) config_error("d must be >= 1");
  if (!(cfg.observer.tau > 0.0)) config_error("tau must be positive");
  std::optional<double> a_min;
  if (cfg.source == SweepConfig::Source::Model && cfg.model) a_min = cfg.model->a_min();
  if (cfg.source == SweepConfig::Source::Generator) {
    a_min = cfg.generator.a_min;
    if (cfg.generator.degrees.size() != cfg.generator.p) config_error("generator needs one degree per node");
  }
  if (cfg.observer.mode == ObserverMode::Full && a_min && cfg.observer.tau > *a_min / 4.0 + 1e-15)
    config_error("tau must be at most a_min / 4 = " + std::to_string(*a_min / 4.0));
  if (cfg.source == SweepConfig::Source::BooleanNet && cfg.init.mode == InitSpec::Mode::ExactStationary)
    config_error("boolean networks have no exact stationary start");
}

SweepConfig sweep_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  SweepConfig cfg;
  try {
    const std::string source = j.value("source", "generator");
    if (source == "model") {
      cfg.source = SweepConfig::Source::Model;
      if (!j.contains("model")) config_error("source 'model' needs a 'model' object");
      cfg.model = model_from_json(j.at("model").dump());
    } else if (source == "generator") {
      cfg.source = SweepConfig::Source::Generator;
      const json g = j.value("generator", json::object());
      auto& spec = cfg.generator;
      spec.p = g.value("p", std::size_t{30});
      if (g.contains("degrees")) spec.degrees = g.at("degrees").get<std::vector<std::size_t>>();
      else spec.degrees.assign(spec.p, g.value("d", std::size_t{3}));
      spec.a_min = g.value("a_min", 0.1);
      spec.b_min = g.value("b_min", 0.1);
      spec.b_max = g.value("b_max", 0.2);
      spec.rho_w = g.value("rho_w", 0.5);
      spec.sign_prob = g.value("sign_prob", 0.5);
    } else if (source == "boolean_net") {
      cfg.source = SweepConfig::Source::BooleanNet;
      if (j.contains("rules")) cfg.network = parse_rules(j.at("rules").get<std::string>());
      const json nj = j.value("network", json::object());
      cfg.net_p = nj.value("p", cfg.net_p);
      cfg.net_fan_in = nj.value("fan_in", cfg.net_fan_in);
      cfg.net_noise = nj.value("noise", cfg.net_noise);
      cfg.net_burn_in = nj.value("burn_in", cfg.net_burn_in);
      cfg.score_signs = j.value("score_signs", false);
    } else {
      config_error("unknown source '" + source + "'");
    }
    cfg.per_trial = j.value("per_trial", false);
    if (!j.contains("n_grid")) config_error("missing n_grid");
    cfg.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    cfg.trials = j.value("trials", std::size_t{1});
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.observer.mode = observer_mode_from_string(j.value("mode", std::string("full")));
    cfg.observer.d = j.value("d", std::size_t{3});
    cfg.observer.tau = j.value("tau", 0.025);
    if (j.contains("degrees")) cfg.observer.degrees = j.at("degrees").get<std::vector<std::size_t>>();
    const std::string init = j.value("init", std::string("burn_in"));
    if (init == "burn_in") cfg.init = InitSpec::burn_in(j.value("theta", 0.125));
    else if (init == "stationary") cfg.init = InitSpec::stationary();
    else config_error("init must be 'burn_in' or 'stationary'");
    cfg.out = j.value("out", std::string());
    cfg.threads = j.value("threads", std::size_t{1});
    cfg.record_wall_time = j.value("record_wall_time", false);
  } catch (const json::exception& e) {
    config_error(e.what());
  }
  validate(cfg);
  return cfg;
}

SweepResult run_sweep(const SweepConfig& cfg) {
  validate(cfg);
  std::ofstream file;
  if (!cfg.out.empty()) {
    file.open(cfg.out);
    if (!file) throw Error(ErrorKind::IOError, "cannot open " + cfg.out);
  }

  // Instances are shared by all n of a trial so the grid compares like with like.
  const std::size_t distinct = cfg.per_trial ? cfg.trials : 1;
  std::vector<std::optional<Instance>> instances(distinct);
  std::vector<std::string> instance_error(distinct);
  for (std::size_t k = 0; k < distinct; ++k) {
    try {
      instances[k] = make_instance(cfg, k);
    } catch (const Error& e) {
      instance_error[k] = e.what();
    }
  }

  const std::size_t cells = cfg.n_grid.size() * cfg.trials;
  SweepResult result;
  result.rows.resize(cells);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < cells; c = next++) {
      const std::size_t n = cfg.n_grid[c / cfg.trials];
      const std::size_t trial = c % cfg.trials;
      const std::size_t k = cfg.per_trial ? trial : 0;
      if (instances[k]) {
        result.rows[c] = run_cell(cfg, *instances[k], n, trial);
      } else {
        SweepRow& row = result.rows[c];
        row.n = n;
        row.trial = trial;
        row.seed = trajectory_seed(cfg.seed, n, trial);
        row.error = instance_error[k];
      }
    }
  };
  const std::size_t threads = std::min(cfg.threads, cells);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (file.is_open()) {
    write_sweep_csv(result, file);
    if (!file) throw Error(ErrorKind::IOError, "write to " + cfg.out + " failed");
  }
  return result;
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << "n,trial,seed,exact_unsigned,exact_signed,edge_recall,edge_accuracy,wall_ms\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::size_t k = 0;
  while (k < result.rows.size()) {
    const std::size_t n = result.rows[k].n;
    double su = 0, ss = 0, sr = 0, sa = 0, sw = 0;
    std::size_t count = 0;
    bool any_signed = false;
    for (; k < result.rows.size() && result.rows[k].n == n; ++k) {
      const SweepRow& r = result.rows[k];
      ++count;
      sw += r.wall_ms;
      any_signed = any_signed || r.signed_scored;
      out << r.n << ',' << r.trial << ',' << r.seed << ',';
      if (!r.error.empty()) {
        out << "nan,nan,nan,nan," << fmt(r.wall_ms, 3) << '\n';
        continue;
      }
      const auto& m = r.metrics;
      su += m.exact_unsigned;
      ss += m.exact_signed;
      sr += m.edge_recall;
      sa += m.edge_accuracy;
      out << int{m.exact_unsigned} << ',' << (r.signed_scored ? std::to_string(int{m.exact_signed}) : "nan") << ','
          << fmt(m.edge_recall, 6) << ',' << fmt(m.edge_accuracy, 6) << ',' << fmt(r.wall_ms, 3) << '\n';
    }
    const double c = static_cast<double>(count);
    out << n << ",mean,," << fmt(su / c, 6) << ',' << fmt(any_signed ? ss / c : nan, 6) << ',' << fmt(sr / c, 6)
        << ',' << fmt(sa / c, 6) << ',' << fmt(sw / c, 3) << '\n';
  }
}

}  // namespace bar
