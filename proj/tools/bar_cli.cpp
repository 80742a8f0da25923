// Command-line front end: bar <generate|simulate|exact|bounds|infer|sweep|rules>.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bar/boolnet.hpp"
#include "bar/bounds.hpp"
#include "bar/exactchain.hpp"
#include "bar/infer.hpp"
#include "bar/model.hpp"
#include "bar/simulate.hpp"
#include "bar/sweep.hpp"
#include "json.hpp"

namespace {

using namespace bar;
using ojson = nlohmann::ordered_json;

constexpr int kExitConfig = 2;
constexpr int kExitIO = 3;

struct Globals {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IOError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Arguments starting with '{' are inline JSON, anything else is a path.
std::string read_input(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && arg[first] == '{') return arg;
  return read_file(arg);
}

// Writes to --out when given, stdout otherwise.
void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw Error(ErrorKind::IOError, "cannot open " + g.out);
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
  if (!f) throw Error(ErrorKind::IOError, "write to " + g.out + " failed");
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IOError, "cannot open " + path);
  f << text;
}

StateVector parse_bits(const std::string& s, std::size_t p) {
  StateVector x;
  for (char c : s) {
    if (c == '0' || c == '1') x.push_back(static_cast<Bit>(c - '0'));
    else if (c != ',' && c != ' ') throw Error(ErrorKind::ConfigError, "state must be a string of 0/1");
  }
  if (x.size() != p) throw Error(ErrorKind::ConfigError, "state needs " + std::to_string(p) + " bits");
  return x;
}

ojson matrix_json(const Eigen::MatrixXd& m) {
  auto rows = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = ojson::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

int report(const Error& e) {
  std::cerr << "bar: " << e.what() << '\n';
  return e.kind() == ErrorKind::IOError ? kExitIO : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bernoulli autoregressive processes: simulation, exact analysis, bounds and structure learning"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads for sweeps")->capture_default_str();
  app.add_option("--out", g.out, "output path (default stdout)");

  // generate
  auto* gen = app.add_subcommand("generate", "draw a random valid model (JSON)");
  RandomModelSpec gspec;
  gspec.p = 10;
  std::size_t gen_d = 3;
  std::vector<std::size_t> gen_degrees;
  gen->add_option("--p", gspec.p, "node count")->capture_default_str();
  gen->add_option("--d", gen_d, "in-degree of every node")->capture_default_str();
  gen->add_option("--degrees", gen_degrees, "per-node in-degrees (overrides --d)");
  gen->add_option("--a-min", gspec.a_min)->capture_default_str();
  gen->add_option("--b-min", gspec.b_min)->capture_default_str();
  gen->add_option("--b-max", gspec.b_max)->capture_default_str();
  gen->add_option("--rho-w", gspec.rho_w)->capture_default_str();
  gen->add_option("--sign-prob", gspec.sign_prob, "probability that a parent is positive")->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "sample a trajectory (CSV)");
  std::string sim_model, sim_rules, sim_init = "burn_in", sim_kind = "bar";
  std::size_t sim_n = 1000, sim_burn = 100;
  std::uint64_t sim_replica = 0;
  double sim_lazy = 0.0, sim_theta = 0.125;
  sim->add_option("--model", sim_model, "model file or inline JSON");
  sim->add_option("--rules", sim_rules, "boolean-network rules file instead of a model");
  sim->add_option("--n", sim_n, "number of states")->capture_default_str();
  sim->add_option("--init", sim_init, "burn_in | stationary | a 0/1 string")->capture_default_str();
  sim->add_option("--theta", sim_theta, "burn-in accuracy")->capture_default_str();
  sim->add_option("--kind", sim_kind, "bar | rw | lazy_rw")->capture_default_str();
  sim->add_option("--lazy-prob", sim_lazy, "hold probability of lazy_rw")->capture_default_str();
  sim->add_option("--replica", sim_replica, "independent stream index")->capture_default_str();
  sim->add_option("--burn-in", sim_burn, "burn-in steps for boolean networks")->capture_default_str();

  // exact
  auto* ex = app.add_subcommand("exact", "exact chain analysis for small p (JSON)");
  std::string ex_model, ex_stationary_csv, ex_tv_csv;
  double ex_theta = 0.125;
  std::size_t ex_tv_steps = 0;
  ex->add_option("--model", ex_model, "model file or inline JSON")->required();
  ex->add_option("--theta", ex_theta)->capture_default_str();
  ex->add_option("--tv-steps", ex_tv_steps, "length of the d(n) curve (default: mixing time)");
  ex->add_option("--stationary-csv", ex_stationary_csv, "write the stationary vector here");
  ex->add_option("--tv-csv", ex_tv_csv, "write the d(n) curve here");

  // bounds
  auto* bd = app.add_subcommand("bounds", "closed-form bounds for a model (JSON)");
  std::string bd_model;
  std::size_t bd_d = 0;
  double bd_theta = 0.125, bd_gamma = 0.1, bd_eps = 0.05, bd_eps_tilde = 0.025, bd_C = 1.0, bd_lazy = 0.0,
         bd_c = 1.0, bd_fano_eps = 0.1;
  bool bd_no_refine = false;
  bd->add_option("--model", bd_model, "model file or inline JSON")->required();
  bd->add_option("--d", bd_d, "degree bound (default: largest in-degree)");
  bd->add_option("--theta", bd_theta)->capture_default_str();
  bd->add_option("--gamma", bd_gamma)->capture_default_str();
  bd->add_option("--eps", bd_eps, "selection accuracy")->capture_default_str();
  bd->add_option("--eps-tilde", bd_eps_tilde, "trimming accuracy")->capture_default_str();
  bd->add_option("--C", bd_C, "concentration constant")->capture_default_str();
  bd->add_option("--lazy-prob", bd_lazy)->capture_default_str();
  bd->add_option("--c", bd_c, "column-degree constant of the weight ceiling")->capture_default_str();
  bd->add_option("--fano-eps", bd_fano_eps)->capture_default_str();
  bd->add_flag("--no-refine", bd_no_refine, "skip the fixed-point refinement of beta");

  // infer
  auto* inf = app.add_subcommand("infer", "estimate the graph from a trajectory (JSON)");
  std::string inf_traj, inf_mode = "full", inf_truth, inf_rules;
  std::size_t inf_d = 3;
  double inf_tau = 0.025;
  std::vector<std::size_t> inf_degrees;
  inf->add_option("--trajectory", inf_traj, "trajectory CSV")->required();
  inf->add_option("--mode", inf_mode, "selection_only | known_degrees | full")->capture_default_str();
  inf->add_option("--d", inf_d)->capture_default_str();
  inf->add_option("--tau", inf_tau)->capture_default_str();
  inf->add_option("--degrees", inf_degrees, "known in-degrees");
  inf->add_option("--truth", inf_truth, "model whose graph is scored against the estimate");
  inf->add_option("--truth-rules", inf_rules, "rules file whose graph is scored against the estimate");

  // sweep
  auto* sw = app.add_subcommand("sweep", "run an experiment grid (CSV)");
  std::string sw_config;
  sw->add_option("--config", sw_config, "config file or inline JSON")->required();

  // rules
  auto* ru = app.add_subcommand("rules", "parse, generate or simulate boolean networks");
  std::string ru_file;
  std::size_t ru_p = 43, ru_fan_in = 2, ru_simulate = 0, ru_burn = 100;
  double ru_noise = 0.1;
  bool ru_random = false;
  ru->add_option("--file", ru_file, "rules file to check and normalise");
  ru->add_flag("--random", ru_random, "draw a random AND/OR network");
  ru->add_option("--p", ru_p)->capture_default_str();
  ru->add_option("--fan-in", ru_fan_in)->capture_default_str();
  ru->add_option("--noise", ru_noise)->capture_default_str();
  ru->add_option("--simulate", ru_simulate, "emit a trajectory CSV of this length instead");
  ru->add_option("--burn-in", ru_burn)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      if (gen_degrees.empty()) gen_degrees.assign(gspec.p, gen_d);
      gspec.degrees = gen_degrees;
      emit(g, model_to_json(random_model(gspec, g.seed).model));
    } else if (*sim) {
      std::ostringstream os;
      if (!sim_rules.empty()) {
        const auto net = parse_rules(read_file(sim_rules));
        write_trajectory_csv(sample_boolean(net, sim_n, sim_burn, g.seed, sim_replica), os);
      } else {
        if (sim_model.empty()) throw Error(ErrorKind::ConfigError, "simulate needs --model or --rules");
        const BarModel model = model_from_json(read_input(sim_model));
        InitSpec init;
        if (sim_init == "burn_in") init = InitSpec::burn_in(sim_theta);
        else if (sim_init == "stationary") init = InitSpec::stationary();
        else init = InitSpec::explicit_state(parse_bits(sim_init, model.p()));
        const auto kind = trajectory_kind_from_string(sim_kind);
        write_trajectory_csv(sample_trajectory(model, sim_n, init, g.seed, sim_replica, kind, sim_lazy), os);
      }
      emit(g, os.str());
    } else if (*ex) {
      const BarModel model = model_from_json(read_input(ex_model));
      const ExactChain chain = build_transition(model);
      const auto t_mix = exact_mixing_time(chain, ex_theta);
      const auto curve = tv_curve(chain, ex_tv_steps ? ex_tv_steps : t_mix);
      ojson j;
      j["p"] = model.p();
      j["theta"] = ex_theta;
      j["exact_mixing_time"] = t_mix;
      j["mixing_bound_primary"] = mixing_bound(model, ex_theta).primary;
      j["row_residual"] = chain.row_residual();
      j["stationarity_residual"] = chain.stationarity_residual();
      j["marginals"] = exact_marginals(chain);
      j["marginals_fixed_point"] = stationary_marginals(model);
      j["nu"] = matrix_json(exact_nu_matrix(chain));
      const auto margin = identifiability_margin(chain, model.truth());
      j["chi"] = margin.chi;
      j["identifiable"] = margin.identifiable;
      j["tv_curve"] = curve;
      if (!ex_stationary_csv.empty()) {
        std::ostringstream os;
        write_stationary_csv(chain, os);
        write_text_file(ex_stationary_csv, os.str());
      }
      if (!ex_tv_csv.empty()) {
        std::ostringstream os;
        write_tv_curve_csv(curve, os);
        write_text_file(ex_tv_csv, os.str());
      }
      emit(g, j.dump(2));
    } else if (*bd) {
      const BarModel model = model_from_json(read_input(bd_model));
      const std::size_t d = bd_d ? bd_d : model.max_degree();
      const BoundsReport rep = stationary_floors(model, d, bd_theta, FloorOptions{!bd_no_refine});
      ojson j = ojson::parse(to_json(rep));
      const auto t_mix = static_cast<double>(rep.mixing_bound_primary);
      ojson sc;
      sc["note"] = "up to the unknown constant C";
      sc["C"] = bd_C;
      sc["gamma"] = bd_gamma;
      sc["selection"] = bd_theta <= 0.125 ? ojson(sample_complexity_selection(model.p(), bd_gamma, bd_theta, bd_eps,
                                                                             rep.beta_tilde, t_mix, bd_C))
                                          : ojson();
      sc["trimming"] = sample_complexity_trimming(model.p(), d, bd_gamma, bd_eps_tilde, rep.beta_bar, t_mix, bd_C);
      j["sample_complexity"] = sc;
      std::vector<std::size_t> degrees(model.p());
      for (NodeId i = 0; i < model.p(); ++i) degrees[i] = model.parents(i).size();
      j["fano_lower_bound"] = fano_lower_bound(model.p(), degrees, bd_fano_eps);
      const RwAnalysis rw = rw_analysis(model, bd_theta, bd_lazy, bd_c);
      ojson r;
      r["col_substochastic"] = rw.col_substochastic;
      r["column_sums"] = rw.column_sums;
      r["contraction"] = rw.contraction;
      r["bound_rw"] = rw.bound_rw ? ojson(*rw.bound_rw) : ojson();
      r["bound_lazy"] = rw.bound_lazy ? ojson(*rw.bound_lazy) : ojson();
      r["weight_ceiling"] = rw.weight_ceiling;
      j["random_walk"] = r;
      emit(g, j.dump(2));
    } else if (*inf) {
      std::ifstream in(inf_traj);
      if (!in) throw Error(ErrorKind::IOError, "cannot open " + inf_traj);
      const Trajectory t = read_trajectory_csv(in);
      ObserverConfig cfg;
      cfg.mode = observer_mode_from_string(inf_mode);
      cfg.d = inf_d;
      cfg.tau = inf_tau;
      cfg.degrees = inf_degrees;
      std::optional<GraphTruth> truth;
      if (!inf_truth.empty()) {
        const BarModel model = model_from_json(read_input(inf_truth));
        if (cfg.mode == ObserverMode::Full && cfg.tau > model.a_min() / 4.0)
          throw Error(ErrorKind::ConfigError, "tau must be at most a_min / 4");
        truth = model.truth();
      } else if (!inf_rules.empty()) {
        truth = truth_from_network(parse_rules(read_file(inf_rules)));
      }
      if (cfg.mode == ObserverMode::KnownDegrees && cfg.degrees.empty()) {
        if (!truth) throw Error(ErrorKind::ConfigError, "known_degrees needs --degrees or a truth");
        cfg.degrees = truth->degree;
      }
      const GraphEstimate est = observe(t, cfg);
      ojson j = ojson::parse(estimate_to_json(est));
      if (truth) {
        const auto m = metrics(est, *truth);
        j["metrics"] = {{"exact_unsigned", m.exact_unsigned},
                        {"exact_signed", m.exact_signed},
                        {"edge_recall", m.edge_recall},
                        {"edge_accuracy", m.edge_accuracy}};
      }
      emit(g, j.dump(2));
    } else if (*sw) {
      SweepConfig cfg = sweep_config_from_json(read_input(sw_config));
      if (app.get_option("--threads")->count()) cfg.threads = g.threads;
      if (!g.out.empty()) cfg.out = g.out;
      if (app.get_option("--seed")->count()) cfg.seed = g.seed;
      const SweepResult res = run_sweep(cfg);
      if (cfg.out.empty()) write_sweep_csv(res, std::cout);
      for (const auto& row : res.rows)
        if (!row.error.empty()) std::cerr << "n=" << row.n << " trial=" << row.trial << ": " << row.error << '\n';
    } else if (*ru) {
      BooleanNetwork net;
      if (!ru_file.empty()) net = parse_rules(read_file(ru_file));
      else if (ru_random) net = random_andor_network(ru_p, ru_fan_in, ru_noise, g.seed);
      else throw Error(ErrorKind::ConfigError, "rules needs --file or --random");
      if (ru_simulate > 0) {
        std::ostringstream os;
        write_trajectory_csv(sample_boolean(net, ru_simulate, ru_burn, g.seed), os);
        emit(g, os.str());
      } else {
        emit(g, rules_to_text(net));
      }
    }
  } catch (const Error& e) {
    return report(e);
  } catch (const std::bad_alloc&) {
    std::cerr << "bar: out of memory\n";
    return kExitConfig;
  }
  return 0;
}
