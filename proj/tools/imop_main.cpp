// Command-line front end: benchmark experiment runners, external-stream
// replay, and single-level model export.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "imop/imop.hpp"

namespace fs = std::filesystem;
using namespace imop;

namespace {

struct CommonFlags {
  int T = 200;
  int K = 41;
  double eta0 = 5.0;
  std::uint64_t seed = 1;
  std::string algorithm = "full";
  std::string out;
  int workers = hardware_workers();
};

std::string default_out_dir() {
  const char* env = std::getenv("IMOP_OUT_DIR");
  return env != nullptr && *env != '\0' ? std::string(env) : std::string("out");
}

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--T", f.T, "number of rounds")->check(CLI::PositiveNumber);
  cmd->add_option("--K", f.K, "number of sampled weights")
      ->check(CLI::Range(2, 100000));
  cmd->add_option("--eta0", f.eta0, "learning-rate numerator (eta_t = eta0/sqrt(t))")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--algorithm", f.algorithm, "full | accel")
      ->check(CLI::IsMember({"full", "accel"}));
  cmd->add_option("--out", f.out, "output directory (default $IMOP_OUT_DIR or ./out)");
  cmd->add_option("--workers", f.workers, "parallel workers for the K subproblems")
      ->check(CLI::PositiveNumber);
}

Algorithm parse_algorithm(const std::string& name) {
  return name == "accel" ? Algorithm::Accelerated : Algorithm::Full;
}

struct RunOutputs {
  RunResult result;
  WeightHistogram histogram;
  double total_loss = 0.0;
};

RunOutputs execute(const MopInstance& inst,
                   const std::vector<Observation>& stream, RunConfig cfg) {
  RunOutputs out;
  out.result = run_online(inst, stream, cfg);
  out.histogram =
      assign_weights(inst, out.result.theta_final, out.result.grid, stream);
  for (const auto& r : out.result.rounds) out.total_loss += r.loss;
  return out;
}

void write_run_outputs(const fs::path& dir, const std::string& command,
                       const CommonFlags& flags, const MopInstance& inst,
                       const std::vector<Observation>& stream,
                       const RunOutputs& ro,
                       const std::optional<Vector>& theta_true,
                       std::optional<double> chi_square) {
  fs::create_directories(dir);
  write_rounds((dir / "rounds.csv").string(), ro.result.rounds);
  write_timings((dir / "timings.csv").string(), ro.result.rounds);
  write_histogram((dir / "histogram.csv").string(), ro.result.grid,
                  ro.histogram);
  write_observations((dir / "stream.csv").string(), stream);
  write_instance((dir / "instance.ini").string(), inst);
  if (inst.param.has_value()) {
    write_spec((dir / "spec.ini").string(), *inst.param);
  }

  json summary;
  summary["command"] = command;
  summary["algorithm"] = flags.algorithm;
  summary["T"] = flags.T;
  summary["K"] = flags.K;
  summary["eta0"] = flags.eta0;
  summary["seed"] = flags.seed;
  summary["workers"] = flags.workers;
  summary["theta_final"] = vector_to_json(ro.result.theta_final);
  if (theta_true.has_value()) {
    summary["theta_true"] = vector_to_json(*theta_true);
    summary["final_error"] = (ro.result.theta_final - *theta_true).norm();
  }
  summary["total_loss"] = ro.total_loss;
  summary["total_update_wall_ms"] = ro.result.total_update_wall_ms;
  summary["shortcut_rounds"] = ro.result.shortcut_rounds;
  summary["radius_violations"] = ro.result.radius_violations;
  if (chi_square.has_value()) summary["chi_square"] = *chi_square;
  std::ofstream sf(dir / "summary.json");
  sf << summary.dump(2) << "\n";

  RoundState state;
  state.instance = inst;
  state.theta_t = ro.result.theta_final;
  state.y = stream.back().y;
  state.eta = learning_rate(flags.T, flags.eta0);
  for (int k = 0; k < ro.result.grid.size(); ++k) {
    state.grid_weights.push_back(ro.result.grid[k]);
  }
  write_round_state((dir / "final_state.json").string(), state);
}

int run_mqp(const CommonFlags& flags, double noise, bool rhs_block) {
  const MopInstance inst =
      rhs_block ? make_mqp_b_instance() : make_mqp_c_instance();
  const Vector truth = rhs_block ? mqp_b_truth() : mqp_c_truth();
  const MqpStream stream = gen_mqp_stream(
      rhs_block ? substitute(inst, truth) : inst, flags.T, noise, flags.seed);

  RunConfig cfg;
  cfg.algorithm = parse_algorithm(flags.algorithm);
  cfg.T = flags.T;
  cfg.K = flags.K;
  cfg.eta0 = flags.eta0;
  cfg.seed = flags.seed;
  cfg.workers = flags.workers;
  cfg.theta_true = truth;
  const RunOutputs ro = execute(inst, stream.observations, cfg);
  const fs::path dir = flags.out.empty() ? fs::path(default_out_dir())
                                         : fs::path(flags.out);
  write_run_outputs(dir, rhs_block ? "run-mqp-b" : "run-mqp-c", flags, inst,
                    stream.observations, ro, truth, std::nullopt);
  std::cout << "final error " << format_double((ro.result.theta_final - truth).norm())
            << ", outputs in " << dir.string() << "\n";
  return 0;
}

int run_portfolio(const CommonFlags& flags) {
  const MopInstance inst = make_portfolio_instance();
  const Vector truth = portfolio_truth();
  const PortfolioStream stream = gen_portfolio_stream(inst, flags.T, flags.seed);

  RunConfig cfg;
  cfg.algorithm = parse_algorithm(flags.algorithm);
  cfg.T = flags.T;
  cfg.K = flags.K;
  cfg.eta0 = flags.eta0;
  cfg.seed = flags.seed;
  cfg.workers = flags.workers;
  cfg.interior_grid = true;  // keeps the variance weight strictly positive
  cfg.theta_true = truth;
  const RunOutputs ro = execute(inst, stream.observations, cfg);

  const auto masses = truncated_normal_bin_masses(ro.result.grid, 0.5, 0.1);
  std::vector<double> expected(masses.size());
  for (std::size_t i = 0; i < masses.size(); ++i) {
    expected[i] = masses[i] * static_cast<double>(flags.T);
  }
  const double chi2 = chi_square_statistic(ro.histogram.counts, expected);

  const fs::path dir = flags.out.empty() ? fs::path(default_out_dir())
                                         : fs::path(flags.out);
  write_run_outputs(dir, "run-portfolio", flags, inst, stream.observations,
                    ro, truth, chi2);
  write_observations((dir / "stream_full.csv").string(),
                     stream.observations_full);
  std::cout << "final error " << format_double((ro.result.theta_final - truth).norm())
            << ", chi-square " << format_double(chi2) << ", outputs in "
            << dir.string() << "\n";
  return 0;
}

int run_replay(const std::string& instance_path, const std::string& spec_path,
               const std::string& obs_path, const CommonFlags& flags) {
  MopInstance inst = read_instance(instance_path);
  inst = read_spec_and_attach(spec_path, inst);
  const std::vector<Observation> stream = read_observations(obs_path);
  for (const auto& o : stream) {
    if (o.y.size() != inst.n) {
      throw DimensionMismatch("observation dimension " +
                              std::to_string(o.y.size()) +
                              " does not match instance n=" +
                              std::to_string(inst.n));
    }
  }
  CommonFlags local = flags;
  local.T = static_cast<int>(stream.size());

  RunConfig cfg;
  cfg.algorithm = parse_algorithm(local.algorithm);
  cfg.T = local.T;
  cfg.K = local.K;
  cfg.eta0 = local.eta0;
  cfg.seed = local.seed;
  cfg.workers = local.workers;
  const RunOutputs ro = execute(inst, stream, cfg);
  const fs::path dir = local.out.empty() ? fs::path(default_out_dir())
                                         : fs::path(local.out);
  write_run_outputs(dir, "replay", local, inst, stream, ro, std::nullopt,
                    std::nullopt);
  std::cout << "replayed " << stream.size() << " observations, outputs in "
            << dir.string() << "\n";
  return 0;
}

int run_export(const std::string& state_path, std::optional<double> big_m,
               const std::string& out_path) {
  if (big_m.has_value() && !(*big_m > 0.0)) {
    throw InvalidParameter("--bigM must be positive");
  }
  const RoundState st = read_round_state(state_path);
  const std::string text = export_single_level(st.instance, st.theta_t, st.y,
                                               st.eta, st.grid_weights, big_m);
  std::ofstream out(out_path);
  if (!out) throw ParseError("cannot write '" + out_path + "'");
  out << text;
  std::cout << "model written to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online inverse multiobjective optimization"};
  app.require_subcommand(1);

  CommonFlags mqp_c_flags, mqp_b_flags, port_flags, replay_flags;
  double noise_c = 0.5, noise_b = 0.5;

  auto* cmd_c = app.add_subcommand("run-mqp-c",
                                   "learn the objective vectors of the MQP benchmark");
  add_common(cmd_c, mqp_c_flags);
  cmd_c->add_option("--noise", noise_c, "uniform noise halfwidth")
      ->check(CLI::NonNegativeNumber);

  auto* cmd_b = app.add_subcommand("run-mqp-b",
                                   "learn the right-hand side of the MQP benchmark");
  add_common(cmd_b, mqp_b_flags);
  cmd_b->add_option("--noise", noise_b, "uniform noise halfwidth")
      ->check(CLI::NonNegativeNumber);

  auto* cmd_p = app.add_subcommand("run-portfolio",
                                   "learn expected returns in the portfolio model");
  add_common(cmd_p, port_flags);

  auto* cmd_r = app.add_subcommand("replay", "run over an external observation file");
  std::string replay_instance, replay_spec, replay_obs;
  cmd_r->add_option("--instance", replay_instance, "instance configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_r->add_option("--spec", replay_spec, "parameter-spec configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_r->add_option("--obs", replay_obs, "observation CSV (t,y1,..,yn)")
      ->required()
      ->check(CLI::ExistingFile);
  add_common(cmd_r, replay_flags);

  auto* cmd_e = app.add_subcommand("export-milp",
                                   "export the single-level big-M model of one update");
  std::string state_path, model_out = "model.txt";
  double big_m_flag = 0.0;
  bool big_m_set = false;
  cmd_e->add_option("--round-state", state_path, "round-state JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_e->add_option("--bigM", big_m_flag, "big-M constant (default: derived)")
      ->each([&](const std::string&) { big_m_set = true; });
  cmd_e->add_option("--out", model_out, "output model file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_c->parsed()) return run_mqp(mqp_c_flags, noise_c, false);
    if (cmd_b->parsed()) return run_mqp(mqp_b_flags, noise_b, true);
    if (cmd_p->parsed()) return run_portfolio(port_flags);
    if (cmd_r->parsed()) {
      return run_replay(replay_instance, replay_spec, replay_obs, replay_flags);
    }
    if (cmd_e->parsed()) {
      return run_export(state_path,
                        big_m_set ? std::optional<double>(big_m_flag)
                                  : std::nullopt,
                        model_out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
