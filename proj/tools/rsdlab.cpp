// rsdlab command line: validate/generate instances, run single seeded
// simulations, run the Monte Carlo experiments and the verifier suites.
//
// Exit codes are stable: 0 success, 2 input error, 3 experiment bound
// failure, 4 property violation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsdlab/error.hpp"
#include "rsdlab/generators.hpp"
#include "rsdlab/io.hpp"
#include "rsdlab/market.hpp"
#include "rsdlab/mc.hpp"
#include "rsdlab/report.hpp"
#include "rsdlab/rng.hpp"
#include "rsdlab/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rsdlab;

namespace {

constexpr std::uint64_t kBuiltinDefaultSeed = 715517;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> reps;
  std::optional<int> workers;
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file");
  cmd->add_option("--seed", opts.seed, "master seed (overrides config and RSD_LAB_SEED)");
  cmd->add_option("--reps", opts.reps, "replication count override");
  cmd->add_option("--workers", opts.workers, "worker count override (0 = all cores)");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--format", opts.format, "report table format")
      ->check(CLI::IsMember({"csv", "text"}));
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) fail(ErrorCode::FileNotFound, path);
  try {
    json j;
    is >> j;
    if (!j.is_object()) fail(ErrorCode::BadConfig, "config root must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    fail(ErrorCode::BadConfig, std::string("config parse: ") + e.what());
  }
}

std::uint64_t env_or_builtin_seed() {
  if (const char* env = std::getenv("RSD_LAB_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      fail(ErrorCode::BadConfig, "RSD_LAB_SEED is not a valid integer");
    }
  }
  return kBuiltinDefaultSeed;
}

std::uint64_t resolve_master_seed(const json& cfg, const CommonOpts& opts) {
  if (opts.seed) return *opts.seed;
  if (cfg.contains("mc") && cfg["mc"].contains("master_seed"))
    return cfg["mc"]["master_seed"].get<std::uint64_t>();
  return env_or_builtin_seed();
}

McConfig resolve_mc(const json& cfg, const CommonOpts& opts) {
  McConfig mc;
  mc.master_seed = resolve_master_seed(cfg, opts);
  try {
    if (cfg.contains("mc")) {
      const json& j = cfg["mc"];
      if (j.contains("replications")) mc.replications = j["replications"].get<std::int64_t>();
      if (j.contains("epsilon_grid")) mc.epsilon_grid = j["epsilon_grid"].get<std::vector<double>>();
      if (j.contains("parallelism")) mc.parallelism = j["parallelism"].get<int>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::BadConfig, std::string("mc config shape: ") + e.what());
  }
  if (opts.reps) mc.replications = *opts.reps;
  if (opts.workers) mc.parallelism = *opts.workers;
  validate_mc_config(mc);
  return mc;
}

GeneratorSpec resolve_generator(const json& g, std::uint64_t fallback_seed) {
  GeneratorSpec spec;
  try {
    spec.kind = profile_kind_from_name(g.at("kind").get<std::string>());
    spec.n = g.at("n").get<std::int64_t>();
    spec.m = g.at("m").get<std::int64_t>();
    if (g.contains("capacities")) spec.capacities = g["capacities"].get<std::vector<std::int64_t>>();
    if (g.contains("list_length")) spec.list_length = g["list_length"].get<std::int64_t>();
    if (g.contains("weights")) spec.weights = g["weights"].get<std::vector<double>>();
    spec.seed = g.contains("seed") ? g["seed"].get<std::uint64_t>() : fallback_seed;
  } catch (const json::exception& e) {
    fail(ErrorCode::BadConfig, std::string("generator config shape: ") + e.what());
  }
  return spec;
}

MarketInstance resolve_instance(const json& cfg, std::uint64_t master_seed) {
  if (cfg.contains("instance_file")) {
    return load_instance(cfg["instance_file"].get<std::string>());
  }
  if (cfg.contains("generator")) {
    return generate_instance(resolve_generator(cfg["generator"], master_seed));
  }
  fail(ErrorCode::BadConfig, "config needs either instance_file or generator");
}

// Hash of the effective run parameters; embedded in all outputs so a report
// can be traced back to the exact configuration that produced it.
std::string effective_config_hash(const json& cfg, const McConfig& mc, const std::string& sub) {
  json eff = cfg;
  eff["subcommand"] = sub;
  eff["mc"]["replications"] = mc.replications;
  eff["mc"]["master_seed"] = mc.master_seed;
  eff["mc"]["epsilon_grid"] = mc.epsilon_grid;
  // parallelism deliberately excluded: it must not affect results
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash_label(eff.dump())));
  return std::string(buf);
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::FileNotFound, "cannot create output directory: " + dir);
}

void emit_report(const ExperimentReport& rep, const CommonOpts& opts) {
  ensure_out_dir(opts.out_dir);
  if (opts.format == "text") {
    write_text_file(rep, opts.out_dir + "/report.txt");
  } else {
    write_csv_file(rep, opts.out_dir + "/report.csv");
  }
  write_summary_file(rep, opts.out_dir + "/summary.json");
  std::cerr << "[rsdlab] " << rep.experiment << " wall_ms=" << rep.wall_ms << "\n";
}

int finish_experiment(const ExperimentReport& rep, const CommonOpts& opts) {
  emit_report(rep, opts);
  if (rep.all_pass()) {
    std::cout << "experiment " << rep.experiment << ": all bound checks passed\n";
    return 0;
  }
  std::cout << "experiment " << rep.experiment << ": BOUND FAILURES\n";
  for (const ReportRow* row : rep.failing_rows()) {
    std::cout << "  " << row->quantity << " school=" << row->school << " x=" << format_double(row->x)
              << " estimate=" << format_double(row->estimate) << " bound=" << format_double(row->bound)
              << "\n";
  }
  return 3;
}

int cmd_generate(const CommonOpts& opts) {
  json cfg = load_config(opts.config_path);
  McConfig mc = resolve_mc(cfg, opts);
  if (!cfg.contains("generator")) fail(ErrorCode::BadConfig, "generate needs a generator config");
  MarketInstance inst = generate_instance(resolve_generator(cfg["generator"], mc.master_seed));
  ensure_out_dir(opts.out_dir);
  save_instance(inst, opts.out_dir + "/instance.json");
  std::cout << "wrote " << opts.out_dir << "/instance.json (n=" << inst.n() << ", m=" << inst.m()
            << ")\n";
  return 0;
}

int cmd_simulate(const CommonOpts& opts) {
  json cfg = load_config(opts.config_path);
  McConfig mc = resolve_mc(cfg, opts);
  MarketInstance inst = resolve_instance(cfg, mc.master_seed);
  std::string hash = effective_config_hash(cfg, mc, "simulate");

  Rng rng = derive_stream(mc.master_seed, "cli/simulate", 0);
  Permutation pi = sample_permutation(inst.n(), rng);
  Assignment a = run_rsd(inst, pi);
  CutoffVector cv = cutoffs_from(inst, a);

  ensure_out_dir(opts.out_dir);
  save_permutation(pi, opts.out_dir + "/permutation.json");
  save_assignment(a, opts.out_dir + "/assignment.json");

  std::ofstream cut(opts.out_dir + "/cutoffs.csv", std::ios::binary);
  cut << "# experiment=simulate master_seed=" << mc.master_seed << " replications=1"
      << " config_hash=" << hash << " build=" << build_id_string() << "\n";
  cut << "school,gamma,binding\n";
  for (std::int64_t k = 0; k < inst.m(); ++k) {
    cut << k << ',' << format_double(cv.gamma[static_cast<std::size_t>(k)]) << ','
        << static_cast<int>(cv.binding[static_cast<std::size_t>(k)]) << '\n';
  }
  cut.close();

  std::ofstream traj(opts.out_dir + "/trajectories.csv", std::ios::binary);
  traj << "# experiment=simulate master_seed=" << mc.master_seed << " replications=1"
       << " config_hash=" << hash << " build=" << build_id_string() << "\n";
  traj << "t";
  for (std::int64_t k = 0; k < inst.m(); ++k) traj << ",tau_" << k;
  traj << '\n';
  std::vector<DemandTrajectory> trajs;
  trajs.reserve(static_cast<std::size_t>(inst.m()));
  for (School k = 0; k < inst.m(); ++k) trajs.push_back(demand_trajectory_from(inst, pi, a, k));
  for (std::int64_t t = 0; t <= inst.n(); ++t) {
    traj << t;
    for (const auto& tr : trajs) traj << ',' << tr.values[static_cast<std::size_t>(t)];
    traj << '\n';
  }
  traj.close();

  nlohmann::ordered_json meta;
  meta["experiment"] = "simulate";
  meta["master_seed"] = mc.master_seed;
  meta["replications"] = 1;
  meta["config_hash"] = hash;
  meta["build"] = build_id_string();
  meta["n"] = inst.n();
  meta["m"] = inst.m();
  write_text_file_raw(opts.out_dir + "/run_summary.json", meta.dump(2) + "\n");

  std::cout << "simulate: wrote permutation.json, assignment.json, cutoffs.csv, trajectories.csv\n";
  return 0;
}

int cmd_experiment(const CommonOpts& opts) {
  json cfg = load_config(opts.config_path);
  McConfig mc = resolve_mc(cfg, opts);
  if (!cfg.contains("experiment") || !cfg["experiment"].contains("name"))
    fail(ErrorCode::BadConfig, "experiment config needs experiment.name");
  const json& ex = cfg["experiment"];
  std::string name = ex["name"].get<std::string>();

  ExperimentReport rep;
  try {
    if (name == "toy-law") {
      std::int64_t n = ex.contains("n") ? ex["n"].get<std::int64_t>()
                                        : cfg.at("generator").at("n").get<std::int64_t>();
      std::int64_t m = ex.contains("m") ? ex["m"].get<std::int64_t>()
                                        : cfg.at("generator").at("m").get<std::int64_t>();
      rep = toy_model_law_check(n, m, mc);
    } else if (name == "phase-transition") {
      PhaseTransitionParams params;
      params.m = ex.at("m").get<std::int64_t>();
      if (ex.contains("c")) {
        auto c = ex["c"].get<std::int64_t>();
        if (c < 1) fail(ErrorCode::BadConfig, "c must be >= 1");
        params.alpha = std::log(static_cast<double>(params.m)) / static_cast<double>(c);
      } else if (ex.contains("alpha")) {
        params.alpha = ex["alpha"].get<double>();
      }
      if (ex.contains("epsilon")) params.epsilon = ex["epsilon"].get<double>();
      if (ex.contains("extra_t")) params.extra_t = ex["extra_t"].get<std::vector<double>>();
      rep = phase_transition_experiment(params, mc);
    } else if (name == "tail") {
      MarketInstance inst = resolve_instance(cfg, mc.master_seed);
      auto school = static_cast<School>(ex.contains("school") ? ex["school"].get<std::int64_t>() : 0);
      rep = cutoff_tail_experiment(inst, school, mc);
    } else if (name == "uniform-tail") {
      MarketInstance inst = resolve_instance(cfg, mc.master_seed);
      rep = uniform_tail_experiment(inst, mc);
    } else if (name == "lottery") {
      MarketInstance inst = resolve_instance(cfg, mc.master_seed);
      LotteryMatrix mat = estimate_lottery_probabilities(inst, mc);
      rep.experiment = "lottery";
      rep.master_seed = mc.master_seed;
      rep.replications = mc.replications;
      rep.build_id = build_id_string();
      for (std::int64_t i = 0; i < mat.n; ++i) {
        for (std::int64_t col = 0; col <= mat.m; ++col) {
          rep.rows.push_back({col == mat.m ? "lottery_prob_unmatched" : "lottery_prob", col == mat.m ? kAllSchools : col,
                              static_cast<double>(i), mat.prob(i, col), mat.std_err(i, col),
                              report_nan(), kPassNA});
        }
      }
      rep.notes.push_back("row counts sum to the replication count exactly");
    } else {
      fail(ErrorCode::BadConfig,
           "unknown experiment (expected toy-law, phase-transition, tail, uniform-tail, lottery): " +
               name);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::BadConfig, std::string("experiment config shape: ") + e.what());
  }
  rep.config_hash = effective_config_hash(cfg, mc, "experiment/" + name);
  return finish_experiment(rep, opts);
}

int cmd_verify(const CommonOpts& opts) {
  json cfg = load_config(opts.config_path);
  McConfig mc = resolve_mc(cfg, opts);
  std::string suite = "all";
  CheckOptions check;
  check.seed = mc.master_seed;
  bool have_oracle_target = cfg.contains("generator") || cfg.contains("instance_file");
  try {
    if (cfg.contains("verify")) {
      const json& v = cfg["verify"];
      if (v.contains("suite")) suite = v["suite"].get<std::string>();
      if (v.contains("trials")) check.trials = v["trials"].get<std::int64_t>();
      if (v.contains("max_n")) check.max_n = v["max_n"].get<std::int64_t>();
      if (v.contains("inject_fault")) check.inject_fault = v["inject_fault"].get<bool>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::BadConfig, std::string("verify config shape: ") + e.what());
  }

  std::vector<CheckResult> results;
  bool calibration_ok = true;
  std::string calibration_note;

  auto run_lipschitz = [&] {
    results.push_back(check_transposition_lipschitz(check));
    results.push_back(check_hamming_lipschitz(check));
    results.push_back(exhaustive_transposition_sweep(5, check.seed));
    results.push_back(exhaustive_hamming_sweep(4, check.seed));
    results.push_back(exhaustive_decomposition_sweep(4, check.seed));
    results.push_back(check_decomposition(check));
  };
  auto run_insertion = [&] {
    results.push_back(check_insertion_inequality(check));
    results.push_back(exhaustive_insertion_sweep(5, check.seed));
  };
  auto run_equivalence = [&] {
    results.push_back(check_cutoff_equivalence(check));
    results.push_back(exhaustive_equivalence_sweep(5, check.seed));
  };
  auto run_differences = [&] {
    bool first = true;
    for (const auto& inst : oracle_battery(check.seed)) {
      results.push_back(check_increasing_differences(inst, check.inject_fault && first));
      first = false;
    }
  };
  auto run_oracle = [&] {
    if (have_oracle_target) {
      MarketInstance inst = resolve_instance(cfg, mc.master_seed);
      CalibrationReport rep = mc_vs_oracle(inst, mc);  // throws InstanceTooLarge beyond n=9
      calibration_ok = rep.pass;
      calibration_note = "cells=" + std::to_string(rep.cells) +
                         " failures=" + std::to_string(rep.failures);
    } else {
      for (const auto& inst : calibration_battery(check.seed)) {
        CalibrationReport rep = mc_vs_oracle(inst, mc);
        if (!rep.pass) calibration_ok = false;
      }
      calibration_note = "calibration battery";
    }
    CheckResult r;
    r.property = "mc_vs_oracle";
    r.pass = calibration_ok;
    r.trials = mc.replications;
    r.violations = calibration_ok ? 0 : 1;
    if (!calibration_ok) r.first_witness = Witness{calibration_note};
    results.push_back(r);
  };

  if (suite == "lipschitz") run_lipschitz();
  else if (suite == "insertion") run_insertion();
  else if (suite == "equivalence") run_equivalence();
  else if (suite == "differences") run_differences();
  else if (suite == "oracle") run_oracle();
  else if (suite == "all") {
    run_lipschitz();
    run_insertion();
    run_equivalence();
    run_differences();
    run_oracle();
  } else {
    fail(ErrorCode::BadConfig,
         "unknown suite (expected oracle, lipschitz, insertion, differences, equivalence, all): " +
             suite);
  }

  bool all_pass = true;
  nlohmann::ordered_json verdict;
  verdict["suite"] = suite;
  verdict["seed"] = mc.master_seed;
  verdict["build"] = build_id_string();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    if (!r.pass) all_pass = false;
    nlohmann::ordered_json item;
    item["property"] = r.property;
    item["pass"] = r.pass;
    item["trials"] = r.trials;
    item["violations"] = r.violations;
    if (r.first_witness) item["witness"] = r.first_witness->detail;
    arr.push_back(std::move(item));
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.property << " (trials=" << r.trials
              << ", violations=" << r.violations << ")\n";
    if (r.first_witness) std::cout << "  witness: " << r.first_witness->detail << "\n";
  }
  verdict["results"] = std::move(arr);
  verdict["all_pass"] = all_pass;
  ensure_out_dir(opts.out_dir);
  write_text_file_raw(opts.out_dir + "/verdict.json", verdict.dump(2) + "\n");
  return all_pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rsdlab: random serial dictatorship simulation and verification laboratory"};
  app.require_subcommand(1);

  CommonOpts gen_opts, sim_opts, exp_opts, ver_opts;
  CLI::App* gen = app.add_subcommand("generate", "write an instance file from a generator spec");
  add_common_flags(gen, gen_opts);
  CLI::App* sim = app.add_subcommand("simulate", "one seeded RSD run: assignment, cutoffs, trajectories");
  add_common_flags(sim, sim_opts);
  CLI::App* exp = app.add_subcommand("experiment", "seeded Monte Carlo experiments with bound checks");
  add_common_flags(exp, exp_opts);
  CLI::App* ver = app.add_subcommand("verify", "exact oracle and property suites");
  add_common_flags(ver, ver_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error code=2 class=BadArguments msg=\"" << e.what() << "\"\n";
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_generate(gen_opts);
    if (sim->parsed()) return cmd_simulate(sim_opts);
    if (exp->parsed()) return cmd_experiment(exp_opts);
    if (ver->parsed()) return cmd_verify(ver_opts);
  } catch (const Error& e) {
    std::cerr << "error code=2 class=" << error_code_name(e.code()) << " msg=\"" << e.what()
              << "\"\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error code=2 class=Internal msg=\"" << e.what() << "\"\n";
    return 2;
  }
  return 2;
}
