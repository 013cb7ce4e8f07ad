// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Run with no arguments for all criteria or pass criterion numbers.
//
//   1  toy-model law (cdf x^c, expectation references)
//   2  phase-transition exact law and the 1/e limit point
//   3  per-school cutoff tail bounds across the instance battery
//   4  uniform (max-deviation) bounds, plus the m ln m << n sequence
//   5  permutation property suites, exhaustive and randomized
//   6  increasing first differences on the oracle battery
//   7  Monte Carlo calibration against the oracle over 100 master seeds
//   8  single-pass latency, worker scaling and byte-identical aggregates

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rsdlab/generators.hpp"
#include "rsdlab/market.hpp"
#include "rsdlab/mc.hpp"
#include "rsdlab/parallel.hpp"
#include "rsdlab/report.hpp"
#include "rsdlab/rng.hpp"
#include "rsdlab/verify.hpp"

using namespace rsdlab;

namespace {

constexpr std::uint64_t kAcceptanceSeed = 20240715;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

int all_workers() { return resolve_workers(0); }

McConfig cfg_of(std::int64_t reps, std::uint64_t seed, int workers) {
  McConfig cfg;
  cfg.replications = reps;
  cfg.master_seed = seed;
  cfg.parallelism = workers;
  return cfg;
}

const ReportRow* find_row(const ExperimentReport& rep, const std::string& quantity, double x) {
  for (const auto& r : rep.rows) {
    if (r.quantity != quantity) continue;
    if (std::isnan(x) ? std::isnan(r.x) : std::abs(r.x - x) < 1e-12) return &r;
  }
  return nullptr;
}

// ---------------------------------------------------------------- criterion 1
Outcome criterion_toy_law() {
  double t0 = now_seconds();
  auto rep = toy_model_law_check(1000, 10, cfg_of(10000, kAcceptanceSeed + 1, 1));
  double elapsed = now_seconds() - t0;

  const ReportRow* dist = find_row(rep, "cdf_sup_distance", report_nan());
  const ReportRow* closed_form = find_row(rep, "mean_vs_closed_form", report_nan());
  const ReportRow* integral = find_row(rep, "mean_vs_integral", report_nan());

  Outcome out;
  std::ostringstream os;
  if (!dist || !closed_form || !integral) {
    out.pass = false;
    out.detail = "missing report rows";
    return out;
  }
  bool dist_ok = dist->estimate <= 0.02;
  bool mean_ok = integral->pass == 1;
  bool time_ok = elapsed < 30.0;
  out.pass = dist_ok && mean_ok && time_ok;
  os << "sup|F_hat - x^100| = " << format_double(dist->estimate) << " (<= 0.02: "
     << (dist_ok ? "yes" : "NO") << "), mean = " << format_double(integral->estimate)
     << " vs 100/101 = " << format_double(integral->bound) << " within 3 s.e.: "
     << (mean_ok ? "yes" : "NO") << " (closed-form reference 1-1/c = "
     << format_double(closed_form->bound) << " also reported), runtime " << format_double(elapsed) << " s single worker";
  out.detail = os.str();
  return out;
}

// ---------------------------------------------------------------- criterion 2
Outcome criterion_phase_transition() {
  Outcome out;
  std::ostringstream os;
  const std::vector<std::pair<std::int64_t, std::int64_t>> cases = {{2, 2}, {10, 5}, {100, 7}};
  for (auto [m, c] : cases) {
    PhaseTransitionParams params;
    params.m = m;
    params.alpha = std::log(static_cast<double>(m)) / static_cast<double>(c);
    params.epsilon = 0.5;
    auto rep = phase_transition_experiment(params, cfg_of(100000, kAcceptanceSeed + 2, all_workers()));
    int rows = 0;
    for (const auto& r : rep.rows) {
      if (r.quantity != "min_cutoff_survival_lottery") continue;
      ++rows;
      if (r.pass != 1) {
        out.pass = false;
        os << "[m=" << m << ",c=" << c << " t=" << format_double(r.x) << " emp="
           << format_double(r.estimate) << " exact=" << format_double(r.bound) << " FAIL] ";
      }
    }
    if (rows < 5) {
      out.pass = false;
      os << "[m=" << m << " missing rows] ";
    }
  }

  // alpha = 1, m = 10^4: the exact law at the effective probe point sits next
  // to 1/e; a small empirical run rides along in the report
  PhaseTransitionParams big;
  big.m = 10000;
  big.alpha = 1.0;
  big.extra_t.clear();
  auto rep = phase_transition_experiment(big, cfg_of(1000, kAcceptanceSeed + 2, all_workers()));
  const ReportRow* star = nullptr;
  for (const auto& r : rep.rows) {
    if (r.quantity == "exact_law_vs_1_over_e") star = &r;
  }
  if (!star || std::abs(star->estimate - 1.0 / std::exp(1.0)) > 0.01) {
    out.pass = false;
    os << "[m=1e4 exact " << (star ? format_double(star->estimate) : "missing") << " vs 1/e] ";
  } else {
    os << "(m,c) grid within 3 s.e. at 1e5 reps; m=1e4 exact " << format_double(star->estimate)
       << " vs 1/e = " << format_double(1.0 / std::exp(1.0)) << " (|diff| <= 0.01)";
  }
  out.detail = os.str();
  return out;
}

// ------------------------------------------------------- criteria 3 and 4
struct TailBatteryEntry {
  const char* label;
  GeneratorSpec spec;
};

std::vector<TailBatteryEntry> tail_battery() {
  auto mk = [](const char* label, ProfileKind kind, std::int64_t n, std::int64_t m,
               std::vector<std::int64_t> caps, std::int64_t len, std::vector<double> w,
               std::uint64_t salt) {
    TailBatteryEntry e;
    e.label = label;
    e.spec.kind = kind;
    e.spec.n = n;
    e.spec.m = m;
    e.spec.capacities = std::move(caps);
    e.spec.list_length = len;
    e.spec.weights = std::move(w);
    e.spec.seed = kAcceptanceSeed + salt;
    return e;
  };
  std::vector<double> geo;
  for (int i = 0; i < 10; ++i) geo.push_back(std::pow(2.0, -i));
  std::vector<double> harmonic;
  for (int i = 0; i < 20; ++i) harmonic.push_back(1.0 / (i + 1.0));
  return {
      mk("block_1e3_m10", ProfileKind::Block, 1000, 10, {}, 0, {}, 31),
      mk("block_1e4_m10", ProfileKind::Block, 10000, 10, {}, 0, {}, 32),
      mk("block_1e5_m100", ProfileKind::Block, 100000, 100, {}, 0, {}, 33),
      mk("uniform_full_1e3_m5", ProfileKind::UniformFull, 1000, 5,
         std::vector<std::int64_t>(5, 200), 0, {}, 34),
      mk("uniform_full_1e4_m20", ProfileKind::UniformFull, 10000, 20,
         std::vector<std::int64_t>(20, 500), 0, {}, 35),
      mk("uniform_full_1e5_m20", ProfileKind::UniformFull, 100000, 20,
         std::vector<std::int64_t>(20, 5000), 0, {}, 36),
      mk("uniform_partial_1e3_m10", ProfileKind::UniformPartial, 1000, 10,
         std::vector<std::int64_t>(10, 50), 3, {}, 37),
      mk("uniform_partial_1e4_m50", ProfileKind::UniformPartial, 10000, 50,
         std::vector<std::int64_t>(50, 100), 5, {}, 38),
      mk("common_ranking_1e3_m10", ProfileKind::CommonRanking, 1000, 10,
         std::vector<std::int64_t>(10, 100), 0, {}, 39),
      mk("common_ranking_1e4_m10", ProfileKind::CommonRanking, 10000, 10,
         std::vector<std::int64_t>(10, 500), 0, {}, 40),
      mk("plackett_luce_1e3_m10", ProfileKind::PlackettLuce, 1000, 10,
         std::vector<std::int64_t>(10, 80), 0, geo, 41),
      mk("plackett_luce_1e4_m20", ProfileKind::PlackettLuce, 10000, 20,
         std::vector<std::int64_t>(20, 400), 0, harmonic, 42),
      mk("single_school_1e3", ProfileKind::UniformPartial, 1000, 1, {500}, 1, {}, 43),
  };
}

Outcome criteria_tail_bounds(bool check_uniform, Outcome* uniform_out) {
  Outcome out;
  std::ostringstream os, uos;
  std::int64_t school_cells = 0, uniform_cells = 0, instances = 0;
  std::set<std::string> kinds;
  std::set<std::int64_t> sizes;
  bool special_seen = false;
  double special_freq = 1.0;
  Outcome uni;

  for (const auto& entry : tail_battery()) {
    MarketInstance inst = generate_instance(entry.spec);
    ++instances;
    kinds.insert(profile_kind_name(entry.spec.kind));
    sizes.insert(inst.n());
    auto rep = binding_schools_tail_experiment(inst, cfg_of(10000, kAcceptanceSeed + 3, all_workers()));
    std::int64_t binding_schools = 0;
    for (const auto& r : rep.rows) {
      if (r.quantity == "gamma_bar") ++binding_schools;
      if (r.quantity == "cutoff_tail") {
        ++school_cells;
        if (r.pass != 1) {
          out.pass = false;
          os << "[" << entry.label << " school=" << r.school << " eps=" << format_double(r.x)
             << " emp=" << format_double(r.estimate) << " bound=" << format_double(r.bound)
             << " FAIL] ";
        }
      }
      if (r.quantity == "uniform_tail") {
        ++uniform_cells;
        if (r.pass != 1) {
          uni.pass = false;
          uos << "[" << entry.label << " eps=" << format_double(r.x) << " FAIL] ";
        }
        if (std::string(entry.label) == "block_1e5_m100" && std::abs(r.x - 0.05) < 1e-12) {
          special_seen = true;
          special_freq = r.estimate;
        }
      }
    }
    if (binding_schools == 0) {
      out.pass = false;
      os << "[" << entry.label << " no binding school] ";
    }
  }

  bool coverage_ok = instances >= 12 && kinds.size() == 5 && sizes.count(1000) &&
                     sizes.count(10000) && sizes.count(100000);
  if (!coverage_ok) {
    out.pass = false;
    os << "[battery coverage insufficient] ";
  }
  os << instances << " instances, " << school_cells
     << " (school, eps) cells, zero bound violations required";
  out.detail = os.str();

  if (check_uniform) {
    // the m ln m << n sequence: capacities n/m with n=1e5, m=100
    if (!special_seen || special_freq > 0.01) {
      uni.pass = false;
      uos << "[block_1e5_m100 P(max dev >= 0.05) = "
          << (special_seen ? format_double(special_freq) : "missing") << " > 0.01] ";
    }
    uos << uniform_cells << " uniform cells; n=1e5,m=100 max-deviation freq at eps=0.05: "
        << format_double(special_freq);
    uni.detail = uos.str();
    *uniform_out = uni;
  }
  return out;
}

// ---------------------------------------------------------------- criterion 5
Outcome criterion_property_suites() {
  double t0 = now_seconds();
  Outcome out;
  std::ostringstream os;
  std::vector<CheckResult> results;
  results.push_back(exhaustive_transposition_sweep(5, kAcceptanceSeed + 5));
  results.push_back(exhaustive_hamming_sweep(5, kAcceptanceSeed + 5));
  results.push_back(exhaustive_insertion_sweep(5, kAcceptanceSeed + 5));
  results.push_back(exhaustive_decomposition_sweep(5, kAcceptanceSeed + 5));
  results.push_back(exhaustive_equivalence_sweep(5, kAcceptanceSeed + 5));

  CheckOptions opts;
  opts.trials = 100000;
  opts.seed = kAcceptanceSeed + 5;
  opts.max_n = 50;
  results.push_back(check_transposition_lipschitz(opts));
  results.push_back(check_hamming_lipschitz(opts));
  results.push_back(check_insertion_inequality(opts));
  results.push_back(check_decomposition(opts));
  results.push_back(check_cutoff_equivalence(opts));

  std::int64_t total_trials = 0;
  for (const auto& r : results) {
    total_trials += r.trials;
    if (!r.pass) {
      out.pass = false;
      os << "[" << r.property << " violations=" << r.violations;
      if (r.first_witness) os << " witness: " << r.first_witness->detail;
      os << "] ";
    }
  }
  double elapsed = now_seconds() - t0;
  if (elapsed >= 300.0) {
    out.pass = false;
    os << "[runtime " << format_double(elapsed) << " s >= 300 s] ";
  }
  os << total_trials << " checks (exhaustive n<=5 plus 1e5 randomized per property, n<=50), "
     << format_double(elapsed) << " s";
  out.detail = os.str();
  return out;
}

// ---------------------------------------------------------------- criterion 6
Outcome criterion_increasing_differences() {
  Outcome out;
  std::ostringstream os;
  auto battery = oracle_battery(kAcceptanceSeed + 6);
  std::int64_t count = 0;
  for (const auto& inst : battery) {
    auto res = check_increasing_differences(inst);
    ++count;
    if (!res.pass) {
      out.pass = false;
      os << "[instance " << count << " witness: "
         << (res.first_witness ? res.first_witness->detail : "?") << "] ";
    }
  }
  if (count < 20) {
    out.pass = false;
    os << "[only " << count << " instances] ";
  }
  os << count << " oracle instances (n <= 8), all first-difference sequences nondecreasing in [0,1]";
  out.detail = os.str();
  return out;
}

// ---------------------------------------------------------------- criterion 7
Outcome criterion_oracle_calibration() {
  Outcome out;
  std::ostringstream os;
  const int seeds = 100;
  auto battery = calibration_battery(kAcceptanceSeed + 7);
  std::vector<std::uint8_t> seed_pass(seeds, 1);
  parallel_replications(seeds, all_workers(), [&](int, std::int64_t s) {
    std::uint64_t master = mix64(kAcceptanceSeed + 7 + 0x1234ULL * static_cast<std::uint64_t>(s));
    for (const auto& inst : battery) {
      auto rep = mc_vs_oracle(inst, cfg_of(10000, master, 1));
      if (!rep.pass) seed_pass[static_cast<std::size_t>(s)] = 0;
    }
  });
  int passed = std::accumulate(seed_pass.begin(), seed_pass.end(), 0);
  out.pass = passed >= 99;
  os << passed << "/100 master seeds calibrate within 3 conservative s.e. on "
     << battery.size() << " instances at 1e4 replications (>= 99 required)";
  out.detail = os.str();
  return out;
}

// ---------------------------------------------------------------- criterion 8
Outcome criterion_performance() {
  Outcome out;
  std::ostringstream os;

  GeneratorSpec spec;
  spec.kind = ProfileKind::UniformPartial;
  spec.n = 1000000;
  spec.m = 1000;
  spec.capacities = std::vector<std::int64_t>(1000, 1000);
  spec.list_length = 10;
  spec.seed = kAcceptanceSeed + 8;
  MarketInstance inst = generate_instance(spec);

  Rng rng = derive_stream(kAcceptanceSeed + 8, "acceptance/perf", 0);
  Permutation pi = sample_permutation(inst.n(), rng);
  Assignment a;
  std::vector<std::int64_t> seats;
  double t0 = now_seconds();
  run_rsd_into(inst, pi, a, seats);
  CutoffVector cv = cutoffs_from(inst, a);
  double single_pass = now_seconds() - t0;
  bool single_ok = single_pass < 1.0;

  // 1e3 seeded replications, aggregated as integer rank sums per school;
  // identical bytes required across worker counts
  auto run_reps = [&](int workers, double* seconds) {
    std::vector<std::vector<std::int64_t>> sums(
        static_cast<std::size_t>(resolve_workers(workers)),
        std::vector<std::int64_t>(static_cast<std::size_t>(inst.m()), 0));
    std::vector<Permutation> perms(sums.size());
    std::vector<Assignment> assigns(sums.size());
    std::vector<std::vector<std::int64_t>> scratch(sums.size());
    double start = now_seconds();
    parallel_replications(1000, workers, [&](int w, std::int64_t rep) {
      Rng r = derive_stream(kAcceptanceSeed + 8, "acceptance/perf_reps", static_cast<std::uint64_t>(rep));
      sample_permutation_into(inst.n(), r, perms[static_cast<std::size_t>(w)]);
      run_rsd_into(inst, perms[static_cast<std::size_t>(w)], assigns[static_cast<std::size_t>(w)],
                   scratch[static_cast<std::size_t>(w)]);
      auto& sum = sums[static_cast<std::size_t>(w)];
      const auto& er = assigns[static_cast<std::size_t>(w)].exhaustion_rank;
      for (std::int64_t k = 0; k < inst.m(); ++k) sum[static_cast<std::size_t>(k)] += er[static_cast<std::size_t>(k)];
    });
    *seconds = now_seconds() - start;
    std::vector<std::int64_t> total(static_cast<std::size_t>(inst.m()), 0);
    for (const auto& s : sums) {
      for (std::size_t k = 0; k < total.size(); ++k) total[k] += s[k];
    }
    return total;
  };

  double sec1 = 0.0, sec8 = 0.0;
  auto agg1 = run_reps(1, &sec1);
  auto agg8 = run_reps(8, &sec8);
  bool identical = agg1 == agg8;
  double speedup = sec8 > 0.0 ? sec1 / sec8 : 0.0;
  bool speed_ok = speedup >= 5.0;

  out.pass = single_ok && identical && speed_ok;
  os << "single pass (n=1e6, m=1e3, 10-school lists) " << format_double(single_pass)
     << " s (< 1 s: " << (single_ok ? "yes" : "NO") << "); 1e3 replications: 1 worker "
     << format_double(sec1) << " s, 8 workers " << format_double(sec8) << " s, speedup "
     << format_double(speedup) << "x (>= 5x: " << (speed_ok ? "yes" : "NO")
     << ", machine has " << all_workers() << " hardware threads); aggregates byte-identical: "
     << (identical ? "yes" : "NO");
  out.detail = os.str();
  (void)cv;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8};

  bool need3 = std::count(selected.begin(), selected.end(), 3) > 0;
  bool need4 = std::count(selected.begin(), selected.end(), 4) > 0;

  Outcome results[9];
  Outcome uniform_out;
  bool have34 = false;

  for (int c : selected) {
    switch (c) {
      case 1: results[1] = criterion_toy_law(); break;
      case 2: results[2] = criterion_phase_transition(); break;
      case 3:
      case 4:
        if (!have34) {
          results[3] = criteria_tail_bounds(true, &uniform_out);
          results[4] = uniform_out;
          have34 = true;
        }
        break;
      case 5: results[5] = criterion_property_suites(); break;
      case 6: results[6] = criterion_increasing_differences(); break;
      case 7: results[7] = criterion_oracle_calibration(); break;
      case 8: results[8] = criterion_performance(); break;
      default:
        std::cerr << "unknown criterion " << c << "\n";
        return 2;
    }
  }

  static const char* names[9] = {"",
                                 "toy-model law",
                                 "phase-transition exact law",
                                 "cutoff tail bounds",
                                 "uniform tail bounds",
                                 "property suites",
                                 "increasing differences",
                                 "oracle calibration",
                                 "performance"};
  bool all_ok = true;
  std::set<int> printed;
  for (int c : selected) {
    if (printed.count(c)) continue;
    printed.insert(c);
    if ((c == 3 && !need3) || (c == 4 && !need4)) continue;
    const Outcome& o = results[c];
    all_ok &= o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c << " (" << names[c]
              << "): " << o.detail << "\n";
  }
  return all_ok ? 0 : 1;
}
