#include "rsdlab/mc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "rsdlab/error.hpp"
#include "rsdlab/generators.hpp"
#include "rsdlab/parallel.hpp"
#include "rsdlab/rng.hpp"

namespace rsdlab {

namespace {

// Batch A (reference-point estimation) and batch B (deviation counting) run
// on distinct labels so the two-batch protocol is independent by stream.
constexpr const char* kDemandStream = "mc/demand";
constexpr const char* kTailStream = "mc/tail_dev";
constexpr const char* kLotteryStream = "mc/lottery";
constexpr const char* kToyStream = "mc/toy_law";
constexpr const char* kPhaseStream = "mc/phase";
constexpr const char* kFixedTStream = "mc/fixed_t_dev";

class Timer {
 public:
  double ms() const {
    auto dt = std::chrono::steady_clock::now() - t0_;
    return std::chrono::duration<double, std::milli>(dt).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

double binomial_std_err(double p, std::int64_t reps) {
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(reps));
}

struct RsdScratch {
  Permutation pi;
  Assignment a;
  std::vector<std::int64_t> seats_left;
};

// Caps the worker count so per-worker count matrices stay inside a fixed
// memory budget.
int workers_for_cells(int requested, std::int64_t cells) {
  int w = resolve_workers(requested);
  const std::int64_t budget_cells = 1'500'000'000 / 4;
  std::int64_t max_w = std::max<std::int64_t>(1, budget_cells / std::max<std::int64_t>(cells, 1));
  if (w > max_w) w = static_cast<int>(max_w);
  return w;
}

double theorem_bound(double epsilon, double alpha, double gamma_bar) {
  return 17.0 * std::exp(-epsilon * alpha / (32.0 * gamma_bar));
}

double corollary_bound(double epsilon, double m, double eta) {
  return 17.0 * std::exp(std::log(m) - epsilon * eta / 32.0);
}

// (1 - t^c)^m evaluated stably for large m.
double exact_min_cutoff_survival(double t, double c, double m) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  double tc = std::pow(t, c);
  if (tc >= 1.0) return 0.0;
  return std::exp(m * std::log1p(-tc));
}

ExperimentReport make_report(std::string name, const McConfig& cfg) {
  ExperimentReport rep;
  rep.experiment = std::move(name);
  rep.master_seed = cfg.master_seed;
  rep.replications = cfg.replications;
  rep.build_id = build_id_string();
  return rep;
}

}  // namespace

void validate_mc_config(const McConfig& cfg) {
  if (cfg.replications < 1) fail(ErrorCode::BadConfig, "replications must be >= 1");
  double prev = 0.0;
  for (double e : cfg.epsilon_grid) {
    if (!(e > prev && e < 1.0))
      fail(ErrorCode::BadConfig, "epsilon_grid must be strictly ascending within (0,1)");
    prev = e;
  }
  if (cfg.parallelism < 0) fail(ErrorCode::BadConfig, "parallelism must be >= 0");
}

double MeanDemandCurve::std_err(std::int64_t t) const {
  if (replications < 2) return report_nan();
  auto s = static_cast<double>(sum[static_cast<std::size_t>(t)]);
  auto s2 = static_cast<double>(sum_sq[static_cast<std::size_t>(t)]);
  auto b = static_cast<double>(replications);
  double var = (s2 - s * s / b) / (b - 1.0);
  return std::sqrt(std::max(var, 0.0) / b);
}

double LotteryMatrix::std_err(std::int64_t i, std::int64_t col) const {
  return binomial_std_err(prob(i, col), replications);
}

MeanDemandCurve estimate_mean_demand(const MarketInstance& inst, School k, const McConfig& cfg) {
  validate_mc_config(cfg);
  if (k < 0 || k >= inst.m()) fail(ErrorCode::SchoolIndexOutOfRange, "school " + std::to_string(k));
  const std::int64_t n = inst.n();
  const std::int64_t reps = cfg.replications;
  int workers = resolve_workers(cfg.parallelism);

  struct Ctx {
    RsdScratch scratch;
    std::vector<std::int64_t> sum, sum_sq;
  };
  std::vector<Ctx> ctxs(static_cast<std::size_t>(workers));

  parallel_replications(reps, workers, [&](int w, std::int64_t rep) {
    auto& ctx = ctxs[static_cast<std::size_t>(w)];
    if (ctx.sum.empty()) {
      ctx.sum.assign(static_cast<std::size_t>(n) + 1, 0);
      ctx.sum_sq.assign(static_cast<std::size_t>(n) + 1, 0);
    }
    Rng rng = derive_stream(cfg.master_seed, kDemandStream, static_cast<std::uint64_t>(rep));
    sample_permutation_into(n, rng, ctx.scratch.pi);
    run_rsd_into(inst, ctx.scratch.pi, ctx.scratch.a, ctx.scratch.seats_left);
    std::int64_t tau = 0;
    for (Rank r = 0; r < n; ++r) {
      Student s = ctx.scratch.pi.student_at[static_cast<std::size_t>(r)];
      if (inst.weakly_prefers(s, k, ctx.scratch.a.school_of[static_cast<std::size_t>(s)])) ++tau;
      ctx.sum[static_cast<std::size_t>(r) + 1] += tau;
      ctx.sum_sq[static_cast<std::size_t>(r) + 1] += tau * tau;
    }
  });

  MeanDemandCurve curve;
  curve.school = k;
  curve.replications = reps;
  curve.sum.assign(static_cast<std::size_t>(n) + 1, 0);
  curve.sum_sq.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& ctx : ctxs) {
    if (ctx.sum.empty()) continue;
    for (std::size_t t = 0; t <= static_cast<std::size_t>(n); ++t) {
      curve.sum[t] += ctx.sum[t];
      curve.sum_sq[t] += ctx.sum_sq[t];
    }
  }
  return curve;
}

GammaBarEstimate gamma_bar_from_curve(const MeanDemandCurve& curve, std::int64_t capacity,
                                      std::int64_t n) {
  GammaBarEstimate est;
  // integer comparison: mean(t) >= capacity  <=>  sum[t] >= reps * capacity
  const std::int64_t target = curve.replications * capacity;
  for (std::int64_t t = 0; t <= n; ++t) {
    if (curve.sum[static_cast<std::size_t>(t)] >= target) {
      est.binding = true;
      est.crossing_t = t;
      est.value = static_cast<double>(t) / static_cast<double>(n);
      return est;
    }
  }
  est.binding = false;
  est.crossing_t = -1;
  est.value = 1.0;
  return est;
}

GammaBarEstimate estimate_gamma_bar(const MarketInstance& inst, School k, const McConfig& cfg) {
  MeanDemandCurve curve = estimate_mean_demand(inst, k, cfg);
  return gamma_bar_from_curve(curve, inst.capacity(k), inst.n());
}

std::vector<GammaBarEstimate> estimate_gamma_bar_all(const MarketInstance& inst,
                                                     const McConfig& cfg) {
  validate_mc_config(cfg);
  const std::int64_t n = inst.n();
  const std::int64_t m = inst.m();
  const std::int64_t reps = cfg.replications;
  const std::int64_t cells = n * m;
  int workers = workers_for_cells(cfg.parallelism, cells);

  struct Ctx {
    RsdScratch scratch;
    std::vector<std::uint32_t> counts;  // (rank, school) -> weak-preference hits
  };
  std::vector<Ctx> ctxs(static_cast<std::size_t>(workers));

  parallel_replications(reps, workers, [&](int w, std::int64_t rep) {
    auto& ctx = ctxs[static_cast<std::size_t>(w)];
    if (ctx.counts.empty()) ctx.counts.assign(static_cast<std::size_t>(cells), 0);
    Rng rng = derive_stream(cfg.master_seed, kDemandStream, static_cast<std::uint64_t>(rep));
    sample_permutation_into(n, rng, ctx.scratch.pi);
    run_rsd_into(inst, ctx.scratch.pi, ctx.scratch.a, ctx.scratch.seats_left);
    std::uint32_t* counts = ctx.counts.data();
    for (Rank r = 0; r < n; ++r) {
      Student s = ctx.scratch.pi.student_at[static_cast<std::size_t>(r)];
      School assigned = ctx.scratch.a.school_of[static_cast<std::size_t>(s)];
      std::uint32_t* row = counts + static_cast<std::size_t>(r) * static_cast<std::size_t>(m);
      // a student weakly prefers exactly the listed schools at or before
      // their assigned one (all listed schools when unmatched)
      for (School q : inst.prefs(s)) {
        ++row[static_cast<std::size_t>(q)];
        if (q == assigned) break;
      }
    }
  });

  std::vector<std::int64_t> totals(static_cast<std::size_t>(cells), 0);
  for (const auto& ctx : ctxs) {
    if (ctx.counts.empty()) continue;
    for (std::int64_t c = 0; c < cells; ++c) totals[static_cast<std::size_t>(c)] += ctx.counts[static_cast<std::size_t>(c)];
  }

  std::vector<GammaBarEstimate> out(static_cast<std::size_t>(m));
  for (School k = 0; k < m; ++k) {
    const std::int64_t target = reps * inst.capacity(k);
    std::int64_t acc = 0;
    GammaBarEstimate est;
    est.binding = false;
    est.crossing_t = -1;
    est.value = 1.0;
    for (std::int64_t t = 1; t <= n; ++t) {
      acc += totals[static_cast<std::size_t>((t - 1) * m + k)];
      if (acc >= target) {
        est.binding = true;
        est.crossing_t = t;
        est.value = static_cast<double>(t) / static_cast<double>(n);
        break;
      }
    }
    out[static_cast<std::size_t>(k)] = est;
  }
  return out;
}

LotteryMatrix estimate_lottery_probabilities(const MarketInstance& inst, const McConfig& cfg) {
  validate_mc_config(cfg);
  const std::int64_t n = inst.n();
  const std::int64_t m = inst.m();
  const std::int64_t reps = cfg.replications;
  const std::int64_t cells = n * (m + 1);
  int workers = workers_for_cells(cfg.parallelism, cells);

  struct Ctx {
    RsdScratch scratch;
    std::vector<std::int64_t> counts;
  };
  std::vector<Ctx> ctxs(static_cast<std::size_t>(workers));

  parallel_replications(reps, workers, [&](int w, std::int64_t rep) {
    auto& ctx = ctxs[static_cast<std::size_t>(w)];
    if (ctx.counts.empty()) ctx.counts.assign(static_cast<std::size_t>(cells), 0);
    Rng rng = derive_stream(cfg.master_seed, kLotteryStream, static_cast<std::uint64_t>(rep));
    sample_permutation_into(n, rng, ctx.scratch.pi);
    run_rsd_into(inst, ctx.scratch.pi, ctx.scratch.a, ctx.scratch.seats_left);
    for (Student i = 0; i < n; ++i) {
      School k = ctx.scratch.a.school_of[static_cast<std::size_t>(i)];
      std::int64_t col = k == kUnmatched ? m : k;
      ++ctx.counts[static_cast<std::size_t>(i * (m + 1) + col)];
    }
  });

  LotteryMatrix mat;
  mat.n = n;
  mat.m = m;
  mat.replications = reps;
  mat.counts.assign(static_cast<std::size_t>(cells), 0);
  for (const auto& ctx : ctxs) {
    if (ctx.counts.empty()) continue;
    for (std::int64_t c = 0; c < cells; ++c) mat.counts[static_cast<std::size_t>(c)] += ctx.counts[static_cast<std::size_t>(c)];
  }
  return mat;
}

namespace {

struct TailCounts {
  std::int64_t reps_b = 0;
  // exceed[k][j] counts |gamma_k - gamma_bar_k| >= grid[j] in batch B
  std::vector<std::int64_t> school_exceed;
  std::vector<std::int64_t> max_exceed;
};

TailCounts run_tail_batch(const MarketInstance& inst, const std::vector<GammaBarEstimate>& gbar,
                          const McConfig& cfg) {
  const std::int64_t n = inst.n();
  const std::int64_t m = inst.m();
  const auto G = static_cast<std::int64_t>(cfg.epsilon_grid.size());
  const std::int64_t reps = cfg.replications;
  int workers = resolve_workers(cfg.parallelism);

  struct Ctx {
    RsdScratch scratch;
    std::vector<std::int64_t> school_exceed, max_exceed;
  };
  std::vector<Ctx> ctxs(static_cast<std::size_t>(workers));

  parallel_replications(reps, workers, [&](int w, std::int64_t rep) {
    auto& ctx = ctxs[static_cast<std::size_t>(w)];
    if (ctx.school_exceed.empty()) {
      ctx.school_exceed.assign(static_cast<std::size_t>(m * G), 0);
      ctx.max_exceed.assign(static_cast<std::size_t>(G), 0);
    }
    Rng rng = derive_stream(cfg.master_seed, kTailStream, static_cast<std::uint64_t>(rep));
    sample_permutation_into(n, rng, ctx.scratch.pi);
    run_rsd_into(inst, ctx.scratch.pi, ctx.scratch.a, ctx.scratch.seats_left);
    double max_dev = 0.0;
    for (School k = 0; k < m; ++k) {
      std::int64_t er = ctx.scratch.a.exhaustion_rank[static_cast<std::size_t>(k)];
      double gamma = er >= 0 ? static_cast<double>(er + 1) / static_cast<double>(n) : 1.0;
      double dev = std::abs(gamma - gbar[static_cast<std::size_t>(k)].value);
      if (dev > max_dev) max_dev = dev;
      for (std::int64_t j = 0; j < G && cfg.epsilon_grid[static_cast<std::size_t>(j)] <= dev; ++j) {
        ++ctx.school_exceed[static_cast<std::size_t>(k * G + j)];
      }
    }
    for (std::int64_t j = 0; j < G && cfg.epsilon_grid[static_cast<std::size_t>(j)] <= max_dev; ++j) {
      ++ctx.max_exceed[static_cast<std::size_t>(j)];
    }
  });

  TailCounts out;
  out.reps_b = reps;
  out.school_exceed.assign(static_cast<std::size_t>(m * G), 0);
  out.max_exceed.assign(static_cast<std::size_t>(G), 0);
  for (const auto& ctx : ctxs) {
    if (ctx.school_exceed.empty()) continue;
    for (std::int64_t c = 0; c < m * G; ++c) out.school_exceed[static_cast<std::size_t>(c)] += ctx.school_exceed[static_cast<std::size_t>(c)];
    for (std::int64_t j = 0; j < G; ++j) out.max_exceed[static_cast<std::size_t>(j)] += ctx.max_exceed[static_cast<std::size_t>(j)];
  }
  return out;
}

void append_school_tail_rows(ExperimentReport& rep, const MarketInstance& inst,
                             const std::vector<GammaBarEstimate>& gbar, const TailCounts& tail,
                             const McConfig& cfg, School k) {
  const auto G = static_cast<std::int64_t>(cfg.epsilon_grid.size());
  const auto& est = gbar[static_cast<std::size_t>(k)];
  rep.rows.push_back({"gamma_bar", k, report_nan(), est.value, report_nan(), report_nan(),
                      kPassNA});
  for (std::int64_t j = 0; j < G; ++j) {
    double eps = cfg.epsilon_grid[static_cast<std::size_t>(j)];
    double freq = static_cast<double>(tail.school_exceed[static_cast<std::size_t>(k * G + j)]) /
                  static_cast<double>(tail.reps_b);
    double se = binomial_std_err(freq, tail.reps_b);
    double bound = theorem_bound(eps, static_cast<double>(inst.capacity(k)), est.value);
    rep.rows.push_back({"cutoff_tail", k, eps, freq, se, bound, freq <= bound + 3.0 * se ? 1 : 0});
  }
}

}  // namespace

ExperimentReport cutoff_tail_experiment(const MarketInstance& inst, School k, const McConfig& cfg) {
  validate_mc_config(cfg);
  if (k < 0 || k >= inst.m()) fail(ErrorCode::SchoolIndexOutOfRange, "school " + std::to_string(k));
  Timer timer;
  // batch A: reference point; batch B: deviations (fresh stream)
  std::vector<GammaBarEstimate> gbar = estimate_gamma_bar_all(inst, cfg);
  if (!gbar[static_cast<std::size_t>(k)].binding)
    fail(ErrorCode::NotBindingSchool,
         "school " + std::to_string(k) + " never reaches capacity in mean demand");
  TailCounts tail = run_tail_batch(inst, gbar, cfg);

  ExperimentReport rep = make_report("cutoff-tail", cfg);
  append_school_tail_rows(rep, inst, gbar, tail, cfg, k);
  rep.notes.push_back("two-batch protocol: gamma_bar from stream mc/demand, deviations from mc/tail_dev");
  rep.wall_ms = timer.ms();
  return rep;
}

ExperimentReport uniform_tail_experiment(const MarketInstance& inst, const McConfig& cfg) {
  validate_mc_config(cfg);
  Timer timer;
  const std::int64_t m = inst.m();
  std::vector<GammaBarEstimate> gbar = estimate_gamma_bar_all(inst, cfg);
  std::string offenders;
  for (School k = 0; k < m; ++k) {
    if (!gbar[static_cast<std::size_t>(k)].binding) {
      offenders += (offenders.empty() ? "" : ",") + std::to_string(k);
    }
  }
  if (!offenders.empty())
    fail(ErrorCode::NotBindingSchool, "schools not binding in mean demand: " + offenders);

  TailCounts tail = run_tail_batch(inst, gbar, cfg);

  double eta = std::numeric_limits<double>::infinity();
  for (School k = 0; k < m; ++k) {
    double ratio = static_cast<double>(inst.capacity(k)) / gbar[static_cast<std::size_t>(k)].value;
    eta = std::min(eta, ratio);
  }

  ExperimentReport rep = make_report("uniform-tail", cfg);
  for (School k = 0; k < m; ++k) append_school_tail_rows(rep, inst, gbar, tail, cfg, k);
  const auto G = static_cast<std::int64_t>(cfg.epsilon_grid.size());
  for (std::int64_t j = 0; j < G; ++j) {
    double eps = cfg.epsilon_grid[static_cast<std::size_t>(j)];
    double freq = static_cast<double>(tail.max_exceed[static_cast<std::size_t>(j)]) /
                  static_cast<double>(tail.reps_b);
    double se = binomial_std_err(freq, tail.reps_b);
    double bound = corollary_bound(eps, static_cast<double>(m), eta);
    rep.rows.push_back(
        {"uniform_tail", kAllSchools, eps, freq, se, bound, freq <= bound + 3.0 * se ? 1 : 0});
  }
  rep.notes.push_back("eta = min_k capacity_k / gamma_bar_k = " + format_double(eta));
  rep.wall_ms = timer.ms();
  return rep;
}

ExperimentReport binding_schools_tail_experiment(const MarketInstance& inst, const McConfig& cfg) {
  validate_mc_config(cfg);
  Timer timer;
  const std::int64_t m = inst.m();
  std::vector<GammaBarEstimate> gbar = estimate_gamma_bar_all(inst, cfg);
  TailCounts tail = run_tail_batch(inst, gbar, cfg);

  ExperimentReport rep = make_report("tail-battery", cfg);
  bool all_binding = true;
  std::string skipped;
  for (School k = 0; k < m; ++k) {
    if (gbar[static_cast<std::size_t>(k)].binding) {
      append_school_tail_rows(rep, inst, gbar, tail, cfg, k);
    } else {
      all_binding = false;
      skipped += (skipped.empty() ? "" : ",") + std::to_string(k);
    }
  }
  if (all_binding) {
    double eta = std::numeric_limits<double>::infinity();
    for (School k = 0; k < m; ++k) {
      eta = std::min(eta, static_cast<double>(inst.capacity(k)) / gbar[static_cast<std::size_t>(k)].value);
    }
    const auto G = static_cast<std::int64_t>(cfg.epsilon_grid.size());
    for (std::int64_t j = 0; j < G; ++j) {
      double eps = cfg.epsilon_grid[static_cast<std::size_t>(j)];
      double freq = static_cast<double>(tail.max_exceed[static_cast<std::size_t>(j)]) /
                    static_cast<double>(tail.reps_b);
      double se = binomial_std_err(freq, tail.reps_b);
      double bound = corollary_bound(eps, static_cast<double>(m), eta);
      rep.rows.push_back(
          {"uniform_tail", kAllSchools, eps, freq, se, bound, freq <= bound + 3.0 * se ? 1 : 0});
    }
    rep.notes.push_back("eta = min_k capacity_k / gamma_bar_k = " + format_double(eta));
  } else {
    rep.notes.push_back("uniform rows skipped; schools not binding in mean demand: " + skipped);
  }
  rep.wall_ms = timer.ms();
  return rep;
}

ExperimentReport toy_model_law_check(std::int64_t n, std::int64_t m, const McConfig& cfg) {
  validate_mc_config(cfg);
  if (m < 1 || n < 1 || n % m != 0)
    fail(ErrorCode::SpecInvalid, "toy model requires m >= 1 and m | n");
  Timer timer;
  const std::int64_t c = n / m;

  GeneratorSpec gspec;
  gspec.kind = ProfileKind::Block;
  gspec.n = n;
  gspec.m = m;
  gspec.seed = cfg.master_seed;
  MarketInstance inst = generate_instance(gspec);

  const std::int64_t reps = cfg.replications;
  // slot-per-replication storage keeps float aggregation order fixed
  std::vector<double> cutoff0(static_cast<std::size_t>(reps));
  std::vector<double> cutoff1(static_cast<std::size_t>(m > 1 ? reps : 0));
  int workers = resolve_workers(cfg.parallelism);

  struct Ctx {
    RsdScratch scratch;
    std::vector<double> lot_max;
  };
  std::vector<Ctx> ctxs(static_cast<std::size_t>(workers));

  parallel_replications(reps, workers, [&](int w, std::int64_t rep) {
    auto& ctx = ctxs[static_cast<std::size_t>(w)];
    Rng rng = derive_stream(cfg.master_seed, kToyStream, static_cast<std::uint64_t>(rep));
    LotteryDraw ld = lottery_model_permutation(n, rng);
    run_rsd_into(inst, ld.pi, ctx.scratch.a, ctx.scratch.seats_left);
    ctx.lot_max.assign(static_cast<std::size_t>(m), 0.0);
    for (Student i = 0; i < n; ++i) {
      School k = ctx.scratch.a.school_of[static_cast<std::size_t>(i)];
      if (k == kUnmatched) continue;
      auto& mx = ctx.lot_max[static_cast<std::size_t>(k)];
      double d = ld.draws[static_cast<std::size_t>(i)];
      if (d > mx) mx = d;
    }
    cutoff0[static_cast<std::size_t>(rep)] = ctx.lot_max[0];
    if (m > 1) cutoff1[static_cast<std::size_t>(rep)] = ctx.lot_max[1];
  });

  // KS statistic against F(x) = x^c
  std::vector<double> sorted = cutoff0;
  std::sort(sorted.begin(), sorted.end());
  double sup_dist = 0.0;
  for (std::int64_t i = 0; i < reps; ++i) {
    double f = std::pow(sorted[static_cast<std::size_t>(i)], static_cast<double>(c));
    double hi = static_cast<double>(i + 1) / static_cast<double>(reps) - f;
    double lo = f - static_cast<double>(i) / static_cast<double>(reps);
    sup_dist = std::max({sup_dist, hi, lo});
  }

  double sum = 0.0;
  for (double v : cutoff0) sum += v;
  double mean = sum / static_cast<double>(reps);
  double ss = 0.0;
  for (double v : cutoff0) ss += (v - mean) * (v - mean);
  double se = reps > 1 ? std::sqrt(ss / (static_cast<double>(reps) - 1.0) / static_cast<double>(reps))
                       : report_nan();

  const double ref_closed_form = 1.0 - 1.0 / static_cast<double>(c);
  const double ref_integral = 1.0 - 1.0 / static_cast<double>(c + 1);

  ExperimentReport rep = make_report("toy-law", cfg);
  rep.rows.push_back({"cdf_sup_distance", 0, report_nan(), sup_dist, report_nan(), report_nan(), kPassNA});
  for (double x : {0.25, 0.5, 0.75}) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    double emp = static_cast<double>(it - sorted.begin()) / static_cast<double>(reps);
    rep.rows.push_back({"cdf_empirical", 0, x, emp, binomial_std_err(emp, reps), report_nan(), kPassNA});
    rep.rows.push_back({"cdf_reference", 0, x, std::pow(x, static_cast<double>(c)), report_nan(),
                        report_nan(), kPassNA});
  }
  rep.rows.push_back({"mean_empirical", 0, report_nan(), mean, se, report_nan(), kPassNA});
  bool pass_integral = std::abs(mean - ref_integral) <= 3.0 * se;
  // the closed-form reference is reported for comparison only; asserting it
  // would fail any sufficiently precise run, since the true mean of the max
  // of c uniforms is 1 - 1/(c+1)
  rep.rows.push_back({"mean_vs_closed_form", 0, report_nan(), mean, se, ref_closed_form, kPassNA});
  rep.rows.push_back({"mean_vs_integral", 0, report_nan(), mean, se, ref_integral, pass_integral ? 1 : 0});
  rep.notes.push_back("expectation references disagree: closed form 1-1/c = " + format_double(ref_closed_form) +
                      " vs direct integral of the cdf 1-1/(c+1) = " + format_double(ref_integral) +
                      "; both reported");
  if (c == 1) {
    rep.notes.push_back("c=1: closed form gives 0 but the max of one uniform draw has mean 1/2; "
                        "the integral reference applies");
  }
  rep.wall_ms = timer.ms();
  return rep;
}

ExperimentReport phase_transition_experiment(const PhaseTransitionParams& params,
                                             const McConfig& cfg) {
  validate_mc_config(cfg);
  if (params.m < 2) fail(ErrorCode::SpecInvalid, "phase transition requires m >= 2");
  if (!(params.alpha > 0.0)) fail(ErrorCode::SpecInvalid, "alpha must be positive");
  if (params.epsilon < 0.0) fail(ErrorCode::SpecInvalid, "epsilon must be >= 0");
  Timer timer;

  const std::int64_t m = params.m;
  const double n_target = static_cast<double>(m) * std::log(static_cast<double>(m)) / params.alpha;
  // keep m | n: round the block size, not n itself
  auto c = static_cast<std::int64_t>(std::llround(n_target / static_cast<double>(m)));
  if (c < 1) c = 1;
  const std::int64_t n = c * m;
  // probe points use the alpha consistent with the integer block size, so the
  // exact law at t = exp(-alpha_eff) is (1 - 1/m)^m on the nose
  const double alpha_eff = std::log(static_cast<double>(m)) / static_cast<double>(c);
  const double t_star = std::exp(-alpha_eff);
  const double t_plus = std::exp(-(1.0 + params.epsilon) * alpha_eff);

  std::vector<double> t_values = params.extra_t;
  t_values.push_back(t_star);
  t_values.push_back(t_plus);

  GeneratorSpec gspec;
  gspec.kind = ProfileKind::Block;
  gspec.n = n;
  gspec.m = m;
  gspec.seed = cfg.master_seed;
  MarketInstance inst = generate_instance(gspec);

  const std::int64_t reps = cfg.replications;
  const auto T = static_cast<std::int64_t>(t_values.size());
  int workers = resolve_workers(cfg.parallelism);

  struct Ctx {
    RsdScratch scratch;
    std::vector<double> lot_max;
    std::vector<std::int64_t> lot_exceed, rank_exceed;
  };
  std::vector<Ctx> ctxs(static_cast<std::size_t>(workers));

  parallel_replications(reps, workers, [&](int w, std::int64_t rep) {
    auto& ctx = ctxs[static_cast<std::size_t>(w)];
    if (ctx.lot_exceed.empty()) {
      ctx.lot_exceed.assign(static_cast<std::size_t>(T), 0);
      ctx.rank_exceed.assign(static_cast<std::size_t>(T), 0);
    }
    Rng rng = derive_stream(cfg.master_seed, kPhaseStream, static_cast<std::uint64_t>(rep));
    LotteryDraw ld = lottery_model_permutation(n, rng);
    run_rsd_into(inst, ld.pi, ctx.scratch.a, ctx.scratch.seats_left);
    ctx.lot_max.assign(static_cast<std::size_t>(m), 0.0);
    for (Student i = 0; i < n; ++i) {
      School k = ctx.scratch.a.school_of[static_cast<std::size_t>(i)];
      if (k == kUnmatched) continue;
      auto& mx = ctx.lot_max[static_cast<std::size_t>(k)];
      double d = ld.draws[static_cast<std::size_t>(i)];
      if (d > mx) mx = d;
    }
    double min_lot = 1.0;
    for (double v : ctx.lot_max) min_lot = std::min(min_lot, v);
    double min_rank = 1.0;
    for (School k = 0; k < m; ++k) {
      std::int64_t er = ctx.scratch.a.exhaustion_rank[static_cast<std::size_t>(k)];
      double gamma = er >= 0 ? static_cast<double>(er + 1) / static_cast<double>(n) : 1.0;
      min_rank = std::min(min_rank, gamma);
    }
    for (std::int64_t j = 0; j < T; ++j) {
      if (min_lot > t_values[static_cast<std::size_t>(j)]) ++ctx.lot_exceed[static_cast<std::size_t>(j)];
      if (min_rank > t_values[static_cast<std::size_t>(j)]) ++ctx.rank_exceed[static_cast<std::size_t>(j)];
    }
  });

  std::vector<std::int64_t> lot_total(static_cast<std::size_t>(T), 0);
  std::vector<std::int64_t> rank_total(static_cast<std::size_t>(T), 0);
  for (const auto& ctx : ctxs) {
    if (ctx.lot_exceed.empty()) continue;
    for (std::int64_t j = 0; j < T; ++j) {
      lot_total[static_cast<std::size_t>(j)] += ctx.lot_exceed[static_cast<std::size_t>(j)];
      rank_total[static_cast<std::size_t>(j)] += ctx.rank_exceed[static_cast<std::size_t>(j)];
    }
  }

  ExperimentReport rep = make_report("phase-transition", cfg);
  rep.notes.push_back("n = " + std::to_string(n) + ", c = " + std::to_string(c) +
                      ", alpha_requested = " + format_double(params.alpha) +
                      ", alpha_effective = " + format_double(alpha_eff));
  for (std::int64_t j = 0; j < T; ++j) {
    double t = t_values[static_cast<std::size_t>(j)];
    double exact = exact_min_cutoff_survival(t, static_cast<double>(c), static_cast<double>(m));
    double freq = static_cast<double>(lot_total[static_cast<std::size_t>(j)]) / static_cast<double>(reps);
    // binomial test against the known law: the s.e. under the reference
    // probability, which stays positive when the empirical count is zero
    double se = binomial_std_err(exact, reps);
    rep.rows.push_back({"min_cutoff_survival_lottery", kAllSchools, t, freq, se, exact,
                        std::abs(freq - exact) <= 3.0 * se ? 1 : 0});
    double rfreq = static_cast<double>(rank_total[static_cast<std::size_t>(j)]) / static_cast<double>(reps);
    rep.rows.push_back({"min_cutoff_survival_rank", kAllSchools, t, rfreq,
                        binomial_std_err(rfreq, reps), report_nan(), kPassNA});
  }
  double exact_star = exact_min_cutoff_survival(t_star, static_cast<double>(c), static_cast<double>(m));
  double exact_plus = exact_min_cutoff_survival(t_plus, static_cast<double>(c), static_cast<double>(m));
  rep.rows.push_back({"exact_law_vs_1_over_e", kAllSchools, t_star, exact_star, report_nan(),
                      1.0 / std::exp(1.0), kPassNA});
  rep.rows.push_back({"exact_law_vs_one", kAllSchools, t_plus, exact_plus, report_nan(), 1.0,
                      kPassNA});
  rep.wall_ms = timer.ms();
  return rep;
}

ExperimentReport fixed_t_deviation_experiment(const MarketInstance& inst, School k, std::int64_t t,
                                              const McConfig& cfg) {
  validate_mc_config(cfg);
  const std::int64_t n = inst.n();
  if (k < 0 || k >= inst.m()) fail(ErrorCode::SchoolIndexOutOfRange, "school " + std::to_string(k));
  if (t < 0 || t > n) fail(ErrorCode::BadConfig, "t must lie in [0, n]");
  Timer timer;
  const std::int64_t reps = cfg.replications;
  int workers = resolve_workers(cfg.parallelism);

  // batch A: mean of X_t
  std::vector<std::int64_t> tau_sums(static_cast<std::size_t>(workers), 0);
  {
    std::vector<RsdScratch> scratch(static_cast<std::size_t>(workers));
    parallel_replications(reps, workers, [&](int w, std::int64_t rep) {
      auto& sc = scratch[static_cast<std::size_t>(w)];
      Rng rng = derive_stream(cfg.master_seed, kDemandStream, static_cast<std::uint64_t>(rep));
      sample_permutation_into(n, rng, sc.pi);
      run_rsd_into(inst, sc.pi, sc.a, sc.seats_left);
      std::int64_t tau = 0;
      for (Rank r = 0; r < t; ++r) {
        Student s = sc.pi.student_at[static_cast<std::size_t>(r)];
        if (inst.weakly_prefers(s, k, sc.a.school_of[static_cast<std::size_t>(s)])) ++tau;
      }
      tau_sums[static_cast<std::size_t>(w)] += tau;
    });
  }
  std::int64_t tau_sum = 0;
  for (auto v : tau_sums) tau_sum += v;
  const double mean_x = static_cast<double>(tau_sum) / static_cast<double>(reps) / static_cast<double>(n);

  // batch B: deviation frequencies
  const auto G = static_cast<std::int64_t>(cfg.epsilon_grid.size());
  std::vector<std::vector<std::int64_t>> exceed(static_cast<std::size_t>(workers));
  {
    std::vector<RsdScratch> scratch(static_cast<std::size_t>(workers));
    parallel_replications(reps, workers, [&](int w, std::int64_t rep) {
      auto& sc = scratch[static_cast<std::size_t>(w)];
      auto& ex = exceed[static_cast<std::size_t>(w)];
      if (ex.empty()) ex.assign(static_cast<std::size_t>(G), 0);
      Rng rng = derive_stream(cfg.master_seed, kFixedTStream, static_cast<std::uint64_t>(rep));
      sample_permutation_into(n, rng, sc.pi);
      run_rsd_into(inst, sc.pi, sc.a, sc.seats_left);
      std::int64_t tau = 0;
      for (Rank r = 0; r < t; ++r) {
        Student s = sc.pi.student_at[static_cast<std::size_t>(r)];
        if (inst.weakly_prefers(s, k, sc.a.school_of[static_cast<std::size_t>(s)])) ++tau;
      }
      double dev = std::abs(static_cast<double>(tau) / static_cast<double>(n) - mean_x);
      for (std::int64_t j = 0; j < G && cfg.epsilon_grid[static_cast<std::size_t>(j)] <= dev; ++j) ++ex[static_cast<std::size_t>(j)];
    });
  }

  ExperimentReport rep = make_report("fixed-t-deviation", cfg);
  rep.rows.push_back({"mean_x_t", k, static_cast<double>(t), mean_x, report_nan(), report_nan(), kPassNA});
  for (std::int64_t j = 0; j < G; ++j) {
    double s = cfg.epsilon_grid[static_cast<std::size_t>(j)];
    std::int64_t cnt = 0;
    for (const auto& ex : exceed) {
      if (!ex.empty()) cnt += ex[static_cast<std::size_t>(j)];
    }
    double freq = static_cast<double>(cnt) / static_cast<double>(reps);
    double se = binomial_std_err(freq, reps);
    double bound = 8.0 * std::exp(-static_cast<double>(n) * s / 32.0);
    rep.rows.push_back({"fixed_t_deviation", k, s, freq, se, bound, freq <= bound + 3.0 * se ? 1 : 0});
  }
  rep.wall_ms = timer.ms();
  return rep;
}

}  // namespace rsdlab
