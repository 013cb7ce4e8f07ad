#pragma once

#include <cstdint>
#include <vector>

#include "rsdlab/market.hpp"
#include "rsdlab/report.hpp"

namespace rsdlab {

// Shared Monte Carlo settings. Every replication draws its randomness from
// (master_seed, purpose label, replication index) only, so results are
// independent of the parallelism degree.
struct McConfig {
  std::int64_t replications = 10000;
  std::uint64_t master_seed = 0;
  std::vector<double> epsilon_grid{0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
  int parallelism = 1;
};

void validate_mc_config(const McConfig& cfg);

// Estimated t -> E[tau_k(t, Pi)]. Sums are exact integers, so aggregates are
// byte-identical across worker counts.
struct MeanDemandCurve {
  School school = 0;
  std::int64_t replications = 0;
  std::vector<std::int64_t> sum;     // length n+1
  std::vector<std::int64_t> sum_sq;  // length n+1

  double mean(std::int64_t t) const {
    return static_cast<double>(sum[static_cast<std::size_t>(t)]) / static_cast<double>(replications);
  }
  double std_err(std::int64_t t) const;
};

struct GammaBarEstimate {
  bool binding = false;
  std::int64_t crossing_t = -1;  // first t with estimated mean demand >= capacity
  double value = 1.0;            // crossing_t / n when binding
};

MeanDemandCurve estimate_mean_demand(const MarketInstance& inst, School k, const McConfig& cfg);

// Crossing of the estimated mean demand with the school's capacity; NotBinding
// is reported through the flag, never as an error.
GammaBarEstimate estimate_gamma_bar(const MarketInstance& inst, School k, const McConfig& cfg);
GammaBarEstimate gamma_bar_from_curve(const MeanDemandCurve& curve, std::int64_t capacity,
                                      std::int64_t n);

// One pass for all schools; same estimator and random stream as the
// single-school version.
std::vector<GammaBarEstimate> estimate_gamma_bar_all(const MarketInstance& inst, const McConfig& cfg);

// Empirical assignment frequencies; column m holds Unmatched. Row counts sum
// to the replication count exactly.
struct LotteryMatrix {
  std::int64_t n = 0;
  std::int64_t m = 0;
  std::int64_t replications = 0;
  std::vector<std::int64_t> counts;  // n x (m+1)

  std::int64_t count(std::int64_t i, std::int64_t col) const {
    return counts[static_cast<std::size_t>(i * (m + 1) + col)];
  }
  double prob(std::int64_t i, std::int64_t col) const {
    return static_cast<double>(count(i, col)) / static_cast<double>(replications);
  }
  double std_err(std::int64_t i, std::int64_t col) const;
};

LotteryMatrix estimate_lottery_probabilities(const MarketInstance& inst, const McConfig& cfg);

// Tail experiments use a two-batch protocol: gamma_bar comes from one batch
// of replications, deviation frequencies from an independent second batch, so
// the reference point is not fitted to the same noise it is tested on.
//
// Row layout (see report.hpp for the column contract):
//   gamma_bar      one row per school (estimate only)
//   cutoff_tail    school k, x = epsilon, bound = 17 exp{-eps alpha_k / (32 gbar_k)}
//   uniform_tail   school -1, x = epsilon, bound = 17 exp{ln m - eps eta / 32}
ExperimentReport cutoff_tail_experiment(const MarketInstance& inst, School k, const McConfig& cfg);
ExperimentReport uniform_tail_experiment(const MarketInstance& inst, const McConfig& cfg);

// Battery-friendly variant: per-school tail rows for every mean-binding
// school; uniform rows only when all schools bind (otherwise a note lists the
// skipped schools instead of failing).
ExperimentReport binding_schools_tail_experiment(const MarketInstance& inst, const McConfig& cfg);

// Block-market law check in lottery units: empirical CDF of school 0's cutoff
// against x^c plus the two candidate expectation references (the closed-form
// 1 - 1/c and the direct integral 1 - 1/(c+1)); both are reported.
ExperimentReport toy_model_law_check(std::int64_t n, std::int64_t m, const McConfig& cfg);

struct PhaseTransitionParams {
  std::int64_t m = 2;
  double alpha = 1.0;    // targets n = m ln m / alpha, rounded to a multiple of m
  double epsilon = 0.5;  // second probe at t = exp(-(1+epsilon) alpha)
  std::vector<double> extra_t{0.3, 0.5, 0.8};
};

// Minimum-cutoff survival probabilities on the Block market near the
// m ln m threshold, against the exact finite-m law (1 - t^c)^m. Because c is
// rounded to an integer, probe points use the effective alpha = ln(m)/c; the
// requested and effective values are both reported.
ExperimentReport phase_transition_experiment(const PhaseTransitionParams& params,
                                             const McConfig& cfg);

// Deviation of X_t = tau_k(t, Pi)/n from its estimated mean at one fixed t,
// against the tail 8 exp{-n s / 32}. Two-batch protocol as above.
ExperimentReport fixed_t_deviation_experiment(const MarketInstance& inst, School k, std::int64_t t,
                                              const McConfig& cfg);

}  // namespace rsdlab
