#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rsdlab/market.hpp"
#include "rsdlab/mc.hpp"

namespace rsdlab {

// 9! RSD runs finish in seconds and every aggregate stays inside int64.
inline constexpr std::int64_t kOracleMaxN = 9;

// Exact distributional quantities from full permutation enumeration. All
// aggregation is integer arithmetic with implied denominator n! (or n! times
// nothing for demand sums); no floating point touches the oracle path.
struct OracleResult {
  std::int64_t n = 0;
  std::int64_t m = 0;
  std::int64_t permutations = 0;  // n!

  std::vector<std::vector<std::int64_t>> demand_sum;  // [k][t], sum of tau_k(t) over all orders
  std::vector<std::map<std::int64_t, std::int64_t>> cutoff_rank_count;  // [k]: fill rank -> count
  std::vector<std::int64_t> nonbinding_count;                           // [k]
  std::vector<std::int64_t> lottery_counts;                             // n x (m+1), col m = Unmatched

  double mean_demand(std::int64_t k, std::int64_t t) const {
    return static_cast<double>(demand_sum[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)]) /
           static_cast<double>(permutations);
  }
  // numerator of E[tau_k(t)] - E[tau_k(t-1)] over denominator n!
  std::int64_t first_diff_num(std::int64_t k, std::int64_t t) const {
    const auto& row = demand_sum[static_cast<std::size_t>(k)];
    return row[static_cast<std::size_t>(t)] - row[static_cast<std::size_t>(t) - 1];
  }
  std::int64_t lottery_count(std::int64_t i, std::int64_t col) const {
    return lottery_counts[static_cast<std::size_t>(i * (m + 1) + col)];
  }
  double lottery_prob(std::int64_t i, std::int64_t col) const {
    return static_cast<double>(lottery_count(i, col)) / static_cast<double>(permutations);
  }
  GammaBarEstimate gamma_bar(std::int64_t k, std::int64_t capacity) const;
};

// Iterates all n! picking orders. Throws InstanceTooLarge beyond kOracleMaxN.
OracleResult enumerate_oracle(const MarketInstance& inst);

struct Witness {
  std::string detail;
};

struct CheckResult {
  std::string property;
  bool pass = true;
  std::int64_t trials = 0;
  std::int64_t violations = 0;
  std::optional<Witness> first_witness;
};

struct CheckOptions {
  std::int64_t trials = 10000;
  std::uint64_t seed = 0;
  std::int64_t max_n = 30;
  // Self-test knob: perturbs one evaluation so the checker must trip and
  // report a witness; used to prove the suites are not vacuously green.
  bool inject_fault = false;
};

// Deterministic mix of every generator kind plus hand-crafted edges (an empty
// preference list, capacity >= n, m = 1, n = 1), sized to max_n.
std::vector<MarketInstance> property_battery(std::int64_t max_n, std::uint64_t seed);

// Battery for the Lipschitz lemmas and the insertion inequality. Those
// bounds require that a student's matched/unmatched status cannot depend on
// the picking order; in congested markets a single transposition can trigger
// a displacement cascade that moves tau_k by 3 or more (see the pinned
// counterexample in the tests). Instances here keep every student matchable
// under every order: Block structure, full lists with total capacity >= n,
// partial lists whose listed capacity covers n, plus the harmless edges
// (empty list, m = 1, capacity >= n).
std::vector<MarketInstance> lipschitz_battery(std::int64_t max_n, std::uint64_t seed);

// About 22 oracle-sized instances (n <= 8) for the increasing-differences
// sweep, spanning all generator kinds and assorted capacities.
std::vector<MarketInstance> oracle_battery(std::uint64_t seed);

// Small instances tuned for Monte Carlo calibration against the oracle.
std::vector<MarketInstance> calibration_battery(std::uint64_t seed);

// Randomized property suites. Each trial draws (instance, permutation, ...)
// from the battery and asserts the named inequality; the first violation is
// reported as a minimal witness.
CheckResult check_transposition_lipschitz(const CheckOptions& opts);
CheckResult check_hamming_lipschitz(const CheckOptions& opts);
CheckResult check_insertion_inequality(const CheckOptions& opts);
CheckResult check_decomposition(const CheckOptions& opts);
CheckResult check_cutoff_equivalence(const CheckOptions& opts);

// Exhaustive sweeps over every permutation (and transposition / insertion
// slot / pair / t / k) of the n <= max_n battery instances; max_n is capped
// at 5 to keep n! pairs tractable.
CheckResult exhaustive_transposition_sweep(std::int64_t max_n, std::uint64_t seed);
CheckResult exhaustive_hamming_sweep(std::int64_t max_n, std::uint64_t seed);
CheckResult exhaustive_insertion_sweep(std::int64_t max_n, std::uint64_t seed);
CheckResult exhaustive_decomposition_sweep(std::int64_t max_n, std::uint64_t seed);
CheckResult exhaustive_equivalence_sweep(std::int64_t max_n, std::uint64_t seed);

// Exact check that t -> E[tau_k(t)] - E[tau_k(t-1)] is nondecreasing and lies
// in [0,1], by integer comparison of oracle numerators.
CheckResult check_increasing_differences(const MarketInstance& inst, bool inject_fault = false);

// Monte Carlo calibration against the exact oracle. Standard errors are the
// conservative half-range/sqrt(B) bounds, so the criterion is meaningful at
// any replication count (at B=1 every cell passes by construction).
struct CalibrationCell {
  std::string quantity;
  std::int64_t school = -1;
  std::int64_t index = -1;  // student or t, depending on quantity
  double estimate = 0.0;
  double exact = 0.0;
  double std_err = 0.0;
};

struct CalibrationReport {
  bool pass = true;
  std::int64_t cells = 0;
  std::int64_t failures = 0;
  double worst_z = 0.0;
  std::optional<CalibrationCell> worst_cell;
  std::optional<CalibrationCell> first_failure;
};

CalibrationReport mc_vs_oracle(const MarketInstance& inst, const McConfig& cfg);

}  // namespace rsdlab
