#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsdlab/market.hpp"
#include "rsdlab/permutation.hpp"
#include "rsdlab/rng.hpp"

namespace rsdlab {

enum class ProfileKind { Block, UniformFull, UniformPartial, CommonRanking, PlackettLuce };

const char* profile_kind_name(ProfileKind k);
ProfileKind profile_kind_from_name(const std::string& name);

// Seeded recipe for a preference profile. Capacities may be left empty, in
// which case all schools get n/m seats (requires m | n). Block additionally
// requires capacities to equal n/m exactly.
struct GeneratorSpec {
  ProfileKind kind = ProfileKind::Block;
  std::int64_t n = 0;
  std::int64_t m = 0;
  std::vector<std::int64_t> capacities;  // empty -> n/m each
  std::int64_t list_length = 0;          // UniformPartial only, in [1, m]
  std::vector<double> weights;           // PlackettLuce only, positive, length m
  std::uint64_t seed = 0;
};

// Builds the instance for a spec. Deterministic in (spec, seed); throws
// SpecInvalid naming the violated constraint.
//
//   Block          student i lists only school floor(i / (n/m))
//   UniformFull    independent uniform random total order of all m schools
//   UniformPartial uniform random ordered subset of the given length
//   CommonRanking  every student lists 0, 1, ..., m-1
//   PlackettLuce   sequential sampling without replacement by weight
MarketInstance generate_instance(const GeneratorSpec& spec);

// Uniform over all n! orders via an unbiased Fisher-Yates shuffle.
Permutation sample_permutation(std::int64_t n, Rng& rng);

// Allocation-free variant for replication loops.
void sample_permutation_into(std::int64_t n, Rng& rng, Permutation& out);

struct LotteryDraw {
  Permutation pi;
  std::vector<double> draws;  // per-student uniforms; rank 0 = smallest draw
};

// The lottery-number model: each student draws an independent uniform number
// and students pick in ascending-draw order. Equal draws (a measure-zero tie,
// possible only through float collisions) break toward the lower student id.
LotteryDraw lottery_model_permutation(std::int64_t n, Rng& rng);

// Rank assembly from given draws; exposed so the sort order is testable.
Permutation permutation_from_draws(const std::vector<double>& draws);

}  // namespace rsdlab
