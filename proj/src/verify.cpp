#include "rsdlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "rsdlab/error.hpp"
#include "rsdlab/generators.hpp"
#include "rsdlab/rng.hpp"

namespace rsdlab {

namespace {

std::int64_t factorial(std::int64_t n) {
  std::int64_t f = 1;
  for (std::int64_t i = 2; i <= n; ++i) f *= i;
  return f;
}

std::string perm_to_string(const Permutation& pi) {
  std::ostringstream os;
  os << "student_at=[";
  for (std::size_t r = 0; r < pi.student_at.size(); ++r) {
    if (r) os << ',';
    os << pi.student_at[r];
  }
  os << ']';
  return os.str();
}

std::string instance_brief(const MarketInstance& inst) {
  std::ostringstream os;
  os << "n=" << inst.n() << " m=" << inst.m() << " caps=[";
  for (std::size_t k = 0; k < inst.capacities().size(); ++k) {
    if (k) os << ',';
    os << inst.capacities()[k];
  }
  os << "] prefs=";
  for (std::int64_t i = 0; i < inst.n(); ++i) {
    os << '[';
    auto p = inst.prefs(i);
    for (std::size_t q = 0; q < p.size(); ++q) {
      if (q) os << ',';
      os << p[q];
    }
    os << ']';
  }
  return os.str();
}

// tau_k(t) for all schools at one t.
std::vector<std::int64_t> tau_all_at(const MarketInstance& inst, const Permutation& pi,
                                     const Assignment& a, std::int64_t t) {
  std::vector<std::int64_t> tau(static_cast<std::size_t>(inst.m()), 0);
  for (Rank r = 0; r < t; ++r) {
    Student s = pi.student_at[static_cast<std::size_t>(r)];
    School assigned = a.school_of[static_cast<std::size_t>(s)];
    for (School q : inst.prefs(s)) {
      ++tau[static_cast<std::size_t>(q)];
      if (q == assigned) break;
    }
  }
  return tau;
}

// Full trajectory matrix, flattened [k * (n+1) + t].
std::vector<std::int64_t> tau_matrix(const MarketInstance& inst, const Permutation& pi,
                                     const Assignment& a) {
  const std::int64_t n = inst.n();
  const std::int64_t m = inst.m();
  std::vector<std::int64_t> mat(static_cast<std::size_t>(m * (n + 1)), 0);
  for (Rank r = 0; r < n; ++r) {
    Student s = pi.student_at[static_cast<std::size_t>(r)];
    School assigned = a.school_of[static_cast<std::size_t>(s)];
    for (School q : inst.prefs(s)) {
      ++mat[static_cast<std::size_t>(q) * static_cast<std::size_t>(n + 1) +
            static_cast<std::size_t>(r) + 1];
      if (q == assigned) break;
    }
  }
  for (School k = 0; k < m; ++k) {
    auto* row = mat.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(n + 1);
    for (std::int64_t t = 1; t <= n; ++t) row[t] += row[t - 1];
  }
  return mat;
}

MarketInstance hand_instance(std::int64_t n, std::int64_t m, std::vector<std::int64_t> caps,
                             std::vector<std::vector<School>> prefs) {
  InstanceData d;
  d.n = n;
  d.m = m;
  d.capacities = std::move(caps);
  d.preferences = std::move(prefs);
  return validate_instance(d);
}

GeneratorSpec make_spec(ProfileKind kind, std::int64_t n, std::int64_t m,
                        std::vector<std::int64_t> caps, std::int64_t list_length,
                        std::vector<double> weights, std::uint64_t seed, std::uint64_t salt) {
  GeneratorSpec g;
  g.kind = kind;
  g.n = n;
  g.m = m;
  g.capacities = std::move(caps);
  g.list_length = list_length;
  g.weights = std::move(weights);
  g.seed = mix64(seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1)));
  return g;
}

}  // namespace

GammaBarEstimate OracleResult::gamma_bar(std::int64_t k, std::int64_t capacity) const {
  GammaBarEstimate est;
  const std::int64_t target = permutations * capacity;
  const auto& row = demand_sum[static_cast<std::size_t>(k)];
  for (std::int64_t t = 0; t <= n; ++t) {
    if (row[static_cast<std::size_t>(t)] >= target) {
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

OracleResult enumerate_oracle(const MarketInstance& inst) {
  const std::int64_t n = inst.n();
  const std::int64_t m = inst.m();
  if (n > kOracleMaxN)
    fail(ErrorCode::InstanceTooLarge,
         "oracle enumerates n! orders; n=" + std::to_string(n) + " exceeds " +
             std::to_string(kOracleMaxN));

  OracleResult res;
  res.n = n;
  res.m = m;
  res.permutations = factorial(n);
  // per-(school, rank) weak-preference counts; prefix-summed at the end
  std::vector<std::int64_t> rank_counts(static_cast<std::size_t>(m * n), 0);
  res.cutoff_rank_count.assign(static_cast<std::size_t>(m), {});
  res.nonbinding_count.assign(static_cast<std::size_t>(m), 0);
  res.lottery_counts.assign(static_cast<std::size_t>(n * (m + 1)), 0);

  std::vector<Student> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Permutation pi;
  Assignment a;
  std::vector<std::int64_t> seats_left;
  do {
    pi.student_at = order;
    pi.rank_of.resize(static_cast<std::size_t>(n));
    for (Rank r = 0; r < n; ++r) pi.rank_of[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;
    run_rsd_into(inst, pi, a, seats_left);
    for (Rank r = 0; r < n; ++r) {
      Student s = order[static_cast<std::size_t>(r)];
      School assigned = a.school_of[static_cast<std::size_t>(s)];
      for (School q : inst.prefs(s)) {
        ++rank_counts[static_cast<std::size_t>(q) * static_cast<std::size_t>(n) +
                      static_cast<std::size_t>(r)];
        if (q == assigned) break;
      }
    }
    for (School k = 0; k < m; ++k) {
      std::int64_t er = a.exhaustion_rank[static_cast<std::size_t>(k)];
      if (er >= 0) {
        ++res.cutoff_rank_count[static_cast<std::size_t>(k)][er];
      } else {
        ++res.nonbinding_count[static_cast<std::size_t>(k)];
      }
    }
    for (Student i = 0; i < n; ++i) {
      School k = a.school_of[static_cast<std::size_t>(i)];
      std::int64_t col = k == kUnmatched ? m : k;
      ++res.lottery_counts[static_cast<std::size_t>(i * (m + 1) + col)];
    }
  } while (std::next_permutation(order.begin(), order.end()));

  res.demand_sum.assign(static_cast<std::size_t>(m),
                        std::vector<std::int64_t>(static_cast<std::size_t>(n) + 1, 0));
  for (School k = 0; k < m; ++k) {
    auto& row = res.demand_sum[static_cast<std::size_t>(k)];
    for (std::int64_t t = 1; t <= n; ++t) {
      row[static_cast<std::size_t>(t)] =
          row[static_cast<std::size_t>(t) - 1] +
          rank_counts[static_cast<std::size_t>(k) * static_cast<std::size_t>(n) +
                      static_cast<std::size_t>(t) - 1];
    }
  }
  return res;
}

std::vector<MarketInstance> property_battery(std::int64_t max_n, std::uint64_t seed) {
  if (max_n < 1) fail(ErrorCode::SpecInvalid, "battery needs max_n >= 1");
  std::vector<MarketInstance> out;

  out.push_back(hand_instance(1, 1, {1}, {{0}}));
  if (max_n >= 3) {
    out.push_back(hand_instance(3, 2, {1, 1}, {{}, {0, 1}, {1}}));      // empty list edge
    out.push_back(hand_instance(3, 1, {5}, {{0}, {0}, {0}}));           // capacity >= n
    out.push_back(hand_instance(3, 2, {1, 1}, {{0, 1}, {0, 1}, {0, 1}}));
  }
  if (max_n >= 4) {
    out.push_back(hand_instance(4, 1, {2}, {{0}, {0}, {0}, {0}}));      // m = 1 scarce
    out.push_back(generate_instance(make_spec(ProfileKind::Block, 4, 2, {}, 0, {}, seed, 1)));
  }
  if (max_n >= 5) {
    out.push_back(generate_instance(make_spec(ProfileKind::UniformFull, 5, 3, {1, 2, 1}, 0, {}, seed, 2)));
    out.push_back(generate_instance(
        make_spec(ProfileKind::UniformPartial, 5, 4, {1, 1, 1, 1}, 2, {}, seed, 3)));
    out.push_back(generate_instance(make_spec(ProfileKind::CommonRanking, 5, 2, {2, 1}, 0, {}, seed, 4)));
    out.push_back(generate_instance(
        make_spec(ProfileKind::PlackettLuce, 5, 3, {1, 1, 2}, 0, {3.0, 2.0, 1.0}, seed, 5)));
  }
  if (max_n >= 8) {
    out.push_back(generate_instance(make_spec(ProfileKind::Block, 8, 4, {}, 0, {}, seed, 6)));
    out.push_back(generate_instance(
        make_spec(ProfileKind::UniformPartial, 8, 5, {1, 2, 1, 1, 1}, 3, {}, seed, 7)));
  }
  if (max_n >= 12) {
    out.push_back(generate_instance(make_spec(ProfileKind::UniformFull, 12, 6, {2, 2, 2, 2, 2, 2}, 0, {}, seed, 8)));
    out.push_back(generate_instance(
        make_spec(ProfileKind::PlackettLuce, 12, 4, {3, 3, 3, 2}, 0, {4.0, 3.0, 2.0, 1.0}, seed, 9)));
  }
  if (max_n >= 30) {
    out.push_back(generate_instance(make_spec(ProfileKind::Block, 30, 6, {}, 0, {}, seed, 10)));
    out.push_back(generate_instance(
        make_spec(ProfileKind::UniformPartial, 30, 10, std::vector<std::int64_t>(10, 2), 4, {}, seed, 11)));
    out.push_back(generate_instance(
        make_spec(ProfileKind::CommonRanking, 30, 8, {4, 4, 4, 4, 3, 3, 3, 3}, 0, {}, seed, 12)));
  }
  if (max_n >= 50) {
    out.push_back(generate_instance(
        make_spec(ProfileKind::UniformFull, 50, 12, std::vector<std::int64_t>(12, 4), 0, {}, seed, 13)));
    out.push_back(generate_instance(make_spec(ProfileKind::Block, 50, 10, {}, 0, {}, seed, 14)));
    std::vector<double> w(25);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / static_cast<double>(i + 1);
    out.push_back(generate_instance(
        make_spec(ProfileKind::UniformPartial, 50, 25, std::vector<std::int64_t>(25, 2), 3, {}, seed, 15)));
    out.push_back(generate_instance(
        make_spec(ProfileKind::PlackettLuce, 50, 25, std::vector<std::int64_t>(25, 1), 0, w, seed, 16)));
  }
  return out;
}

std::vector<MarketInstance> lipschitz_battery(std::int64_t max_n, std::uint64_t seed) {
  if (max_n < 1) fail(ErrorCode::SpecInvalid, "battery needs max_n >= 1");
  std::vector<MarketInstance> out;

  // Provable cores: Block (tau_k counts block members in the prefix),
  // CommonRanking and capacity >= n (tau is order-invariant), m = 1 (tau_0
  // counts listers in the prefix), empty lists (never counted).
  out.push_back(hand_instance(1, 1, {1}, {{0}}));
  if (max_n >= 3) {
    out.push_back(hand_instance(3, 1, {5}, {{0}, {0}, {0}}));
    out.push_back(hand_instance(3, 1, {2}, {{0}, {0}, {0}}));
  }
  if (max_n >= 4) {
    out.push_back(hand_instance(4, 2, {4, 4}, {{}, {0, 1}, {1, 0}, {1}}));
    out.push_back(generate_instance(make_spec(ProfileKind::Block, 4, 2, {}, 0, {}, seed, 61)));
  }
  // Random-preference kinds carry capacity slack (ceil(n/m) + 2 per school,
  // and ceil(n/L) + 2 for partial lists). With exact or scarce capacities a
  // displacement cascade can move tau_k past every constant; see the pinned
  // counterexamples in the tests.
  auto slack = [](std::int64_t n, std::int64_t denom, std::int64_t m) {
    return std::vector<std::int64_t>(static_cast<std::size_t>(m), (n + denom - 1) / denom + 2);
  };
  // Popularity-weighted profiles need capacity in proportion to expected
  // first-choice demand, or the popular schools still congest.
  auto pl_caps = [](std::int64_t n, std::int64_t m, const std::vector<double>& w) {
    double total = 0.0;
    for (double x : w) total += x;
    std::vector<std::int64_t> caps(static_cast<std::size_t>(m));
    for (std::int64_t k = 0; k < m; ++k) {
      auto expected = static_cast<std::int64_t>(
          std::ceil(static_cast<double>(n) * w[static_cast<std::size_t>(k)] / total));
      caps[static_cast<std::size_t>(k)] = expected + (n + m - 1) / m + 2;
    }
    return caps;
  };
  if (max_n >= 5) {
    out.push_back(generate_instance(make_spec(ProfileKind::UniformFull, 5, 3, slack(5, 3, 3), 0, {}, seed, 62)));
    out.push_back(generate_instance(make_spec(ProfileKind::CommonRanking, 5, 2, {3, 2}, 0, {}, seed, 63)));
    out.push_back(generate_instance(
        make_spec(ProfileKind::PlackettLuce, 5, 3, pl_caps(5, 3, {3.0, 2.0, 1.0}), 0,
                  {3.0, 2.0, 1.0}, seed, 64)));
    out.push_back(generate_instance(
        make_spec(ProfileKind::UniformPartial, 5, 3, slack(5, 2, 3), 2, {}, seed, 65)));
  }
  if (max_n >= 8) {
    out.push_back(generate_instance(make_spec(ProfileKind::Block, 8, 4, {}, 0, {}, seed, 66)));
    out.push_back(generate_instance(
        make_spec(ProfileKind::UniformPartial, 8, 5, slack(8, 3, 5), 3, {}, seed, 67)));
  }
  if (max_n >= 12) {
    out.push_back(generate_instance(
        make_spec(ProfileKind::UniformFull, 12, 6, slack(12, 6, 6), 0, {}, seed, 68)));
    out.push_back(generate_instance(
        make_spec(ProfileKind::PlackettLuce, 12, 4, pl_caps(12, 4, {4.0, 3.0, 2.0, 1.0}), 0,
                  {4.0, 3.0, 2.0, 1.0}, seed, 69)));
  }
  if (max_n >= 30) {
    out.push_back(generate_instance(make_spec(ProfileKind::Block, 30, 6, {}, 0, {}, seed, 70)));
    out.push_back(generate_instance(
        make_spec(ProfileKind::CommonRanking, 30, 8, {4, 4, 4, 4, 4, 4, 4, 4}, 0, {}, seed, 71)));
    out.push_back(generate_instance(
        make_spec(ProfileKind::UniformPartial, 30, 10, slack(30, 4, 10), 4, {}, seed, 72)));
  }
  if (max_n >= 50) {
    out.push_back(generate_instance(
        make_spec(ProfileKind::UniformFull, 50, 12, slack(50, 12, 12), 0, {}, seed, 73)));
    out.push_back(generate_instance(make_spec(ProfileKind::Block, 50, 10, {}, 0, {}, seed, 74)));
    std::vector<double> w(10);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / static_cast<double>(i + 1);
    out.push_back(generate_instance(
        make_spec(ProfileKind::PlackettLuce, 50, 10, pl_caps(50, 10, w), 0, w, seed, 75)));
    out.push_back(generate_instance(
        make_spec(ProfileKind::UniformPartial, 50, 25, slack(50, 3, 25), 3, {}, seed, 76)));
  }
  return out;
}

std::vector<MarketInstance> oracle_battery(std::uint64_t seed) {
  std::vector<MarketInstance> out;
  out.push_back(hand_instance(3, 2, {1, 1}, {{0, 1}, {0, 1}, {0, 1}}));
  out.push_back(hand_instance(4, 3, {1, 1, 1}, {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}, {0, 1, 2}}));
  out.push_back(hand_instance(4, 2, {2, 1}, {{0}, {0, 1}, {1, 0}, {1}}));
  out.push_back(hand_instance(4, 2, {1, 1}, {{0, 1}, {0, 1}, {1, 0}, {1, 0}}));
  out.push_back(hand_instance(4, 2, {4, 4}, {{0, 1}, {1}, {0}, {1, 0}}));  // capacity >= n
  out.push_back(hand_instance(4, 2, {1, 2}, {{}, {0}, {0, 1}, {1}}));      // empty list
  out.push_back(hand_instance(5, 1, {2}, {{0}, {0}, {0}, {0}, {0}}));      // m = 1
  for (std::uint64_t salt = 0; salt < 2; ++salt) {
    out.push_back(generate_instance(make_spec(ProfileKind::Block, 4, 2, {}, 0, {}, seed, 20 + salt)));
    out.push_back(generate_instance(make_spec(ProfileKind::Block, 6, 3, {}, 0, {}, seed, 22 + salt)));
  }
  out.push_back(generate_instance(make_spec(ProfileKind::Block, 8, 4, {}, 0, {}, seed, 24)));
  out.push_back(generate_instance(make_spec(ProfileKind::Block, 8, 2, {}, 0, {}, seed, 25)));
  out.push_back(generate_instance(make_spec(ProfileKind::UniformFull, 5, 3, {1, 1, 1}, 0, {}, seed, 26)));
  out.push_back(generate_instance(make_spec(ProfileKind::UniformFull, 6, 2, {2, 2}, 0, {}, seed, 27)));
  out.push_back(generate_instance(make_spec(ProfileKind::UniformFull, 7, 3, {2, 2, 2}, 0, {}, seed, 28)));
  out.push_back(generate_instance(make_spec(ProfileKind::UniformPartial, 5, 3, {1, 1, 1}, 2, {}, seed, 29)));
  out.push_back(generate_instance(make_spec(ProfileKind::UniformPartial, 6, 4, {1, 1, 1, 1}, 2, {}, seed, 30)));
  out.push_back(generate_instance(make_spec(ProfileKind::UniformPartial, 7, 4, {2, 1, 2, 1}, 3, {}, seed, 31)));
  out.push_back(generate_instance(make_spec(ProfileKind::UniformPartial, 8, 5, {1, 2, 1, 1, 1}, 2, {}, seed, 32)));
  out.push_back(generate_instance(make_spec(ProfileKind::CommonRanking, 5, 2, {2, 1}, 0, {}, seed, 33)));
  out.push_back(generate_instance(make_spec(ProfileKind::CommonRanking, 6, 3, {1, 2, 1}, 0, {}, seed, 34)));
  out.push_back(generate_instance(make_spec(ProfileKind::CommonRanking, 7, 2, {3, 2}, 0, {}, seed, 35)));
  out.push_back(generate_instance(make_spec(ProfileKind::PlackettLuce, 5, 2, {1, 1}, 0, {2.0, 1.0}, seed, 36)));
  out.push_back(generate_instance(make_spec(ProfileKind::PlackettLuce, 6, 3, {1, 1, 1}, 0, {3.0, 2.0, 1.0}, seed, 37)));
  out.push_back(generate_instance(make_spec(ProfileKind::PlackettLuce, 7, 3, {2, 2, 2}, 0, {1.0, 1.0, 4.0}, seed, 38)));
  return out;
}

// The 100-seed calibration criterion tests every cell at 3 conservative
// standard errors, so the joint pass rate is governed by the cells closest
// to worst-case variance. These instances keep every random cell away from
// the p ~ 1/2 zone (deterministic, or probabilities <= 1/4 / >= 3/4); the
// near-uniform textbook instances (all-prefer n=3, Block n=4) stay in the
// unit tests under pinned seeds.
std::vector<MarketInstance> calibration_battery(std::uint64_t seed) {
  std::vector<MarketInstance> out;
  out.push_back(generate_instance(make_spec(ProfileKind::Block, 8, 8,
                                            {1, 1, 1, 1, 1, 1, 1, 1}, 0, {}, seed, 40)));
  out.push_back(generate_instance(make_spec(ProfileKind::CommonRanking, 7, 6,
                                            {1, 1, 1, 1, 1, 1}, 0, {}, seed, 41)));
  out.push_back(generate_instance(make_spec(ProfileKind::CommonRanking, 8, 7,
                                            {1, 1, 1, 1, 1, 1, 1}, 0, {}, seed, 42)));
  // partial lists with a lopsided 5/1 split and slack seats: assignments are
  // deterministic, demand curves are Bernoulli(1/6)/Bernoulli(5/6) prefixes
  out.push_back(hand_instance(6, 2, {6, 6}, {{0}, {0}, {0}, {1}, {0}, {0}}));
  out.push_back(generate_instance(
      make_spec(ProfileKind::PlackettLuce, 8, 3, {8, 8, 8}, 0, {30.0, 6.0, 1.0}, seed, 43)));
  out.push_back(generate_instance(make_spec(ProfileKind::UniformFull, 7, 2, {7, 7}, 0, {}, seed, 47)));
  return out;
}

namespace {

const MarketInstance& pick_instance(const std::vector<MarketInstance>& battery, Rng& rng,
                                    std::int64_t min_n, std::int64_t* index_out) {
  for (;;) {
    auto idx = static_cast<std::int64_t>(rng.next_below(battery.size()));
    if (battery[static_cast<std::size_t>(idx)].n() >= min_n) {
      *index_out = idx;
      return battery[static_cast<std::size_t>(idx)];
    }
  }
}

CheckResult make_result(std::string property) {
  CheckResult r;
  r.property = std::move(property);
  return r;
}

void record_violation(CheckResult& res, const std::string& detail) {
  ++res.violations;
  res.pass = false;
  if (!res.first_witness) res.first_witness = Witness{detail};
}

}  // namespace

CheckResult check_transposition_lipschitz(const CheckOptions& opts) {
  auto battery = lipschitz_battery(opts.max_n, opts.seed);
  auto res = make_result("transposition_lipschitz");
  Assignment a, a2;
  std::vector<std::int64_t> seats;
  for (std::int64_t trial = 0; trial < opts.trials; ++trial) {
    Rng rng = derive_stream(opts.seed, "verify/transposition", static_cast<std::uint64_t>(trial));
    std::int64_t inst_idx = 0;
    const MarketInstance& inst = pick_instance(battery, rng, 2, &inst_idx);
    const std::int64_t n = inst.n();
    Permutation pi = sample_permutation(n, rng);
    auto i = static_cast<Student>(rng.next_below(static_cast<std::uint64_t>(n)));
    auto j = static_cast<Student>((i + 1 + static_cast<Student>(rng.next_below(static_cast<std::uint64_t>(n - 1)))) % n);
    auto t = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(n + 1)));
    Permutation pi2 = apply_transposition(pi, i, j);
    run_rsd_into(inst, pi, a, seats);
    auto tau1 = tau_all_at(inst, pi, a, t);
    run_rsd_into(inst, pi2, a2, seats);
    auto tau2 = tau_all_at(inst, pi2, a2, t);
    if (opts.inject_fault && trial == 0) tau2[0] += 3;
    ++res.trials;
    for (School k = 0; k < inst.m(); ++k) {
      std::int64_t diff = std::abs(tau1[static_cast<std::size_t>(k)] - tau2[static_cast<std::size_t>(k)]);
      if (diff > 2) {
        std::ostringstream os;
        os << "instance#" << inst_idx << " " << instance_brief(inst) << " " << perm_to_string(pi)
           << " i=" << i << " j=" << j << " t=" << t << " k=" << k
           << " tau=" << tau1[static_cast<std::size_t>(k)] << " tau'=" << tau2[static_cast<std::size_t>(k)];
        record_violation(res, os.str());
        break;
      }
    }
  }
  return res;
}

CheckResult check_hamming_lipschitz(const CheckOptions& opts) {
  auto battery = lipschitz_battery(opts.max_n, opts.seed);
  auto res = make_result("hamming_lipschitz");
  Assignment a, a2;
  std::vector<std::int64_t> seats;
  for (std::int64_t trial = 0; trial < opts.trials; ++trial) {
    Rng rng = derive_stream(opts.seed, "verify/hamming", static_cast<std::uint64_t>(trial));
    std::int64_t inst_idx = 0;
    const MarketInstance& inst = pick_instance(battery, rng, 1, &inst_idx);
    const std::int64_t n = inst.n();
    Permutation pi = sample_permutation(n, rng);
    Permutation sigma = sample_permutation(n, rng);
    auto t = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(n + 1)));
    std::int64_t d = hamming_distance(pi, sigma);
    run_rsd_into(inst, pi, a, seats);
    auto tau1 = tau_all_at(inst, pi, a, t);
    run_rsd_into(inst, sigma, a2, seats);
    auto tau2 = tau_all_at(inst, sigma, a2, t);
    if (opts.inject_fault && trial == 0) tau2[0] += 2 * d + 3;
    ++res.trials;
    for (School k = 0; k < inst.m(); ++k) {
      std::int64_t diff = std::abs(tau1[static_cast<std::size_t>(k)] - tau2[static_cast<std::size_t>(k)]);
      if (diff > 2 * d) {
        std::ostringstream os;
        os << "instance#" << inst_idx << " " << instance_brief(inst) << " pi " << perm_to_string(pi)
           << " sigma " << perm_to_string(sigma) << " t=" << t << " k=" << k << " d=" << d
           << " |tau-tau'|=" << diff;
        record_violation(res, os.str());
        break;
      }
    }
  }
  return res;
}

// Insertion inequality, evaluated at the prefix ending at each student h.
// With s < rank(j) the orders agree strictly before slot s, so tau must match
// exactly there; from slot s on the checked allowance is 2, matching the
// transposition bound:
//   |tau_k(rank_pi(h)+1, pi) - tau_k(rank_pi'(h)+1, pi')| <= 2 * 1{rank_pi(h) >= s}
// An allowance of 1 is not attainable: a displacement cascade can flip two
// straddling students at one prefix even with every student matched and
// capacity slack (pinned counterexamples in the tests), and an insertion can
// also strictly upgrade bystanders by freeing j's old seat, so no one-sided
// form survives either.
CheckResult check_insertion_inequality(const CheckOptions& opts) {
  auto battery = lipschitz_battery(opts.max_n, opts.seed);
  auto res = make_result("insertion_inequality");
  Assignment a, a2;
  std::vector<std::int64_t> seats;
  for (std::int64_t trial = 0; trial < opts.trials; ++trial) {
    Rng rng = derive_stream(opts.seed, "verify/insertion", static_cast<std::uint64_t>(trial));
    std::int64_t inst_idx = 0;
    const MarketInstance& inst = pick_instance(battery, rng, 2, &inst_idx);
    const std::int64_t n = inst.n();
    const std::int64_t m = inst.m();
    Permutation pi = sample_permutation(n, rng);
    auto rank_j = static_cast<Rank>(1 + rng.next_below(static_cast<std::uint64_t>(n - 1)));
    Student j = pi.student_at[static_cast<std::size_t>(rank_j)];
    auto s = static_cast<Rank>(rng.next_below(static_cast<std::uint64_t>(rank_j)));
    Permutation pi2 = insertion(pi, j, s);
    run_rsd_into(inst, pi, a, seats);
    auto tau1 = tau_matrix(inst, pi, a);
    run_rsd_into(inst, pi2, a2, seats);
    auto tau2 = tau_matrix(inst, pi2, a2);
    if (opts.inject_fault && trial == 0) {
      for (std::int64_t t = 1; t <= n; ++t) tau2[static_cast<std::size_t>(t)] += 3;
    }
    ++res.trials;
    bool bad = false;
    for (Student h = 0; h < n && !bad; ++h) {
      if (h == j) continue;
      Rank r = pi.rank_of[static_cast<std::size_t>(h)];
      Rank r2 = pi2.rank_of[static_cast<std::size_t>(h)];
      std::int64_t allow = r >= s ? 2 : 0;
      for (School k = 0; k < m; ++k) {
        std::int64_t v1 = tau1[static_cast<std::size_t>(k) * static_cast<std::size_t>(n + 1) +
                               static_cast<std::size_t>(r) + 1];
        std::int64_t v2 = tau2[static_cast<std::size_t>(k) * static_cast<std::size_t>(n + 1) +
                               static_cast<std::size_t>(r2) + 1];
        if (std::abs(v1 - v2) > allow) {
          std::ostringstream os;
          os << "instance#" << inst_idx << " " << instance_brief(inst) << " " << perm_to_string(pi)
             << " j=" << j << " s=" << s << " h=" << h << " k=" << k << " tau=" << v1
             << " tau'=" << v2 << " allow=" << allow;
          record_violation(res, os.str());
          bad = true;
          break;
        }
      }
    }
  }
  return res;
}

CheckResult check_decomposition(const CheckOptions& opts) {
  auto battery = property_battery(opts.max_n, opts.seed);
  auto res = make_result("decomposition");
  for (std::int64_t trial = 0; trial < opts.trials; ++trial) {
    Rng rng = derive_stream(opts.seed, "verify/decomposition", static_cast<std::uint64_t>(trial));
    std::int64_t inst_idx = 0;
    const MarketInstance& inst = pick_instance(battery, rng, 2, &inst_idx);
    const std::int64_t n = inst.n();
    Permutation pi = sample_permutation(n, rng);
    Permutation sigma = sample_permutation(n, rng);
    auto seq = decompose_into_transpositions(sigma, pi);
    if (opts.inject_fault && trial == 0) {
      if (!seq.empty()) seq.pop_back();
      else seq.emplace_back(0, 1);
    }
    std::int64_t d = hamming_distance(pi, sigma);
    ++res.trials;
    Permutation cur = sigma;
    for (auto [i, j] : seq) cur = apply_transposition(cur, i, j);
    if (!(cur == pi) || static_cast<std::int64_t>(seq.size()) > d) {
      std::ostringstream os;
      os << "instance#" << inst_idx << " sigma " << perm_to_string(sigma) << " pi "
         << perm_to_string(pi) << " len=" << seq.size() << " d=" << d
         << " reached=" << perm_to_string(cur);
      record_violation(res, os.str());
    }
  }
  return res;
}

CheckResult check_cutoff_equivalence(const CheckOptions& opts) {
  auto battery = property_battery(opts.max_n, opts.seed);
  auto res = make_result("cutoff_equivalence");
  Assignment a;
  std::vector<std::int64_t> seats;
  for (std::int64_t trial = 0; trial < opts.trials; ++trial) {
    Rng rng = derive_stream(opts.seed, "verify/equivalence", static_cast<std::uint64_t>(trial));
    std::int64_t inst_idx = 0;
    const MarketInstance& inst = pick_instance(battery, rng, 1, &inst_idx);
    const std::int64_t n = inst.n();
    Permutation pi = sample_permutation(n, rng);
    run_rsd_into(inst, pi, a, seats);
    auto mat = tau_matrix(inst, pi, a);
    CutoffVector cv = cutoffs_from(inst, a);
    ++res.trials;
    for (School k = 0; k < inst.m(); ++k) {
      const auto* row = mat.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(n + 1);
      std::int64_t alpha = inst.capacity(k);
      std::int64_t crossing = -1;
      for (std::int64_t t = 0; t <= n; ++t) {
        if (row[t] >= alpha) {
          crossing = t;
          break;
        }
      }
      std::int64_t er = a.exhaustion_rank[static_cast<std::size_t>(k)];
      if (opts.inject_fault && trial == 0 && k == 0) er = er >= 0 ? er + 1 : 0;
      bool ok;
      if (cv.binding[static_cast<std::size_t>(k)] != 0 && !(opts.inject_fault && trial == 0 && k == 0)) {
        // sup-definition rank must equal the inf-crossing of the trajectory
        ok = crossing == er + 1;
      } else if (opts.inject_fault && trial == 0 && k == 0) {
        ok = crossing == er + 1;
      } else {
        // non-binding schools are excluded from the equality, flagged via the
        // structural fact that demand never reaches capacity
        ok = crossing == -1 && row[n] < alpha;
      }
      if (!ok) {
        std::ostringstream os;
        os << "instance#" << inst_idx << " " << instance_brief(inst) << " " << perm_to_string(pi)
           << " k=" << k << " exhaustion_rank=" << er << " crossing=" << crossing
           << " binding=" << static_cast<int>(cv.binding[static_cast<std::size_t>(k)]);
        record_violation(res, os.str());
        break;
      }
    }
  }
  return res;
}

namespace {

struct PermData {
  Permutation pi;
  Assignment a;
  std::vector<std::int64_t> tau;
};

std::vector<PermData> enumerate_perm_data(const MarketInstance& inst) {
  const std::int64_t n = inst.n();
  std::vector<PermData> out;
  std::vector<Student> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::int64_t> seats;
  do {
    PermData pd;
    pd.pi = Permutation::from_student_at(order);
    run_rsd_into(inst, pd.pi, pd.a, seats);
    pd.tau = tau_matrix(inst, pd.pi, pd.a);
    out.push_back(std::move(pd));
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

std::vector<MarketInstance> small_battery(std::int64_t max_n, std::uint64_t seed, bool no_starvation) {
  if (max_n > 5) max_n = 5;
  std::vector<MarketInstance> battery =
      no_starvation ? lipschitz_battery(max_n, seed) : property_battery(max_n, seed);
  std::vector<MarketInstance> out;
  for (auto& inst : battery) {
    if (inst.n() >= 2 && inst.n() <= max_n) out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace

CheckResult exhaustive_transposition_sweep(std::int64_t max_n, std::uint64_t seed) {
  auto res = make_result("transposition_lipschitz/exhaustive");
  Assignment a2;
  std::vector<std::int64_t> seats;
  for (const auto& inst : small_battery(max_n, seed, true)) {
    const std::int64_t n = inst.n();
    const std::int64_t m = inst.m();
    auto perms = enumerate_perm_data(inst);
    for (const auto& pd : perms) {
      for (Student i = 0; i < n; ++i) {
        for (Student j = i + 1; j < n; ++j) {
          Permutation pi2 = apply_transposition(pd.pi, i, j);
          run_rsd_into(inst, pi2, a2, seats);
          auto tau2 = tau_matrix(inst, pi2, a2);
          ++res.trials;
          for (std::int64_t t = 0; t <= n; ++t) {
            for (School k = 0; k < m; ++k) {
              std::int64_t v1 = pd.tau[static_cast<std::size_t>(k) * static_cast<std::size_t>(n + 1) +
                                       static_cast<std::size_t>(t)];
              std::int64_t v2 = tau2[static_cast<std::size_t>(k) * static_cast<std::size_t>(n + 1) +
                                     static_cast<std::size_t>(t)];
              if (std::abs(v1 - v2) > 2) {
                std::ostringstream os;
                os << instance_brief(inst) << " " << perm_to_string(pd.pi) << " i=" << i
                   << " j=" << j << " t=" << t << " k=" << k;
                record_violation(res, os.str());
              }
            }
          }
        }
      }
    }
  }
  return res;
}

CheckResult exhaustive_hamming_sweep(std::int64_t max_n, std::uint64_t seed) {
  auto res = make_result("hamming_lipschitz/exhaustive");
  for (const auto& inst : small_battery(max_n, seed, true)) {
    const std::int64_t n = inst.n();
    const std::int64_t m = inst.m();
    auto perms = enumerate_perm_data(inst);
    for (const auto& pa : perms) {
      for (const auto& pb : perms) {
        std::int64_t d = hamming_distance(pa.pi, pb.pi);
        ++res.trials;
        for (std::int64_t t = 0; t <= n; ++t) {
          for (School k = 0; k < m; ++k) {
            std::int64_t v1 = pa.tau[static_cast<std::size_t>(k) * static_cast<std::size_t>(n + 1) +
                                     static_cast<std::size_t>(t)];
            std::int64_t v2 = pb.tau[static_cast<std::size_t>(k) * static_cast<std::size_t>(n + 1) +
                                     static_cast<std::size_t>(t)];
            if (std::abs(v1 - v2) > 2 * d) {
              std::ostringstream os;
              os << instance_brief(inst) << " pi " << perm_to_string(pa.pi) << " sigma "
                 << perm_to_string(pb.pi) << " t=" << t << " k=" << k;
              record_violation(res, os.str());
            }
          }
        }
      }
    }
  }
  return res;
}

CheckResult exhaustive_insertion_sweep(std::int64_t max_n, std::uint64_t seed) {
  auto res = make_result("insertion_inequality/exhaustive");
  Assignment a2;
  std::vector<std::int64_t> seats;
  for (const auto& inst : small_battery(max_n, seed, true)) {
    const std::int64_t n = inst.n();
    const std::int64_t m = inst.m();
    auto perms = enumerate_perm_data(inst);
    for (const auto& pd : perms) {
      for (Rank rank_j = 1; rank_j < n; ++rank_j) {
        Student j = pd.pi.student_at[static_cast<std::size_t>(rank_j)];
        for (Rank s = 0; s < rank_j; ++s) {
          Permutation pi2 = insertion(pd.pi, j, s);
          run_rsd_into(inst, pi2, a2, seats);
          auto tau2 = tau_matrix(inst, pi2, a2);
          ++res.trials;
          for (Student h = 0; h < n; ++h) {
            if (h == j) continue;
            Rank r = pd.pi.rank_of[static_cast<std::size_t>(h)];
            Rank r2 = pi2.rank_of[static_cast<std::size_t>(h)];
            std::int64_t allow = r >= s ? 2 : 0;
            for (School k = 0; k < m; ++k) {
              std::int64_t v1 = pd.tau[static_cast<std::size_t>(k) * static_cast<std::size_t>(n + 1) +
                                       static_cast<std::size_t>(r) + 1];
              std::int64_t v2 = tau2[static_cast<std::size_t>(k) * static_cast<std::size_t>(n + 1) +
                                     static_cast<std::size_t>(r2) + 1];
              if (std::abs(v1 - v2) > allow) {
                std::ostringstream os;
                os << instance_brief(inst) << " " << perm_to_string(pd.pi) << " j=" << j
                   << " s=" << s << " h=" << h << " k=" << k << " tau=" << v1 << " tau'=" << v2
                   << " allow=" << allow;
                record_violation(res, os.str());
              }
            }
          }
        }
      }
    }
  }
  return res;
}

CheckResult exhaustive_decomposition_sweep(std::int64_t max_n, std::uint64_t seed) {
  auto res = make_result("decomposition/exhaustive");
  for (const auto& inst : small_battery(max_n, seed, false)) {
    auto perms = enumerate_perm_data(inst);
    for (const auto& pa : perms) {
      for (const auto& pb : perms) {
        auto seq = decompose_into_transpositions(pa.pi, pb.pi);
        std::int64_t d = hamming_distance(pb.pi, pa.pi);
        ++res.trials;
        Permutation cur = pa.pi;
        for (auto [i, j] : seq) cur = apply_transposition(cur, i, j);
        if (!(cur == pb.pi) || static_cast<std::int64_t>(seq.size()) > d) {
          std::ostringstream os;
          os << "sigma " << perm_to_string(pa.pi) << " pi " << perm_to_string(pb.pi)
             << " len=" << seq.size() << " d=" << d;
          record_violation(res, os.str());
        }
      }
    }
  }
  return res;
}

CheckResult exhaustive_equivalence_sweep(std::int64_t max_n, std::uint64_t seed) {
  auto res = make_result("cutoff_equivalence/exhaustive");
  for (const auto& inst : small_battery(max_n, seed, false)) {
    const std::int64_t n = inst.n();
    auto perms = enumerate_perm_data(inst);
    for (const auto& pd : perms) {
      CutoffVector cv = cutoffs_from(inst, pd.a);
      ++res.trials;
      for (School k = 0; k < inst.m(); ++k) {
        const auto* row = pd.tau.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(n + 1);
        std::int64_t alpha = inst.capacity(k);
        std::int64_t crossing = -1;
        for (std::int64_t t = 0; t <= n; ++t) {
          if (row[t] >= alpha) {
            crossing = t;
            break;
          }
        }
        std::int64_t er = pd.a.exhaustion_rank[static_cast<std::size_t>(k)];
        bool ok = cv.binding[static_cast<std::size_t>(k)] != 0 ? crossing == er + 1
                                                               : (crossing == -1 && row[n] < alpha);
        if (!ok) {
          std::ostringstream os;
          os << instance_brief(inst) << " " << perm_to_string(pd.pi) << " k=" << k;
          record_violation(res, os.str());
        }
      }
    }
  }
  return res;
}

CheckResult check_increasing_differences(const MarketInstance& inst, bool inject_fault) {
  auto res = make_result("increasing_differences");
  OracleResult oracle = enumerate_oracle(inst);
  const std::int64_t n = inst.n();
  for (School k = 0; k < inst.m(); ++k) {
    std::int64_t prev = 0;
    for (std::int64_t t = 1; t <= n; ++t) {
      std::int64_t diff = oracle.first_diff_num(k, t);
      if (inject_fault && k == 0 && t == std::min<std::int64_t>(2, n)) {
        diff = -1;  // self-test: outside [0, 1] and below the previous step
      }
      ++res.trials;
      if (diff < 0 || diff > oracle.permutations || diff < prev) {
        std::ostringstream os;
        os << instance_brief(inst) << " k=" << k << " t=" << t << " diff_num=" << diff
           << " prev_num=" << prev << " denom=" << oracle.permutations;
        record_violation(res, os.str());
      }
      prev = diff;
    }
  }
  return res;
}

CalibrationReport mc_vs_oracle(const MarketInstance& inst, const McConfig& cfg) {
  OracleResult oracle = enumerate_oracle(inst);
  const std::int64_t n = inst.n();
  const std::int64_t m = inst.m();
  const auto B = static_cast<double>(cfg.replications);

  CalibrationReport rep;
  auto consider = [&rep](CalibrationCell cell) {
    ++rep.cells;
    double z;
    if (cell.std_err > 0.0) {
      z = std::abs(cell.estimate - cell.exact) / cell.std_err;
    } else {
      z = cell.estimate == cell.exact ? 0.0 : std::numeric_limits<double>::infinity();
    }
    if (z > rep.worst_z) {
      rep.worst_z = z;
      rep.worst_cell = cell;
    }
    if (z > 3.0) {
      ++rep.failures;
      rep.pass = false;
      if (!rep.first_failure) rep.first_failure = cell;
    }
  };

  // lottery matrix: conservative binomial half-range s.e. 0.5/sqrt(B)
  LotteryMatrix mat = estimate_lottery_probabilities(inst, cfg);
  for (Student i = 0; i < n; ++i) {
    for (std::int64_t col = 0; col <= m; ++col) {
      consider({"lottery_prob", col, i, mat.prob(i, col), oracle.lottery_prob(i, col),
                0.5 / std::sqrt(B)});
    }
  }

  // mean demand curves and gamma_bar crossings, school by school
  for (School k = 0; k < m; ++k) {
    MeanDemandCurve curve = estimate_mean_demand(inst, k, cfg);
    for (std::int64_t t = 1; t <= n; ++t) {
      double se = static_cast<double>(t) / 2.0 / std::sqrt(B);  // tau_k(t) in [0, t]
      consider({"mean_demand", k, t, curve.mean(t), oracle.mean_demand(k, t), se});
    }
    GammaBarEstimate est = gamma_bar_from_curve(curve, inst.capacity(k), n);
    GammaBarEstimate exact = oracle.gamma_bar(k, inst.capacity(k));
    std::int64_t est_cross = est.binding ? est.crossing_t : n + 1;
    std::int64_t exact_cross = exact.binding ? exact.crossing_t : n + 1;
    if (est_cross == exact_cross) {
      consider({"gamma_bar", k, -1, est.value, exact.value, 1.0});  // exact crossing match
    } else {
      // A crossing shift is acceptable only where the exact mean hugs the
      // capacity within the conservative band; otherwise it is a real miss.
      bool ambiguous = true;
      std::int64_t lo = std::min(est_cross, exact_cross);
      std::int64_t hi = std::max(est_cross, exact_cross);
      for (std::int64_t t = lo; t < hi && t <= n; ++t) {
        double se = static_cast<double>(std::max<std::int64_t>(t, 1)) / 2.0 / std::sqrt(B);
        double gap = std::abs(oracle.mean_demand(k, t) - static_cast<double>(inst.capacity(k)));
        if (gap > 3.0 * se) {
          ambiguous = false;
          break;
        }
      }
      CalibrationCell cell{"gamma_bar", k, -1, est.value, exact.value, 0.0};
      ++rep.cells;
      if (!ambiguous) {
        ++rep.failures;
        rep.pass = false;
        if (!rep.first_failure) rep.first_failure = cell;
        rep.worst_z = std::numeric_limits<double>::infinity();
        rep.worst_cell = cell;
      }
    }
  }
  return rep;
}

}  // namespace rsdlab
