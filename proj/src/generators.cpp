#include "rsdlab/generators.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "rsdlab/error.hpp"

namespace rsdlab {

const char* profile_kind_name(ProfileKind k) {
  switch (k) {
    case ProfileKind::Block: return "Block";
    case ProfileKind::UniformFull: return "UniformFull";
    case ProfileKind::UniformPartial: return "UniformPartial";
    case ProfileKind::CommonRanking: return "CommonRanking";
    case ProfileKind::PlackettLuce: return "PlackettLuce";
  }
  return "Unknown";
}

ProfileKind profile_kind_from_name(const std::string& name) {
  if (name == "Block") return ProfileKind::Block;
  if (name == "UniformFull") return ProfileKind::UniformFull;
  if (name == "UniformPartial") return ProfileKind::UniformPartial;
  if (name == "CommonRanking") return ProfileKind::CommonRanking;
  if (name == "PlackettLuce") return ProfileKind::PlackettLuce;
  fail(ErrorCode::SpecInvalid, "unknown generator kind: " + name);
}

namespace {

std::vector<std::int64_t> resolve_capacities(const GeneratorSpec& spec) {
  if (!spec.capacities.empty()) {
    if (static_cast<std::int64_t>(spec.capacities.size()) != spec.m)
      fail(ErrorCode::SpecInvalid, "capacities length != m");
    return spec.capacities;
  }
  if (spec.m == 0 || spec.n % spec.m != 0)
    fail(ErrorCode::SpecInvalid, "default capacities need m | n");
  return std::vector<std::int64_t>(static_cast<std::size_t>(spec.m), spec.n / spec.m);
}

// Uniform random ordered subset of size len, via a partial Fisher-Yates over
// the school ids.
void sample_ordered_subset(std::int64_t m, std::int64_t len, Rng& rng, std::vector<School>& pool,
                           std::vector<School>& out) {
  pool.resize(static_cast<std::size_t>(m));
  std::iota(pool.begin(), pool.end(), 0);
  out.clear();
  for (std::int64_t p = 0; p < len; ++p) {
    auto j = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(m - p))) + p;
    std::swap(pool[static_cast<std::size_t>(p)], pool[static_cast<std::size_t>(j)]);
    out.push_back(pool[static_cast<std::size_t>(p)]);
  }
}

}  // namespace

MarketInstance generate_instance(const GeneratorSpec& spec) {
  if (spec.n < 1) fail(ErrorCode::SpecInvalid, "n must be >= 1");
  if (spec.m < 1) fail(ErrorCode::SpecInvalid, "m must be >= 1");
  if (spec.m > spec.n) fail(ErrorCode::SpecInvalid, "m <= n required");
  std::vector<std::int64_t> caps = resolve_capacities(spec);

  const std::int64_t n = spec.n;
  const std::int64_t m = spec.m;
  std::vector<School> data;
  std::vector<std::int64_t> offsets;
  offsets.reserve(static_cast<std::size_t>(n) + 1);
  offsets.push_back(0);
  Rng rng = derive_stream(spec.seed, "generate_instance", static_cast<std::uint64_t>(spec.kind));

  switch (spec.kind) {
    case ProfileKind::Block: {
      if (n % m != 0) fail(ErrorCode::SpecInvalid, "Block requires m | n");
      const std::int64_t c = n / m;
      for (std::int64_t k = 0; k < m; ++k) {
        if (caps[static_cast<std::size_t>(k)] != c)
          fail(ErrorCode::SpecInvalid, "Block requires all capacities = n/m");
      }
      data.reserve(static_cast<std::size_t>(n));
      for (std::int64_t i = 0; i < n; ++i) {
        data.push_back(static_cast<School>(i / c));
        offsets.push_back(static_cast<std::int64_t>(data.size()));
      }
      break;
    }
    case ProfileKind::UniformFull: {
      std::vector<School> pool, list;
      data.reserve(static_cast<std::size_t>(n * m));
      for (std::int64_t i = 0; i < n; ++i) {
        sample_ordered_subset(m, m, rng, pool, list);
        data.insert(data.end(), list.begin(), list.end());
        offsets.push_back(static_cast<std::int64_t>(data.size()));
      }
      break;
    }
    case ProfileKind::UniformPartial: {
      if (spec.list_length < 1 || spec.list_length > m)
        fail(ErrorCode::SpecInvalid, "list_length must lie in [1, m]");
      std::vector<School> pool, list;
      data.reserve(static_cast<std::size_t>(n * spec.list_length));
      for (std::int64_t i = 0; i < n; ++i) {
        sample_ordered_subset(m, spec.list_length, rng, pool, list);
        data.insert(data.end(), list.begin(), list.end());
        offsets.push_back(static_cast<std::int64_t>(data.size()));
      }
      break;
    }
    case ProfileKind::CommonRanking: {
      data.reserve(static_cast<std::size_t>(n * m));
      for (std::int64_t i = 0; i < n; ++i) {
        for (School k = 0; k < m; ++k) data.push_back(k);
        offsets.push_back(static_cast<std::int64_t>(data.size()));
      }
      break;
    }
    case ProfileKind::PlackettLuce: {
      if (static_cast<std::int64_t>(spec.weights.size()) != m)
        fail(ErrorCode::SpecInvalid, "PlackettLuce needs one weight per school");
      for (double w : spec.weights) {
        if (!(w > 0.0)) fail(ErrorCode::SpecInvalid, "PlackettLuce weights must be positive");
      }
      // Sequential sampling without replacement: pick each next entry with
      // probability proportional to the remaining weights.
      std::vector<School> pool(static_cast<std::size_t>(m));
      std::vector<double> w(spec.weights);
      data.reserve(static_cast<std::size_t>(n * m));
      for (std::int64_t i = 0; i < n; ++i) {
        std::iota(pool.begin(), pool.end(), 0);
        w = spec.weights;
        std::int64_t remaining = m;
        double total = std::accumulate(w.begin(), w.end(), 0.0);
        while (remaining > 0) {
          double u = rng.next_double() * total;
          std::int64_t pick = 0;
          double acc = 0.0;
          for (std::int64_t p = 0; p < remaining; ++p) {
            acc += w[static_cast<std::size_t>(p)];
            if (u < acc) {
              pick = p;
              break;
            }
            pick = p;  // float round-off lands on the last remaining school
          }
          data.push_back(pool[static_cast<std::size_t>(pick)]);
          total -= w[static_cast<std::size_t>(pick)];
          --remaining;
          pool[static_cast<std::size_t>(pick)] = pool[static_cast<std::size_t>(remaining)];
          w[static_cast<std::size_t>(pick)] = w[static_cast<std::size_t>(remaining)];
        }
        offsets.push_back(static_cast<std::int64_t>(data.size()));
      }
      break;
    }
  }
  return validate_instance_flat(n, m, std::move(caps), std::move(data), std::move(offsets));
}

Permutation sample_permutation(std::int64_t n, Rng& rng) {
  Permutation p;
  sample_permutation_into(n, rng, p);
  return p;
}

void sample_permutation_into(std::int64_t n, Rng& rng, Permutation& out) {
  if (n < 1) fail(ErrorCode::SpecInvalid, "permutation needs n >= 1");
  out.student_at.resize(static_cast<std::size_t>(n));
  out.rank_of.resize(static_cast<std::size_t>(n));
  std::iota(out.student_at.begin(), out.student_at.end(), 0);
  for (std::int64_t r = n - 1; r > 0; --r) {
    auto j = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(r + 1)));
    std::swap(out.student_at[static_cast<std::size_t>(r)], out.student_at[static_cast<std::size_t>(j)]);
  }
  for (Rank r = 0; r < n; ++r) out.rank_of[static_cast<std::size_t>(out.student_at[static_cast<std::size_t>(r)])] = r;
}

Permutation permutation_from_draws(const std::vector<double>& draws) {
  const auto n = static_cast<std::int64_t>(draws.size());
  std::vector<Student> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Student a, Student b) {
    double da = draws[static_cast<std::size_t>(a)];
    double db = draws[static_cast<std::size_t>(b)];
    if (da != db) return da < db;
    return a < b;
  });
  return Permutation::from_student_at(std::move(order));
}

LotteryDraw lottery_model_permutation(std::int64_t n, Rng& rng) {
  if (n < 1) fail(ErrorCode::SpecInvalid, "lottery model needs n >= 1");
  LotteryDraw out;
  out.draws.resize(static_cast<std::size_t>(n));
  for (auto& d : out.draws) d = rng.next_double();
  out.pi = permutation_from_draws(out.draws);
  return out;
}

}  // namespace rsdlab
