#include "rsdlab/market.hpp"

#include <string>

#include "rsdlab/error.hpp"

namespace rsdlab {

namespace {

void check_invariants(std::int64_t n, std::int64_t m, const std::vector<std::int64_t>& capacities,
                      const std::vector<School>& pref_data,
                      const std::vector<std::int64_t>& pref_offsets) {
  if (n < 0 || m < 0) fail(ErrorCode::SpecInvalid, "negative market size");
  if (m > n)
    fail(ErrorCode::MoreSchoolsThanStudents,
         "m=" + std::to_string(m) + " schools but only n=" + std::to_string(n) + " students");
  if (static_cast<std::int64_t>(capacities.size()) != m)
    fail(ErrorCode::SpecInvalid, "capacities length != m");
  for (std::int64_t k = 0; k < m; ++k) {
    if (capacities[static_cast<std::size_t>(k)] < 1)
      fail(ErrorCode::ZeroCapacity, "school " + std::to_string(k) + " has capacity " +
                                        std::to_string(capacities[static_cast<std::size_t>(k)]));
  }
  if (static_cast<std::int64_t>(pref_offsets.size()) != n + 1)
    fail(ErrorCode::SpecInvalid, "preferences length != n");
  // last-seen stamps, one pass over all lists
  std::vector<std::int64_t> seen(static_cast<std::size_t>(m), -1);
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t p = pref_offsets[static_cast<std::size_t>(i)];
         p < pref_offsets[static_cast<std::size_t>(i) + 1]; ++p) {
      School k = pref_data[static_cast<std::size_t>(p)];
      if (k < 0 || k >= m)
        fail(ErrorCode::SchoolIndexOutOfRange,
             "student " + std::to_string(i) + " lists school " + std::to_string(k));
      if (seen[static_cast<std::size_t>(k)] == i)
        fail(ErrorCode::DuplicateSchoolInList,
             "student " + std::to_string(i) + " lists school " + std::to_string(k) + " twice");
      seen[static_cast<std::size_t>(k)] = i;
    }
  }
}

}  // namespace

MarketInstance validate_instance(const InstanceData& raw) {
  if (static_cast<std::int64_t>(raw.preferences.size()) != raw.n)
    fail(ErrorCode::SpecInvalid, "preferences length != n");
  std::vector<School> data;
  std::vector<std::int64_t> offsets;
  offsets.reserve(static_cast<std::size_t>(raw.n) + 1);
  offsets.push_back(0);
  for (const auto& list : raw.preferences) {
    data.insert(data.end(), list.begin(), list.end());
    offsets.push_back(static_cast<std::int64_t>(data.size()));
  }
  return validate_instance_flat(raw.n, raw.m, raw.capacities, std::move(data), std::move(offsets));
}

MarketInstance validate_instance_flat(std::int64_t n, std::int64_t m,
                                      std::vector<std::int64_t> capacities,
                                      std::vector<School> pref_data,
                                      std::vector<std::int64_t> pref_offsets) {
  check_invariants(n, m, capacities, pref_data, pref_offsets);
  MarketInstance inst;
  inst.n_ = n;
  inst.m_ = m;
  inst.capacities_ = std::move(capacities);
  inst.pref_data_ = std::move(pref_data);
  inst.pref_offsets_ = std::move(pref_offsets);
  return inst;
}

void run_rsd_into(const MarketInstance& inst, const Permutation& pi, Assignment& out,
                  std::vector<std::int64_t>& seats_left) {
  const std::int64_t n = inst.n();
  const std::int64_t m = inst.m();
  out.school_of.assign(static_cast<std::size_t>(n), kUnmatched);
  out.exhaustion_rank.assign(static_cast<std::size_t>(m), -1);
  seats_left = inst.capacities();
  for (Rank r = 0; r < n; ++r) {
    Student s = pi.student_at[static_cast<std::size_t>(r)];
    for (School k : inst.prefs(s)) {
      auto& left = seats_left[static_cast<std::size_t>(k)];
      if (left > 0) {
        out.school_of[static_cast<std::size_t>(s)] = k;
        if (--left == 0) out.exhaustion_rank[static_cast<std::size_t>(k)] = r;
        break;
      }
    }
  }
  out.seats_filled.resize(static_cast<std::size_t>(m));
  for (std::int64_t k = 0; k < m; ++k) {
    out.seats_filled[static_cast<std::size_t>(k)] =
        inst.capacities()[static_cast<std::size_t>(k)] - seats_left[static_cast<std::size_t>(k)];
  }
}

Assignment run_rsd(const MarketInstance& inst, const Permutation& pi) {
  Assignment a;
  std::vector<std::int64_t> seats_left;
  run_rsd_into(inst, pi, a, seats_left);
  return a;
}

DemandTrajectory demand_trajectory_from(const MarketInstance& inst, const Permutation& pi,
                                        const Assignment& a, School k) {
  const std::int64_t n = inst.n();
  DemandTrajectory traj;
  traj.school = k;
  traj.values.resize(static_cast<std::size_t>(n) + 1);
  traj.values[0] = 0;
  for (Rank r = 0; r < n; ++r) {
    Student s = pi.student_at[static_cast<std::size_t>(r)];
    bool weak = inst.weakly_prefers(s, k, a.school_of[static_cast<std::size_t>(s)]);
    traj.values[static_cast<std::size_t>(r) + 1] = traj.values[static_cast<std::size_t>(r)] + (weak ? 1 : 0);
  }
  return traj;
}

DemandTrajectory demand_trajectory(const MarketInstance& inst, const Permutation& pi, School k) {
  Assignment a = run_rsd(inst, pi);
  return demand_trajectory_from(inst, pi, a, k);
}

CutoffVector cutoffs_from(const MarketInstance& inst, const Assignment& a) {
  const std::int64_t m = inst.m();
  const auto n = static_cast<double>(inst.n());
  CutoffVector cv;
  cv.gamma.resize(static_cast<std::size_t>(m));
  cv.binding.resize(static_cast<std::size_t>(m));
  for (std::int64_t k = 0; k < m; ++k) {
    std::int64_t er = a.exhaustion_rank[static_cast<std::size_t>(k)];
    if (er >= 0) {
      // Admissions arrive in rank order, so the student who took the last
      // seat is the lowest-ranked admitted one.
      cv.gamma[static_cast<std::size_t>(k)] = static_cast<double>(er + 1) / n;
      cv.binding[static_cast<std::size_t>(k)] = 1;
    } else {
      cv.gamma[static_cast<std::size_t>(k)] = 1.0;
      cv.binding[static_cast<std::size_t>(k)] = 0;
    }
  }
  return cv;
}

CutoffVector cutoffs(const MarketInstance& inst, const Permutation& pi) {
  Assignment a = run_rsd(inst, pi);
  return cutoffs_from(inst, a);
}

}  // namespace rsdlab
