#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rsdlab/permutation.hpp"

namespace rsdlab {

using School = std::int32_t;
constexpr School kUnmatched = -1;

// Raw instance data as it arrives from files or callers, before validation.
struct InstanceData {
  std::int64_t n = 0;
  std::int64_t m = 0;
  std::vector<std::int64_t> capacities;
  std::vector<std::vector<School>> preferences;
};

// The fixed market environment: n students, m <= n schools with seat
// capacities, and one strict (possibly partial) preference list per student.
// Lists are stored flattened; prefs(i) views student i's list, best first.
// Schools absent from a list are unacceptable to that student.
class MarketInstance {
 public:
  std::int64_t n() const { return n_; }
  std::int64_t m() const { return m_; }
  const std::vector<std::int64_t>& capacities() const { return capacities_; }
  std::int64_t capacity(School k) const { return capacities_[static_cast<std::size_t>(k)]; }

  std::span<const School> prefs(std::int64_t student) const {
    auto b = pref_offsets_[static_cast<std::size_t>(student)];
    auto e = pref_offsets_[static_cast<std::size_t>(student) + 1];
    return {pref_data_.data() + b, static_cast<std::size_t>(e - b)};
  }

  std::int64_t total_list_length() const { return static_cast<std::int64_t>(pref_data_.size()); }

  // True iff `student` weakly prefers school k to outcome `assigned`
  // (kUnmatched allowed): k must be listed and appear at or before the
  // assigned school; an unmatched student weakly prefers every listed school.
  bool weakly_prefers(std::int64_t student, School k, School assigned) const {
    for (School q : prefs(student)) {
      if (q == k) return true;
      if (q == assigned) return false;
    }
    return false;
  }

  friend MarketInstance validate_instance(const InstanceData& raw);
  friend MarketInstance validate_instance_flat(std::int64_t n, std::int64_t m,
                                               std::vector<std::int64_t> capacities,
                                               std::vector<School> pref_data,
                                               std::vector<std::int64_t> pref_offsets);

 private:
  MarketInstance() = default;

  std::int64_t n_ = 0;
  std::int64_t m_ = 0;
  std::vector<std::int64_t> capacities_;
  std::vector<School> pref_data_;
  std::vector<std::int64_t> pref_offsets_;  // n+1 entries
};

// Checks every instance invariant and never repairs anything. Throws Error
// with codes MoreSchoolsThanStudents, ZeroCapacity, SchoolIndexOutOfRange or
// DuplicateSchoolInList.
MarketInstance validate_instance(const InstanceData& raw);

// Same checks on pre-flattened data; used by generators and file loading.
MarketInstance validate_instance_flat(std::int64_t n, std::int64_t m,
                                      std::vector<std::int64_t> capacities,
                                      std::vector<School> pref_data,
                                      std::vector<std::int64_t> pref_offsets);

// The RSD outcome: school_of[i] is student i's school or kUnmatched;
// exhaustion_rank[k] is the 0-based rank at which school k's last seat was
// taken, or -1 if it never filled.
struct Assignment {
  std::vector<School> school_of;
  std::vector<std::int64_t> seats_filled;
  std::vector<std::int64_t> exhaustion_rank;
};

// Step function t -> tau_k(t, pi) for one school; values has n+1 entries,
// values[0] = 0, and values[t] counts students at ranks < t who weakly prefer
// k to their own outcome. Nondecreasing with increments in {0, 1}.
struct DemandTrajectory {
  School school = 0;
  std::vector<std::int64_t> values;
};

// Normalized-rank cutoffs. For a binding school, gamma is the 1-based rank of
// the lowest-ranked admitted student divided by n; a school that never fills
// gets gamma = 1 with binding = false.
struct CutoffVector {
  std::vector<double> gamma;
  std::vector<std::uint8_t> binding;
};

// Runs serial dictatorship in the order given by pi: each student in rank
// order takes the first school on their list with a free seat, else stays
// unmatched. Deterministic and total on valid inputs.
Assignment run_rsd(const MarketInstance& inst, const Permutation& pi);

// Allocation-free variant for hot loops; `seats_left` is scratch of size m.
void run_rsd_into(const MarketInstance& inst, const Permutation& pi, Assignment& out,
                  std::vector<std::int64_t>& seats_left);

DemandTrajectory demand_trajectory(const MarketInstance& inst, const Permutation& pi, School k);

// Same, reusing an already computed assignment for this (inst, pi).
DemandTrajectory demand_trajectory_from(const MarketInstance& inst, const Permutation& pi,
                                        const Assignment& a, School k);

CutoffVector cutoffs(const MarketInstance& inst, const Permutation& pi);
CutoffVector cutoffs_from(const MarketInstance& inst, const Assignment& a);

}  // namespace rsdlab
