#include <doctest.h>

#include <functional>

#include "rsdlab/error.hpp"
#include "rsdlab/generators.hpp"
#include "rsdlab/market.hpp"
#include "rsdlab/rng.hpp"
#include "rsdlab/verify.hpp"

using namespace rsdlab;

namespace {

MarketInstance make(std::int64_t n, std::int64_t m, std::vector<std::int64_t> caps,
                    std::vector<std::vector<School>> prefs) {
  InstanceData d;
  d.n = n;
  d.m = m;
  d.capacities = std::move(caps);
  d.preferences = std::move(prefs);
  return validate_instance(d);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::BadConfig;
}

}  // namespace

TEST_CASE("validate_instance accepts well-formed input") {
  auto inst = make(2, 2, {1, 1}, {{0, 1}, {0, 1}});
  CHECK(inst.n() == 2);
  CHECK(inst.m() == 2);
  CHECK(inst.prefs(0).size() == 2);
}

TEST_CASE("validate_instance rejects each violation with its own code") {
  CHECK(code_of([] { make(1, 2, {1, 1}, {{0}}); }) == ErrorCode::MoreSchoolsThanStudents);
  CHECK(code_of([] { make(3, 3, {1, 1, 1}, {{5}, {0}, {1}}); }) == ErrorCode::SchoolIndexOutOfRange);
  CHECK(code_of([] { make(2, 2, {1, 0}, {{0}, {1}}); }) == ErrorCode::ZeroCapacity);
  CHECK(code_of([] { make(2, 2, {1, 1}, {{0, 0}, {1}}); }) == ErrorCode::DuplicateSchoolInList);
}

TEST_CASE("rsd assigns greedily in rank order") {
  auto inst = make(2, 2, {1, 1}, {{0, 1}, {0, 1}});
  auto a = run_rsd(inst, Permutation::identity(2));
  CHECK(a.school_of == std::vector<School>{0, 1});

  auto inst3 = make(3, 2, {1, 1}, {{0, 1}, {0, 1}, {0, 1}});
  auto a3 = run_rsd(inst3, Permutation::identity(3));
  CHECK(a3.school_of == std::vector<School>{0, 1, kUnmatched});
  CHECK(a3.seats_filled == std::vector<std::int64_t>{1, 1});
  CHECK(a3.exhaustion_rank == std::vector<std::int64_t>{0, 1});
}

TEST_CASE("block students always get their only listed school") {
  GeneratorSpec spec;
  spec.kind = ProfileKind::Block;
  spec.n = 12;
  spec.m = 3;
  spec.seed = 9;
  auto inst = generate_instance(spec);
  Rng rng(4242);
  for (int trial = 0; trial < 50; ++trial) {
    auto pi = sample_permutation(12, rng);
    auto a = run_rsd(inst, pi);
    for (Student i = 0; i < 12; ++i) {
      CHECK(a.school_of[static_cast<std::size_t>(i)] == inst.prefs(i)[0]);
    }
  }
}

TEST_CASE("demand trajectories count weak preference prefix sums") {
  auto inst = make(3, 2, {1, 1}, {{0, 1}, {0, 1}, {0, 1}});
  auto pi = Permutation::identity(3);
  CHECK(demand_trajectory(inst, pi, 0).values == std::vector<std::int64_t>{0, 1, 2, 3});
  CHECK(demand_trajectory(inst, pi, 1).values == std::vector<std::int64_t>{0, 0, 1, 2});
}

TEST_CASE("demand trajectory matches a hand replay on a mixed instance") {
  // order 2,0,3,1: student2 takes school1 (fills), student0 takes school0,
  // student3 finds school1 full and is unmatched, student1 takes school0.
  auto inst = make(4, 2, {2, 1}, {{0}, {0, 1}, {1, 0}, {1}});
  auto pi = Permutation::from_student_at({2, 0, 3, 1});
  CHECK(demand_trajectory(inst, pi, 1).values == std::vector<std::int64_t>{0, 1, 1, 2, 2});
}

TEST_CASE("cutoffs: binding schools get the last admitted rank, others 1") {
  auto inst = make(3, 2, {1, 1}, {{0, 1}, {0, 1}, {0, 1}});
  auto cv = cutoffs(inst, Permutation::identity(3));
  CHECK(cv.gamma[0] == doctest::Approx(1.0 / 3.0));
  CHECK(cv.gamma[1] == doctest::Approx(2.0 / 3.0));
  CHECK(cv.binding[0] == 1);
  CHECK(cv.binding[1] == 1);

  // undersubscribed schools: gamma = 1 with the binding flag off
  auto under = make(2, 2, {3, 3}, {{0}, {0}});
  auto cv2 = cutoffs(under, Permutation::identity(2));
  CHECK(cv2.gamma[0] == 1.0);
  CHECK(cv2.binding[0] == 0);  // two of three seats used
  CHECK(cv2.gamma[1] == 1.0);
  CHECK(cv2.binding[1] == 0);

  // boundary: a school that fills on the very last student is binding with
  // gamma = 1, distinguishable from the undersubscribed case by the flag
  auto exact = make(2, 2, {2, 2}, {{0}, {0}});
  auto cv3 = cutoffs(exact, Permutation::identity(2));
  CHECK(cv3.gamma[0] == 1.0);
  CHECK(cv3.binding[0] == 1);
  CHECK(cv3.binding[1] == 0);
}

TEST_CASE("core invariants hold on randomized instances") {
  auto battery = property_battery(30, 11);
  Rng rng(500);
  for (int trial = 0; trial < 400; ++trial) {
    const auto& inst = battery[rng.next_below(battery.size())];
    auto pi = sample_permutation(inst.n(), rng);
    auto a = run_rsd(inst, pi);
    auto again = run_rsd(inst, pi);
    CHECK(a.school_of == again.school_of);  // determinism

    std::vector<std::int64_t> seats(static_cast<std::size_t>(inst.m()), 0);
    for (Student i = 0; i < inst.n(); ++i) {
      School k = a.school_of[static_cast<std::size_t>(i)];
      if (k == kUnmatched) continue;
      ++seats[static_cast<std::size_t>(k)];
      // individual rationality: assigned school is on the student's own list
      bool listed = false;
      for (School q : inst.prefs(i)) listed |= q == k;
      CHECK(listed);
    }
    for (School k = 0; k < inst.m(); ++k) {
      CHECK(seats[static_cast<std::size_t>(k)] == a.seats_filled[static_cast<std::size_t>(k)]);
      CHECK(a.seats_filled[static_cast<std::size_t>(k)] <= inst.capacity(k));
      // exhaustion recorded iff the school filled
      CHECK((a.exhaustion_rank[static_cast<std::size_t>(k)] >= 0) ==
            (a.seats_filled[static_cast<std::size_t>(k)] == inst.capacity(k)));
    }

    // greedy optimality by replay: each student takes their best school with
    // a free seat at their turn
    std::vector<std::int64_t> left = inst.capacities();
    for (Rank r = 0; r < inst.n(); ++r) {
      Student s = pi.student_at[static_cast<std::size_t>(r)];
      School expected = kUnmatched;
      for (School q : inst.prefs(s)) {
        if (left[static_cast<std::size_t>(q)] > 0) {
          expected = q;
          break;
        }
      }
      CHECK(a.school_of[static_cast<std::size_t>(s)] == expected);
      if (expected != kUnmatched) --left[static_cast<std::size_t>(expected)];
    }

    // trajectory regularity for a school picked at random
    auto k = static_cast<School>(rng.next_below(static_cast<std::uint64_t>(inst.m())));
    auto traj = demand_trajectory_from(inst, pi, a, k);
    CHECK(traj.values[0] == 0);
    for (std::size_t t = 1; t < traj.values.size(); ++t) {
      auto step = traj.values[t] - traj.values[t - 1];
      CHECK(step >= 0);
      CHECK(step <= 1);
    }
  }
}
