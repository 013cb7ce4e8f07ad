#include <doctest.h>

#include "rsdlab/error.hpp"
#include "rsdlab/generators.hpp"
#include "rsdlab/permutation.hpp"
#include "rsdlab/rng.hpp"

using namespace rsdlab;

TEST_CASE("permutation construction validates bijections") {
  auto p = Permutation::from_student_at({2, 0, 1});
  CHECK(p.rank_of == std::vector<Rank>{1, 2, 0});
  CHECK_THROWS_AS(Permutation::from_student_at({0, 0, 1}), Error);
  CHECK_THROWS_AS(Permutation::from_student_at({0, 3, 1}), Error);
  CHECK_THROWS_AS(Permutation::from_rank_of({1, 1, 0}), Error);
}

TEST_CASE("transposition swaps exactly two ranks") {
  auto pi = Permutation::identity(3);
  auto t01 = apply_transposition(pi, 0, 1);
  CHECK(t01.rank_of == std::vector<Rank>{1, 0, 2});
  CHECK(apply_transposition(t01, 0, 1) == pi);  // involution
  CHECK(hamming_distance(pi, t01) == 2);
}

TEST_CASE("insertion moves one student and keeps relative order") {
  auto pi = Permutation::identity(3);
  auto moved = insertion(pi, 2, 0);
  CHECK(moved.student_at == std::vector<Student>{2, 0, 1});
  CHECK(insertion(pi, 1, pi.rank_of[1]) == pi);  // no-op case

  // backward move
  auto back = insertion(pi, 0, 2);
  CHECK(back.student_at == std::vector<Student>{1, 2, 0});
}

TEST_CASE("transposition equals two insertions") {
  Rng rng(12345);
  for (int trial = 0; trial < 2000; ++trial) {
    std::int64_t n = 2 + static_cast<std::int64_t>(rng.next_below(10));
    Permutation pi = sample_permutation(n, rng);
    auto i = static_cast<Student>(rng.next_below(static_cast<std::uint64_t>(n)));
    auto j = static_cast<Student>((i + 1 + static_cast<Student>(rng.next_below(static_cast<std::uint64_t>(n - 1)))) % n);
    Rank ri = pi.rank_of[static_cast<std::size_t>(i)];
    Rank rj = pi.rank_of[static_cast<std::size_t>(j)];
    Permutation via_insertions = insertion(insertion(pi, i, rj), j, ri);
    CHECK(via_insertions == apply_transposition(pi, i, j));
  }
}

TEST_CASE("hamming distance counts moved students") {
  auto pi = Permutation::identity(4);
  CHECK(hamming_distance(pi, pi) == 0);
  auto shifted = Permutation::from_student_at({1, 2, 3, 0});
  CHECK(hamming_distance(pi, shifted) == 4);
}

TEST_CASE("decomposition reaches pi within hamming distance") {
  auto id = Permutation::identity(3);
  CHECK(decompose_into_transpositions(id, id).empty());

  auto swapped = apply_transposition(id, 0, 1);
  auto seq = decompose_into_transpositions(id, swapped);
  REQUIRE(seq.size() == 1);
  CHECK(seq[0] == std::pair<Student, Student>{0, 1});

  Rng rng(777);
  for (int trial = 0; trial < 10000; ++trial) {
    std::int64_t n = 2 + static_cast<std::int64_t>(rng.next_below(8));
    Permutation sigma = sample_permutation(n, rng);
    Permutation pi = sample_permutation(n, rng);
    auto steps = decompose_into_transpositions(sigma, pi);
    CHECK(static_cast<std::int64_t>(steps.size()) <= hamming_distance(pi, sigma));
    Permutation cur = sigma;
    for (auto [a, b] : steps) cur = apply_transposition(cur, a, b);
    CHECK(cur == pi);
  }
}
