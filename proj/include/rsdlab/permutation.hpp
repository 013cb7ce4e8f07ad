#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace rsdlab {

using Student = std::int32_t;
using Rank = std::int32_t;

// A picking order over n students, stored in both directions:
// rank_of[student] and student_at[rank] are mutually inverse bijections.
struct Permutation {
  std::vector<Rank> rank_of;
  std::vector<Student> student_at;

  std::int64_t n() const { return static_cast<std::int64_t>(rank_of.size()); }

  static Permutation identity(std::int64_t n);

  // Validates that the array is a bijection on [0, n).
  static Permutation from_student_at(std::vector<Student> student_at);
  static Permutation from_rank_of(std::vector<Rank> rank_of);

  bool operator==(const Permutation& other) const { return rank_of == other.rank_of; }
};

// t_ij * pi: the ranks of students i and j are swapped, all others unchanged.
Permutation apply_transposition(const Permutation& pi, Student i, Student j);

// (j -> s) * pi: student j is removed from the order and re-inserted so that
// it ends up at rank s; everyone else keeps their relative order.
Permutation insertion(const Permutation& pi, Student j, Rank s);

// Number of students whose ranks differ.
std::int64_t hamming_distance(const Permutation& pi, const Permutation& sigma);

// Transpositions (i, j) that, applied to sigma left to right, produce pi.
// Built from the cycle structure of pi composed with sigma^{-1}; the sequence
// length is at most hamming_distance(pi, sigma).
std::vector<std::pair<Student, Student>> decompose_into_transpositions(const Permutation& sigma,
                                                                       const Permutation& pi);

}  // namespace rsdlab
