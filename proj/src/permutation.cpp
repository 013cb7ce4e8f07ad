#include "rsdlab/permutation.hpp"

#include <numeric>
#include <string>

#include "rsdlab/error.hpp"

namespace rsdlab {

Permutation Permutation::identity(std::int64_t n) {
  Permutation p;
  p.rank_of.resize(static_cast<std::size_t>(n));
  p.student_at.resize(static_cast<std::size_t>(n));
  std::iota(p.rank_of.begin(), p.rank_of.end(), 0);
  std::iota(p.student_at.begin(), p.student_at.end(), 0);
  return p;
}

Permutation Permutation::from_student_at(std::vector<Student> student_at) {
  const auto n = static_cast<std::int64_t>(student_at.size());
  Permutation p;
  p.rank_of.assign(static_cast<std::size_t>(n), -1);
  for (Rank r = 0; r < n; ++r) {
    Student s = student_at[static_cast<std::size_t>(r)];
    if (s < 0 || s >= n) fail(ErrorCode::BadPermutation, "student id out of range: " + std::to_string(s));
    if (p.rank_of[static_cast<std::size_t>(s)] != -1)
      fail(ErrorCode::BadPermutation, "student repeated: " + std::to_string(s));
    p.rank_of[static_cast<std::size_t>(s)] = r;
  }
  p.student_at = std::move(student_at);
  return p;
}

Permutation Permutation::from_rank_of(std::vector<Rank> rank_of) {
  const auto n = static_cast<std::int64_t>(rank_of.size());
  Permutation p;
  p.student_at.assign(static_cast<std::size_t>(n), -1);
  for (Student s = 0; s < n; ++s) {
    Rank r = rank_of[static_cast<std::size_t>(s)];
    if (r < 0 || r >= n) fail(ErrorCode::BadPermutation, "rank out of range: " + std::to_string(r));
    if (p.student_at[static_cast<std::size_t>(r)] != -1)
      fail(ErrorCode::BadPermutation, "rank repeated: " + std::to_string(r));
    p.student_at[static_cast<std::size_t>(r)] = s;
  }
  p.rank_of = std::move(rank_of);
  return p;
}

Permutation apply_transposition(const Permutation& pi, Student i, Student j) {
  Permutation out = pi;
  Rank ri = out.rank_of[static_cast<std::size_t>(i)];
  Rank rj = out.rank_of[static_cast<std::size_t>(j)];
  out.rank_of[static_cast<std::size_t>(i)] = rj;
  out.rank_of[static_cast<std::size_t>(j)] = ri;
  out.student_at[static_cast<std::size_t>(ri)] = j;
  out.student_at[static_cast<std::size_t>(rj)] = i;
  return out;
}

// Implemented semantically (delete j, reinsert at slot s) rather than by an
// index formula: shift the block between the old and new slot by one and
// rebuild ranks for the affected range only.
Permutation insertion(const Permutation& pi, Student j, Rank s) {
  Permutation out = pi;
  Rank rj = out.rank_of[static_cast<std::size_t>(j)];
  if (s == rj) return out;
  if (s < rj) {
    // j moves ahead; students in [s, rj) shift down one slot.
    for (Rank r = rj; r > s; --r) {
      Student moved = out.student_at[static_cast<std::size_t>(r - 1)];
      out.student_at[static_cast<std::size_t>(r)] = moved;
      out.rank_of[static_cast<std::size_t>(moved)] = r;
    }
  } else {
    // j moves back; students in (rj, s] shift up one slot.
    for (Rank r = rj; r < s; ++r) {
      Student moved = out.student_at[static_cast<std::size_t>(r + 1)];
      out.student_at[static_cast<std::size_t>(r)] = moved;
      out.rank_of[static_cast<std::size_t>(moved)] = r;
    }
  }
  out.student_at[static_cast<std::size_t>(s)] = j;
  out.rank_of[static_cast<std::size_t>(j)] = s;
  return out;
}

std::int64_t hamming_distance(const Permutation& pi, const Permutation& sigma) {
  std::int64_t d = 0;
  for (std::size_t i = 0; i < pi.rank_of.size(); ++i) {
    d += pi.rank_of[i] != sigma.rank_of[i];
  }
  return d;
}

std::vector<std::pair<Student, Student>> decompose_into_transpositions(const Permutation& sigma,
                                                                       const Permutation& pi) {
  const auto n = sigma.n();
  Permutation cur = sigma;
  std::vector<std::pair<Student, Student>> out;
  // Walk students in id order; each swap parks student i at its target rank
  // for good, so every cycle of length L costs L-1 transpositions.
  for (Student i = 0; i < n; ++i) {
    Rank want = pi.rank_of[static_cast<std::size_t>(i)];
    Rank have = cur.rank_of[static_cast<std::size_t>(i)];
    if (want == have) continue;
    Student occupant = cur.student_at[static_cast<std::size_t>(want)];
    cur = apply_transposition(cur, i, occupant);
    out.emplace_back(i, occupant);
  }
  return out;
}

}  // namespace rsdlab
