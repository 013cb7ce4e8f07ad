#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "rsdlab/error.hpp"
#include "rsdlab/generators.hpp"
#include "rsdlab/rng.hpp"

using namespace rsdlab;

namespace {

GeneratorSpec spec_of(ProfileKind kind, std::int64_t n, std::int64_t m, std::uint64_t seed) {
  GeneratorSpec s;
  s.kind = kind;
  s.n = n;
  s.m = m;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("block profile lists exactly one school per student") {
  auto inst = generate_instance(spec_of(ProfileKind::Block, 4, 2, 1));
  CHECK(inst.capacities() == std::vector<std::int64_t>{2, 2});
  CHECK(std::vector<School>(inst.prefs(0).begin(), inst.prefs(0).end()) == std::vector<School>{0});
  CHECK(std::vector<School>(inst.prefs(1).begin(), inst.prefs(1).end()) == std::vector<School>{0});
  CHECK(std::vector<School>(inst.prefs(2).begin(), inst.prefs(2).end()) == std::vector<School>{1});
  CHECK(std::vector<School>(inst.prefs(3).begin(), inst.prefs(3).end()) == std::vector<School>{1});
}

TEST_CASE("common ranking gives every student the identical full list") {
  auto spec = spec_of(ProfileKind::CommonRanking, 3, 2, 1);
  spec.capacities = {1, 1};
  auto inst = generate_instance(spec);
  for (Student i = 0; i < 3; ++i) {
    CHECK(std::vector<School>(inst.prefs(i).begin(), inst.prefs(i).end()) ==
          std::vector<School>{0, 1});
  }
}

TEST_CASE("generators are deterministic in the seed") {
  auto spec = spec_of(ProfileKind::UniformFull, 20, 5, 99);
  spec.capacities = std::vector<std::int64_t>(5, 4);
  auto a = generate_instance(spec);
  auto b = generate_instance(spec);
  REQUIRE(a.n() == b.n());
  for (Student i = 0; i < a.n(); ++i) {
    CHECK(std::vector<School>(a.prefs(i).begin(), a.prefs(i).end()) ==
          std::vector<School>(b.prefs(i).begin(), b.prefs(i).end()));
  }
}

TEST_CASE("generator spec violations raise SpecInvalid") {
  CHECK_THROWS_AS(generate_instance(spec_of(ProfileKind::Block, 5, 2, 1)), Error);  // m does not divide n
  auto bad_len = spec_of(ProfileKind::UniformPartial, 4, 2, 1);
  bad_len.capacities = {2, 2};
  bad_len.list_length = 3;
  CHECK_THROWS_AS(generate_instance(bad_len), Error);
  auto bad_w = spec_of(ProfileKind::PlackettLuce, 4, 2, 1);
  bad_w.capacities = {2, 2};
  bad_w.weights = {1.0, 0.0};
  CHECK_THROWS_AS(generate_instance(bad_w), Error);
  CHECK_THROWS_AS(generate_instance(spec_of(ProfileKind::CommonRanking, 2, 3, 1)), Error);  // m > n
}

TEST_CASE("uniform partial lists have the requested length and no repeats") {
  auto spec = spec_of(ProfileKind::UniformPartial, 50, 10, 3);
  spec.capacities = std::vector<std::int64_t>(10, 5);
  spec.list_length = 4;
  auto inst = generate_instance(spec);
  for (Student i = 0; i < 50; ++i) CHECK(inst.prefs(i).size() == 4);
}

TEST_CASE("fisher-yates sampling is uniform on n=3") {
  Rng rng(2024);
  std::map<std::vector<Student>, int> freq;
  const int samples = 60000;
  for (int i = 0; i < samples; ++i) {
    auto pi = sample_permutation(3, rng);
    ++freq[pi.student_at];
  }
  CHECK(freq.size() == 6);
  // each of the 6 orders within 4 standard errors of 1/6
  const double p = 1.0 / 6.0;
  const double se = std::sqrt(p * (1 - p) / samples);
  for (const auto& [order, count] : freq) {
    double obs = static_cast<double>(count) / samples;
    CHECK(std::abs(obs - p) <= 4 * se);
  }
}

TEST_CASE("permutation sampling is reproducible and n=1 is the identity") {
  Rng a(7), b(7);
  CHECK(sample_permutation(6, a) == sample_permutation(6, b));
  Rng c(1);
  CHECK(sample_permutation(1, c) == Permutation::identity(1));
}

TEST_CASE("lottery draws rank students by ascending number") {
  CHECK(permutation_from_draws({0.2, 0.9, 0.5}).student_at == std::vector<Student>{0, 2, 1});
  // equal draws break toward the lower student id
  CHECK(permutation_from_draws({0.5, 0.5, 0.1}).student_at == std::vector<Student>{2, 0, 1});
}

TEST_CASE("lottery model induces a uniform permutation") {
  Rng rng(555);
  std::map<std::vector<Student>, int> freq;
  const int samples = 60000;
  for (int i = 0; i < samples; ++i) {
    auto ld = lottery_model_permutation(3, rng);
    ++freq[ld.pi.student_at];
  }
  CHECK(freq.size() == 6);
  const double p = 1.0 / 6.0;
  const double se = std::sqrt(p * (1 - p) / samples);
  for (const auto& [order, count] : freq) {
    CHECK(std::abs(static_cast<double>(count) / samples - p) <= 4 * se);
  }
}

TEST_CASE("plackett-luce respects extreme weights") {
  auto spec = spec_of(ProfileKind::PlackettLuce, 40, 2, 31);
  spec.capacities = {20, 20};
  spec.weights = {1e12, 1.0};
  auto inst = generate_instance(spec);
  for (Student i = 0; i < 40; ++i) CHECK(inst.prefs(i)[0] == 0);

  // equal weights: both orders of two schools occur
  auto fair = spec_of(ProfileKind::PlackettLuce, 200, 2, 32);
  fair.capacities = {100, 100};
  fair.weights = {1.0, 1.0};
  auto inst2 = generate_instance(fair);
  int first0 = 0;
  for (Student i = 0; i < 200; ++i) first0 += inst2.prefs(i)[0] == 0;
  CHECK(first0 > 50);
  CHECK(first0 < 150);
}
