#include "catch_amalgamated.hpp"

#include "test_support.hpp"

using namespace hclab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> first_moduli(const gap_subsequence& sub, std::size_t count) {
  return {sub.moduli.begin(), sub.moduli.begin() + static_cast<std::ptrdiff_t>(std::min(count, sub.size()))};
}

}  // namespace

TEST_CASE("gap subsequence of squares") {
  const auto sub = extract_gap_subsequence(sequence_from_formula("n^2", 100), 10.0, 5);
  CHECK(first_moduli(sub, 5) == std::vector<double>{16, 36, 49, 64, 81});
  CHECK(sub.indices == std::vector<std::size_t>{4, 6, 7, 8, 9});
  CHECK_FALSE(sub.exhausted);
}

TEST_CASE("gap subsequence of a geometric sequence") {
  const auto sub = extract_gap_subsequence(sequence_from_formula("3*2^n", 30), 5.0, 4);
  CHECK(first_moduli(sub, 4) == std::vector<double>{6, 12, 24, 48});
}

TEST_CASE("bounded sequence has no gap subsequence") {
  CHECK_THROWS_MATCHES(extract_gap_subsequence(sequence_from_formula("1+1/n", 1000), 5.0, 10), error,
                       Catch::Matchers::Predicate<error>([](const error& e) {
                         return e.code() == errc::insufficient_growth;
                       }));
  CHECK_THROWS_AS(extract_gap_subsequence(sequence_from_formula("n", 10), 0.0, 10), error);
}

TEST_CASE("sequence validation rejects zero terms") {
  CHECK_THROWS_AS(make_sequence({cplx(1.0), cplx(0.0)}), error);
  CHECK_THROWS_AS(sequence_from_formula("n-3", 5), error);
}

TEST_CASE("gap invariants hold on random sequences") {
  testing::gen g(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto terms = g.increasing_terms(g.index(20, 400), 0.1, 30.0);
    const double gap = g.uniform(0.5, 50.0);
    const auto seq = std::make_shared<const sequence>(make_sequence(terms));
    gap_subsequence sub;
    try {
      sub = extract_gap_subsequence(seq, gap, g.index(1, 500));
    } catch (const error& e) {
      REQUIRE(e.code() == errc::insufficient_growth);
      continue;
    }
    REQUIRE(satisfies_gap_invariants(sub));
    // greedy: every skipped term between picks is within gap of the last pick
    for (std::size_t k = 1; k < sub.size(); ++k)
      for (std::size_t i = sub.indices[k - 1] + 1; i < sub.indices[k]; ++i)
        REQUIRE(std::abs(terms[i - 1]) <= sub.moduli[k - 1] + gap);
  }
}

TEST_CASE("condition C on squares and geometric sequences") {
  const auto sq = sequence_from_formula("n^2", 100000);
  const auto rep = check_condition_C(sq, 10.0, 100000, 5.0);
  CHECK(rep.result == verdict::passes_proxy);
  CHECK(rep.checkpoints.back() == extract_gap_subsequence(sq, 10.0, 1u << 30).size());

  const auto geo = sequence_from_formula("3*2^n", 60);
  const auto grep = check_condition_C(geo, 5.0, 60, 5.0);
  CHECK(grep.result == verdict::fails_proxy);
  for (double L : grep.evidence) CHECK(L <= 2.0 + 1e-12);

  CHECK(check_condition_C(sequence_from_formula("n^2", 2000), 50.0, 2000, 5.0).result == verdict::passes_proxy);
  CHECK_THROWS_AS(check_condition_C(sq, 10.0, 9, 5.0), error);
}

TEST_CASE("condition C on a generated sequence") {
  const auto gen = generate_gap_block_sequence(4.0, 6);
  const auto rep = check_condition_C(gen.enumeration, 10.0, gen.enumeration.size(), 5.0);
  CHECK(rep.result == verdict::passes_proxy);
}

TEST_CASE("condition Sigma") {
  CHECK(check_condition_Sigma(sequence_from_formula("n", 100000), 10.0, 100000).result == verdict::passes_proxy);
  CHECK(check_condition_Sigma(sequence_from_formula("n^2", 100000), 10.0, 100000).result == verdict::fails_proxy);
  const auto gen = generate_gap_block_sequence(4.0, 6);
  CHECK(check_condition_Sigma(gen.enumeration, 10.0, gen.enumeration.size()).result == verdict::fails_proxy);

  sigma_options opt;
  opt.allow_analytic = true;
  CHECK(check_condition_Sigma(sequence_from_formula("130*n", 1000), 10.0, 1000, opt).result ==
        verdict::analytic_pass);
  CHECK(check_condition_Sigma(sequence_from_formula("n^2", 1000), 10.0, 1000, opt).result == verdict::fails_proxy);
}

TEST_CASE("liminf ratio criterion") {
  CHECK(check_liminf_ratio(sequence_from_formula("3^n", 40), 40).result == verdict::provably_fails);
  CHECK(check_liminf_ratio(sequence_from_formula("3*2^n", 40), 40).result != verdict::provably_fails);
  CHECK(check_liminf_ratio(sequence_from_formula("n^2", 1000), 1000).result != verdict::provably_fails);
}

TEST_CASE("generated blocks for M = 4") {
  const auto gen = generate_gap_block_sequence(4.0, 3);
  REQUIRE(gen.num_blocks() == 3);
  CHECK(gen.blocks[0].values == std::vector<long double>{1.0L});
  CHECK(gen.blocks[1].values == std::vector<long double>{4.0L, 9.0L, 16.0L, 25.0L});
  REQUIRE(gen.blocks[2].values.size() == 12);
  CHECK(gen.blocks[2].values.front() == 100.0L);
  CHECK(gen.blocks[2].values.back() == 441.0L);
  CHECK(gen.blocks[1].root == 2.0L);
  CHECK(gen.blocks[2].root == 10.0L);

  const auto four = generate_gap_block_sequence(4.0, 4);
  CHECK(four.blocks[3].root == 42.0L);
  CHECK(four.blocks[3].values.front() == 1764.0L);
}

TEST_CASE("generated blocks for M = 1.5") {
  const auto gen = generate_gap_block_sequence(1.5, 3);
  REQUIRE(gen.blocks[1].values.size() == 3);
  CHECK_THAT(static_cast<double>(gen.blocks[1].values[0]), WithinAbs(1.5, 1e-15));
  CHECK_THAT(static_cast<double>(gen.blocks[1].values[1]), WithinRel(4.9494897427831781, 1e-14));
  CHECK_THAT(static_cast<double>(gen.blocks[1].values[2]), WithinRel(10.398979485566356, 1e-14));
}

TEST_CASE("generator rejects bad parameters") {
  CHECK_THROWS_AS(generate_gap_block_sequence(1.0, 6), error);
  CHECK_THROWS_AS(generate_gap_block_sequence(0.5, 6), error);
  CHECK_THROWS_AS(generate_gap_block_sequence(4.0, 1), error);
  for (double M : {1.01, 2.0, 37.5}) CHECK(generate_gap_block_sequence(M, 4).blocks[0].values.front() == 1.0L);
}

TEST_CASE("claims for M = 4") {
  const auto gen = generate_gap_block_sequence(4.0, 6);
  const auto rep = verify_claims(gen);
  CHECK(rep.ok());
  CHECK(rep.cross_ratios.front() == 4.0);
  // 9/4 = (1 + 1/2)^2 exactly
  CHECK(rep.max_in_block_excess == 0.0);
  CHECK_THAT(rep.block_sums.front(), WithinRel(0.46361111111111111, 1e-15));
  CHECK(rep.block_sum_bounds.front() == 1.0);
}

TEST_CASE("claims hold for a range of M") {
  for (double M : {1.5, 2.0, 4.0, 10.0}) {
    CAPTURE(M);
    const auto gen = generate_gap_block_sequence(M, 8);
    const auto rep = verify_claims(gen);
    for (const auto& v : rep.violations) UNSCOPED_INFO(v.check << " block " << v.block << " " << v.value << " vs " << v.bound);
    CHECK(rep.ok());
    CHECK(rep.block_sums.size() == 7);
    CHECK(rep.start_values.size() == 4);
  }
}

TEST_CASE("claims report a doctored violation") {
  auto gen = generate_gap_block_sequence(4.0, 6);
  gen.enumeration.terms[gen.block_start[2] - 1] *= 1.01;
  const auto rep = verify_claims(gen);
  CHECK_FALSE(rep.ok());
  CHECK(rep.violations.front().check == "cross-block-ratio");
}

TEST_CASE("i(Lambda) bounds of generated sequences") {
  for (double M : {1.5, 2.0, 4.0}) {
    CAPTURE(M);
    const auto b = i_lambda_bounds(generate_gap_block_sequence(M, 6));
    CHECK_THAT(b.lower, WithinAbs(M, 1e-9));
    CHECK_THAT(b.upper, WithinAbs(M, 1e-9));
    CHECK(b.method == bounds_method::structural);
  }
  CHECK_THROWS_MATCHES(i_lambda_bounds(generate_gap_block_sequence(4.0, 2)), error,
                       Catch::Matchers::Predicate<error>([](const error& e) {
                         return e.code() == errc::insufficient_data;
                       }));
}

TEST_CASE("sequence JSON round trip") {
  const auto gen = generate_gap_block_sequence(4.0, 4);
  const auto back = sequence_from_json(generated_json(gen));
  CHECK(back.terms == gen.enumeration.terms);
  CHECK(back.origin == provenance::generated);
}
