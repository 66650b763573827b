#include "catch_amalgamated.hpp"

#include <atomic>
#include <cstdlib>
#include <numeric>

#include "test_support.hpp"

using namespace hclab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("compensated sum keeps small addends next to a large one") {
  compensated_sum<double> s;
  s += 1.0;
  for (int i = 0; i < 1000; ++i) s += 1e-16;
  CHECK_THAT(s.value(), WithinRel(1.0 + 1e-13, 1e-15));

  compensated_sum<double> t;
  t += 1.0;
  t += 1e100;
  t += 1.0;
  t += -1e100;
  CHECK(t.value() == 2.0);
}

TEST_CASE("compensated harmonic sum matches long double") {
  compensated_sum<double> s;
  long double ref = 0.0L;
  for (int k = 1000000; k >= 1; --k) ref += 1.0L / k;
  for (int k = 1; k <= 1000000; ++k) s += 1.0 / k;
  CHECK_THAT(s.value(), WithinRel(static_cast<double>(ref), 1e-15));
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<std::atomic<int>> hits(10007);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, 8);
  for (const auto& h : hits) REQUIRE(h.load() == 1);
}

TEST_CASE("parallel_max is the plain max and maps NaN to inf") {
  std::vector<double> v(5000);
  std::iota(v.begin(), v.end(), -100.0);
  CHECK(parallel_max(v.size(), [&](std::size_t i) { return v[i]; }, -1e300, 16) == 4899.0);
  CHECK(parallel_max(0, [](std::size_t) { return 1.0; }, -3.0) == -3.0);
  v[77] = std::nan("");
  CHECK(std::isinf(parallel_max(v.size(), [&](std::size_t i) { return v[i]; }, 0.0, 16)));
}

TEST_CASE("parallel_for rethrows worker errors") {
  CHECK_THROWS_AS(parallel_for(4096, [](std::size_t i) {
                    if (i == 4000) throw error(errc::domain, "boom");
                  }, 16),
                  error);
}

TEST_CASE("thread budget honours HCLAB_THREADS") {
  const char* old = std::getenv("HCLAB_THREADS");
  const std::string saved = old ? old : "";
  setenv("HCLAB_THREADS", "1", 1);
  CHECK(thread_budget() == 1);
  setenv("HCLAB_THREADS", "junk", 1);
  CHECK(thread_budget() >= 1);
  if (old) setenv("HCLAB_THREADS", saved.c_str(), 1);
  else unsetenv("HCLAB_THREADS");
}

TEST_CASE("formula evaluation") {
  CHECK(formula::parse("n^2")(7.0) == cplx(49.0));
  CHECK(formula::parse("3*2^n")(3.0) == cplx(24.0));
  CHECK_THAT(formula::parse("1+1/n")(4.0).real(), WithinAbs(1.25, 1e-15));
  CHECK(formula::parse("-(n+1)")(2.0) == cplx(-3.0));
  CHECK(formula::parse("2^3^2")(1.0) == cplx(512.0));
  CHECK(formula::parse("n*i")(2.0) == cplx(0.0, 2.0));
  CHECK_THROWS_AS(formula::parse("n^"), error);
  CHECK_THROWS_AS(formula::parse("n)"), error);
  CHECK_THROWS_AS(formula::parse("m"), error);
}

TEST_CASE("formula leading power") {
  auto lead = formula::parse("3*n + 2").leading_power();
  REQUIRE(lead);
  CHECK(lead->exponent == 1.0);
  CHECK(lead->coefficient == 3.0);
  lead = formula::parse("n^2 - n").leading_power();
  REQUIRE(lead);
  CHECK(lead->exponent == 2.0);
  CHECK_FALSE(formula::parse("3^n").leading_power());
}

TEST_CASE("polynomial basics") {
  const polynomial p{cplx(1.0), cplx(0.0), cplx(2.0), cplx(0.0)};
  CHECK(p.degree() == 2);
  CHECK(p(cplx(0.0, 1.0)) == cplx(-1.0));
  CHECK(p.derivative()(cplx(3.0)) == cplx(12.0));
  CHECK(polynomial{}.is_zero());
  CHECK(polynomial{}(cplx(5.0)) == cplx{});
  CHECK(polynomial::identity()(cplx(2.0, 3.0)) == cplx(2.0, 3.0));
}

TEST_CASE("taylor_at re-expands a polynomial") {
  testing::gen g(11);
  for (int trial = 0; trial < 50; ++trial) {
    const polynomial p = g.poly(g.index(0, 6));
    const cplx c = g.complex(-3.0, 3.0);
    const polynomial q(p.taylor_at(c));
    for (int s = 0; s < 5; ++s) {
      const cplx u = g.in_disk(1.0);
      REQUIRE(std::abs(q(u) - p(c + u)) < 1e-9 * (1.0 + std::abs(p(c + u))));
    }
  }
}
