#include "catch_amalgamated.hpp"

#include <numeric>
#include <set>

#include "test_support.hpp"

using namespace hclab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

construction_params params_2_5() { return derive_constants(1.0, 0.0, 0.25, 2.0, 0.5, 1, 1, 1.0); }

std::shared_ptr<const disk_family> family_of(const std::vector<cplx>& centers, const construction_params& params) {
  std::vector<arc_point> pts;
  for (std::size_t n = 0; n < centers.size(); ++n)
    pts.push_back({n, 0, n, std::polar(1.0, std::arg(centers[n])), cplx(std::abs(centers[n]), 0.0)});
  return std::make_shared<const disk_family>(build_disks(pts, params));
}

piecewise_target target_of(std::shared_ptr<const disk_family> fam, polynomial g, polynomial p) {
  const auto cert = check_disjoint(*fam);
  return build_target(fam, cert, std::move(g), std::move(p));
}

std::vector<std::pair<std::string, std::string>> as_text(const std::vector<gaussian_rational>& c) {
  auto str = [](const rational& r) {
    return r.den == 1 ? std::to_string(r.num) : std::to_string(r.num) + "/" + std::to_string(r.den);
  };
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& g : c) out.emplace_back(str(g.re), str(g.im));
  return out;
}

}  // namespace

TEST_CASE("delta0 choices") {
  CHECK_THAT(choose_delta0(polynomial::identity(), 1.0, 2), WithinRel(0.2475, 1e-15));
  CHECK(choose_delta0(polynomial::constant(cplx(3.0, -1.0)), 1.0, 2) == 0.5);
  CHECK(choose_delta0(polynomial{}, 1.0, 2) == 0.5);
  CHECK_THAT(choose_delta0(polynomial{cplx(0.0), cplx(0.0), cplx(1.0)}, 1.0, 2), WithinRel(0.061875, 1e-12));
  CHECK_THROWS_AS(choose_delta0(polynomial::identity(), 0.0, 2), error);
}

TEST_CASE("delta0 contract holds on random polynomials") {
  testing::gen g(41);
  for (int trial = 0; trial < 100; ++trial) {
    const polynomial p = g.poly(g.index(1, 6), g.uniform(0.1, 3.0));
    const double R1 = g.uniform(0.5, 3.0);
    const int s1 = static_cast<int>(g.index(1, 5));
    const double d0 = choose_delta0(p, R1, s1);
    REQUIRE(d0 > 0.0);
    REQUIRE(d0 < 1.0);
    for (int pair = 0; pair < 100; ++pair) {
      const cplx z = g.in_disk(R1);
      const cplx w = z + g.in_disk(d0);
      REQUIRE(std::abs(p(z) - p(w)) < 1.0 / (2.0 * s1));
    }
  }
}

TEST_CASE("dense enumeration starts as documented") {
  CHECK(dense_polynomial(1).is_zero());
  CHECK(dense_polynomial(2).coefficients() == std::vector<cplx>{cplx(1.0)});
  const std::vector<std::vector<std::pair<std::string, std::string>>> expect{
      {},
      {{"1", "0"}},
      {{"0", "1"}},
      {{"0", "0"}, {"1", "0"}},
      {{"-1", "0"}},
      {{"0", "0"}, {"0", "1"}},
      {{"1", "0"}, {"1", "0"}},
      {{"0", "0"}, {"0", "0"}, {"1", "0"}},
  };
  for (std::uint64_t j = 1; j <= expect.size(); ++j) {
    CAPTURE(j);
    CHECK(as_text(dense_polynomial_coefficients(j)) == expect[j - 1]);
  }
  CHECK_THROWS_AS(dense_polynomial_coefficients(0), error);
}

TEST_CASE("dense enumeration is injective and invertible") {
  std::set<std::vector<std::pair<std::string, std::string>>> seen;
  for (std::uint64_t j = 1; j <= 10000; ++j) {
    const auto c = dense_polynomial_coefficients(j);
    REQUIRE(seen.insert(as_text(c)).second);
    if (!c.empty()) REQUIRE((c.back().re.num != 0 || c.back().im.num != 0));
    for (const auto& g : c) {
      REQUIRE(std::gcd(g.re.num, g.re.den) == 1);
      REQUIRE(std::gcd(g.im.num, g.im.den) == 1);
    }
    REQUIRE(dense_polynomial_index(c) == j);
  }
}

TEST_CASE("small Gaussian rational polynomials are reached") {
  testing::gen g(3);
  int found = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<gaussian_rational> c;
    const std::size_t d = g.index(0, 3);
    for (std::size_t i = 0; i <= d; ++i) {
      auto r = [&] {
        std::int64_t num = static_cast<std::int64_t>(g.index(0, 6)) - 3, den = static_cast<std::int64_t>(g.index(1, 3));
        const std::int64_t k = std::gcd(num, den);
        return num == 0 ? rational{0, 1} : rational{num / k, den / k};
      };
      c.push_back({r(), r()});
    }
    const auto j = dense_polynomial_index(c);
    if (!j) continue;
    ++found;
    auto back = dense_polynomial_coefficients(*j);
    while (!c.empty() && c.back().re.num == 0 && c.back().im.num == 0) c.pop_back();
    REQUIRE(back == c);
  }
  CHECK(found > 100);
}

TEST_CASE("piecewise target") {
  const auto params = params_2_5();
  const auto fam = family_of({cplx(300.0, 0.0)}, params);
  const polynomial g{cplx(1.0), cplx(2.0)};
  const polynomial p{cplx(-4.0, 1.0), cplx(0.0), cplx(1.0)};
  const auto h = target_of(fam, g, p);
  CHECK(h(cplx(0.5, 0.5)) == g(cplx(0.5, 0.5)));
  CHECK(h(cplx(300.0, 0.0)) == p(cplx{}));
  CHECK(h(cplx(301.0, 1.0)) == p(cplx(1.0, 1.0)));
  CHECK_THROWS_MATCHES(h(cplx(150.0, 0.0)), error, Catch::Matchers::Predicate<error>([](const error& e) {
                         return e.code() == errc::domain;
                       }));

  auto bad = check_disjoint(*fam);
  bad.pass = false;
  CHECK_THROWS_MATCHES(build_target(fam, bad, g, p), error, Catch::Matchers::Predicate<error>([](const error& e) {
                         return e.code() == errc::precondition;
                       }));
}

TEST_CASE("validation sample is disjoint from the fitting sample") {
  const sampling_plan plan;
  const auto fit = fit_offsets(plan, 2.5);
  const auto val = validation_offsets(plan, 2.5);
  CHECK(fit.size() == 1 + plan.rings * plan.ring_points);
  CHECK(val.size() == plan.rings * plan.ring_points * plan.validation_factor);
  double closest = 1e300;
  for (const cplx& a : fit)
    for (const cplx& b : val) closest = std::min(closest, std::abs(a - b));
  CHECK(closest > 1e-3);
  for (const cplx& u : val) CHECK(std::abs(u) <= 2.5 * (1.0 + 1e-15));
}

TEST_CASE("fit disk subset") {
  CHECK(fit_disk_subset(1, 10) == std::vector<std::size_t>{0});
  CHECK(fit_disk_subset(4, 10) == std::vector<std::size_t>{0, 1, 2, 3});
  const auto s = fit_disk_subset(1001, 5);
  CHECK(s == std::vector<std::size_t>{0, 1, 250, 500, 750, 1000});
}

TEST_CASE("exact fit of a cubic on a single disk") {
  const auto params = params_2_5();
  const auto fam = family_of({}, params);
  const polynomial g{cplx(0.3, -1.0), cplx(2.0, 0.5), cplx(-1.0, 0.0), cplx(0.25, 0.75)};
  const auto h = target_of(fam, g, polynomial{});
  for (auto strategy : {fit_strategy::least_squares, fit_strategy::hermite_jets}) {
    CAPTURE(to_string(strategy));
    fit_options opt;
    opt.strategy = strategy;
    const auto f = fit_polynomial(h, 1e-10, strategy == fit_strategy::hermite_jets ? 3 : 8, sampling_plan{}, opt);
    CHECK(f.status == fit_status::met);
    CHECK(f.fit_error < 1e-10);
    CHECK(f.degree() == 3);
    const auto c = f.unscaled();
    for (std::size_t k = 0; k <= 3; ++k) CHECK(std::abs(c.coefficient(k) - g.coefficient(k)) < 1e-9);
  }
}

TEST_CASE("zero target gives the zero polynomial") {
  const auto params = params_2_5();
  const auto fam = family_of({cplx(300.0, 0.0), cplx(0.0, 400.0), cplx(-250.0, -250.0)}, params);
  const auto h = target_of(fam, polynomial{}, polynomial{});
  const auto f = fit_polynomial(h, 0.25, 8, sampling_plan{});
  CHECK(f.status == fit_status::met);
  CHECK(f.fit_error == 0.0);
  for (const cplx& c : f.coefficients) CHECK(c == cplx{});
}

TEST_CASE("sup error sees a constant offset on one disk") {
  const auto params = params_2_5();
  const auto fam = family_of({cplx(300.0, 0.0), cplx(0.0, 400.0)}, params);
  const polynomial p{cplx(0.0), cplx(1.0)};
  const auto h = target_of(fam, polynomial{}, p);
  const cplx offset(0.3, -0.4);
  const auto exact = [&](cplx z) { return h(z); };
  const auto shifted = [&](cplx z) { return h(z) + (std::abs(z - cplx(0.0, 400.0)) <= 2.5 ? offset : cplx{}); };
  const auto val = validation_offsets(sampling_plan{}, fam->radius);
  CHECK(sup_error_on(exact, h, {0, 1, 2}, val) == 0.0);
  CHECK_THAT(sup_error_on(shifted, h, {0, 1, 2}, val), WithinAbs(0.5, 1e-15));
  CHECK(sup_error_on(shifted, h, {0, 1}, val) == 0.0);
}

TEST_CASE("validation error decreases with degree for an analytic target") {
  const auto params = params_2_5();
  const auto fam = family_of({}, params);
  std::vector<cplx> c;
  double fact = 1.0;
  for (int k = 0; k <= 30; ++k) {
    if (k > 0) fact *= k;
    c.emplace_back(std::pow(0.5, k) / fact, 0.0);
  }
  const auto h = target_of(fam, polynomial(c), polynomial{});
  const auto f = fit_polynomial(h, 1e-300, 12, sampling_plan{});
  REQUIRE(f.degree_search.size() == 13);
  for (std::size_t d = 1; d < f.degree_search.size(); ++d) {
    CAPTURE(d);
    CHECK(f.degree_search[d].validation_error <= f.degree_search[d - 1].validation_error * (1.0 + 1e-9) + 1e-15);
  }
  CHECK(f.degree_search.back().validation_error < 1e-8);
}

TEST_CASE("fit JSON round trip keeps the evaluation") {
  const auto params = params_2_5();
  const auto fam = family_of({}, params);
  const auto h = target_of(fam, polynomial{cplx(1.0), cplx(0.0, 1.0)}, polynomial{});
  const auto f = fit_polynomial(h, 1e-10, 4, sampling_plan{});
  const auto back = fit_from_json(nlohmann::json::parse(fit_json(f).dump()));
  for (const cplx z : {cplx(0.1, 0.2), cplx(-2.0, 1.0)}) CHECK(std::abs(back(z) - f(z)) < 1e-15);
  CHECK(back.status == f.status);
}
