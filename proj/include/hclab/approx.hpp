#pragma once

// Compact set L = B u (union of B_w), the piecewise target h on L and its
// polynomial approximant. The approximant is a discrete least-squares fit
// with a degree search and a measured sup error on a separate validation
// sample.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hclab/disks.hpp"
#include "hclab/error.hpp"
#include "hclab/parallel.hpp"
#include "hclab/polynomial.hpp"

namespace hclab {

// ---------------------------------------------------------------------------
// delta0

/// delta0 in (0, 1) such that |z| <= R1 and |z - w| < delta0 imply
/// |p(z) - p(w)| < 1/(2 s1). Uses a bound M' on |p'| over |z| <= R1 + 1: the
/// smaller of the coefficient bound and 1.01 times the maximum over
/// max(1024, 400 deg) equispaced points of the circle. For a polynomial of
/// degree d sampled at N points the true maximum is at most the sampled one
/// divided by cos(pi d / 2N), far below the 1.01 factor here.
inline double choose_delta0(const polynomial& p, double R1, int s1) {
  if (!(R1 > 0.0)) throw error(errc::parameter, "R1 must be positive");
  if (s1 < 1) throw error(errc::parameter, "s1 must be a positive integer");
  if (p.degree() == 0) return 0.5;
  const polynomial dp = p.derivative();
  const double R = R1 + 1.0;
  const std::size_t N = std::max<std::size_t>(1024, 400 * dp.degree() + 400);
  double sampled = 0.0;
  for (std::size_t k = 0; k < N; ++k)
    sampled = std::max(sampled, std::abs(dp(std::polar(R, 2.0 * std::numbers::pi * static_cast<double>(k) / N))));
  const double Mp = std::min(dp.coefficient_bound(R), 1.01 * sampled);
  return std::min(0.99, 0.99 / (2.0 * s1 * std::max(Mp, 1.0)));
}

// ---------------------------------------------------------------------------
// Enumeration of polynomials with Gaussian rational coefficients
//
// Index j >= 1 maps to x = j - 1. x = 0 is the zero polynomial. Otherwise the
// set bits b_0 < ... < b_d of x give gaps g_0 = b_0, g_i = b_i - b_{i-1} - 1,
// and the coefficient of z^i is G(g_i) for i < d and G(g_d + 1) for i = d,
// so the leading coefficient is never zero. G(y) = q(u) + i q(v) where (u, v)
// is the Cantor unpairing of y, and q(0) = 0, q(2t - 1) = cw(t),
// q(2t) = -cw(t) with cw the Calkin-Wilf enumeration of positive rationals.

struct rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const rational&, const rational&) = default;
};

struct gaussian_rational {
  rational re, im;
  cplx value() const { return {re.value(), im.value()}; }
  friend bool operator==(const gaussian_rational&, const gaussian_rational&) = default;
};

namespace detail {

inline rational calkin_wilf(std::uint64_t t) {
  std::int64_t a = 1, b = 1;
  int top = 63;
  while (top > 0 && !((t >> top) & 1u)) --top;
  for (int bit = top - 1; bit >= 0; --bit) {
    if ((t >> bit) & 1u)
      a = a + b;
    else
      b = a + b;
  }
  return {a, b};
}

inline std::optional<std::uint64_t> calkin_wilf_index(std::int64_t a, std::int64_t b) {
  if (a <= 0 || b <= 0 || std::gcd(a, b) != 1) return std::nullopt;
  std::uint64_t t = 0;
  int depth = 0;
  while (!(a == 1 && b == 1)) {
    if (depth >= 63) return std::nullopt;
    if (a > b) {
      t |= std::uint64_t{1} << depth;
      a -= b;
    } else {
      b -= a;
    }
    ++depth;
  }
  return t | (std::uint64_t{1} << depth);
}

inline rational rational_of(std::uint64_t y) {
  if (y == 0) return {0, 1};
  const std::uint64_t t = (y + 1) / 2;
  rational r = calkin_wilf(t);
  if (y % 2 == 0) r.num = -r.num;
  return r;
}

inline std::optional<std::uint64_t> rational_index(rational r) {
  if (r.num == 0) return 0;
  if (r.den <= 0) return std::nullopt;
  const auto t = calkin_wilf_index(r.num < 0 ? -r.num : r.num, r.den);
  if (!t || *t > (std::uint64_t{1} << 62)) return std::nullopt;
  return r.num > 0 ? 2 * *t - 1 : 2 * *t;
}

inline std::pair<std::uint64_t, std::uint64_t> cantor_unpair(std::uint64_t z) {
  auto w = static_cast<std::uint64_t>((std::sqrt(8.0 * static_cast<double>(z) + 1.0) - 1.0) / 2.0);
  while (w * (w + 1) / 2 > z) --w;
  while ((w + 1) * (w + 2) / 2 <= z) ++w;
  const std::uint64_t y = z - w * (w + 1) / 2;
  return {w - y, y};
}

inline std::optional<std::uint64_t> cantor_pair(std::uint64_t u, std::uint64_t v) {
  const std::uint64_t w = u + v;
  if (w < u || w > (std::uint64_t{1} << 31)) return std::nullopt;
  return w * (w + 1) / 2 + v;
}

inline gaussian_rational gaussian_of(std::uint64_t y) {
  const auto [u, v] = cantor_unpair(y);
  return {rational_of(u), rational_of(v)};
}

inline std::optional<std::uint64_t> gaussian_index(const gaussian_rational& g) {
  const auto u = rational_index(g.re);
  const auto v = rational_index(g.im);
  if (!u || !v) return std::nullopt;
  return cantor_pair(*u, *v);
}

}  // namespace detail

/// Exact coefficients of the j-th polynomial, ascending.
inline std::vector<gaussian_rational> dense_polynomial_coefficients(std::uint64_t j) {
  if (j < 1) throw error(errc::parameter, "polynomial index starts at 1");
  const std::uint64_t x = j - 1;
  std::vector<gaussian_rational> out;
  int prev = -1;
  for (int bit = 0; bit < 64; ++bit) {
    if (!((x >> bit) & 1u)) continue;
    const auto gap = static_cast<std::uint64_t>(bit - prev - 1);
    const bool leading = (x >> bit) == 1u;
    out.push_back(detail::gaussian_of(leading ? gap + 1 : gap));
    prev = bit;
  }
  return out;
}

inline polynomial dense_polynomial(std::uint64_t j) {
  const auto exact = dense_polynomial_coefficients(j);
  std::vector<cplx> c;
  c.reserve(exact.size());
  for (const auto& g : exact) c.push_back(g.value());
  return polynomial(std::move(c));
}

/// Inverse of the enumeration; empty when the index does not fit in 64 bits
/// or the coefficients are not in lowest terms.
inline std::optional<std::uint64_t> dense_polynomial_index(const std::vector<gaussian_rational>& coefficients) {
  std::size_t d = coefficients.size();
  while (d > 0 && coefficients[d - 1].re.num == 0 && coefficients[d - 1].im.num == 0) --d;
  if (d == 0) return 1;
  std::uint64_t x = 0;
  int bit = -1;
  for (std::size_t i = 0; i < d; ++i) {
    auto y = detail::gaussian_index(coefficients[i]);
    if (!y) return std::nullopt;
    if (i + 1 == d) --*y;  // leading coefficient is G(gap + 1), never zero
    if (*y > 63) return std::nullopt;
    bit += static_cast<int>(*y) + 1;
    if (bit > 63) return std::nullopt;
    x |= std::uint64_t{1} << bit;
  }
  if (x == std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
  return x + 1;
}

// ---------------------------------------------------------------------------
// Target

struct target_spec {
  polynomial g;
  polynomial p;
  std::vector<cplx> C_samples;
  construction_params params;

  void validate() const {
    for (const cplx& z : C_samples)
      if (std::abs(z) > params.R1 * (1.0 + 1e-12))
        throw error(errc::parameter, "C sample outside |z| <= R1");
  }
};

/// Default sample of C = {|z| <= R1}: boundary and half-radius circles plus
/// the origin.
inline std::vector<cplx> default_C_samples(double R1, std::size_t points = 64) {
  std::vector<cplx> out{cplx{}};
  for (double r : {R1, 0.5 * R1})
    for (std::size_t k = 0; k < points; ++k)
      out.push_back(std::polar(r, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(points)));
  return out;
}

/// h = g on the base disk and h(z) = p(z - w mu(w)) on B_w.
class piecewise_target {
 public:
  piecewise_target(std::shared_ptr<const disk_family> family, polynomial g, polynomial p)
      : family_(std::move(family)), g_(std::move(g)), p_(std::move(p)) {
    centers_ = family_->centers();
    grid_ = grid_index(centers_, 2.0 * family_->radius);
  }

  const disk_family& family() const { return *family_; }
  std::shared_ptr<const disk_family> family_ptr() const { return family_; }
  const polynomial& g() const { return g_; }
  const polynomial& p() const { return p_; }
  const std::vector<cplx>& centers() const { return centers_; }

  /// Disk containing z (0 = base, i + 1 = translated disk i), if any.
  std::optional<std::size_t> find_disk(cplx z) const {
    std::optional<std::size_t> hit;
    grid_.for_each_near(z, [&](std::uint32_t i) {
      if (!hit && contains(i, z)) hit = i;
    });
    return hit;
  }

  bool contains(std::size_t i, cplx z) const {
    const cplx c = centers_[i];
    return std::abs(z - c) <= family_->radius + 1e-12 * (std::abs(c) + family_->radius);
  }

  /// h on the given piece, without a membership test.
  cplx piece(std::size_t i, cplx z) const { return i == 0 ? g_(z) : p_(z - centers_[i]); }

  cplx operator()(cplx z) const {
    const auto i = find_disk(z);
    if (!i) throw error(errc::domain, "point is not in L");
    return piece(*i, z);
  }

 private:
  std::shared_ptr<const disk_family> family_;
  polynomial g_, p_;
  std::vector<cplx> centers_;
  grid_index grid_;
};

inline piecewise_target build_target(std::shared_ptr<const disk_family> family,
                                     const disjointness_certificate& cert, polynomial g, polynomial p) {
  if (!family) throw error(errc::precondition, "no disk family");
  if (!cert.pass || cert.m != family->m || cert.disks != family->size())
    throw error(errc::precondition, "disk family has no passing disjointness certificate");
  return piecewise_target(std::move(family), std::move(g), std::move(p));
}

// ---------------------------------------------------------------------------
// Sampling and fitting

struct sampling_plan {
  std::size_t ring_points = 64;
  std::size_t rings = 3;  // radii c4 q / rings, q = 1..rings
  bool include_center = true;
  std::size_t validation_factor = 4;  // angular density of validation rings
  std::size_t max_fit_disks = 512;    // translated disks used for fitting

  void validate() const {
    if (ring_points < 4 || rings < 1) throw error(errc::parameter, "sampling plan needs rings >= 1 and ring_points >= 4");
    if (validation_factor < 4) throw error(errc::parameter, "validation_factor must be at least 4");
    if (max_fit_disks < 1) throw error(errc::parameter, "max_fit_disks must be positive");
  }
};

/// Offsets u (relative to a disk centre) of the fitting sample.
inline std::vector<cplx> fit_offsets(const sampling_plan& plan, double radius) {
  std::vector<cplx> out;
  if (plan.include_center) out.push_back({});
  for (std::size_t q = 1; q <= plan.rings; ++q) {
    const double r = radius * static_cast<double>(q) / static_cast<double>(plan.rings);
    for (std::size_t k = 0; k < plan.ring_points; ++k)
      out.push_back(std::polar(r, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(plan.ring_points)));
  }
  return out;
}

/// Validation offsets: same radii, validation_factor times the angular
/// density, shifted by half a step. The angles are odd multiples of
/// pi / (ring_points * validation_factor), the fitting angles even ones, so
/// the two samples never share a point.
inline std::vector<cplx> validation_offsets(const sampling_plan& plan, double radius) {
  std::vector<cplx> out;
  const std::size_t n = plan.ring_points * plan.validation_factor;
  for (std::size_t q = 1; q <= plan.rings; ++q) {
    const double r = radius * static_cast<double>(q) / static_cast<double>(plan.rings);
    for (std::size_t k = 0; k < n; ++k)
      out.push_back(std::polar(r, 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(n)));
  }
  return out;
}

/// Disks used for fitting: the base disk and an evenly strided subset of the
/// translated disks.
inline std::vector<std::size_t> fit_disk_subset(std::size_t family_size, std::size_t max_translated) {
  std::vector<std::size_t> out{0};
  const std::size_t n = family_size - 1;
  if (n <= max_translated) {
    for (std::size_t i = 1; i <= n; ++i) out.push_back(i);
    return out;
  }
  for (std::size_t t = 0; t < max_translated; ++t) {
    const std::size_t i = 1 + (max_translated == 1 ? 0 : t * (n - 1) / (max_translated - 1));
    if (out.back() != i) out.push_back(i);
  }
  return out;
}

enum class fit_strategy { least_squares, hermite_jets };
enum class fit_status { met, target_missed };

inline const char* to_string(fit_strategy s) { return s == fit_strategy::least_squares ? "least-squares" : "hermite-jets"; }
inline const char* to_string(fit_status s) { return s == fit_status::met ? "met" : "target-missed"; }

inline fit_strategy fit_strategy_from_string(const std::string& s) {
  if (s == "least-squares") return fit_strategy::least_squares;
  if (s == "hermite-jets") return fit_strategy::hermite_jets;
  throw error(errc::parameter, "unknown fit strategy '" + s + "'");
}

struct fit_options {
  fit_strategy strategy = fit_strategy::least_squares;
  std::size_t jet_order = 4;  // Taylor conditions per disk for hermite-jets
};

struct degree_record {
  std::size_t degree;
  double validation_error;  // on the validation sample of the fitting disks
};

struct fitted_polynomial {
  std::vector<cplx> coefficients;  // in the scaled variable z / scale
  double scale = 1.0;
  double fit_error = 0.0;     // sup |f - h| over the validation sample of every disk
  double target_error = 0.0;
  fit_status status = fit_status::met;
  fit_strategy strategy = fit_strategy::least_squares;
  std::vector<degree_record> degree_search;
  std::size_t fit_points = 0;
  std::size_t validation_points = 0;

  std::size_t degree() const { return coefficients.empty() ? 0 : coefficients.size() - 1; }

  cplx operator()(cplx z) const {
    const cplx x = z / scale;
    cplx acc{};
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  /// Coefficients in the monomial basis of z.
  polynomial unscaled() const {
    std::vector<cplx> c(coefficients.size());
    double f = 1.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      c[k] = coefficients[k] / f;
      f *= scale;
    }
    return polynomial(std::move(c));
  }
};

/// Discrete sup of |f - h| over the validation sample of the listed disks.
template <typename F>
double sup_error_on(const F& f, const piecewise_target& h, const std::vector<std::size_t>& disks,
                    const std::vector<cplx>& offsets) {
  return parallel_max(
      disks.size(),
      [&](std::size_t t) {
        const std::size_t i = disks[t];
        const cplx c = h.centers()[i];
        double worst = 0.0;
        for (const cplx& u : offsets) worst = std::max(worst, std::abs(f(c + u) - h.piece(i, c + u)));
        return worst;
      },
      0.0, 64);
}

/// Discrete sup of |f - h| over the validation sample of every disk of L.
inline double sup_error(const fitted_polynomial& f, const piecewise_target& h, const sampling_plan& validation) {
  std::vector<std::size_t> all(h.family().size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return sup_error_on(f, h, all, validation_offsets(validation, h.family().radius));
}

namespace detail {

using matrix = Eigen::MatrixXcd;
using vector = Eigen::VectorXcd;

struct ls_system {
  matrix A;
  vector b;
};

inline ls_system sample_rows(const piecewise_target& h, const std::vector<std::size_t>& disks,
                             const std::vector<cplx>& offsets, std::size_t cols, double scale) {
  ls_system s{matrix(static_cast<Eigen::Index>(disks.size() * offsets.size()), static_cast<Eigen::Index>(cols)),
              vector(static_cast<Eigen::Index>(disks.size() * offsets.size()))};
  Eigen::Index row = 0;
  for (std::size_t i : disks) {
    const cplx c = h.centers()[i];
    for (const cplx& u : offsets) {
      const cplx z = c + u;
      const cplx x = z / scale;
      cplx pw{1.0};
      for (std::size_t k = 0; k < cols; ++k) {
        s.A(row, static_cast<Eigen::Index>(k)) = pw;
        pw *= x;
      }
      s.b(row) = h.piece(i, z);
      ++row;
    }
  }
  return s;
}

/// x^k by repeated multiplication; std::pow(complex 0, 0.0) is NaN.
template <typename T>
T ipow(T x, std::size_t k) {
  T out{1.0};
  for (std::size_t q = 0; q < k; ++q) out *= x;
  return out;
}

/// Rows matching the Taylor jet of h at each centre: the coefficient of
/// (u / radius)^t in f(c + u) against the same coefficient of h.
inline ls_system jet_rows(const piecewise_target& h, const std::vector<std::size_t>& disks, std::size_t order,
                          std::size_t cols, double scale) {
  const double radius = h.family().radius;
  ls_system s{matrix::Zero(static_cast<Eigen::Index>(disks.size() * order), static_cast<Eigen::Index>(cols)),
              vector::Zero(static_cast<Eigen::Index>(disks.size() * order))};
  const double rs = radius / scale;
  Eigen::Index row = 0;
  for (std::size_t i : disks) {
    const cplx c = h.centers()[i];
    const cplx x = c / scale;
    const std::vector<cplx> target = i == 0 ? h.g().taylor_at(c) : h.p().coefficients();
    for (std::size_t t = 0; t < order; ++t) {
      // d^t/t! of x^k at x, times (radius/scale)^t: binom(k, t) x^{k-t} rs^t.
      for (std::size_t k = t; k < cols; ++k) {
        double binom = 1.0;
        for (std::size_t q = 0; q < t; ++q) binom = binom * static_cast<double>(k - q) / static_cast<double>(q + 1);
        s.A(row, static_cast<Eigen::Index>(k)) = binom * ipow(x, k - t) * ipow(rs, t);
      }
      s.b(row) = (t < target.size() ? target[t] : cplx{}) * ipow(radius, t);
      ++row;
    }
  }
  return s;
}

}  // namespace detail

/// Least-squares fit with degree search. Columns of the scaled Vandermonde
/// matrix are factored once by Householder QR; the degree-d solution uses the
/// leading (d + 1) x (d + 1) block of R. The search stops at the first degree
/// whose validation error on the fitting disks is below target_error and
/// which also meets it on every disk of L. Otherwise the degree with the
/// smallest validation error is returned, flagged target-missed.
inline fitted_polynomial fit_polynomial(const piecewise_target& h, double target_error, std::size_t degree_cap,
                                        const sampling_plan& plan, const fit_options& options = {}) {
  if (!(target_error > 0.0)) throw error(errc::parameter, "target_error must be positive");
  if (degree_cap < 1) throw error(errc::parameter, "degree_cap must be at least 1");
  plan.validate();

  const double radius = h.family().radius;
  const auto disks = fit_disk_subset(h.family().size(), plan.max_fit_disks);
  const auto offsets = fit_offsets(plan, radius);
  const auto voffsets = validation_offsets(plan, radius);

  double scale = 0.0;
  for (std::size_t i : disks)
    for (const cplx& u : offsets) scale = std::max(scale, std::abs(h.centers()[i] + u));
  if (!(scale > 0.0)) scale = 1.0;

  const std::size_t cols = degree_cap + 1;
  detail::ls_system sys = options.strategy == fit_strategy::least_squares
                              ? detail::sample_rows(h, disks, offsets, cols, scale)
                              : detail::jet_rows(h, disks, options.jet_order, cols, scale);
  if (sys.A.rows() < static_cast<Eigen::Index>(cols))
    throw error(errc::parameter, "fewer fitting conditions than coefficients; lower degree_cap");

  const Eigen::HouseholderQR<detail::matrix> qr(sys.A);
  const detail::vector qtb = qr.householderQ().adjoint() * sys.b;
  const detail::matrix R = qr.matrixQR().topRows(static_cast<Eigen::Index>(cols)).triangularView<Eigen::Upper>();
  double rmax = 0.0;
  for (Eigen::Index k = 0; k < R.rows(); ++k) rmax = std::max(rmax, std::abs(R(k, k)));
  std::size_t usable = cols;
  for (std::size_t k = 0; k < cols; ++k)
    if (!(std::abs(R(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))) > 1e-13 * rmax)) {
      usable = k;
      break;
    }

  fitted_polynomial best;
  best.scale = scale;
  best.target_error = target_error;
  best.strategy = options.strategy;
  best.fit_points = static_cast<std::size_t>(sys.A.rows());
  double best_subset = std::numeric_limits<double>::infinity();
  std::vector<degree_record> search;

  auto solve = [&](std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d + 1);
    const detail::vector x =
        R.topLeftCorner(n, n).triangularView<Eigen::Upper>().solve(qtb.head(n));
    fitted_polynomial f;
    f.coefficients.assign(x.data(), x.data() + x.size());
    f.scale = scale;
    return f;
  };

  for (std::size_t d = 0; d < usable; ++d) {
    fitted_polynomial f = solve(d);
    const double err = sup_error_on(f, h, disks, voffsets);
    search.push_back({d, err});
    if (err < best_subset) {
      best_subset = err;
      best.coefficients = f.coefficients;
    }
    if (err < target_error) {
      const double full = sup_error(f, h, plan);
      if (full < target_error) {
        best.coefficients = f.coefficients;
        best.fit_error = full;
        best.status = fit_status::met;
        best.degree_search = std::move(search);
        best.validation_points = h.family().size() * voffsets.size();
        return best;
      }
    }
  }
  if (best.coefficients.empty() && usable > 0) best.coefficients = solve(0).coefficients;
  best.fit_error = sup_error(best, h, plan);
  best.status = best.fit_error < target_error ? fit_status::met : fit_status::target_missed;
  best.degree_search = std::move(search);
  best.validation_points = h.family().size() * voffsets.size();
  return best;
}

}  // namespace hclab
