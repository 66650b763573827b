#pragma once

// Interval partitions of [theta0, thetaT] and their images on the arc
// r0 * exp(2 pi i theta). A partition for block start m consists of one base
// block of B = m1(m) - m + 1 steps c2/|mu_{m+n}|, repeated with period sigma_m.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "hclab/compensated_sum.hpp"
#include "hclab/error.hpp"
#include "hclab/polynomial.hpp"
#include "hclab/sequences.hpp"

namespace hclab {

struct construction_params {
  double r0 = 1.0;
  double theta0 = 0.0;
  double thetaT = 0.25;
  double R1 = 1.0;
  double delta0 = 0.5;
  int s1 = 1;
  int k1 = 1;
  double eps0 = 1.0;

  // Derived.
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
  std::optional<std::size_t> m0;
};

/// c4 = R1 + delta0, c2 = delta0 / (2 (2 pi r0 + 1)), c3 = c4 / (r0 c2),
/// c1 = 4 (c3 + 1).
inline construction_params derive_constants(double r0, double theta0, double thetaT, double R1, double delta0,
                                            int s1, int k1, double eps0) {
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw error(errc::parameter, "r0 must be positive");
  if (!(theta0 >= 0.0 && theta0 < thetaT && thetaT <= 1.0))
    throw error(errc::parameter, "need 0 <= theta0 < thetaT <= 1");
  if (std::abs((thetaT - theta0) - 0.25) > 1e-12) throw error(errc::parameter, "arc must span exactly 1/4 turn");
  if (!(R1 > 0.0) || !std::isfinite(R1)) throw error(errc::parameter, "R1 must be positive");
  if (!(delta0 > 0.0 && delta0 < 1.0)) throw error(errc::parameter, "delta0 must lie in (0, 1)");
  if (s1 < 1) throw error(errc::parameter, "s1 must be a positive integer");
  if (k1 < 1) throw error(errc::parameter, "k1 must be a positive integer");
  if (static_cast<double>(k1) > R1) throw error(errc::parameter, "k1 must not exceed R1");
  if (!(eps0 > 0.0)) throw error(errc::parameter, "eps0 must be positive");

  construction_params p;
  p.r0 = r0;
  p.theta0 = theta0;
  p.thetaT = thetaT;
  p.R1 = R1;
  p.delta0 = delta0;
  p.s1 = s1;
  p.k1 = k1;
  p.eps0 = eps0;
  p.c4 = R1 + delta0;
  p.c2 = delta0 / (2.0 * (2.0 * r0 * std::numbers::pi + 1.0));
  p.c3 = p.c4 / (r0 * p.c2);
  p.c1 = 4.0 * (p.c3 + 1.0);
  return p;
}

/// Smallest m1 >= m with sum_{k=m}^{m1} 1/|mu_k| > c3/|mu_m|.
inline std::size_t compute_m1(std::size_t m, const gap_subsequence& sub, double c3) {
  if (m < 1 || m > sub.size()) throw error(errc::parameter, "block start m outside the stored subsequence");
  const double threshold = c3 / sub.modulus(m);
  compensated_sum<double> acc;
  for (std::size_t k = m; k <= sub.size(); ++k) {
    acc += 1.0 / sub.modulus(k);
    if (acc.value() > threshold) return k;
  }
  throw error(errc::tail_too_thin, "reciprocal tail from m = " + std::to_string(m) +
                                       " never exceeds c3/|mu_m| within " + std::to_string(sub.size()) +
                                       " stored terms");
}

/// Prefix-certified m0: the smallest m such that for every m' in
/// [m, K/2] the stored tail sum_{k=m'}^{K} 1/|mu_k| exceeds c3/|mu_m'|,
/// with K = min(truncation, |sub|). The upper half of the prefix is the
/// margin that lets tails accumulate.
inline std::size_t compute_m0(const gap_subsequence& sub, const construction_params& params,
                              std::size_t truncation) {
  const std::size_t K = std::min(truncation, sub.size());
  const std::size_t last = K / 2;
  if (last < 1) throw error(errc::tail_too_thin, "subsequence prefix too short to certify m0");
  std::vector<double> tail(K + 2, 0.0);
  compensated_sum<double> acc;
  for (std::size_t k = K; k >= 1; --k) {
    acc += 1.0 / sub.modulus(k);
    tail[k] = acc.value();
  }
  std::size_t m0 = 1;
  for (std::size_t m = 1; m <= last; ++m)
    if (!(tail[m] > params.c3 / sub.modulus(m))) m0 = m + 1;
  if (m0 > last)
    throw error(errc::tail_too_thin,
                "no m <= " + std::to_string(last) + " satisfies the c3 tail inequality on the stored prefix");
  return m0;
}

struct block_index {
  std::size_t k;
  std::size_t j;
};

struct partition {
  std::size_t m = 0;
  std::size_t m1 = 0;
  std::size_t block_len = 0;  // B = m1 - m + 1
  std::size_t nu_m = 0;
  double sigma = 0.0;
  double theta0 = 0.0;
  double thetaT = 0.0;
  std::vector<double> base;    // theta_0..theta_B from the step recurrence
  std::vector<double> thetas;  // theta_0..theta_{nu_m}
  std::vector<cplx> block_mu;  // mu_{m+j}, j < B
  std::vector<double> block_mu_modulus;
  std::vector<std::size_t> block_mu_index;  // lambda index of mu_{m+j}

  block_index decompose(std::size_t n) const { return {n / block_len, n % block_len}; }

  /// theta^{(m)}_nu for any nu, including indices past nu_m.
  double theta_at(std::size_t nu) const {
    if (nu <= block_len) return base[nu];
    const auto [k, j] = decompose(nu);
    return base[j] + static_cast<double>(k) * sigma;
  }

  std::size_t size() const { return thetas.size(); }
};

namespace detail {

struct block_shape {
  std::size_t m1;
  double sum;    // sum_{k=m}^{m1} 1/|mu_k|
  double sigma;  // c2 * sum
};

inline block_shape shape_block(std::size_t m, const gap_subsequence& sub, const construction_params& params) {
  const std::size_t m1 = compute_m1(m, sub, params.c3);
  compensated_sum<double> s;
  for (std::size_t k = m; k <= m1; ++k) s += 1.0 / sub.modulus(k);
  return {m1, s.value(), params.c2 * s.value()};
}

}  // namespace detail

inline partition build_partition(std::size_t m, const gap_subsequence& sub, const construction_params& params) {
  if (params.m0 && m < *params.m0)
    throw error(errc::precondition, "block start m = " + std::to_string(m) + " is below m0 = " +
                                        std::to_string(*params.m0));
  const auto shape = detail::shape_block(m, sub, params);

  partition part;
  part.m = m;
  part.m1 = shape.m1;
  part.block_len = shape.m1 - m + 1;
  part.sigma = shape.sigma;
  part.theta0 = params.theta0;
  part.thetaT = params.thetaT;
  if (!(part.sigma < 0.25))
    throw error(errc::internal_inconsistency,
                "sigma_m = " + std::to_string(part.sigma) + " is not below 1/4; constants or gap are corrupted");

  const std::size_t B = part.block_len;
  part.base.resize(B + 1);
  part.base[0] = params.theta0;
  compensated_sum<double> acc(params.theta0);
  for (std::size_t n = 0; n < B; ++n) {
    acc += params.c2 / sub.modulus(m + n);
    part.base[n + 1] = acc.value();
  }
  for (std::size_t j = 0; j < B; ++j) {
    part.block_mu.push_back(sub.mu(m + j));
    part.block_mu_modulus.push_back(sub.modulus(m + j));
    part.block_mu_index.push_back(sub.parent_index(m + j));
  }

  // Largest index per residue class j, then the overall maximum. Ties at
  // thetaT are included.
  std::size_t nu = B;
  for (std::size_t j = 0; j < B; ++j) {
    const double room = params.thetaT - part.base[j];
    auto k = static_cast<std::size_t>(std::max(0.0, std::floor(room / part.sigma)));
    std::size_t idx = k * B + j;
    while (part.theta_at(idx + B) <= params.thetaT) idx += B;
    while (idx >= B && part.theta_at(idx) > params.thetaT) idx -= B;
    if (part.theta_at(idx) <= params.thetaT) nu = std::max(nu, idx);
  }
  while (part.theta_at(nu + 1) <= params.thetaT) ++nu;
  part.nu_m = nu;
  part.thetas.resize(nu + 1);
  for (std::size_t v = 0; v <= nu; ++v) part.thetas[v] = part.theta_at(v);
  return part;
}

/// Number of partition points for block start m without materialising it.
inline std::size_t estimate_partition_size(std::size_t m, const gap_subsequence& sub,
                                           const construction_params& params) {
  const auto shape = detail::shape_block(m, sub, params);
  const std::size_t B = shape.m1 - m + 1;
  const double blocks = std::floor((params.thetaT - params.theta0) / shape.sigma);
  return static_cast<std::size_t>(blocks) * B + B;
}

/// Block start in [m0, m0 + window] with the fewest partition points.
inline std::size_t smallest_partition_start(const gap_subsequence& sub, const construction_params& params,
                                            std::size_t window) {
  if (!params.m0) throw error(errc::precondition, "m0 must be computed first");
  std::size_t best = *params.m0;
  std::size_t best_size = std::numeric_limits<std::size_t>::max();
  for (std::size_t m = *params.m0; m <= *params.m0 + window && m <= sub.size(); ++m) {
    std::size_t size = 0;
    try {
      size = estimate_partition_size(m, sub, params);
    } catch (const error&) {
      break;
    }
    if (size < best_size) {
      best = m;
      best_size = size;
    }
  }
  return best;
}

/// Invariant residuals of a built partition, for certificates and tests.
struct partition_check {
  bool strictly_increasing = true;
  bool endpoint_ok = true;  // theta_{nu_m} <= thetaT < theta_{nu_m + 1}
  bool sigma_below_quarter = true;
  bool nu_covers_block = true;  // nu_m >= B
  double step_residual = 0.0;   // max |theta_{n+1} - theta_n - c2/|mu_{m+n}||, n < B
  double period_residual = 0.0; // max |theta_{nu+B} - theta_nu - sigma|
  double recurrence_vs_extension = 0.0;  // |base[B] - (theta0 + sigma)|
  double block_sum = 0.0;       // sum_{k=m}^{m1} 1/|mu_k|
  double block_sum_bound = 0.0; // (c3 + 1)/|mu_m|

  bool ok() const {
    return strictly_increasing && endpoint_ok && sigma_below_quarter && nu_covers_block &&
           block_sum < block_sum_bound;
  }
};

inline partition_check check_partition(const partition& part, const construction_params& params) {
  partition_check out;
  const std::size_t B = part.block_len;
  for (std::size_t v = 1; v < part.thetas.size(); ++v)
    if (!(part.thetas[v] > part.thetas[v - 1])) out.strictly_increasing = false;
  out.endpoint_ok = part.thetas.back() <= params.thetaT && part.theta_at(part.nu_m + 1) > params.thetaT;
  out.sigma_below_quarter = part.sigma < 0.25;
  out.nu_covers_block = part.nu_m >= B;
  for (std::size_t n = 0; n < B; ++n)
    out.step_residual = std::max(out.step_residual, std::abs(part.base[n + 1] - part.base[n] -
                                                             params.c2 / part.block_mu_modulus[n]));
  for (std::size_t v = 0; v + B < part.thetas.size(); ++v)
    out.period_residual = std::max(out.period_residual, std::abs(part.thetas[v + B] - part.thetas[v] - part.sigma));
  out.recurrence_vs_extension = std::abs(part.base[B] - (part.theta0 + part.sigma));
  compensated_sum<double> s;
  for (double r : part.block_mu_modulus) s += 1.0 / r;
  out.block_sum = s.value();
  out.block_sum_bound = (params.c3 + 1.0) / part.block_mu_modulus.front();
  return out;
}

// ---------------------------------------------------------------------------
// Arc points

struct arc_point {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t j = 0;
  cplx w;
  cplx mu;  // mu(w) = mu_{m+j}
};

inline cplx arc_position(double r0, double theta) { return std::polar(r0, 2.0 * std::numbers::pi * theta); }

inline arc_point arc_point_at(const partition& part, const construction_params& params, std::size_t n) {
  const auto [k, j] = part.decompose(n);
  return {n, k, j, arc_position(params.r0, part.thetas.at(n)), part.block_mu[j]};
}

/// The points of the arc partition with their assigned mu(w). Indices below
/// B decompose with k = 0.
inline std::vector<arc_point> arc_points(const partition& part, const gap_subsequence& sub,
                                         const construction_params& params) {
  if (part.m + part.block_len - 1 > sub.size() || sub.mu(part.m) != part.block_mu.front())
    throw error(errc::parameter, "partition was not built from this subsequence");
  std::vector<arc_point> out;
  out.reserve(part.size());
  for (std::size_t n = 0; n < part.size(); ++n) out.push_back(arc_point_at(part, params, n));
  return out;
}

// ---------------------------------------------------------------------------
// Locating a point of the arc

struct locate_result {
  cplx a;
  double theta = 0.0;
  std::size_t rho = 0;
  bool terminal = false;  // theta in [theta_{nu_m}, thetaT]
  double theta1 = 0.0;
  double theta2 = 0.0;
  std::size_t j = 0;
  cplx w0;
  cplx mu_w0;
  double bracket_slack = 0.0;  // c2/|mu(w0)| - (theta2 - theta1)
};

/// Relative tolerance for |a| = r0.
inline constexpr double arc_radius_tolerance = 1e-9;

inline locate_result locate(cplx a, const partition& part, const construction_params& params) {
  const double r = std::abs(a);
  if (!(std::abs(r - params.r0) <= arc_radius_tolerance * params.r0))
    throw error(errc::domain, "point is not on the circle of radius r0");
  constexpr double angle_tol = 1e-12;
  double t = std::arg(a) / (2.0 * std::numbers::pi);
  t -= std::floor(t - (params.theta0 - angle_tol));
  if (t > params.thetaT + angle_tol) throw error(errc::domain, "point lies outside the arc [theta0, thetaT]");
  t = std::clamp(t, params.theta0, params.thetaT);

  locate_result out;
  out.a = arc_position(params.r0, t);
  out.theta = t;
  const auto it = std::upper_bound(part.thetas.begin(), part.thetas.end(), t);
  out.rho = static_cast<std::size_t>(it - part.thetas.begin()) - 1;
  if (out.rho >= part.nu_m) {
    out.rho = part.nu_m;
    out.terminal = true;
    out.theta1 = part.thetas[part.nu_m];
    out.theta2 = params.thetaT;
  } else {
    out.theta1 = part.thetas[out.rho];
    out.theta2 = part.thetas[out.rho + 1];
  }
  out.j = part.decompose(out.rho).j;
  out.w0 = arc_position(params.r0, out.theta1);
  out.mu_w0 = part.block_mu[out.j];
  out.bracket_slack = params.c2 / part.block_mu_modulus[out.j] - (out.theta2 - out.theta1);
  return out;
}

}  // namespace hclab
