#pragma once

// End-to-end construction and its verification on sampled points a of the
// arc: containment of the shifted ball in B_{w0}, the sup error of
// f(z + a mu(w0)) - p(z) over |z| <= k1, and E(m, j, s, k) membership.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hclab/approx.hpp"
#include "hclab/disks.hpp"
#include "hclab/error.hpp"
#include "hclab/parallel.hpp"
#include "hclab/partition.hpp"
#include "hclab/sequences.hpp"

namespace hclab {

/// delta0 - |mu(w0)| |a - w0|. Positive means z + a mu(w0) lies in B_{w0}
/// for every |z| <= R1.
inline double check_containment(cplx a, const locate_result& loc, const construction_params& params) {
  return params.delta0 - std::abs(loc.mu_w0) * std::abs(a - loc.w0);
}

/// Points standing in for the closed disk |z| <= k: circles of radius k and
/// k/2 and a coarse interior grid including 0.
inline std::vector<cplx> ball_grid(double k, std::size_t boundary = 64, std::size_t half = 32,
                                   std::size_t grid = 5) {
  std::vector<cplx> out;
  for (std::size_t t = 0; t < boundary; ++t)
    out.push_back(std::polar(k, 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(boundary)));
  for (std::size_t t = 0; t < half; ++t)
    out.push_back(std::polar(0.5 * k, 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(half)));
  for (std::size_t x = 0; x < grid; ++x)
    for (std::size_t y = 0; y < grid; ++y) {
      const double step = grid > 1 ? 1.2 * k / static_cast<double>(grid - 1) : 0.0;
      const cplx z{-0.6 * k + step * static_cast<double>(x), -0.6 * k + step * static_cast<double>(y)};
      if (std::abs(z) <= k) out.push_back(z);
    }
  if (grid % 2 == 0) out.push_back({});
  return out;
}

// ---------------------------------------------------------------------------
// Construction

struct block_start_policy {
  enum class kind { first_admissible, fewest_points, fixed };
  kind k = kind::first_admissible;
  std::size_t value = 0;   // for fixed
  std::size_t window = 64; // for fewest_points: m in [m0, m0 + window]

  static block_start_policy fixed(std::size_t m) { return {kind::fixed, m, 0}; }
  static block_start_policy fewest(std::size_t window = 64) { return {kind::fewest_points, 0, window}; }
};

struct experiment_options {
  std::size_t degree_cap = 32;
  sampling_plan plan;
  fit_options fit;
  bool oracle_mode = false;     // verify the exact h instead of a fitted polynomial
  std::size_t max_gap_terms = 0;  // 0 = every admissible term of the stored prefix
  std::string config_digest;
};

struct construction {
  std::shared_ptr<const sequence> seq;
  gap_subsequence sub;
  construction_params params;
  partition part;
  std::shared_ptr<const disk_family> family;
  disjointness_certificate certificate;
  std::optional<piecewise_target> target;
  std::optional<fitted_polynomial> fit;
  std::size_t horizon = 0;  // max lambda index of mu(w) over the partition
  polynomial g, p;
  std::vector<cplx> C_samples;
};

/// Largest lambda index carried by any mu(w), w in the partition. The same
/// for every a on the arc.
inline std::size_t partition_horizon(const partition& part) {
  const std::size_t used = std::min(part.block_len, part.size());
  std::size_t out = 0;
  for (std::size_t j = 0; j < used; ++j) out = std::max(out, part.block_mu_index[j]);
  return out;
}

namespace detail {

template <typename F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

}  // namespace detail

/// Runs the construction up to the fitted polynomial (or only up to the
/// target in oracle mode). `spec.params` must hold the derived constants;
/// m0 is computed here from the gap subsequence with gap c1.
inline construction build_construction(std::shared_ptr<const sequence> seq, const target_spec& spec,
                                       const block_start_policy& policy, const experiment_options& opt) {
  construction ctx;
  ctx.seq = seq;
  ctx.params = spec.params;
  ctx.g = spec.g;
  ctx.p = spec.p;
  ctx.C_samples = spec.C_samples;
  detail::staged("config", [&] { spec.validate(); });

  ctx.sub = detail::staged("sequences", [&] {
    const std::size_t max_len = opt.max_gap_terms == 0 ? seq->size() : opt.max_gap_terms;
    return extract_gap_subsequence(seq, ctx.params.c1, max_len);
  });

  const std::size_t m = detail::staged("partition", [&] {
    ctx.params.m0 = compute_m0(ctx.sub, ctx.params, ctx.sub.size());
    switch (policy.k) {
      case block_start_policy::kind::first_admissible: return *ctx.params.m0;
      case block_start_policy::kind::fewest_points: return smallest_partition_start(ctx.sub, ctx.params, policy.window);
      case block_start_policy::kind::fixed: break;
    }
    if (policy.value < *ctx.params.m0)
      throw error(errc::precondition, "block start m = " + std::to_string(policy.value) + " is below m0 = " +
                                          std::to_string(*ctx.params.m0));
    return policy.value;
  });

  ctx.part = detail::staged("partition", [&] { return build_partition(m, ctx.sub, ctx.params); });
  ctx.horizon = partition_horizon(ctx.part);

  detail::staged("disks", [&] {
    ctx.family = std::make_shared<const disk_family>(build_disks(ctx.part, ctx.params));
    ctx.certificate = check_disjoint(*ctx.family);
    if (!ctx.certificate.pass)
      throw error(errc::construction_violation,
                  "disks " + std::to_string(ctx.certificate.witness[0]) + " and " +
                      std::to_string(ctx.certificate.witness[1]) + " intersect (gap " +
                      std::to_string(ctx.certificate.min_gap) + ")");
  });

  detail::staged("approx", [&] {
    ctx.target.emplace(build_target(ctx.family, ctx.certificate, ctx.g, ctx.p));
    if (!opt.oracle_mode) {
      const double target_error = std::min(1.0 / (2.0 * ctx.params.s1), ctx.params.eps0);
      ctx.fit = fit_polynomial(*ctx.target, target_error, opt.degree_cap, opt.plan, opt.fit);
    }
  });
  return ctx;
}

// ---------------------------------------------------------------------------
// Samples

struct sample_record {
  cplx a;
  double theta = 0.0;
  cplx w0;
  std::size_t n = 0;  // lambda index of mu(w0)
  std::size_t j = 0;
  double margin = 0.0;
  double err = 0.0;    // sup over the ball of |f(z + a mu(w0)) - p(z)|
  double term1 = 0.0;  // sup |f(z + a mu(w0)) - p(z + mu(w0)(a - w0))|
  double term2 = 0.0;  // sup |p(z + mu(w0)(a - w0)) - p(z)|
  bool construction_failure = false;
  bool pass = false;
};

/// One sample a. `f` is the function under test: a fitted polynomial, or
/// the exact h in oracle mode (which may throw a domain error outside L).
template <typename F>
sample_record check_sample(cplx a, const F& f, const construction& ctx, const std::vector<cplx>& ball,
                           double threshold) {
  const locate_result loc = locate(a, ctx.part, ctx.params);
  sample_record r;
  r.a = a;
  r.theta = loc.theta;
  r.w0 = loc.w0;
  r.j = loc.j;
  r.n = ctx.part.block_mu_index[loc.j];
  r.margin = check_containment(a, loc, ctx.params);
  if (!(r.margin > 0.0)) {
    r.construction_failure = true;
    r.err = std::numeric_limits<double>::infinity();
    return r;
  }
  const cplx shift = a * loc.mu_w0;
  const cplx drift = loc.mu_w0 * (a - loc.w0);
  try {
    for (const cplx& z : ball) {
      const cplx fz = f(z + shift);
      const cplx pd = ctx.p(z + drift);
      const cplx pz = ctx.p(z);
      r.err = std::max(r.err, std::abs(fz - pz));
      r.term1 = std::max(r.term1, std::abs(fz - pd));
      r.term2 = std::max(r.term2, std::abs(pd - pz));
    }
  } catch (const error& e) {
    if (e.code() != errc::domain) throw;
    r.construction_failure = true;
    r.err = std::numeric_limits<double>::infinity();
    return r;
  }
  r.pass = r.err < threshold;
  return r;
}

/// Sample parameters in [theta0, thetaT]: half adversarial (the endpoints,
/// the terminal bracket midpoint and, for an even spread of partition
/// indices, the left end, the midpoint and the last double before the right
/// end of the bracket), the rest uniform from a seeded mt19937_64.
inline std::vector<double> sample_thetas(const partition& part, const construction_params& params,
                                         std::size_t num_samples, std::uint64_t seed) {
  std::vector<double> out;
  if (num_samples == 0) return out;
  const std::size_t adversarial = num_samples / 2;
  const double terminal_mid = 0.5 * (part.thetas.back() + params.thetaT);
  for (double t : {params.theta0, params.thetaT, terminal_mid})
    if (out.size() < adversarial) out.push_back(t);
  const std::size_t brackets = part.nu_m;  // [theta_v, theta_{v+1}], v < nu_m
  const std::size_t picks = adversarial > out.size() ? (adversarial - out.size()) / 3 : 0;
  for (std::size_t t = 0; t < picks && brackets > 0; ++t) {
    const std::size_t v = picks == 1 ? 0 : t * (brackets - 1) / (picks - 1);
    const double lo = part.thetas[v], hi = part.thetas[v + 1];
    out.push_back(lo);
    out.push_back(0.5 * (lo + hi));
    out.push_back(std::nextafter(hi, lo));
  }
  std::mt19937_64 rng(seed);
  while (out.size() < num_samples) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    out.push_back(params.theta0 + (params.thetaT - params.theta0) * u);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report

struct verification_report {
  std::string config_digest;
  std::size_t m = 0;
  std::size_t m0 = 0;
  std::size_t disks = 0;
  std::size_t num_samples = 0;
  std::size_t horizon = 0;
  bool oracle_mode = false;
  std::string fit_status;  // "met", "target-missed" or "oracle"
  double fit_slack = 0.0;
  double threshold = 0.0;
  double worst_error = 0.0;
  double worst_term1 = 0.0;
  double worst_term2 = 0.0;
  double min_margin = std::numeric_limits<double>::infinity();
  bool witnesses_within_horizon = true;
  bool decomposition_holds = true;  // err <= term1 + term2 per sample
  std::size_t construction_failures = 0;
  double C_error = 0.0;  // sup over C samples of |f - g|
  double C_threshold = 0.0;
  bool C_pass = true;
  bool pass = false;
  std::vector<sample_record> samples;
};

/// Pass threshold: 1/s1 when the fit met its target, 1/(2 s1) + 2 fit_error
/// otherwise; 1/(2 s1) for the exact h.
inline double slack_threshold(const construction_params& params, const std::optional<fitted_polynomial>& fit) {
  if (!fit) return 1.0 / (2.0 * params.s1);
  if (fit->status == fit_status::met) return 1.0 / params.s1;
  return 1.0 / (2.0 * params.s1) + 2.0 * fit->fit_error;
}

inline verification_report verify_construction(const construction& ctx, std::size_t num_samples,
                                               std::uint64_t seed, const std::string& config_digest = {}) {
  if (!ctx.target) throw error(errc::precondition, "construction has no target", "verify");
  verification_report rep;
  rep.config_digest = config_digest;
  rep.m = ctx.part.m;
  rep.m0 = ctx.params.m0.value_or(0);
  rep.disks = ctx.family ? ctx.family->size() : 0;
  rep.num_samples = num_samples;
  rep.horizon = ctx.horizon;
  rep.oracle_mode = !ctx.fit;
  rep.fit_status = ctx.fit ? to_string(ctx.fit->status) : "oracle";
  rep.fit_slack = ctx.fit ? ctx.fit->fit_error : 0.0;
  rep.threshold = slack_threshold(ctx.params, ctx.fit);

  const auto ball = ball_grid(static_cast<double>(ctx.params.k1));
  const auto thetas = sample_thetas(ctx.part, ctx.params, num_samples, seed);
  rep.samples.resize(thetas.size());
  detail::staged("verify", [&] {
    parallel_for(thetas.size(), [&](std::size_t i) {
      const cplx a = arc_position(ctx.params.r0, thetas[i]);
      if (ctx.fit)
        rep.samples[i] = check_sample(a, *ctx.fit, ctx, ball, rep.threshold);
      else
        rep.samples[i] = check_sample(a, *ctx.target, ctx, ball, rep.threshold);
    }, 16);
  });

  rep.pass = true;
  for (const auto& s : rep.samples) {
    rep.worst_error = std::max(rep.worst_error, s.err);
    rep.worst_term1 = std::max(rep.worst_term1, s.term1);
    rep.worst_term2 = std::max(rep.worst_term2, s.term2);
    rep.min_margin = std::min(rep.min_margin, s.margin);
    if (s.n > rep.horizon) rep.witnesses_within_horizon = false;
    if (s.err > s.term1 + s.term2) rep.decomposition_holds = false;
    if (s.construction_failure) ++rep.construction_failures;
    if (!s.pass) rep.pass = false;
  }

  rep.C_threshold = ctx.params.eps0 + rep.fit_slack;
  for (const cplx& z : ctx.C_samples) {
    const cplx fz = ctx.fit ? (*ctx.fit)(z) : (*ctx.target)(z);
    rep.C_error = std::max(rep.C_error, std::abs(fz - ctx.g(z)));
  }
  rep.C_pass = rep.C_error < rep.C_threshold;
  return rep;
}

/// Full pipeline for a fixed block start m.
inline verification_report run_experiment(std::shared_ptr<const sequence> seq, const target_spec& spec,
                                          std::size_t m, std::size_t num_samples, std::uint64_t seed,
                                          const experiment_options& opt = {}) {
  const construction ctx = build_construction(std::move(seq), spec, block_start_policy::fixed(m), opt);
  return verify_construction(ctx, num_samples, seed, opt.config_digest);
}

// ---------------------------------------------------------------------------
// E(m, j, s, k)

struct membership_result {
  bool member = true;
  std::vector<std::optional<std::size_t>> witness;  // argmin n per sample
  std::vector<double> best_error;                   // the minimum per sample
};

/// For each a, the n <= m minimising sup_{|z| <= k} |f(z + lambda_n a) - p_j(z)|.
/// Points outside the domain of f count as an infinite error.
template <typename F>
membership_result check_E_membership(const F& f, std::size_t m, const polynomial& pj, std::size_t s,
                                     double k, const sequence& seq, const std::vector<cplx>& arc_samples) {
  if (s < 1) throw error(errc::parameter, "s must be a positive integer");
  membership_result out;
  out.witness.resize(arc_samples.size());
  out.best_error.assign(arc_samples.size(), std::numeric_limits<double>::infinity());
  const auto ball = ball_grid(k);
  const std::size_t top = std::min(m, seq.size());
  parallel_for(arc_samples.size(), [&](std::size_t i) {
    const cplx a = arc_samples[i];
    for (std::size_t n = 1; n <= top; ++n) {
      const cplx shift = seq.term(n) * a;
      double worst = 0.0;
      try {
        for (const cplx& z : ball) {
          worst = std::max(worst, std::abs(f(z + shift) - pj(z)));
          if (worst >= out.best_error[i]) break;
        }
      } catch (const error& e) {
        if (e.code() != errc::domain) throw;
        worst = std::numeric_limits<double>::infinity();
      }
      if (worst < out.best_error[i]) {
        out.best_error[i] = worst;
        out.witness[i] = n;
      }
    }
  }, 4);
  const double bound = 1.0 / static_cast<double>(s);
  for (double e : out.best_error)
    if (!(e < bound)) out.member = false;
  return out;
}

}  // namespace hclab
