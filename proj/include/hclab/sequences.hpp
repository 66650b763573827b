#pragma once

// Candidate translation sequences, gap subsequences and the finite-truncation
// checks for the growth conditions (C) and (Sigma).
//
// Sequence indices follow the mathematical convention: the first term is
// lambda_1, the first gap-subsequence term is mu_1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hclab/compensated_sum.hpp"
#include "hclab/error.hpp"
#include "hclab/formula.hpp"
#include "hclab/polynomial.hpp"

namespace hclab {

enum class provenance { user_supplied, generated, formula };

inline std::string to_string(provenance p) {
  switch (p) {
    case provenance::user_supplied: return "user-supplied";
    case provenance::generated: return "generated";
    case provenance::formula: return "formula";
  }
  return "user-supplied";
}

inline provenance provenance_from_string(const std::string& s) {
  if (s == "user-supplied" || s == "user") return provenance::user_supplied;
  if (s == "generated") return provenance::generated;
  if (s == "formula") return provenance::formula;
  throw error(errc::parameter, "unknown provenance '" + s + "'");
}

struct sequence {
  std::vector<cplx> terms;
  provenance origin = provenance::user_supplied;
  std::optional<std::string> formula_text;

  std::size_t size() const { return terms.size(); }
  cplx term(std::size_t n) const { return terms.at(n - 1); }
  double modulus(std::size_t n) const { return std::abs(terms.at(n - 1)); }
};

/// Rejects zero terms.
inline void validate(const sequence& seq) {
  for (std::size_t i = 0; i < seq.terms.size(); ++i) {
    const cplx t = seq.terms[i];
    if (t == cplx{} || !std::isfinite(t.real()) || !std::isfinite(t.imag()))
      throw error(errc::parameter, "sequence term " + std::to_string(i + 1) + " is zero or not finite");
  }
}

inline sequence make_sequence(std::vector<cplx> terms, provenance origin = provenance::user_supplied,
                              std::optional<std::string> formula_text = std::nullopt) {
  sequence s{std::move(terms), origin, std::move(formula_text)};
  validate(s);
  return s;
}

inline sequence sequence_from_formula(const std::string& text, std::size_t count) {
  const auto f = formula::parse(text);
  std::vector<cplx> terms(count);
  for (std::size_t n = 1; n <= count; ++n) terms[n - 1] = f(static_cast<double>(n));
  return make_sequence(std::move(terms), provenance::formula, text);
}

/// Prefix proxy for |lambda_n| -> infinity: every index in the first half of
/// the stored prefix is followed by a term at least one unit larger.
inline bool grows_on_prefix(const sequence& seq) {
  const std::size_t len = seq.size();
  if (len < 2) return false;
  std::vector<double> suffix_max(len + 1, -1.0);
  for (std::size_t i = len; i-- > 0;) suffix_max[i] = std::max(suffix_max[i + 1], std::abs(seq.terms[i]));
  for (std::size_t i = 0; i < len / 2; ++i)
    if (!(suffix_max[i + 1] > std::abs(seq.terms[i]) + 1.0)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Gap subsequences

struct gap_subsequence {
  std::shared_ptr<const sequence> parent;
  std::vector<std::size_t> indices;  // lambda indices, 1-based, strictly increasing
  std::vector<double> moduli;        // |mu_k|
  double gap = 0.0;
  bool exhausted = false;  // prefix ran out before max_len terms were found

  std::size_t size() const { return indices.size(); }
  cplx mu(std::size_t k) const { return parent->term(indices.at(k - 1)); }
  double modulus(std::size_t k) const { return moduli.at(k - 1); }
  std::size_t parent_index(std::size_t k) const { return indices.at(k - 1); }
};

/// Greedy extraction: the earliest term with |lambda| > gap, then repeatedly
/// the earliest later term whose modulus exceeds the previous pick by > gap.
/// `scan_limit` bounds how much of the parent prefix is read (0 = all).
inline gap_subsequence extract_gap_subsequence(std::shared_ptr<const sequence> seq, double gap,
                                               std::size_t max_len, std::size_t scan_limit = 0) {
  if (!(gap > 0.0)) throw error(errc::parameter, "gap must be positive");
  if (!seq) throw error(errc::parameter, "null sequence");
  const std::size_t limit = scan_limit == 0 ? seq->size() : std::min(scan_limit, seq->size());
  gap_subsequence out;
  out.parent = seq;
  out.gap = gap;
  double floor_modulus = gap;  // next pick must exceed this
  for (std::size_t i = 0; i < limit && out.indices.size() < max_len; ++i) {
    const double r = std::abs(seq->terms[i]);
    if (r > floor_modulus) {
      out.indices.push_back(i + 1);
      out.moduli.push_back(r);
      floor_modulus = r + gap;
    }
  }
  if (out.indices.empty())
    throw error(errc::insufficient_growth,
                "no term with modulus above " + std::to_string(gap) + " in the first " + std::to_string(limit) +
                    " terms");
  out.exhausted = out.indices.size() < max_len;
  return out;
}

inline gap_subsequence extract_gap_subsequence(const sequence& seq, double gap, std::size_t max_len,
                                               std::size_t scan_limit = 0) {
  return extract_gap_subsequence(std::make_shared<const sequence>(seq), gap, max_len, scan_limit);
}

/// Re-checks the gap invariants directly.
inline bool satisfies_gap_invariants(const gap_subsequence& sub) {
  if (sub.indices.empty() || !(sub.moduli.front() > sub.gap)) return false;
  for (std::size_t k = 1; k < sub.size(); ++k) {
    if (!(sub.indices[k] > sub.indices[k - 1])) return false;
    if (!(sub.moduli[k] - sub.moduli[k - 1] > sub.gap)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Condition reports

enum class condition { C, sigma, liminf_ratio };
enum class verdict { passes_proxy, fails_proxy, provably_fails, analytic_pass };

inline std::string to_string(condition c) {
  switch (c) {
    case condition::C: return "C";
    case condition::sigma: return "Sigma";
    case condition::liminf_ratio: return "liminf-ratio";
  }
  return "C";
}

inline std::string to_string(verdict v) {
  switch (v) {
    case verdict::passes_proxy: return "passes-proxy";
    case verdict::fails_proxy: return "fails-proxy";
    case verdict::provably_fails: return "provably-fails";
    case verdict::analytic_pass: return "analytic-pass";
  }
  return "fails-proxy";
}

/// Outcome of a finite-truncation check. Verdicts other than analytic-pass
/// describe the stored prefix only.
struct condition_report {
  condition cond = condition::C;
  double gap_used = 0.0;
  std::size_t truncation = 0;
  std::vector<double> evidence;
  verdict result = verdict::fails_proxy;
  std::map<std::string, double> thresholds;
  std::vector<std::size_t> checkpoints;
  std::vector<double> checkpoint_values;
  std::string note;
};

namespace detail {

inline void require_truncation(std::size_t truncation, std::size_t minimum) {
  if (truncation < minimum)
    throw error(errc::parameter, "truncation must be at least " + std::to_string(minimum));
}

/// Dyadic checkpoints 1, 2, 4, ... below `len`, followed by `len` itself.
inline std::vector<std::size_t> dyadic_checkpoints(std::size_t len) {
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k < len; k *= 2) out.push_back(k);
  if (len > 0) out.push_back(len);
  return out;
}

/// Formula metadata proving divergence of sum 1/|mu_n| for every greedy gap
/// subsequence: lambda_n = c n^p + lower-order terms with 0 < p <= 1 and
/// c > 0 has bounded increments, so greedy picks grow at most linearly.
inline std::optional<std::string> analytic_divergence(const sequence& seq) {
  if (!seq.formula_text) return std::nullopt;
  try {
    const auto lead = formula::parse(*seq.formula_text).leading_power();
    if (lead && lead->coefficient > 0.0 && lead->exponent > 0.0 && lead->exponent <= 1.0)
      return "formula " + *seq.formula_text + " grows like n^" + std::to_string(lead->exponent) +
             " with bounded increments; every gap subsequence grows at most linearly, so the reciprocal "
             "series diverges";
  } catch (const error&) {
  }
  return std::nullopt;
}

}  // namespace detail

/// L_n = |mu_n| * sum_{k=n}^{N} 1/|mu_k| over the gap subsequence found in
/// the first `truncation` terms. passes-proxy iff max L_n exceeds
/// growth_threshold and the per-checkpoint maxima are nondecreasing.
inline condition_report check_condition_C(const sequence& seq, double gap, std::size_t truncation,
                                          double growth_threshold, bool allow_analytic = false) {
  detail::require_truncation(truncation, 10);
  const auto sub = extract_gap_subsequence(seq, gap, std::numeric_limits<std::size_t>::max(), truncation);
  const std::size_t len = sub.size();

  condition_report rep;
  rep.cond = condition::C;
  rep.gap_used = gap;
  rep.truncation = truncation;
  rep.thresholds["growth_threshold"] = growth_threshold;

  auto tail_products = [&](std::size_t upto) {
    std::vector<double> values(upto);
    compensated_sum<double> tail;
    for (std::size_t k = upto; k-- > 0;) {
      tail += 1.0 / sub.moduli[k];
      values[k] = sub.moduli[k] * tail.value();
    }
    return values;
  };

  rep.evidence = tail_products(len);
  rep.checkpoints = detail::dyadic_checkpoints(len);
  for (std::size_t cp : rep.checkpoints) {
    const auto v = tail_products(cp);
    rep.checkpoint_values.push_back(*std::max_element(v.begin(), v.end()));
  }

  const double best = rep.checkpoint_values.back();
  bool nondecreasing = true;
  for (std::size_t i = 1; i < rep.checkpoint_values.size(); ++i)
    if (rep.checkpoint_values[i] < rep.checkpoint_values[i - 1] * (1.0 - 1e-12)) nondecreasing = false;

  rep.result = (best > growth_threshold && nondecreasing) ? verdict::passes_proxy : verdict::fails_proxy;
  rep.note = "finite-truncation proxy over " + std::to_string(len) + " gap terms; max L_n = " + std::to_string(best);
  if (allow_analytic) {
    if (auto why = detail::analytic_divergence(seq)) {
      rep.result = verdict::analytic_pass;
      rep.note = *why + " (divergent reciprocal tails make L_n unbounded)";
    }
  }
  return rep;
}

struct sigma_options {
  /// Partial sums must exceed this.
  double sum_threshold = 0.0;
  /// A plateau is declared when the last dyadic increment falls below this
  /// fraction of the previous one (power-law moduli k^p give 2^{1-p}).
  double plateau_ratio = 0.75;
  bool allow_analytic = false;
};

/// Partial sums of 1/|mu_k|. passes-proxy iff the final sum exceeds the
/// configured threshold and the dyadic increments have not plateaued.
inline condition_report check_condition_Sigma(const sequence& seq, double gap, std::size_t truncation,
                                              const sigma_options& opt = {}) {
  detail::require_truncation(truncation, 10);
  const auto sub = extract_gap_subsequence(seq, gap, std::numeric_limits<std::size_t>::max(), truncation);
  const std::size_t len = sub.size();

  condition_report rep;
  rep.cond = condition::sigma;
  rep.gap_used = gap;
  rep.truncation = truncation;
  rep.thresholds["sum_threshold"] = opt.sum_threshold;
  rep.thresholds["plateau_ratio"] = opt.plateau_ratio;

  compensated_sum<double> acc;
  rep.evidence.reserve(len);
  for (std::size_t k = 0; k < len; ++k) {
    acc += 1.0 / sub.moduli[k];
    rep.evidence.push_back(acc.value());
  }
  rep.checkpoints = detail::dyadic_checkpoints(len);
  for (std::size_t cp : rep.checkpoints) rep.checkpoint_values.push_back(rep.evidence[cp - 1]);

  // Increments over full dyadic windows only; the ragged last window is skipped.
  std::vector<double> increments;
  for (std::size_t i = 1; i < rep.checkpoints.size(); ++i) {
    if (rep.checkpoints[i] != 2 * rep.checkpoints[i - 1]) continue;
    increments.push_back(rep.checkpoint_values[i] - rep.checkpoint_values[i - 1]);
  }
  bool plateau = true;
  if (increments.size() >= 2) {
    const double last = increments.back();
    const double prev = increments[increments.size() - 2];
    plateau = !(last >= opt.plateau_ratio * prev && last > 0.0);
  }
  const double total = rep.evidence.empty() ? 0.0 : rep.evidence.back();
  rep.result = (total > opt.sum_threshold && !plateau) ? verdict::passes_proxy : verdict::fails_proxy;
  rep.note = "finite-truncation proxy over " + std::to_string(len) + " gap terms; partial sum " +
             std::to_string(total) + (plateau ? ", increments plateau" : ", increments sustained");
  if (opt.allow_analytic) {
    if (auto why = detail::analytic_divergence(seq)) {
      rep.result = verdict::analytic_pass;
      rep.note = *why;
    }
  }
  return rep;
}

/// Tail infima of |lambda_{n+1}|/|lambda_n| at dyadic tail starts. The
/// non-existence criterion (liminf > 2) is flagged as provably-fails when
/// every checked tail infimum stays above 2.
inline condition_report check_liminf_ratio(const sequence& seq, std::size_t truncation) {
  detail::require_truncation(truncation, 2);
  const std::size_t len = std::min(truncation, seq.size());
  if (len < 2) throw error(errc::insufficient_data, "need at least two terms");

  std::vector<double> ratios(len - 1);
  for (std::size_t i = 0; i + 1 < len; ++i) ratios[i] = std::abs(seq.terms[i + 1]) / std::abs(seq.terms[i]);
  std::vector<double> suffix_min(ratios.size() + 1, std::numeric_limits<double>::infinity());
  for (std::size_t i = ratios.size(); i-- > 0;) suffix_min[i] = std::min(suffix_min[i + 1], ratios[i]);

  condition_report rep;
  rep.cond = condition::liminf_ratio;
  rep.truncation = truncation;
  rep.thresholds["ratio_bound"] = 2.0;
  for (std::size_t start = 1; start <= ratios.size(); start *= 2) {
    rep.checkpoints.push_back(start);
    rep.evidence.push_back(suffix_min[start - 1]);
  }
  rep.checkpoint_values = rep.evidence;
  const bool all_above =
      std::all_of(rep.evidence.begin(), rep.evidence.end(), [](double v) { return v > 2.0; });
  rep.result = all_above ? verdict::provably_fails : verdict::passes_proxy;
  rep.note = all_above ? "every checked tail infimum of consecutive ratios exceeds 2; no common hypercyclic "
                         "function exists for the full circle"
                       : "tail infimum of consecutive ratios does not stay above 2; the non-existence "
                         "criterion does not apply";
  return rep;
}

// ---------------------------------------------------------------------------
// Block-structured sequences with i(Lambda) = M that satisfy (C) but not (Sigma)

struct generated_block {
  long double root = 1.0L;  // a_n, with a_n^2 = min of the block
  std::vector<long double> values;
};

/// Blocks D_1 = {1}; for n >= 2, D_n = {(a_n + v)^2 : v = 0..floor(a_n)+1}
/// with min D_{n+1} = M * max D_n, enumerated in increasing order.
struct generated_sequence {
  double M = 0.0;
  std::vector<generated_block> blocks;
  std::vector<std::size_t> block_start;  // 1-based enumeration index of each block's minimum
  sequence enumeration;

  std::size_t num_blocks() const { return blocks.size(); }
  std::size_t block_end(std::size_t b) const { return block_start[b] + blocks[b].values.size() - 1; }
};

inline generated_sequence generate_gap_block_sequence(double M, std::size_t num_blocks) {
  if (!(M > 1.0) || !std::isfinite(M)) throw error(errc::parameter, "M must exceed 1");
  if (num_blocks < 2) throw error(errc::parameter, "need at least 2 blocks");

  generated_sequence gen;
  gen.M = M;
  const long double ML = M;
  gen.blocks.push_back({1.0L, {1.0L}});
  for (std::size_t b = 1; b < num_blocks; ++b) {
    const long double prev_max = gen.blocks.back().values.back();
    const long double min_value = ML * prev_max;
    const long double a = std::sqrt(min_value);
    const auto count = static_cast<std::size_t>(std::floor(a)) + 2;
    generated_block blk;
    blk.root = a;
    blk.values.reserve(count);
    blk.values.push_back(min_value);
    for (std::size_t v = 1; v < count; ++v) {
      const long double x = a + static_cast<long double>(v);
      blk.values.push_back(x * x);
    }
    gen.blocks.push_back(std::move(blk));
  }

  std::vector<cplx> terms;
  for (const auto& blk : gen.blocks) {
    gen.block_start.push_back(terms.size() + 1);
    for (long double v : blk.values) terms.emplace_back(static_cast<double>(v), 0.0);
  }
  gen.enumeration = make_sequence(std::move(terms), provenance::generated);
  return gen;
}

struct claim_violation {
  std::string check;
  std::size_t block = 0;  // 1-based block number
  std::size_t index = 0;  // 1-based enumeration index, 0 when per-block
  double value = 0.0;
  double bound = 0.0;
};

/// Per-block evidence for the structural claims about a generated sequence.
struct claims_report {
  std::vector<double> cross_ratios;       // lambda_{b+1}/lambda_b at block boundaries
  double max_in_block_excess = -1.0;      // max of ratio - (1+1/a_m)^2 over in-block steps
  std::vector<double> block_sums;         // S_m, m >= 2
  std::vector<double> block_sum_bounds;   // 1/(a_m - 1)
  std::vector<double> tail_sums;          // sum over the stored tail from block m
  std::vector<double> tail_bounds;        // S_m + 1/(a_m - 1)
  std::vector<double> start_values;       // t at block starts, m >= 2 with enough tail blocks
  std::vector<double> start_bounds;       // a_{m+1}/(36 M)
  std::vector<double> aux_values;         // a_m^2 S_m
  std::vector<double> aux_bounds;         // a_m / 4
  std::vector<claim_violation> violations;

  bool ok() const { return violations.empty(); }
};

struct claims_options {
  /// t at the start of block m sums through the end of block m + tail_blocks.
  std::size_t tail_blocks = 3;
  double ratio_tolerance = 1e-12;
};

inline claims_report verify_claims(const generated_sequence& gen, const claims_options& opt = {}) {
  claims_report rep;
  const auto& terms = gen.enumeration.terms;
  const std::size_t nb = gen.num_blocks();
  const long double M = gen.M;

  auto value_at = [&](std::size_t idx) { return terms[idx - 1].real(); };

  // (a) boundary ratios and (b) in-block ratios.
  for (std::size_t b = 0; b + 1 < nb; ++b) {
    const std::size_t last = gen.block_end(b);
    const double r = value_at(last + 1) / value_at(last);
    rep.cross_ratios.push_back(r);
    if (std::abs(r - gen.M) > opt.ratio_tolerance * gen.M)
      rep.violations.push_back({"cross-block-ratio", b + 1, last, r, gen.M});
  }
  for (std::size_t b = 1; b < nb; ++b) {
    const double a = static_cast<double>(gen.blocks[b].root);
    const double bound = (1.0 + 1.0 / a) * (1.0 + 1.0 / a);
    for (std::size_t idx = gen.block_start[b]; idx < gen.block_end(b); ++idx) {
      const double r = value_at(idx + 1) / value_at(idx);
      rep.max_in_block_excess = std::max(rep.max_in_block_excess, r - bound);
      if (r > bound * (1.0 + opt.ratio_tolerance))
        rep.violations.push_back({"in-block-ratio", b + 1, idx, r, bound});
    }
  }

  // (c) block sums and the tail bound, in extended precision.
  std::vector<long double> block_sum(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    compensated_sum<long double> s;
    for (long double v : gen.blocks[b].values) s += 1.0L / v;
    block_sum[b] = s.value();
  }
  std::vector<long double> tail_from(nb + 1, 0.0L);
  {
    compensated_sum<long double> t;
    for (std::size_t b = nb; b-- > 0;) {
      t += block_sum[b];
      tail_from[b] = t.value();
    }
  }
  for (std::size_t b = 1; b < nb; ++b) {
    const long double a = gen.blocks[b].root;
    const long double bound = 1.0L / (a - 1.0L);
    rep.block_sums.push_back(static_cast<double>(block_sum[b]));
    rep.block_sum_bounds.push_back(static_cast<double>(bound));
    if (!(block_sum[b] < bound))
      rep.violations.push_back({"block-sum", b + 1, 0, static_cast<double>(block_sum[b]), static_cast<double>(bound)});
    const long double tail_bound = block_sum[b] + bound;
    rep.tail_sums.push_back(static_cast<double>(tail_from[b]));
    rep.tail_bounds.push_back(static_cast<double>(tail_bound));
    if (!(tail_from[b] < tail_bound))
      rep.violations.push_back({"tail-sum", b + 1, 0, static_cast<double>(tail_from[b]), static_cast<double>(tail_bound)});

    const long double aux = a * a * block_sum[b];
    rep.aux_values.push_back(static_cast<double>(aux));
    rep.aux_bounds.push_back(static_cast<double>(a / 4.0L));
    if (!(aux > a / 4.0L))
      rep.violations.push_back({"aux-block-mass", b + 1, 0, static_cast<double>(aux), static_cast<double>(a / 4.0L)});
  }

  // (d) block-start growth values.
  for (std::size_t b = 1; b + opt.tail_blocks < nb; ++b) {
    compensated_sum<long double> s;
    for (std::size_t c = b; c <= b + opt.tail_blocks; ++c) s += block_sum[c];
    const long double t = gen.blocks[b].values.front() * s.value();
    const long double bound = gen.blocks[b + 1].root / (36.0L * M);
    rep.start_values.push_back(static_cast<double>(t));
    rep.start_bounds.push_back(static_cast<double>(bound));
    if (!(t > bound))
      rep.violations.push_back({"block-start-bound", b + 1, gen.block_start[b], static_cast<double>(t),
                                static_cast<double>(bound)});
    if (rep.start_values.size() >= 2) {
      const double prev = rep.start_values[rep.start_values.size() - 2];
      if (!(rep.start_values.back() > prev))
        rep.violations.push_back({"block-start-growth", b + 1, gen.block_start[b], rep.start_values.back(), prev});
    }
  }
  return rep;
}

enum class bounds_method { structural, empirical };

struct i_lambda_bounds_t {
  double lower = 1.0;
  double upper = 1.0;
  bounds_method method = bounds_method::structural;
};

/// lower: the smallest boundary ratio; every subsequence crosses infinitely
/// many block boundaries, each contributing a ratio of at least this value.
/// upper: smallest tail supremum of consecutive ratios over tails that start
/// at a block minimum and still contain a boundary.
inline i_lambda_bounds_t i_lambda_bounds(const generated_sequence& gen) {
  if (gen.num_blocks() < 3) throw error(errc::insufficient_data, "need at least 3 blocks");
  const auto& terms = gen.enumeration.terms;
  const std::size_t len = terms.size();
  std::vector<double> suffix_sup(len, 0.0);
  for (std::size_t i = len - 1; i-- > 0;)
    suffix_sup[i] = std::max(suffix_sup[i + 1], terms[i + 1].real() / terms[i].real());

  i_lambda_bounds_t out;
  out.lower = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b + 1 < gen.num_blocks(); ++b) {
    const std::size_t last = gen.block_end(b);
    out.lower = std::min(out.lower, terms[last].real() / terms[last - 1].real());
  }
  out.upper = std::numeric_limits<double>::infinity();
  for (std::size_t b = 1; b + 1 < gen.num_blocks(); ++b)
    out.upper = std::min(out.upper, suffix_sup[gen.block_start[b] - 1]);
  out.method = bounds_method::structural;
  return out;
}

}  // namespace hclab
