#pragma once

// JSON and CSV forms of the library's values.

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hclab/approx.hpp"
#include "hclab/disks.hpp"
#include "hclab/error.hpp"
#include "hclab/partition.hpp"
#include "hclab/sequences.hpp"
#include "hclab/verify.hpp"

namespace hclab {

using json = nlohmann::json;

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw error(errc::parameter, "expected a complex number [re, im], got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json complex_list_json(const std::vector<cplx>& zs) {
  json out = json::array();
  for (const cplx& z : zs) out.push_back(complex_json(z));
  return out;
}

inline std::vector<cplx> complex_list_from_json(const json& j) {
  if (!j.is_array()) throw error(errc::parameter, "expected a list of complex numbers");
  std::vector<cplx> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(complex_from_json(e));
  return out;
}

inline json polynomial_json(const polynomial& p) { return complex_list_json(p.coefficients()); }
inline polynomial polynomial_from_json(const json& j) { return polynomial(complex_list_from_json(j)); }

// ---------------------------------------------------------------------------
// Files

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw error(errc::parameter, path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw error(errc::io, "cannot write " + path);
  out << text;
  if (!out) throw error(errc::io, "write failed for " + path);
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Sequences and reports

inline json sequence_json(const sequence& seq) {
  json out{{"provenance", to_string(seq.origin)}, {"terms", complex_list_json(seq.terms)}};
  if (seq.formula_text) out["formula"] = *seq.formula_text;
  return out;
}

inline sequence sequence_from_json(const json& j) {
  if (!j.contains("terms")) throw error(errc::parameter, "sequence file: missing field 'terms'");
  const provenance origin =
      j.contains("provenance") ? provenance_from_string(j.at("provenance").get<std::string>()) : provenance::user_supplied;
  std::optional<std::string> text;
  if (j.contains("formula") && j.at("formula").is_string()) text = j.at("formula").get<std::string>();
  return make_sequence(complex_list_from_json(j.at("terms")), origin, text);
}

inline json generated_json(const generated_sequence& gen) {
  json out = sequence_json(gen.enumeration);
  json blocks = json::array();
  for (std::size_t b = 0; b < gen.num_blocks(); ++b)
    blocks.push_back({{"root", static_cast<double>(gen.blocks[b].root)},
                      {"start", gen.block_start[b]},
                      {"size", gen.blocks[b].values.size()}});
  out["generator"] = {{"M", gen.M}, {"blocks", blocks}};
  return out;
}

inline json condition_report_json(const condition_report& r) {
  return {{"condition", to_string(r.cond)},
          {"gap", r.gap_used},
          {"truncation", r.truncation},
          {"evidence", r.evidence},
          {"verdict", to_string(r.result)},
          {"thresholds", r.thresholds},
          {"checkpoints", r.checkpoints},
          {"checkpoint_values", r.checkpoint_values},
          {"note", r.note}};
}

inline json claims_json(const claims_report& r) {
  json violations = json::array();
  for (const auto& v : r.violations)
    violations.push_back({{"check", v.check}, {"block", v.block}, {"index", v.index}, {"value", v.value}, {"bound", v.bound}});
  return {{"ok", r.ok()},
          {"cross_ratios", r.cross_ratios},
          {"max_in_block_excess", r.max_in_block_excess},
          {"block_sums", r.block_sums},
          {"block_sum_bounds", r.block_sum_bounds},
          {"tail_sums", r.tail_sums},
          {"tail_bounds", r.tail_bounds},
          {"start_values", r.start_values},
          {"start_bounds", r.start_bounds},
          {"aux_values", r.aux_values},
          {"aux_bounds", r.aux_bounds},
          {"violations", violations}};
}

inline json i_lambda_json(const i_lambda_bounds_t& b) {
  return {{"lower", b.lower}, {"upper", b.upper}, {"method", b.method == bounds_method::structural ? "structural" : "empirical"}};
}

// ---------------------------------------------------------------------------
// Construction stages

inline json params_json(const construction_params& p) {
  json out{{"r0", p.r0}, {"theta0", p.theta0}, {"thetaT", p.thetaT}, {"R1", p.R1}, {"delta0", p.delta0},
           {"s1", p.s1}, {"k1", p.k1}, {"eps0", p.eps0}, {"c1", p.c1}, {"c2", p.c2}, {"c3", p.c3}, {"c4", p.c4}};
  if (p.m0) out["m0"] = *p.m0;
  return out;
}

inline json partition_json(const partition& part, bool with_thetas = true) {
  json out{{"m", part.m}, {"m1", part.m1}, {"sigma", part.sigma}, {"nu_m", part.nu_m}, {"block_len", part.block_len}};
  out["thetas"] = with_thetas ? json(part.thetas) : json::array();
  return out;
}

inline json arc_points_json(const std::vector<arc_point>& pts) {
  json out = json::array();
  for (const auto& p : pts)
    out.push_back({{"n", p.n}, {"k", p.k}, {"j", p.j}, {"w", complex_json(p.w)}, {"mu", complex_json(p.mu)}});
  return out;
}

inline json certificate_json(const disjointness_certificate& c) {
  return {{"m", c.m},
          {"min_gap", c.min_gap},
          {"witness", {c.witness[0], c.witness[1]}},
          {"verdict", c.pass ? "pass" : "fail"},
          {"disks", c.disks},
          {"radius", c.radius},
          {"min_distance", c.min_distance},
          {"method", to_string(c.method)},
          {"pairs_examined", c.pairs_examined},
          {"base_min_modulus", c.base_min_modulus},
          {"same_mu_min_distance", c.same_mu_min_distance},
          {"same_mu_bound", c.same_mu_bound},
          {"same_mu_min_theta_gap", c.same_mu_min_theta_gap},
          {"cross_mu_lower", c.cross_mu_lower},
          {"cross_mu_bound", c.cross_mu_bound}};
}

inline json fit_json(const fitted_polynomial& f) {
  json search = json::array();
  for (const auto& r : f.degree_search) search.push_back({{"degree", r.degree}, {"validation_error", r.validation_error}});
  return {{"degree", f.degree()},
          {"scale", f.scale},
          {"coefficients", complex_list_json(f.coefficients)},
          {"fit_error", f.fit_error},
          {"target_error", f.target_error},
          {"status", to_string(f.status)},
          {"strategy", to_string(f.strategy)},
          {"fit_points", f.fit_points},
          {"validation_points", f.validation_points},
          {"degree_search", search}};
}

inline fitted_polynomial fit_from_json(const json& j) {
  fitted_polynomial f;
  f.coefficients = complex_list_from_json(j.at("coefficients"));
  f.scale = j.at("scale").get<double>();
  f.fit_error = j.value("fit_error", 0.0);
  f.target_error = j.value("target_error", 0.0);
  f.status = j.value("status", std::string("met")) == "met" ? fit_status::met : fit_status::target_missed;
  return f;
}

inline json report_json(const verification_report& r) {
  json samples = json::array();
  for (const auto& s : r.samples)
    samples.push_back({{"theta", s.theta},
                       {"n", s.n},
                       {"margin", s.margin},
                       {"err", s.err},
                       {"term1", s.term1},
                       {"term2", s.term2},
                       {"pass", s.pass}});
  return {{"config_digest", r.config_digest},
          {"m", r.m},
          {"m0", r.m0},
          {"disks", r.disks},
          {"horizon", r.horizon},
          {"num_samples", r.num_samples},
          {"oracle_mode", r.oracle_mode},
          {"fit_status", r.fit_status},
          {"worst_error", r.worst_error},
          {"worst_term1", r.worst_term1},
          {"worst_term2", r.worst_term2},
          {"min_margin", r.min_margin},
          {"fit_slack", r.fit_slack},
          {"threshold", r.threshold},
          {"witnesses_within_horizon", r.witnesses_within_horizon},
          {"decomposition_holds", r.decomposition_holds},
          {"construction_failures", r.construction_failures},
          {"C_error", r.C_error},
          {"C_threshold", r.C_threshold},
          {"C_pass", r.C_pass},
          {"verdict", r.pass ? "pass" : "fail"},
          {"samples", samples}};
}

// ---------------------------------------------------------------------------
// CSV for plotting

inline std::string samples_csv(const verification_report& r) {
  std::ostringstream out;
  out.precision(17);
  out << "theta,n,margin,err,term1,term2,pass\n";
  for (const auto& s : r.samples)
    out << s.theta << ',' << s.n << ',' << s.margin << ',' << s.err << ',' << s.term1 << ',' << s.term2 << ','
        << (s.pass ? 1 : 0) << '\n';
  return out.str();
}

inline std::string disk_centers_csv(const disk_family& fam) {
  std::ostringstream out;
  out.precision(17);
  out << "index,n,j,re,im\n";
  out << "0,,," << 0.0 << ',' << 0.0 << '\n';
  for (std::size_t i = 0; i < fam.disks.size(); ++i) {
    const auto& d = fam.disks[i];
    out << i + 1 << ',' << d.n << ',' << d.j << ',' << d.center.real() << ',' << d.center.imag() << '\n';
  }
  return out.str();
}

}  // namespace hclab
