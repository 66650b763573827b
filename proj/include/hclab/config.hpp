#pragma once

// Run configuration: parsing, defaults, validation and the config digest.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hclab/approx.hpp"
#include "hclab/error.hpp"
#include "hclab/io.hpp"
#include "hclab/sequences.hpp"
#include "hclab/verify.hpp"

namespace hclab {

struct run_config {
  enum class source_kind { formula, file, generator };
  source_kind source = source_kind::formula;
  std::string formula_text;
  std::size_t terms = 100000;
  std::string file;
  double M = 4.0;
  std::size_t blocks = 6;

  double r0 = 1.0, theta0 = 0.0, thetaT = 0.25, R1 = 1.0;
  std::optional<double> delta0;  // empty = auto
  int s1 = 1, k1 = 1;
  double eps0 = 1.0;

  polynomial g, p;
  std::vector<cplx> C_samples;  // empty = default sample of |z| <= R1

  block_start_policy policy;
  experiment_options experiment;
  std::size_t num_samples = 1000;
  std::uint64_t seed = 1;

  std::string output_dir = ".";
};

namespace detail {

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw error(errc::parameter, "missing config field '" + path + key + "'");
  return obj.at(key);
}

template <typename T>
T number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) throw error(errc::parameter, "config field '" + path + key + "' must be a number");
  return v.get<T>();
}

template <typename T>
T number_or(const json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return number<T>(obj, key, path);
}

inline polynomial polynomial_field(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (v.is_object() && v.contains("index")) return dense_polynomial(v.at("index").get<std::uint64_t>());
  try {
    return polynomial_from_json(v);
  } catch (const error& e) {
    throw error(errc::parameter, "config field '" + path + key + "': " + e.detail());
  }
}

}  // namespace detail

/// Parses a config document. Relative sequence file paths are resolved
/// against `base_dir`.
inline run_config parse_config(const json& doc, const std::string& base_dir = ".") {
  using detail::number;
  using detail::number_or;
  using detail::require;
  run_config cfg;

  const json& seq = require(doc, "sequence", "");
  if (seq.contains("formula")) {
    cfg.source = run_config::source_kind::formula;
    cfg.formula_text = seq.at("formula").get<std::string>();
    cfg.terms = number_or<std::size_t>(seq, "terms", "sequence.", cfg.terms);
  } else if (seq.contains("file")) {
    cfg.source = run_config::source_kind::file;
    std::filesystem::path f = seq.at("file").get<std::string>();
    if (f.is_relative()) f = std::filesystem::path(base_dir) / f;
    cfg.file = f.string();
  } else if (seq.contains("generator")) {
    cfg.source = run_config::source_kind::generator;
    const json& gen = seq.at("generator");
    cfg.M = number<double>(gen, "M", "sequence.generator.");
    cfg.blocks = number<std::size_t>(gen, "blocks", "sequence.generator.");
  } else {
    throw error(errc::parameter, "missing config field 'sequence.formula' (or 'sequence.file' / 'sequence.generator')");
  }

  const json& c = require(doc, "construction", "");
  const std::string cp = "construction.";
  cfg.r0 = number<double>(c, "r0", cp);
  cfg.theta0 = number<double>(c, "theta0", cp);
  cfg.thetaT = number<double>(c, "thetaT", cp);
  cfg.R1 = number<double>(c, "R1", cp);
  cfg.s1 = number<int>(c, "s1", cp);
  cfg.k1 = number<int>(c, "k1", cp);
  cfg.eps0 = number<double>(c, "eps0", cp);
  if (c.contains("delta0")) {
    const json& d = c.at("delta0");
    if (d.is_string()) {
      if (d.get<std::string>() != "auto") throw error(errc::parameter, "construction.delta0 must be a number or \"auto\"");
    } else {
      cfg.delta0 = number<double>(c, "delta0", cp);
    }
  }

  const json& t = require(doc, "target", "");
  cfg.g = detail::polynomial_field(t, "g", "target.");
  cfg.p = detail::polynomial_field(t, "p", "target.");
  if (t.contains("C_samples")) cfg.C_samples = complex_list_from_json(t.at("C_samples"));

  if (doc.contains("block_start")) {
    const json& b = doc.at("block_start");
    if (b.is_string() && b.get<std::string>() == "m0") {
      cfg.policy = {};
    } else if (b.is_string() && b.get<std::string>() == "min-disks") {
      cfg.policy = block_start_policy::fewest(number_or<std::size_t>(doc, "block_start_window", "", 64));
    } else if (b.is_number_unsigned()) {
      cfg.policy = block_start_policy::fixed(b.get<std::size_t>());
    } else {
      throw error(errc::parameter, "block_start must be \"m0\", \"min-disks\" or a positive integer");
    }
  }

  if (doc.contains("fit")) {
    const json& f = doc.at("fit");
    auto& e = cfg.experiment;
    e.degree_cap = number_or<std::size_t>(f, "degree_cap", "fit.", e.degree_cap);
    if (f.contains("strategy")) e.fit.strategy = fit_strategy_from_string(f.at("strategy").get<std::string>());
    e.fit.jet_order = number_or<std::size_t>(f, "jet_order", "fit.", e.fit.jet_order);
    e.plan.ring_points = number_or<std::size_t>(f, "ring_points", "fit.", e.plan.ring_points);
    e.plan.rings = number_or<std::size_t>(f, "rings", "fit.", e.plan.rings);
    if (f.contains("include_center")) e.plan.include_center = f.at("include_center").get<bool>();
    e.plan.validation_factor = number_or<std::size_t>(f, "validation_factor", "fit.", e.plan.validation_factor);
    e.plan.max_fit_disks = number_or<std::size_t>(f, "max_fit_disks", "fit.", e.plan.max_fit_disks);
    e.max_gap_terms = number_or<std::size_t>(f, "max_gap_terms", "fit.", e.max_gap_terms);
  }

  if (doc.contains("verification")) {
    const json& v = doc.at("verification");
    cfg.num_samples = number_or<std::size_t>(v, "num_samples", "verification.", cfg.num_samples);
    cfg.seed = number_or<std::uint64_t>(v, "seed", "verification.", cfg.seed);
    if (v.contains("oracle_mode")) cfg.experiment.oracle_mode = v.at("oracle_mode").get<bool>();
  }

  if (doc.contains("output") && doc.at("output").contains("dir")) cfg.output_dir = doc.at("output").at("dir").get<std::string>();

  if (cfg.terms < 2) throw error(errc::parameter, "sequence.terms must be at least 2");
  if (cfg.s1 < 1 || cfg.k1 < 1) throw error(errc::parameter, "s1 and k1 must be positive integers");
  cfg.experiment.plan.validate();
  return cfg;
}

inline run_config load_config(const std::string& path) {
  return parse_config(read_json_file(path), std::filesystem::path(path).parent_path().string());
}

/// Canonical form of everything that affects results (output paths excluded).
inline json normalized_config(const run_config& cfg) {
  json seq;
  switch (cfg.source) {
    case run_config::source_kind::formula: seq = {{"formula", cfg.formula_text}, {"terms", cfg.terms}}; break;
    case run_config::source_kind::file: seq = {{"file", cfg.file}}; break;
    case run_config::source_kind::generator: seq = {{"generator", {{"M", cfg.M}, {"blocks", cfg.blocks}}}}; break;
  }
  json construction{{"r0", cfg.r0}, {"theta0", cfg.theta0}, {"thetaT", cfg.thetaT}, {"R1", cfg.R1},
                    {"s1", cfg.s1}, {"k1", cfg.k1}, {"eps0", cfg.eps0}};
  construction["delta0"] = cfg.delta0 ? json(*cfg.delta0) : json("auto");
  json block;
  switch (cfg.policy.k) {
    case block_start_policy::kind::first_admissible: block = "m0"; break;
    case block_start_policy::kind::fewest_points: block = {{"min-disks", cfg.policy.window}}; break;
    case block_start_policy::kind::fixed: block = cfg.policy.value; break;
  }
  const auto& e = cfg.experiment;
  return {{"sequence", seq},
          {"construction", construction},
          {"target", {{"g", polynomial_json(cfg.g)}, {"p", polynomial_json(cfg.p)}, {"C_samples", complex_list_json(cfg.C_samples)}}},
          {"block_start", block},
          {"fit",
           {{"degree_cap", e.degree_cap},
            {"strategy", to_string(e.fit.strategy)},
            {"jet_order", e.fit.jet_order},
            {"ring_points", e.plan.ring_points},
            {"rings", e.plan.rings},
            {"include_center", e.plan.include_center},
            {"validation_factor", e.plan.validation_factor},
            {"max_fit_disks", e.plan.max_fit_disks},
            {"max_gap_terms", e.max_gap_terms}}},
          {"verification", {{"num_samples", cfg.num_samples}, {"seed", cfg.seed}, {"oracle_mode", e.oracle_mode}}}};
}

/// FNV-1a (64 bit) of the normalized config, as 16 hex digits.
inline std::string config_digest(const run_config& cfg) {
  const std::string text = normalized_config(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::shared_ptr<const sequence> load_sequence(const run_config& cfg) {
  switch (cfg.source) {
    case run_config::source_kind::formula:
      return std::make_shared<const sequence>(sequence_from_formula(cfg.formula_text, cfg.terms));
    case run_config::source_kind::file:
      return std::make_shared<const sequence>(sequence_from_json(read_json_file(cfg.file)));
    case run_config::source_kind::generator:
      return std::make_shared<const sequence>(generate_gap_block_sequence(cfg.M, cfg.blocks).enumeration);
  }
  throw error(errc::internal_inconsistency, "unknown sequence source");
}

/// Derived constants and target; delta0 "auto" goes through choose_delta0.
inline target_spec make_target_spec(const run_config& cfg) {
  const double delta0 = cfg.delta0 ? *cfg.delta0 : choose_delta0(cfg.p, cfg.R1, cfg.s1);
  target_spec spec;
  spec.params = derive_constants(cfg.r0, cfg.theta0, cfg.thetaT, cfg.R1, delta0, cfg.s1, cfg.k1, cfg.eps0);
  spec.g = cfg.g;
  spec.p = cfg.p;
  spec.C_samples = cfg.C_samples.empty() ? default_C_samples(cfg.R1) : cfg.C_samples;
  spec.validate();
  return spec;
}

}  // namespace hclab
