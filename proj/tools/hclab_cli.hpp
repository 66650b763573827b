#pragma once

// Command-line front end. Kept in a header so tests can drive run_cli.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hclab/hclab.hpp"

namespace hclab::cli {

enum exit_code : int { ok = 0, failure = 1, bad_parameter = 2, verdict_fail = 3 };

struct io_streams {
  std::ostream& out;
  std::ostream& err;
};

inline void emit(const std::string& path, const json& doc, std::ostream& out) {
  if (path.empty() || path == "-")
    out << doc.dump(2) << "\n";
  else
    write_json_file(path, doc);
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct config_overrides {
  std::string path;
  std::optional<std::size_t> m;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  bool oracle_mode = false;
};

inline run_config resolve(const config_overrides& o) {
  run_config cfg = load_config(o.path);
  if (o.m) cfg.policy = block_start_policy::fixed(*o.m);
  if (o.samples) cfg.num_samples = *o.samples;
  if (o.seed) cfg.seed = *o.seed;
  if (o.oracle_mode) cfg.experiment.oracle_mode = true;
  return cfg;
}

inline void add_config_options(CLI::App* cmd, config_overrides& o, bool sampling) {
  cmd->add_option("--config", o.path, "Run configuration (JSON)")->required();
  cmd->add_option("--m", o.m, "Block start m (overrides block_start)");
  if (sampling) {
    cmd->add_option("--samples", o.samples, "Number of sampled points a (default 1000)");
    cmd->add_option("--seed", o.seed, "Sampling seed (default 1)");
    cmd->add_flag("--oracle-mode", o.oracle_mode, "Verify the exact piecewise target instead of a fitted polynomial");
  }
}

/// Stages up to the disk certificate, without the approximation step.
struct geometry {
  std::shared_ptr<const sequence> seq;
  target_spec spec;
  gap_subsequence sub;
  partition part;
};

inline geometry build_geometry(const run_config& cfg) {
  geometry g;
  g.seq = detail::staged("sequences", [&] { return load_sequence(cfg); });
  g.spec = detail::staged("config", [&] { return make_target_spec(cfg); });
  g.sub = detail::staged("sequences", [&] {
    const std::size_t max_len = cfg.experiment.max_gap_terms == 0 ? g.seq->size() : cfg.experiment.max_gap_terms;
    return extract_gap_subsequence(g.seq, g.spec.params.c1, max_len);
  });
  g.part = detail::staged("partition", [&] {
    g.spec.params.m0 = compute_m0(g.sub, g.spec.params, g.sub.size());
    std::size_t m = *g.spec.params.m0;
    if (cfg.policy.k == block_start_policy::kind::fewest_points)
      m = smallest_partition_start(g.sub, g.spec.params, cfg.policy.window);
    else if (cfg.policy.k == block_start_policy::kind::fixed)
      m = cfg.policy.value;
    return build_partition(m, g.sub, g.spec.params);
  });
  return g;
}

inline int run_cli(int argc, const char* const* argv, io_streams io = {std::cout, std::cerr}) {
  CLI::App app{"hclab: partitions, disk families, polynomial approximants and verification certificates for "
               "common hypercyclic translations along a quarter arc. HCLAB_THREADS caps worker threads."};
  app.require_subcommand(1);

  // gen-seq
  double M = 0.0;
  std::size_t blocks = 6;
  std::string out_path, claims_path;
  auto* gen = app.add_subcommand("gen-seq", "Generate a block sequence with i(Lambda) = M");
  gen->add_option("--M", M, "Block ratio M > 1")->required();
  gen->add_option("--blocks", blocks, "Number of blocks (>= 2, default 6)");
  gen->add_option("--out", out_path, "Output sequence file (default stdout)");
  gen->add_option("--claims", claims_path, "Also write the structural claims and i(Lambda) bounds here");

  // check
  std::string in_path, formula_text, mode;
  std::size_t terms = 100000;
  double gap = 10.0;
  std::optional<std::size_t> truncation;
  std::optional<double> threshold;
  bool analytic = false;
  auto* check = app.add_subcommand("check", "Check condition (C), condition (Sigma) or the liminf-ratio criterion");
  auto* in_opt = check->add_option("--in", in_path, "Sequence file");
  auto* f_opt = check->add_option("--formula", formula_text, "Sequence formula in n, e.g. n^2 or 3*2^n");
  in_opt->excludes(f_opt);
  check->add_option("--terms", terms, "Terms generated from --formula (default 100000)");
  check->add_option("--mode", mode, "C | sigma | liminf")->required()->check(CLI::IsMember({"C", "sigma", "liminf"}));
  check->add_option("--gap", gap, "Gap for the subsequence (default 10)");
  check->add_option("--truncation", truncation, "Prefix length examined (default: whole sequence)");
  check->add_option("--threshold", threshold, "C: growth threshold (default 5); sigma: sum threshold (default 0)");
  check->add_flag("--analytic", analytic, "Allow analytic-pass from formula metadata");
  check->add_option("--out", out_path, "Output report (default stdout)");

  // construction stages
  config_overrides ov;
  std::string arc_path, plot_dir, method_name = "automatic", out_dir;
  auto* part_cmd = app.add_subcommand("partition", "Build the arc partition");
  add_config_options(part_cmd, ov, false);
  part_cmd->add_option("--out", out_path, "Partition JSON (default stdout)");
  part_cmd->add_option("--arc-points", arc_path, "Also write the arc points here");

  auto* disks_cmd = app.add_subcommand("disks", "Build the disk family and certify disjointness");
  add_config_options(disks_cmd, ov, false);
  disks_cmd->add_option("--out", out_path, "Certificate JSON (default stdout)");
  disks_cmd->add_option("--method", method_name, "automatic | exhaustive | grid")
      ->check(CLI::IsMember({"automatic", "exhaustive", "grid"}));
  disks_cmd->add_option("--emit-plot-data", plot_dir, "Directory for disk-centre CSV");

  auto* construct_cmd = app.add_subcommand("construct", "Fit the polynomial approximant");
  add_config_options(construct_cmd, ov, false);
  construct_cmd->add_option("--out", out_path, "Fit JSON (default stdout)");

  auto* verify_cmd = app.add_subcommand("verify", "Verify sampled points of the arc");
  add_config_options(verify_cmd, ov, true);
  verify_cmd->add_option("--out", out_path, "Report JSON (default stdout)");
  verify_cmd->add_option("--emit-plot-data", plot_dir, "Directory for sample and disk-centre CSV");

  auto* pipe_cmd = app.add_subcommand("pipeline", "All stages; writes every artifact to the output directory");
  add_config_options(pipe_cmd, ov, true);
  pipe_cmd->add_option("--out-dir", out_dir, "Output directory (default: output.dir of the config)");
  pipe_cmd->add_option("--emit-plot-data", plot_dir, "Directory for sample and disk-centre CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, io.out, io.err);
    return code == 0 ? ok : bad_parameter;
  }

  try {
    if (gen->parsed()) {
      const auto g = generate_gap_block_sequence(M, blocks);
      emit(out_path, generated_json(g), io.out);
      if (!claims_path.empty()) {
        json doc{{"claims", claims_json(verify_claims(g))}};
        if (g.num_blocks() >= 3) doc["i_lambda"] = i_lambda_json(i_lambda_bounds(g));
        write_json_file(claims_path, doc);
      }
      return ok;
    }

    if (check->parsed()) {
      if (in_path.empty() && formula_text.empty()) throw error(errc::parameter, "check needs --in or --formula");
      const sequence seq = in_path.empty() ? sequence_from_formula(formula_text, terms)
                                           : sequence_from_json(read_json_file(in_path));
      const std::size_t trunc = truncation.value_or(seq.size());
      condition_report rep;
      if (mode == "C") {
        rep = check_condition_C(seq, gap, trunc, threshold.value_or(5.0), analytic);
      } else if (mode == "sigma") {
        sigma_options opt;
        opt.sum_threshold = threshold.value_or(0.0);
        opt.allow_analytic = analytic;
        rep = check_condition_Sigma(seq, gap, trunc, opt);
      } else {
        rep = check_liminf_ratio(seq, trunc);
      }
      emit(out_path, condition_report_json(rep), io.out);
      return ok;
    }

    const run_config cfg = resolve(ov);
    const std::string digest = config_digest(cfg);

    if (part_cmd->parsed()) {
      const auto g = build_geometry(cfg);
      json doc = partition_json(g.part);
      doc["params"] = params_json(g.spec.params);
      doc["config_digest"] = digest;
      emit(out_path, doc, io.out);
      if (!arc_path.empty()) write_json_file(arc_path, arc_points_json(arc_points(g.part, g.sub, g.spec.params)));
      return ok;
    }

    if (disks_cmd->parsed()) {
      const auto g = build_geometry(cfg);
      const auto fam = detail::staged("disks", [&] { return build_disks(g.part, g.spec.params); });
      const disjoint_method method = method_name == "exhaustive" ? disjoint_method::exhaustive
                                     : method_name == "grid"     ? disjoint_method::grid
                                                                 : disjoint_method::automatic;
      const auto cert = check_disjoint(fam, method);
      json doc = certificate_json(cert);
      doc["config_digest"] = digest;
      emit(out_path, doc, io.out);
      if (!plot_dir.empty()) {
        std::filesystem::create_directories(plot_dir);
        write_text_file((std::filesystem::path(plot_dir) / "disk_centers.csv").string(), disk_centers_csv(fam));
      }
      return cert.pass ? ok : verdict_fail;
    }

    auto seq = detail::staged("sequences", [&] { return load_sequence(cfg); });
    const target_spec spec = detail::staged("config", [&] { return make_target_spec(cfg); });
    experiment_options opt = cfg.experiment;
    opt.config_digest = digest;

    if (construct_cmd->parsed()) {
      opt.oracle_mode = false;
      const auto ctx = build_construction(seq, spec, cfg.policy, opt);
      json doc = fit_json(*ctx.fit);
      doc["config_digest"] = digest;
      emit(out_path, doc, io.out);
      return ok;
    }

    const auto ctx = build_construction(seq, spec, cfg.policy, opt);
    const auto rep = verify_construction(ctx, cfg.num_samples, cfg.seed, digest);
    json report = report_json(rep);
    report["timestamp"] = utc_timestamp();
    const bool passed = rep.pass && rep.C_pass;

    if (!plot_dir.empty()) {
      std::filesystem::create_directories(plot_dir);
      write_text_file((std::filesystem::path(plot_dir) / "samples.csv").string(), samples_csv(rep));
      write_text_file((std::filesystem::path(plot_dir) / "disk_centers.csv").string(), disk_centers_csv(*ctx.family));
    }

    if (verify_cmd->parsed()) {
      emit(out_path, report, io.out);
      return passed ? ok : verdict_fail;
    }

    // pipeline
    const std::filesystem::path dir = out_dir.empty() ? cfg.output_dir : out_dir;
    std::filesystem::create_directories(dir);
    json part_doc = partition_json(ctx.part);
    part_doc["params"] = params_json(ctx.params);
    write_json_file((dir / "partition.json").string(), part_doc);
    write_json_file((dir / "certificate.json").string(), certificate_json(ctx.certificate));
    if (ctx.fit) write_json_file((dir / "fit.json").string(), fit_json(*ctx.fit));
    write_json_file((dir / "report.json").string(), report);
    io.out << "verdict " << (passed ? "pass" : "fail") << "  m=" << rep.m << "  disks=" << rep.disks
           << "  worst_error=" << rep.worst_error << "  threshold=" << rep.threshold << "  digest=" << digest
           << "\n";
    return passed ? ok : verdict_fail;
  } catch (const error& e) {
    io.err << "hclab: " << e.what() << "\n";
    return (e.code() == errc::parameter || e.code() == errc::precondition) ? bad_parameter : failure;
  } catch (const json::exception& e) {
    io.err << "hclab: malformed JSON: " << e.what() << "\n";
    return bad_parameter;
  } catch (const std::exception& e) {
    io.err << "hclab: " << e.what() << "\n";
    return failure;
  }
}

}  // namespace hclab::cli
