#include "catch_amalgamated.hpp"

#include <filesystem>
#include <sstream>
#include <unistd.h>

#include "hclab_cli.hpp"
#include "test_support.hpp"

using namespace hclab;
namespace fs = std::filesystem;

namespace {

struct result {
  int code;
  std::string out;
  std::string err;
};

result run(std::vector<std::string> args) {
  args.insert(args.begin(), "hclab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), {out, err});
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("hclab_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string small_config() { return testing::config_path("small.json"); }

json without_timestamp(json doc) {
  doc.erase("timestamp");
  return doc;
}

}  // namespace

TEST_CASE("gen-seq writes the block enumeration") {
  const auto path = (scratch() / "seq.json").string();
  REQUIRE(run({"gen-seq", "--M", "4", "--blocks", "6", "--out", path}).code == 0);
  const auto seq = sequence_from_json(read_json_file(path));
  const std::vector<double> head{1, 4, 9, 16, 25, 100};
  for (std::size_t i = 0; i < head.size(); ++i) CHECK(seq.terms[i] == cplx(head[i]));
  CHECK(seq.origin == provenance::generated);
}

TEST_CASE("gen-seq parameter errors") {
  CHECK(run({"gen-seq", "--M", "0.5"}).code == 2);
  CHECK(run({"gen-seq", "--M", "4", "--blocks", "1"}).code == 2);
  CHECK(run({"gen-seq"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("gen-seq claims file") {
  const auto claims = (scratch() / "claims.json").string();
  REQUIRE(run({"gen-seq", "--M", "2", "--blocks", "7", "--claims", claims}).code == 0);
  const auto doc = read_json_file(claims);
  CHECK(doc.at("claims").at("ok").get<bool>());
  CHECK(doc.at("i_lambda").at("lower").get<double>() == Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("check subcommand") {
  const auto path = (scratch() / "seq4.json").string();
  REQUIRE(run({"gen-seq", "--M", "4", "--blocks", "6", "--out", path}).code == 0);

  auto r = run({"check", "--in", path, "--mode", "sigma", "--gap", "10"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("verdict") == "fails-proxy");

  r = run({"check", "--formula", "n^2", "--mode", "C", "--gap", "50"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("verdict") == "passes-proxy");

  r = run({"check", "--formula", "3^n", "--terms", "40", "--mode", "liminf"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("verdict") == "provably-fails");

  r = run({"check", "--formula", "n", "--terms", "1000", "--mode", "sigma", "--analytic"});
  CHECK(json::parse(r.out).at("verdict") == "analytic-pass");

  CHECK(run({"check", "--formula", "n^2", "--in", path, "--mode", "C"}).code == 2);
  CHECK(run({"check", "--formula", "n^2", "--mode", "X"}).code == 2);
  CHECK(run({"check", "--formula", "n^", "--mode", "C"}).code == 2);
  CHECK(run({"check", "--in", (scratch() / "missing.json").string(), "--mode", "C"}).code == 1);
}

TEST_CASE("partition and disks subcommands") {
  auto r = run({"partition", "--config", small_config()});
  REQUIRE(r.code == 0);
  const auto part = json::parse(r.out);
  CHECK(part.at("m") == 19);
  CHECK(part.at("params").at("m0") == 4);

  r = run({"partition", "--config", small_config(), "--m", "2"});
  CHECK(r.code == 2);
  CHECK(r.err.find("m0") != std::string::npos);

  r = run({"disks", "--config", small_config(), "--method", "grid", "--m", "4"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("verdict") == "pass");
  CHECK(json::parse(r.out).at("method") == "grid");
}

TEST_CASE("pipeline on the small config") {
  const auto dir = scratch() / "pipe";
  const auto r = run({"pipeline", "--config", small_config(), "--out-dir", dir.string(), "--samples", "200"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("verdict pass", 0) == 0);
  for (const char* f : {"partition.json", "certificate.json", "fit.json", "report.json"}) CHECK(fs::exists(dir / f));
  const auto report = read_json_file((dir / "report.json").string());
  CHECK(report.at("verdict") == "pass");
  CHECK(report.at("samples").size() == 200);
  CHECK(report.contains("config_digest"));
  CHECK(report.contains("timestamp"));
}

TEST_CASE("oracle mode report") {
  const auto r = run({"verify", "--config", small_config(), "--oracle-mode", "--samples", "100"});
  REQUIRE(r.code == 0);
  const auto report = json::parse(r.out);
  CHECK(report.at("oracle_mode") == true);
  CHECK(report.at("fit_slack") == 0.0);
  CHECK(report.at("fit_status") == "oracle");
}

TEST_CASE("verify reports are reproducible apart from the timestamp") {
  const auto a = run({"verify", "--config", small_config(), "--samples", "150", "--seed", "4"});
  const auto b = run({"verify", "--config", small_config(), "--samples", "150", "--seed", "4"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(without_timestamp(json::parse(a.out)).dump() == without_timestamp(json::parse(b.out)).dump());
}

TEST_CASE("plot data") {
  const auto dir = scratch() / "plots";
  REQUIRE(run({"verify", "--config", small_config(), "--samples", "20", "--emit-plot-data", dir.string()}).code == 0);
  CHECK(fs::exists(dir / "samples.csv"));
  CHECK(fs::exists(dir / "disk_centers.csv"));
}

TEST_CASE("missing config field exits 2 with the field name") {
  json doc = read_json_file(small_config());
  doc["construction"].erase("r0");
  const auto path = (scratch() / "broken.json").string();
  write_json_file(path, doc);
  const auto r = run({"partition", "--config", path});
  CHECK(r.code == 2);
  CHECK(r.err.find("construction.r0") != std::string::npos);

  doc = read_json_file(small_config());
  doc.erase("target");
  write_json_file(path, doc);
  CHECK(run({"pipeline", "--config", path}).err.find("'target'") != std::string::npos);

  write_text_file(path, "{ not json");
  CHECK(run({"verify", "--config", path}).code == 2);
}

TEST_CASE("config digest") {
  const auto a = load_config(small_config());
  auto b = a;
  CHECK(config_digest(a) == config_digest(b));
  CHECK(config_digest(a).size() == 16);
  b.output_dir = "elsewhere";
  CHECK(config_digest(a) == config_digest(b));
  b.seed += 1;
  CHECK(config_digest(a) != config_digest(b));

  json doc = read_json_file(small_config());
  doc["construction"]["delta0"] = "sometimes";
  CHECK_THROWS_AS(parse_config(doc), error);
}

TEST_CASE("config accepts an enumerated target polynomial") {
  json doc = read_json_file(small_config());
  doc["target"]["p"] = {{"index", 4}};
  const auto cfg = parse_config(doc);
  CHECK(cfg.p.coefficients() == std::vector<cplx>{cplx(0.0), cplx(1.0)});
}
