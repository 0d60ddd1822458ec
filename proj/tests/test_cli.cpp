#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aisets/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const char* root = std::getenv("AISETS_TEST_TMP");
  fs::path dir = fs::path(root ? root : fs::temp_directory_path().string()) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path path = dir / "config.json";
  std::ofstream(path) << text;
  return path;
}

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = aisets::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Run run_subcommand(const std::string& sub, const fs::path& dir, const std::string& config,
                   std::vector<std::string> extra = {}) {
  const fs::path cfg = write_config(dir, config);
  std::vector<std::string> args{sub, "--config", cfg.string(), "--out", (dir / "out").string()};
  args.insert(args.end(), extra.begin(), extra.end());
  return run(args);
}

void check_stamped(const fs::path& out_dir) {
  REQUIRE(fs::exists(out_dir));
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    ++files;
    const std::string text = slurp(entry.path());
    if (entry.path().extension() == ".csv") {
      CHECK(text.rfind("# config_hash=", 0) == 0);
      CHECK(text.find(" seed=") != std::string::npos);
    } else {
      const json doc = json::parse(text);
      CHECK(doc.contains("config_hash"));
      CHECK(doc.contains("seed"));
    }
  }
  CHECK(files > 0);
}

}  // namespace

TEST_CASE("toy prints the per-channel image counts") {
  const fs::path dir = scratch("toy");
  const Run r = run_subcommand("toy", dir, R"({"codebook": [[0,2],[1,1],[2,0]], "channels": [1, 2]})");
  CHECK(r.code == 0);
  CHECK(r.out.find("image counts {1,3}") != std::string::npos);
  CHECK(r.out.find("G=1: 1 images") != std::string::npos);
  CHECK(r.out.find("G=2: 3 images") != std::string::npos);
  check_stamped(dir / "out");
  const json doc = json::parse(slurp(dir / "out" / "toy.json"));
  CHECK(doc.at("report").at("image_counts") == json::array({1, 3}));
}

TEST_CASE("bound-check on the default grid") {
  const fs::path dir = scratch("bound_default");
  const Run r = run_subcommand("bound-check", dir, "{}", {"--threads", "4"});
  CHECK(r.code == 0);
  check_stamped(dir / "out");
  const std::string csv = slurp(dir / "out" / "bound_grid.csv");
  std::size_t rows = 0;
  for (char c : csv) rows += c == '\n';
  CHECK(rows == 2 + 27);  // stamp, header, 3 powers x 3 lengths x 3 families
  CHECK(r.out.find("0 violations") != std::string::npos);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  const std::string config =
      R"({"powers": [100, 1000, 10000], "lengths": [1, 2], "codebook": {"size": 6}, "samples": 300})";
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  REQUIRE(run_subcommand("bound-check", a, config, {"--threads", "1"}).code == 0);
  REQUIRE(run_subcommand("bound-check", b, config, {"--threads", "3"}).code == 0);
  for (const char* name : {"bound_grid.csv", "bound_report.json"}) {
    CHECK(slurp(a / "out" / name) == slurp(b / "out" / name));
  }
  const fs::path c = scratch("det_c");
  REQUIRE(run_subcommand("bound-check", c, config, {"--seed", "99"}).code == 0);
  CHECK(slurp(a / "out" / "bound_grid.csv") != slurp(c / "out" / "bound_grid.csv"));
  CHECK(slurp(c / "out" / "bound_grid.csv").find("seed=99") != std::string::npos);
}

TEST_CASE("malformed and schema-invalid configs are usage errors with no output") {
  const fs::path dir = scratch("malformed");
  Run r = run_subcommand("toy", dir, R"({"codebook": [[0,2],)");
  CHECK(r.code == aisets::cli::kExitUsage);
  CHECK_FALSE(fs::exists(dir / "out"));

  r = run_subcommand("bound-check", dir, R"({"powerz": [100]})");
  CHECK(r.code == aisets::cli::kExitUsage);
  CHECK_FALSE(fs::exists(dir / "out"));

  r = run_subcommand("bound-check", dir, R"({"densities": [{"family": "compound", "atoms": [0.5, 1.5]}]})");
  CHECK(r.code == aisets::cli::kExitUsage);
  CHECK(r.err.find("degenerate density") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));

  r = run({"toy", "--out", (dir / "out").string()});
  CHECK(r.code == aisets::cli::kExitUsage);
  r = run({"no-such-command", "--config", "x.json"});
  CHECK(r.code == aisets::cli::kExitUsage);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("canonical-reduce") {
  const fs::path dir = scratch("canonical");
  Run r = run_subcommand("canonical-reduce", dir,
                         R"({"channel": {"M": 2, "power": 1, "coefficients": [[[1, 1], [1, 2]]]}})");
  CHECK(r.code == 0);
  check_stamped(dir / "out");
  const json doc = json::parse(slurp(dir / "out" / "canonical.json"));
  CHECK(doc.at("canonical_power").get<double>() == doctest::Approx(24.0));
  CHECK(doc.at("power").get<double>() == doctest::Approx(1.0));

  const fs::path bad = scratch("canonical_bad");
  r = run_subcommand("canonical-reduce", bad,
                     R"({"channel": {"M": 2, "coefficients": [[[1, 0], [0, 1]]]}})");
  CHECK(r.code == aisets::cli::kExitUsage);
  CHECK(r.err.find("bound violation") != std::string::npos);

  const fs::path random = scratch("canonical_random");
  CHECK(run_subcommand("canonical-reduce", random, R"({"channel": {"M": 3, "length": 50}})").code == 0);
}

TEST_CASE("enumerate-sets on the anti-diagonal codebook") {
  const fs::path dir = scratch("enumerate");
  const Run r = run_subcommand(
      "enumerate-sets", dir,
      R"({"codebook": {"K": 2, "n": 1, "P": 9, "rows": [[0],[1],[2]], "mapping": [[2],[1],[0]]},
          "realization": [1.0]})");
  CHECK(r.code == 0);
  check_stamped(dir / "out");
  const json doc = json::parse(slurp(dir / "out" / "sets.json"));
  REQUIRE(doc.at("sets").size() == 1);
  CHECK(doc.at("sets")[0].at("members") == json::array({0, 1, 2}));
  const std::string csv = slurp(dir / "out" / "outputs.csv");
  CHECK(csv.find("msg,t,k,value") != std::string::npos);

  const fs::path sampled = scratch("enumerate_sampled");
  CHECK(run_subcommand("enumerate-sets", sampled,
                       R"({"codebook": {"P": 100, "rows": [[0,1],[3,4],[5,9]], "mapping": [[1,1],[0,0],[2,2]]},
                           "density": {"family": "uniform", "lo": 0.5, "hi": 1.5}})")
            .code == 0);
}

TEST_CASE("entropy-grid writes ledgers and the assembly") {
  const fs::path dir = scratch("entropy");
  const Run r = run_subcommand("entropy-grid", dir,
                               R"({"powers": [100, 1000, 10000], "lengths": [1], "codebook": {"size": 5}})");
  CHECK(r.code == 0);
  check_stamped(dir / "out");
  const std::string csv = slurp(dir / "out" / "entropy_grid.csv");
  CHECK(csv.find("P,n,alpha,H1,H2,diff,normalized_diff,theorem_value,exact") != std::string::npos);
  const json doc = json::parse(slurp(dir / "out" / "ledgers.json"));
  CHECK(doc.at("ledgers").size() == 3);
  CHECK(doc.at("assembly").is_object());
}

TEST_CASE("scheme subcommands") {
  const fs::path zf = scratch("zf");
  Run r = run_subcommand("scheme-zf", zf,
                         R"({"alphas": [0.5], "powers": {"lo_decade": 4, "hi_decade": 10, "step": 1}, "trials": 200})");
  CHECK(r.code == 0);
  check_stamped(zf / "out");
  CHECK(slurp(zf / "out" / "scheme_zf.csv").find("scheme,alpha,P,B,R1,R2,sum,residual_power") !=
        std::string::npos);

  const fs::path bia = scratch("bia");
  r = run_subcommand("scheme-bia", bia, R"({"powers": {"lo_decade": 4, "hi_decade": 10, "step": 2}, "trials": 200})");
  CHECK(r.code == 0);
  const json doc = json::parse(slurp(bia / "out" / "scheme_bia_summary.json"));
  CHECK(doc.at("compound_demo").at("rejected") == true);
}

TEST_CASE("thread count from the environment") {
  const fs::path dir = scratch("threads_env");
  ::setenv("AISETS_THREADS", "2", 1);
  CHECK(run_subcommand("toy", dir, "{}").code == 0);
  ::setenv("AISETS_THREADS", "many", 1);
  CHECK(run_subcommand("toy", scratch("threads_bad"), "{}").code == aisets::cli::kExitUsage);
  ::unsetenv("AISETS_THREADS");
}
