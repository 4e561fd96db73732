#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "jumpom/experiment.hpp"
#include "jumpom/io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "jumpom_test_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(JUMPOM_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const json& j) {
  fs::create_directories(kRoot);
  const fs::path p = kRoot / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

json finite_model(const std::string& drift, double sigma, const json& rate, double radius) {
  return {{"kind", "finite"}, {"drift", drift}, {"sigma", sigma}, {"rate", rate},
          {"jump", {{"family", "bump"}, {"radius", radius}}}};
}

std::string slurp(const fs::path& p) { return jumpom::io::read_text(p); }

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run("--help") == 0);
  CHECK(run("") != 0);
  CHECK(run("validate --config " + (kRoot / "missing.json").string()) == 2);

  fs::create_directories(kRoot);
  std::ofstream(kRoot / "broken.json") << "{ \"model\": ";
  CHECK(run("validate --config " + (kRoot / "broken.json").string()) == 2);

  const json good = {{"model", finite_model("-x", 0.7, "1 + 0.5*sin(x)", 0.8)}, {"experiment", {{"type", "validate"}}}};
  const fs::path g = write_config("good.json", good);
  CHECK(run("validate --config " + g.string() + " --out " + (kRoot / "good").string()) == 0);
  CHECK(fs::exists(kRoot / "good" / "validation.json"));
  CHECK(fs::exists(kRoot / "good" / "manifest.json"));
  CHECK(run("om-eval --config " + g.string()) == 2);  // subcommand and experiment type disagree

  json bad = good;
  bad["model"]["rate"] = "sin(x)";
  const fs::path b = write_config("bad_rate.json", bad);
  CHECK(run("validate --config " + b.string() + " --out " + (kRoot / "bad").string()) == 2);
  const json report = json::parse(slurp(kRoot / "bad" / "validation.json"));
  CHECK(report["passed"] == false);

  json unknown = good;
  unknown["experiment"]["type"] = "teleport";
  CHECK(run("run --config " + write_config("unknown.json", unknown).string()) == 2);
}

TEST_CASE("map subcommand reproduces the OU minimizer and reports non-convergence") {
  json cfg = {{"model", finite_model("-x", 0.6, 0, 0.5)},
              {"experiment",
               {{"type", "map"}, {"x0", -1.0}, {"xT", 1.0}, {"T", 2.0}, {"n_knots", 200},
                {"optimizer", {{"grad_tol", 1e-8}}}}}};
  cfg["model"]["allow_zero_rate"] = true;
  const fs::path out = kRoot / "map";
  REQUIRE(run("map --config " + write_config("map.json", cfg).string() + " --out " + out.string()) == 0);
  const auto path = jumpom::io::read_path_csv(out / "map_path.csv");
  double err = 0.0;
  for (std::size_t i = 0; i < path.t.size(); ++i) {
    const double t = path.t[i];
    const double exact = (-std::sinh(2.0 - t) + std::sinh(t)) / std::sinh(2.0);
    err = std::max(err, std::fabs(path.x(static_cast<Eigen::Index>(i), 0) - exact));
  }
  CHECK(err < 1e-3);

  cfg["experiment"]["optimizer"]["max_iters"] = 1;
  CHECK(run("map --config " + write_config("map_short.json", cfg).string() + " --out " + (kRoot / "map_short").string()) ==
        3);
  CHECK(json::parse(slurp(kRoot / "map_short" / "map_report.json"))["converged"] == false);
}

TEST_CASE("reruns are byte identical and a manifest replays its run") {
  const json cfg = {{"seed", 4},
                    {"model", finite_model("-x", 0.5, "1 + 0.5*tanh(x)", 0.5)},
                    {"experiment",
                     {{"type", "tube-ratio"}, {"T", 0.2}, {"psi1", "0.5*exp(-t)"}, {"psi2", "0.5 + 0.5*t"},
                      {"deltas", {0.3, 0.2}}, {"n_paths", 2000}, {"n_steps", 200}, {"lambda_bar", 1.5}}}};
  const fs::path c = write_config("tube.json", cfg);
  REQUIRE(run("tube-ratio --config " + c.string() + " --out " + (kRoot / "tube_a").string()) == 0);
  REQUIRE(run("tube-ratio --config " + c.string() + " --out " + (kRoot / "tube_b").string() + " --threads 3") == 0);
  CHECK(slurp(kRoot / "tube_a" / "ratio.csv") == slurp(kRoot / "tube_b" / "ratio.csv"));
  CHECK(slurp(kRoot / "tube_a" / "ratio.json") == slurp(kRoot / "tube_b" / "ratio.json"));

  REQUIRE(run("tube-ratio --config " + c.string() + " --out " + (kRoot / "tube_c").string() + " --seed 5") == 0);
  CHECK(slurp(kRoot / "tube_a" / "ratio.csv") != slurp(kRoot / "tube_c" / "ratio.csv"));

  const json manifest = json::parse(slurp(kRoot / "tube_a" / "manifest.json"));
  CHECK(manifest["seed"] == 4);
  CHECK(manifest["subcommand"] == "tube-ratio");
  CHECK(manifest["outputs"].size() == 2);
  REQUIRE(run("run --config " + (kRoot / "tube_a" / "manifest.json").string() + " --out " +
              (kRoot / "tube_replay").string()) == 0);
  CHECK(slurp(kRoot / "tube_a" / "ratio.csv") == slurp(kRoot / "tube_replay" / "ratio.csv"));
  const json replay = json::parse(slurp(kRoot / "tube_replay" / "manifest.json"));
  CHECK(replay["config_hash"] == manifest["config_hash"]);
}

TEST_CASE("dom-eval reads a path file relative to the config") {
  fs::create_directories(kRoot / "dom");
  std::ofstream(kRoot / "dom" / "knots.csv") << "t,x1\n0,0\n0.1,0.05\n0.2,0.12\n0.3,0.2\n";
  const json cfg = {{"model", finite_model("-x", 0.8, "1 + 0.5*sin(x)", 0.8)},
                    {"experiment", {{"type", "dom-eval"}, {"path_csv", "knots.csv"}}}};
  json embedded = cfg;
  embedded["model"]["kind"] = "embedded";
  std::ofstream(kRoot / "dom" / "dom.json") << embedded.dump();
  REQUIRE(run("dom-eval --config " + (kRoot / "dom" / "dom.json").string() + " --out " + (kRoot / "dom_out").string()) ==
          0);
  const json d = json::parse(slurp(kRoot / "dom_out" / "dom.json"));
  CHECK(d["n"] == 3);
  CHECK(std::isfinite(d["total"].get<double>()));

  // A finite model is not accepted by dom-eval.
  std::ofstream(kRoot / "dom" / "finite.json") << cfg.dump();
  CHECK(run("dom-eval --config " + (kRoot / "dom" / "finite.json").string()) == 2);
}

TEST_CASE("shipped configs parse") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(JUMPOM_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().string());
    const auto cfg = jumpom::ExperimentConfig::load(entry.path());
    const std::string kind = cfg.model().at("kind");
    if (kind == "finite" || kind == "embedded") {
      CHECK_NOTHROW(jumpom::finite_model_from_json(cfg.model()));
    } else {
      CHECK_NOTHROW(jumpom::infinite_model_from_json(cfg.model()));
    }
    ++seen;
  }
  CHECK(seen >= 8);
}
