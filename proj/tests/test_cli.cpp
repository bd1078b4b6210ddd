#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "scatterlab/cli.hpp"
#include "scatterlab/parallel.hpp"

namespace fs = std::filesystem;
using scatterlab::cli::dispatch;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::path(SCATTERLAB_TEST_TMP) / "cli";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run(const std::vector<std::string>& args, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  int rc = dispatch(args, out, err);
  if (err_text) *err_text = err.str();
  return rc;
}

std::string small_config(double amplitude) {
  auto path = scratch("cfg_" + std::to_string(static_cast<long>(amplitude)) + ".json");
  nlohmann::json j = {{"grid", {{"n", 16}, {"L", 0.5}}}, {"field", {{"amplitude", amplitude}, {"radius", 0.35}}}};
  std::ofstream(path) << j.dump();
  return path.string();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("synth writes a potential and a manifest") {
    auto out = scratch("p.ffpk").string();
    fs::remove(out);
    CHECK(run({"synth", "--config", small_config(1.0), "--seed", "3", "--out", out}) == 0);
    CHECK(fs::exists(out));
    auto manifest = nlohmann::json::parse(slurp(out + ".manifest.json"));
    CHECK(manifest.at("subcommand") == "synth");
    CHECK(manifest.at("seeds") == nlohmann::json::array({3}));
    CHECK(manifest.at("tool_version") == scatterlab::cli::kToolVersion);
  }

  TEST_CASE("usage and configuration errors exit with 2") {
    std::string err;
    CHECK(run({"synth", "--bogus", "1"}, &err) == 2);
    CHECK(run({"nonsense"}) == 2);
    CHECK(run({}) == 2);
    auto bad = scratch("bad.json");
    std::ofstream(bad) << R"({"field": {"m": 4.5}})";
    CHECK(run({"synth", "--config", bad.string(), "--out", scratch("never.ffpk").string()}, &err) == 2);
    CHECK(err.find("field.m") != std::string::npos);
    CHECK(run({"forward", "--potential", scratch("missing.ffpk").string(), "--k", "4", "--out",
               scratch("never.ffpk").string()}) == 2);
  }

  TEST_CASE("forward outside the convergent regime exits with 3 and names the frequency") {
    auto pot = scratch("strong.ffpk").string();
    REQUIRE(run({"synth", "--config", small_config(1e9), "--out", pot}) == 0);
    std::string err;
    int rc = run({"forward", "--potential", pot, "--k", "1", "--model", "full", "--directions", "6", "--out",
                  scratch("strong_ds.ffpk").string()},
                 &err);
    CHECK(rc == 3);
    CHECK(err.find("theta=") != std::string::npos);
    CHECK(err.find("k=1") != std::string::npos);
  }

  TEST_CASE("reruns are byte identical across thread counts") {
    auto pot = scratch("det.ffpk").string();
    REQUIRE(run({"synth", "--config", small_config(1.0), "--seed", "5", "--out", pot}) == 0);
    int saved = scatterlab::thread_count();
    std::string a, b;
    for (int threads : {1, 3}) {
      scatterlab::set_thread_count(threads);
      auto ds = scratch("det_" + std::to_string(threads) + ".ffpk").string();
      REQUIRE(run({"forward", "--potential", pot, "--kmin", "4", "--kmax", "6", "--kstep", "0.5", "--model", "full",
                   "--directions", "6", "--out", ds}) == 0);
      (threads == 1 ? a : b) = slurp(ds);
    }
    scatterlab::set_thread_count(saved);
    CHECK(!a.empty());
    CHECK(a == b);
  }
}
