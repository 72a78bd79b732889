#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "kinchain/harness.hpp"

using namespace kinchain;
namespace fs = std::filesystem;

namespace {
std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST_CASE("config parse: sections, lists, comments, errors") {
  auto cfg = harness::Config::from_string(
      "# comment\n[run]\nseed = 7\nkind = constants\n\n[functionals]\n"
      "p_grid = 0.25 0.5, 1\nN = 1e5\n");
  CHECK(cfg.get("run", "kind", "") == "constants");
  CHECK(cfg.get_num("run", "seed", 0) == 7);
  auto grid = cfg.get_list("functionals", "p_grid", {});
  CHECK(grid.size() == 3);
  CHECK(grid[2] == 1.0);
  CHECK(cfg.get_num("functionals", "N", 0) == 1e5);
  CHECK(cfg.get("missing", "key", "dflt") == "dflt");
  CHECK_THROWS(harness::Config::from_string("[run]\nnot a pair\n"));
}

TEST_CASE("run config validation names the offending field") {
  auto cfg = harness::Config::from_string("[run]\nseed = 1\n[lattice]\nL = 100\n");
  try {
    harness::parse_run_config(cfg, "lattice-sim", "", 0, false, "");
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("[lattice] L") != std::string::npos);
  }
  auto cfg2 = harness::Config::from_string("[run]\nkind = constants\n");
  CHECK_THROWS(harness::parse_run_config(cfg2, "", "", 0, false, ""));  // no seed
  auto cfg3 = harness::Config::from_string("[run]\nseed = 1\n");
  CHECK_THROWS(harness::parse_run_config(cfg3, "bogus-kind", "", 0, false, ""));
}

TEST_CASE("constants run emits all fields with provenance") {
  auto cfg = harness::Config::from_string(
      "[run]\nseed = 5\nout = /tmp/kinchain_t1\n[model]\nfamily = unpinned-nn\n");
  auto rc = harness::parse_run_config(cfg, "constants", "", 0, false, "");
  auto rec = harness::run(rc);
  CHECK(!rec.any_fail());
  std::string j = slurp("/tmp/kinchain_t1/constants.json");
  for (const char* key :
       {"c_star_plus", "c_star_minus", "c_hat_formula", "c_hat_pipeline",
        "theta_bar", "sigma_sq", "c_hat_gaussian_a", "c_hat_gaussian_b"})
    CHECK(j.find(key) != std::string::npos);
  CHECK(j.find("note") != std::string::npos);
}

TEST_CASE("determinism: identical config and seed give identical CSV bytes") {
  for (int round = 0; round < 2; ++round) {
    auto cfg = harness::Config::from_string(
        "[run]\nseed = 11\nout = /tmp/kinchain_det" + std::to_string(round) +
        "\n[model]\nfamily = unpinned-nn\n"
        "[functionals]\nN = 2000\nn_paths = 500\np_grid = 0.25 0.5\n");
    auto rc = harness::parse_run_config(cfg, "charfn", "", 0, false, "");
    harness::run(rc);
  }
  CHECK(slurp("/tmp/kinchain_det0/charfn.csv") ==
        slurp("/tmp/kinchain_det1/charfn.csv"));
  CHECK(slurp("/tmp/kinchain_det0/charfn.csv").find("re_phi") !=
        std::string::npos);  // header row present
}

TEST_CASE("kinetic-solve and semigroup runs produce artifacts") {
  auto cfg = harness::Config::from_string(
      "[run]\nseed = 3\nout = /tmp/kinchain_t2\n[model]\nfamily = unpinned-nn\n"
      "[kinetic]\np = 1.0\nt = 0.5\ndt = 0.05\ngrid_cells = 64\n");
  auto rc = harness::parse_run_config(cfg, "kinetic-solve", "", 0, false, "");
  auto rec = harness::run(rc);
  CHECK(fs::exists("/tmp/kinchain_t2/kinetic_field.csv"));
  CHECK(fs::exists("/tmp/kinchain_t2/run_record.json"));
  std::string csv = slurp("/tmp/kinchain_t2/kinetic_field.csv");
  CHECK(csv.substr(0, 8) == "k,re,im\n");
}

TEST_CASE("lattice-sim writes wigner csv and checkpoint") {
  auto cfg = harness::Config::from_string(
      "[run]\nseed = 9\nout = /tmp/kinchain_t3\n[model]\nfamily = unpinned-nn\n"
      "[lattice]\nL = 256\nM = 4\neps = 0.2\nh = 0.05\nt = 0.25\np_max = 0.1\n");
  auto rc = harness::parse_run_config(cfg, "lattice-sim", "", 0, false, "");
  auto rec = harness::run(rc);
  CHECK(fs::exists("/tmp/kinchain_t3/wigner.csv"));
  CHECK(fs::exists("/tmp/kinchain_t3/realization0.state"));
  CHECK(fs::exists("/tmp/kinchain_t3/realization0.json"));
  std::string csv = slurp("/tmp/kinchain_t3/wigner.csv");
  CHECK(csv.substr(0, 2) == "t,");
}

TEST_CASE("report includes the three stable c-hat candidates side by side") {
  auto cfg = harness::Config::from_string(
      "[run]\nseed = 5\nout = /tmp/kinchain_t4\n");
  auto rc = harness::parse_run_config(cfg, "constants", "", 0, false, "");
  auto rec = harness::run(rc);
  // the constants record carries formula, pipeline and the theta_inv variant
  std::string j = slurp("/tmp/kinchain_t4/constants.json");
  CHECK(j.find("c_hat_formula") != std::string::npos);
  CHECK(j.find("c_hat_pipeline") != std::string::npos);
  CHECK(j.find("c_hat_pipeline_theta_inv") != std::string::npos);
}
