// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "eulerci/harness.hpp"
#include "eulerci/verification.hpp"

using namespace eulerci;
namespace fs = std::filesystem;

namespace
{
std::string scratch(const std::string &name)
{
  const auto p = fs::temp_directory_path() / ("eulerci_harness_" + name);
  fs::remove_all(p);
  return p.string();
}

nlohmann::json read_json(const fs::path &p)
{
  std::ifstream in(p);
  nlohmann::json j;
  in >> j;
  return j;
}
}  // namespace

TEST_CASE("fit_scaling")
{
  std::vector<double> x{32, 64, 128, 256, 512};
  std::vector<double> y;
  for (double l : x)
  {
    y.push_back(3.0 * std::pow(l, -0.3));
  }
  auto f = fit_scaling(x, y);
  CHECK(std::abs(f.slope + 0.3) < 1e-12);
  CHECK(std::abs(f.intercept - std::log(3.0)) < 1e-11);
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));

  auto c = fit_scaling({1, 2, 4}, {5, 5, 5});
  CHECK(c.slope == 0.0);
  CHECK(c.r2 == 1.0);

  CHECK_THROWS_AS(fit_scaling({1}, {1}), ConfigError);
  CHECK_THROWS_AS(fit_scaling({1, 2}, {1, 0}), ConfigError);
  CHECK_THROWS_AS(fit_scaling({2, 2}, {1, 3}), ConfigError);
}

TEST_CASE("run configuration")
{
  RunConfig d;
  CHECK_NOTHROW(d.validate());
  auto back = RunConfig::from_json(d.to_json());
  CHECK(back.hash() == d.hash());
  auto moved = d;
  moved.out = "elsewhere";
  CHECK(moved.hash() == d.hash());
  moved.seed = 3;
  CHECK(moved.hash() != d.hash());

  CHECK_THROWS_AS(RunConfig::from_json({{"gird", 64}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"grid", "big"}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"tolerances", {{"mean", 1e-9}, {"x", 1}}}}),
                  ConfigError);

  auto j = d.to_json();
  j["energy"] = {{"kind", "sinusoid"}, {"base", 1.0}, {"amplitude", 0.1}, {"frequency", 1.0}};
  j["T"] = 2.0;
  auto s = RunConfig::from_json(j);
  // Period defaults to T.
  CHECK(s.energy_profile().value(0.5) == doctest::Approx(1.1));

  j["energy"] = {{"kind", "sinusoid"}, {"base", 1.0}, {"amplitude", 1.5}};
  CHECK_THROWS_AS(RunConfig::from_json(j).validate(), ConfigError);
  j["energy"] = {{"kind", "polynomial"}, {"coefficients", {1.0, 0.5}}};
  CHECK_NOTHROW(RunConfig::from_json(j).validate());
  j["energy"] = {{"kind", "cubic"}};
  CHECK_THROWS_AS(RunConfig::from_json(j).validate(), ConfigError);

  for (auto bad : {nlohmann::json{{"dim", 4}}, nlohmann::json{{"grid", 63}},
                   nlohmann::json{{"alpha", 0.2}, {"beta", 0.45}},
                   nlohmann::json{{"mode", "spectral"}},
                   nlohmann::json{{"mode", "carrier"}}})
  {
    CHECK_THROWS_AS(RunConfig::from_json(bad).validate(), ConfigError);
  }

  // 4 sqrt(325) = 72.1.
  RunConfig g;
  g.grid = 64;
  CHECK_THROWS_AS(check_feasibility(g, 325), ConfigError);
  g.grid = 74;
  CHECK_NOTHROW(check_feasibility(g, 325));
  g.lambda = 2;
  CHECK_THROWS_AS(check_feasibility(g, 325), ConfigError);
  g.mode = "carrier";
  CHECK_NOTHROW(check_feasibility(g, 325));
}

TEST_CASE("series csv")
{
  const auto dir = scratch("csv");
  fs::create_directories(dir);
  {
    std::ofstream(dir + "/n.csv") << "step,lambda,mu,sup_R\n1,32,4,0.5\n2,64,4,0.25\n";
    std::ofstream(dir + "/p.csv") << "# lambda norm\n8,1\n16,2\n";
  }
  std::vector<double> x, y;
  read_series_csv(dir + "/n.csv", x, y);
  CHECK(x == std::vector<double>{32, 64});
  CHECK(y == std::vector<double>{0.5, 0.25});
  read_series_csv(dir + "/p.csv", x, y);
  CHECK(x == std::vector<double>{8, 16});
  CHECK_THROWS_AS(read_series_csv(dir + "/none.csv", x, y), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("plan command")
{
  std::ostringstream log;
  RunConfig c;
  c.out = scratch("plan");
  CHECK(cmd_plan(c, log) == kExitOk);
  auto rep = read_json(fs::path(c.out) / "report.json");
  CHECK(rep["nu"] == 325);
  CHECK(rep["self_test"]["ok"].get<bool>());
  CHECK(rep.contains("config_hash"));
  CHECK(rep.contains("system_hash"));
  auto sys = system_for([&] {
    RunConfig l;
    l.system = c.out + "/system.json";
    return l;
  }());
  CHECK(sys.family_count() == 4);

  SUBCASE("minimal system")
  {
    RunConfig m;
    m.out = scratch("plan_min");
    m.families = 1;
    m.nu = 1;
    m.require_gamma = false;
    CHECK(cmd_plan(m, log) == kExitOk);
    auto s = DirectionFamilySystem::from_json(read_json(fs::path(m.out) / "system.json"));
    CHECK(s.family_count() == 1);
    CHECK(s.families[0].size() == 4);
    CHECK(s.gammas.empty());
    m.require_gamma = true;
    CHECK(cmd_plan(m, log) == kExitConfig);
    fs::remove_all(m.out);
  }
  SUBCASE("infeasible spread target")
  {
    RunConfig t;
    t.out = scratch("plan_tiny");
    t.spread_target = 0.01;
    t.search_bound = 50;
    CHECK(cmd_plan(t, log) == kExitConfig);
    fs::remove_all(t.out);
  }
  fs::remove_all(c.out);
}

TEST_CASE("verify command routing and the corrupted gamma control")
{
  std::ostringstream log;
  RunConfig c;
  c.out = scratch("verify");
  c.verify_dims = {3};
  c.verify_fields = 2;
  c.verify_sets = 4;
  c.verify_samples = 20;
  c.verify_points = 50;
  CHECK(cmd_verify(c, log) == kExitOk);
  auto rep = read_json(fs::path(c.out) / "verify.json");
  std::set<std::string> suites;
  for (const auto &ch : rep["suites"]["checks"])
  {
    suites.insert(ch["suite"].get<std::string>());
  }
  CHECK(suites.count("beltrami-3d") == 1);
  CHECK(suites.count("operators-3d") == 1);
  CHECK(suites.count("operators-2d") == 0);

  RunConfig p;
  p.out = scratch("verify_sys");
  REQUIRE(cmd_plan(p, log) == kExitOk);
  auto sj = read_json(fs::path(p.out) / "system.json");
  sj["families"][2]["gamma"]["vertices"][1]["weights"][0]["weight"] =
    2.0 * sj["families"][2]["gamma"]["vertices"][1]["weights"][0]["weight"].get<double>();
  std::ofstream(p.out + "/bad.json") << sj.dump();

  RunConfig b = c;
  b.verify_dims = {2};
  b.system = p.out + "/bad.json";
  std::ostringstream blog;
  CHECK(cmd_verify(b, blog) == kExitCheckFailed);
  CHECK(blog.str().find("FAIL  [geometric-2d] reconstruction identity (family 2)") !=
        std::string::npos);
  fs::remove_all(c.out);
  fs::remove_all(p.out);
}

TEST_CASE("run command artifacts")
{
  std::ostringstream log;
  RunConfig c;
  c.grid = 80;
  c.time_samples = 3;
  c.out = scratch("run0");
  c.n_steps = 0;
  CHECK(cmd_run(c, log) == kExitOk);
  CHECK(fs::exists(fs::path(c.out) / "state_0" / "state.json"));
  CHECK_FALSE(fs::exists(fs::path(c.out) / "state_1"));
  {
    std::ifstream in(fs::path(c.out) / "norms.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "step,lambda,mu,sup_R,sup_w,energy_gap_min,energy_gap_max,h_minus1,anisotropy");
  }

  RunConfig two = c;
  two.out = scratch("run2");
  two.n_steps = 2;
  // Step two fails its bounds at this grid (lambda = 1 is the only choice)
  // but every state is still written.
  CHECK(cmd_run(two, log) == kExitCheckFailed);
  for (int i = 0; i < 3; ++i)
  {
    CHECK(fs::exists(fs::path(two.out) / ("state_" + std::to_string(i)) / "state.json"));
  }
  auto rep = read_json(fs::path(two.out) / "report.json");
  CHECK(rep["energy_trace"].size() == 3);
  CHECK(rep["run"]["steps"].size() == 2);

  // Resume continues the schedule at the recorded level.
  RunConfig res = c;
  res.out = scratch("run_resume");
  res.resume = two.out + "/state_1";
  res.n_steps = 1;
  cmd_run(res, log);
  auto rr = read_json(fs::path(res.out) / "report.json");
  CHECK(rr["run"]["steps"][0]["step"] == 2);
  CHECK(rr["energy_trace"][0]["level"] == 1);

  RunConfig ex = c;
  ex.out = scratch("export");
  CHECK(cmd_export(ex, two.out + "/state_1", log) == kExitOk);
  auto sum = read_json(fs::path(ex.out) / "export" / "summary.json");
  CHECK(sum["frames"].size() == 3);
  CHECK(sum["frames"][1]["energy"].get<double>() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(cmd_export(ex, ex.out + "/missing", log) == kExitConfig);

  for (const auto &d : {c.out, two.out, res.out, ex.out})
  {
    fs::remove_all(d);
  }
}
