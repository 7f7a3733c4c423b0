// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion. `acceptance 5 6` runs a
// subset; no arguments runs all nine.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ci_fixtures.hpp"
#include "eulerci/convex_integration.hpp"
#include "eulerci/harness.hpp"
#include "eulerci/verification.hpp"

using namespace eulerci;

namespace
{

struct Outcome
{
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

std::string fmt(double x)
{
  std::ostringstream os;
  os << std::setprecision(4) << x;
  return os.str();
}

const DirectionFamilySystem &spatial_system()
{
  static const DirectionFamilySystem sys = plan_system(3, NuSearchOptions{});
  return sys;
}

Outcome from_suites(const std::vector<SuiteResult> &suites, double budget)
{
  Outcome o;
  o.pass = true;
  double secs = 0.0;
  const Check *worst = nullptr;
  for (const auto &s : suites)
  {
    secs += s.seconds;
    for (const auto &c : s.checks)
    {
      std::string line = std::string(c.pass ? "ok   " : "FAIL ") + "[" + c.suite + "] " + c.name +
                         " = " + fmt(c.value) + " (tol " + fmt(c.tolerance) + ")";
      if (!c.detail.empty())
      {
        line += " " + c.detail;
      }
      o.details.push_back(line);
      if (c.gated && !c.pass)
      {
        o.pass = false;
        worst = worst ? worst : &c;
      }
    }
  }
  o.details.push_back("runtime " + fmt(secs) + " s (budget " + fmt(budget) + " s)");
  o.pass = o.pass && secs <= budget;
  o.summary = worst ? "first failure: [" + worst->suite + "] " + worst->name
                    : std::to_string(suites.size()) + " suites within tolerance";
  if (secs > budget)
  {
    o.summary += "; runtime over budget";
  }
  return o;
}

// Operator identities over 100 random fields per dimension.
Outcome criterion1()
{
  return from_suites({operator_suite(2, 128, 100, 101), operator_suite(3, 32, 100, 102)}, 60);
}

// Stationarity of random coefficient sets.
Outcome criterion2()
{
  return from_suites({stationarity_suite(2, {1, 5, 25}, 200, 201),
                      stationarity_suite(3, {1, 5}, 200, 202)},
                     120);
}

// Reconstruction for every planned family in 2D and 3D.
Outcome criterion3()
{
  const auto t0 = std::chrono::steady_clock::now();
  const auto &s3 = spatial_system();
  auto r3 = reconstruction_suite(s3, 500, 302);
  r3.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return from_suites({reconstruction_suite(testing::planar_system(), 500, 301), r3}, 60);
}

// Partition identities and the transport defect slope.
Outcome criterion4()
{
  return from_suites({partition_suite(2, 1000, 401, true), partition_suite(3, 1000, 402, true)},
                     60);
}

std::string bounds_line(const StepReport &r)
{
  double gmin = 1e300, gmax = -1e300;
  for (const auto &f : r.frames)
  {
    if (f.interior)
    {
      gmin = std::min(gmin, f.energy_gap / (r.params.delta * f.e));
      gmax = std::max(gmax, f.energy_gap / (r.params.delta * f.e));
    }
  }
  const double bw = r.params.M * std::sqrt(r.params.delta);
  return "gap/(delta e) in [" + fmt(gmin) + ", " + fmt(gmax) + "] (window [0.375, 0.625]), sup R1 = " +
         fmt(r.max_interior(&FrameDiagnostics::sup_R1)) + " (<= " +
         fmt(0.5 * r.params.eta * r.params.delta) + "), sup w = " +
         fmt(r.max_interior(&FrameDiagnostics::sup_w)) + " (<= " + fmt(bw) + "), sup q = " +
         fmt(r.max_interior(&FrameDiagnostics::sup_q)) + " (<= " + fmt(r.params.M * r.params.delta) +
         ")";
}

// One 2D step from rest on a 1024^2 grid, lambda searched.
Outcome criterion5()
{
  const auto t0 = std::chrono::steady_clock::now();
  const auto &sys = testing::planar_system();
  TorusGrid g(2, 1024);
  TimeGrid tg{0, 1, 9};
  const auto e = EnergyProfile::constant(1.0);
  const auto s = EulerReynoldsState::zero(g, tg);
  const auto base = schedule_params(sys, e, tg, 0, 1, 0.1);
  auto ar = auto_lambda(s, e, base, sys, [](const StepReport &r) { return r.bounds_ok(); });
  const double secs =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Outcome o;
  std::string tried;
  for (int l : ar.tried)
  {
    tried += (tried.empty() ? "" : ",") + std::to_string(l);
  }
  o.details.push_back("grid 1024^2, 9 time samples, nu = " + std::to_string(sys.nu) +
                      ", grid ceiling lambda = " + std::to_string(max_grid_lambda(g, sys.nu)) +
                      ", tried {" + tried + "}");
  if (ar.result)
  {
    o.details.push_back(bounds_line(ar.result->report));
  }
  o.details.push_back("runtime " + fmt(secs) + " s (budget 600 s)");
  o.pass = ar.found && secs <= 600;
  o.summary = ar.found ? "lambda = " + std::to_string(ar.lambda) + " passes every bound"
                       : "no lambda passes: " + ar.failure;
  return o;
}

struct Sweep
{
  std::vector<double> lambdas, sup;
  std::vector<int> mus;
  double seconds = 0.0;
};

Sweep carrier_sweep(double shear)
{
  const auto t0 = std::chrono::steady_clock::now();
  const auto &sys = testing::planar_system();
  TorusGrid g(2, 32);
  TimeGrid tg{0, 1, 3};
  const auto e = EnergyProfile::constant(1.0);
  const auto p0 = schedule_params(sys, e, tg, 0, 32, 0.1, 1.0 / 3.0, 0.05);
  const auto s = testing::pulsating_stress_state(g, tg, p0.eta, 0.5, shear);
  EngineOptions eo;
  eo.carrier_mode = true;
  eo.sampling.max_slow_points = 1024;
  Sweep out;
  for (int lam : {32, 64, 128, 256})
  {
    const auto r = iteration_step(s, e, p0.with_lambda(lam), sys, eo).report;
    out.lambdas.push_back(lam);
    out.mus.push_back(r.params.mu);
    out.sup.push_back(r.max_interior(&FrameDiagnostics::sup_R1));
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::string sweep_line(const Sweep &s)
{
  std::string line;
  for (std::size_t i = 0; i < s.lambdas.size(); ++i)
  {
    line += (i ? ", " : "") + std::string("lambda ") + std::to_string(int(s.lambdas[i])) +
            " (mu " + std::to_string(s.mus[i]) + "): " + fmt(s.sup[i]);
  }
  return line;
}

// Decay of sup |R1| in lambda, carrier mode on a pulsating stress at rest.
Outcome criterion6()
{
  const auto sw = carrier_sweep(0.0);
  const auto fit = fit_scaling(sw.lambdas, sw.sup);
  bool decreasing = true;
  for (std::size_t i = 1; i < sw.sup.size(); ++i)
  {
    decreasing = decreasing && sw.sup[i] < sw.sup[i - 1];
  }
  Outcome o;
  o.details.push_back("alpha = 0.05, beta = 1/3, slow grid 32^2, 3 time samples, v = 0");
  o.details.push_back(sweep_line(sw));
  o.details.push_back("slope " + fmt(fit.slope) + " (gate <= -0.13), r2 " + fmt(fit.r2) +
                      ", strictly decreasing: " + (decreasing ? "yes" : "no"));
  o.details.push_back("runtime " + fmt(sw.seconds) + " s (budget 1800 s)");
  o.pass = fit.slope <= -0.13 && decreasing && sw.seconds <= 1800;
  o.summary = "log-log slope " + fmt(fit.slope);

  // Not gated: with a shear velocity the transport part follows 1/mu, and mu
  // only changes at lambda = 256.
  const auto sh = carrier_sweep(0.05);
  const auto fs = fit_scaling(sh.lambdas, sh.sup);
  o.details.push_back("info (not gated), shear 0.05 sin(x2) e1: " + sweep_line(sh) +
                      "; slope " + fmt(fs.slope));
  return o;
}

// Two steps with e(t) = 1 + 0.1 sin(2 pi t / T). T = 50 keeps d_t rho small
// enough for the first step to pass on a 512^2 grid.
Outcome criterion7()
{
  const auto t0 = std::chrono::steady_clock::now();
  const auto &sys = testing::planar_system();
  const double T = 50.0;
  TorusGrid g(2, 512);
  TimeGrid tg{0, T, 9};
  const auto e = EnergyProfile::sinusoid(1.0, 0.1, 1.0, T);
  RunOptions ro;
  ro.n_steps = 2;
  const auto res = full_run(EulerReynoldsState::zero(g, tg), e, sys, ro);
  const double secs =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Outcome o;
  o.details.push_back("grid 512^2, T = 50, 9 time samples, lambda searched up to the grid ceiling " +
                      std::to_string(max_grid_lambda(g, sys.nu)));
  for (const auto &rec : res.report.steps)
  {
    o.details.push_back(
      "step " + std::to_string(rec.step) + ": lambda " + std::to_string(rec.lambda) + ", mu " +
      std::to_string(rec.mu) + ", gap/(2^-n e) in [" + fmt(rec.gap_ratio_min) + ", " +
      fmt(rec.gap_ratio_max) + "] (band [0.75, 1.25]), sup R = " + fmt(rec.sup_R) + " (<= " +
      fmt(rec.sup_R_bound) + "), increment " + fmt(rec.increment) + " (<= " +
      fmt(rec.increment_bound) + ")");
    if (rec.report)
    {
      std::string parts = "  parts of R:";
      for (int k = 0; k < 5; ++k)
      {
        parts += std::string(" ") + kPartNames[k] + " " + fmt(rec.report->max_interior_part(k));
      }
      o.details.push_back(parts);
    }
  }
  o.details.push_back("runtime " + fmt(secs) + " s (budget 1800 s)");
  const bool two = res.report.steps.size() == 2;
  o.pass = res.report.completed && two && res.report.all_ok() && secs <= 1800;
  o.summary = o.pass ? "both steps inside their bands"
                     : "completed " + std::to_string(res.report.steps.size()) +
                         " step(s); " + res.report.failure;
  return o;
}

// Second moments and H^-1 after one 3D step from rest.
Outcome criterion8()
{
  const auto t0 = std::chrono::steady_clock::now();
  const auto &sys = spatial_system();
  TorusGrid g(3, 80);
  TimeGrid tg{0, 1, 3};
  const auto e = EnergyProfile::constant(1.0);
  const double eps = 0.1;
  const auto params = schedule_params(sys, e, tg, 0, 1, eps);
  const auto r = iteration_step(EulerReynoldsState::zero(g, tg), e, params, sys).report;
  const double secs =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double m = r.max_interior(&FrameDiagnostics::moment_rho_err);
  const double h = r.max_interior(&FrameDiagnostics::h_minus1);
  const double off = r.max_interior(&FrameDiagnostics::max_offdiag_moment);
  const double ep = params.eps_prime;
  Outcome o;
  o.details.push_back("grid 80^3, lambda = 1 (grid ceiling " +
                      std::to_string(max_grid_lambda(g, sys.nu)) + "), nu = " +
                      std::to_string(sys.nu) + ", eps = 0.1, eps' = " + fmt(ep));
  o.details.push_back("|int v1 v1 - (2 pi)^3 rho Id| = " + fmt(m) + ", |v1|_H^-1 = " + fmt(h) +
                      ", max off-diagonal moment = " + fmt(off) + " (each <= " + fmt(ep) + ")");
  o.details.push_back("runtime " + fmt(secs) + " s (budget 3600 s)");
  o.pass = m <= ep && h <= ep && off <= ep && secs <= 3600;
  o.summary = "moment " + fmt(m) + ", H^-1 " + fmt(h) + ", off-diagonal " + fmt(off) +
              " vs eps' " + fmt(ep);
  return o;
}

// Energy conservation for exact Euler flows with no perturbation.
Outcome criterion9()
{
  return from_suites({null_step_suite(2, 901), null_step_suite(3, 902)}, 600);
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  bool quiet = false;
  app.add_option("criteria", only, "Criteria to run (1-9); all when omitted")
    ->check(CLI::Range(1, 9));
  app.add_flag("-q,--quiet", quiet, "Only the PASS/FAIL lines");
  CLI11_PARSE(app, argc, argv);
  if (only.empty())
  {
    only = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  }
  const std::vector<std::function<Outcome()>> runs = {criterion1, criterion2, criterion3,
                                                      criterion4, criterion5, criterion6,
                                                      criterion7, criterion8, criterion9};
  bool all = true;
  for (int c : only)
  {
    Outcome o;
    try
    {
      o = runs[c - 1]();
    }
    catch (const std::exception &err)
    {
      o.pass = false;
      o.summary = std::string("exception: ") + err.what();
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c << ": " << o.summary << "\n";
    if (!quiet)
    {
      for (const auto &d : o.details)
      {
        std::cout << "    " << d << "\n";
      }
    }
    std::cout.flush();
  }
  return all ? 0 : 1;
}
