// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#include "eulerci/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "eulerci/spectral.hpp"
#include "eulerci/stationary_flows.hpp"
#include "eulerci/velocity_partition.hpp"

namespace eulerci
{

namespace
{

class Stopwatch
{
public:
  double seconds() const
  {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double max_abs_diff(const PeriodicField &a, const PeriodicField &b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
  {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

Check positive_check(std::string suite, std::string name, double value)
{
  Check c;
  c.suite = std::move(suite);
  c.name = std::move(name);
  c.value = value;
  c.tolerance = 0.0;
  c.pass = value > 0.0;
  c.detail = "must be > 0";
  return c;
}

Check flag_check(std::string suite, std::string name, bool flag, std::string detail = {})
{
  Check c;
  c.suite = std::move(suite);
  c.name = std::move(name);
  c.value = flag ? 1.0 : 0.0;
  c.tolerance = 1.0;
  c.pass = flag;
  c.detail = std::move(detail);
  return c;
}

}  // namespace

nlohmann::json Check::to_json() const
{
  nlohmann::json j = {{"suite", suite},  {"name", name},   {"value", value},
                      {"tolerance", tolerance}, {"pass", pass}, {"gated", gated}};
  if (!detail.empty())
  {
    j["detail"] = detail;
  }
  return j;
}

Check bound_check(std::string suite, std::string name, double value, double tolerance)
{
  Check c;
  c.suite = std::move(suite);
  c.name = std::move(name);
  c.value = value;
  c.tolerance = tolerance;
  c.pass = std::isfinite(value) && value <= tolerance;
  return c;
}

bool SuiteResult::ok() const
{
  return std::all_of(checks.begin(), checks.end(),
                     [](const Check &c) { return c.pass || !c.gated; });
}

void SuiteResult::append(const SuiteResult &other)
{
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  seconds += other.seconds;
}

nlohmann::json SuiteResult::to_json() const
{
  nlohmann::json j;
  j["ok"] = ok();
  j["seconds"] = seconds;
  j["checks"] = nlohmann::json::array();
  for (const auto &c : checks)
  {
    j["checks"].push_back(c.to_json());
  }
  return j;
}

nlohmann::json ScalingFit::to_json() const
{
  return {{"slope", slope}, {"intercept", intercept}, {"r2", r2}, {"points", points}};
}

ScalingFit fit_scaling(const std::vector<double> &x, const std::vector<double> &y)
{
  if (x.size() != y.size() || x.size() < 2)
  {
    throw ConfigError("fit_scaling needs at least two (x, y) pairs of equal length");
  }
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
    {
      throw ConfigError("fit_scaling needs positive data");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i)
  {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i)
  {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0)
  {
    throw ConfigError("fit_scaling needs at least two distinct x values");
  }
  ScalingFit f;
  f.points = static_cast<int>(n);
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i)
  {
    const double r = ly[i] - (f.intercept + f.slope * lx[i]);
    ss_res += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

PeriodicField random_trig_field(const TorusGrid &grid, FieldRank rank, int degree,
                                std::mt19937_64 &rng)
{
  std::uniform_int_distribution<int> wave(-degree, degree);
  std::normal_distribution<double> normal;
  const int d = grid.dim();
  PeriodicField out(grid, rank);
  for (int c = 0; c < out.components(); ++c)
  {
    for (int t = 0; t < 6; ++t)
    {
      const std::array<int, 3> k{wave(rng), wave(rng), d == 3 ? wave(rng) : 0};
      const double a = normal(rng);
      const double b = normal(rng);
      for (std::size_t p = 0; p < grid.size(); ++p)
      {
        const auto x = grid.coords(p);
        const double ph = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
        out.at(c, p) += a * std::cos(ph) + b * std::sin(ph);
      }
    }
  }
  return out;
}

CoefficientSet random_coefficients(int dim, int nu, std::mt19937_64 &rng)
{
  std::normal_distribution<double> normal;
  CoefficientSet c{dim, nu, {}};
  for (const auto &k : lattice_sphere(dim, nu))
  {
    if (c.entries.count(k))
    {
      continue;
    }
    const cplx a(normal(rng), normal(rng));
    c.entries[k] = a;
    c.entries[negate(k)] = std::conj(a);
  }
  return c;
}

SuiteResult operator_suite(int dim, int n, int count, std::uint64_t seed)
{
  Stopwatch clock;
  std::mt19937_64 rng(seed);
  TorusGrid g(dim, n);
  const int degree = std::max(1, n / 8);
  double div_err = 0.0, trace_err = 0.0, p_idem = 0.0, q_idem = 0.0, compl_err = 0.0,
         cross = 0.0, div_p = 0.0;
  for (int trial = 0; trial < count; ++trial)
  {
    const auto v = random_trig_field(g, FieldRank::Vector, degree, rng);
    const auto R = div_inverse(v);
    auto back = divergence(R);
    const auto vm = mean(v);
    for (int c = 0; c < dim; ++c)
    {
      for (std::size_t i = 0; i < g.size(); ++i)
      {
        back.at(c, i) -= v.at(c, i) - vm[c];
      }
    }
    div_err = std::max(div_err, sup_norm(back));
    trace_err = std::max(trace_err, sup_norm(trace(R)));
    const auto P = leray_p(v);
    const auto Q = leray_q(v);
    p_idem = std::max(p_idem, max_abs_diff(leray_p(P), P));
    q_idem = std::max(q_idem, max_abs_diff(leray_q(Q), Q));
    compl_err = std::max(compl_err, max_abs_diff(P + Q, v));
    cross = std::max(cross, sup_norm(leray_p(Q)));
    div_p = std::max(div_p, sup_norm(divergence(P)));
  }
  const std::string suite = "operators-" + std::to_string(dim) + "d";
  SuiteResult out;
  out.checks.push_back(bound_check(suite, "div(div^-1 v) = v - mean v", div_err, 1e-10));
  out.checks.push_back(bound_check(suite, "div^-1 v trace free", trace_err, 1e-11));
  out.checks.push_back(bound_check(suite, "P idempotent", p_idem, 1e-11));
  out.checks.push_back(bound_check(suite, "Q idempotent", q_idem, 1e-11));
  out.checks.push_back(bound_check(suite, "P + Q = identity", compl_err, 1e-11));
  out.checks.push_back(bound_check(suite, "P Q = 0", cross, 1e-11));
  out.checks.push_back(bound_check(suite, "div P v = 0", div_p, 1e-11));
  for (auto &c : out.checks)
  {
    c.detail = std::to_string(count) + " fields at " + std::to_string(n) + "^" +
               std::to_string(dim);
  }
  out.seconds = clock.seconds();
  return out;
}

SuiteResult stationarity_suite(int dim, const std::vector<int> &nus, int count,
                               std::uint64_t seed)
{
  Stopwatch clock;
  std::mt19937_64 rng(seed);
  TorusGrid g(dim, dim == 2 ? 64 : 24);
  const std::string suite = dim == 2 ? "stationary-2d" : "beltrami-3d";
  SuiteResult out;
  const int per = (count + static_cast<int>(nus.size()) - 1) / static_cast<int>(nus.size());
  for (int nu : nus)
  {
    double resid = 0.0, avg = 0.0, div = 0.0;
    for (int trial = 0; trial < per; ++trial)
    {
      const auto c = random_coefficients(dim, nu, rng);
      const int lam = 1 + trial % 2;
      const auto flow = assemble_flow(c, lam, g);
      resid = std::max(resid, stationarity_residual(flow, nu));
      avg = std::max(avg, (grid_average_ww(flow.W) - average_ww(c)).cwiseAbs().maxCoeff());
      div = std::max(div, sup_norm(divergence(flow.W)));
    }
    const std::string tag = " (nu = " + std::to_string(nu) + ")";
    out.checks.push_back(bound_check(suite, "stationarity residual" + tag, resid, 1e-9));
    out.checks.push_back(bound_check(suite, "average of W W closed form" + tag, avg, 1e-10));
    out.checks.push_back(bound_check(suite, "div W" + tag, div, 1e-11));
    for (std::size_t i = out.checks.size() - 3; i < out.checks.size(); ++i)
    {
      out.checks[i].detail = std::to_string(per) + " coefficient sets";
    }
  }
  out.seconds = clock.seconds();
  return out;
}

SuiteResult reconstruction_suite(const DirectionFamilySystem &sys, int samples,
                                 std::uint64_t seed)
{
  Stopwatch clock;
  const std::string suite = "geometric-" + std::to_string(sys.dim) + "d";
  SuiteResult out;
  if (sys.gammas.size() != sys.families.size() || sys.gammas.empty())
  {
    out.checks.push_back(flag_check(suite, "reconstruction identity", false,
                                    "system has no gamma data"));
  }
  for (std::size_t f = 0; f < sys.gammas.size(); ++f)
  {
    const auto rc = check_reconstruction(sys.gammas[f], samples, seed + f);
    const std::string tag = " (family " + std::to_string(f) + ")";
    auto c = bound_check(suite, "reconstruction identity" + tag, rc.max_error, 1e-9);
    c.detail = std::to_string(samples) + " samples in the ball of radius r0 = " +
               std::to_string(sys.gammas[f].r0);
    out.checks.push_back(c);
    out.checks.push_back(positive_check(suite, "gamma positive" + tag, rc.min_gamma));
  }
  IVec k{};
  k[0] = 1;
  k[1] = sys.dim == 2 ? 2 : 1;
  if (sys.dim == 3)
  {
    k[2] = 1;
  }
  bool rejected = false;
  try
  {
    build_gamma(sys.dim, {k, negate(k)});
  }
  catch (const Error &)
  {
    rejected = true;
  }
  out.checks.push_back(flag_check(suite, "single pair family rejected", rejected));
  out.seconds = clock.seconds();
  return out;
}

SuiteResult partition_suite(int dim, int points, std::uint64_t seed, bool gate_slope)
{
  Stopwatch clock;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-5.0, 5.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> tau(0.0, 20.0);
  const std::string suite = "partition-" + std::to_string(dim) + "d";
  IVec k{1, 2, dim == 3 ? 2 : 0};

  double alpha_err = 0.0;
  double phi_err = 0.0;
  VelocityPartition unit_part(dim, 1);
  VelocityPartition part4(dim, 4);
  for (int s = 0; s < points; ++s)
  {
    double v[3] = {box(rng), box(rng), dim == 3 ? box(rng) : 0.0};
    double sum = 0.0;
    for (const auto &l : unit_part.active_cells(v))
    {
      const double a = unit_part.alpha(l, v);
      sum += a * a;
    }
    alpha_err = std::max(alpha_err, std::abs(sum - 1.0));
    double phis = 0.0;
    const double t = tau(rng);
    for (int j = 0; j < part4.class_count(); ++j)
    {
      phis += std::norm(part4.phi(j, k, v, t));
    }
    phi_err = std::max(phi_err, std::abs(phis - 1.0));
  }

  std::vector<std::array<double, 4>> samples(2000);
  for (auto &s : samples)
  {
    s = {unit(rng), unit(rng), dim == 3 ? unit(rng) : 0.0, tau(rng)};
  }
  std::vector<double> mus, defects;
  for (int mu : {4, 8, 16, 32})
  {
    VelocityPartition part(dim, mu);
    double best = 0.0;
    for (const auto &s : samples)
    {
      for (int j = 0; j < part.class_count(); ++j)
      {
        best = std::max(best, std::abs(part.transport_defect(j, k, s.data(), s[3])));
      }
    }
    mus.push_back(mu);
    defects.push_back(best);
  }
  const auto fit = fit_scaling(mus, defects);

  SuiteResult out;
  auto a = bound_check(suite, "sum alpha_l^2 = 1", alpha_err, 1e-12);
  a.detail = std::to_string(points) + " points";
  out.checks.push_back(a);
  auto p = bound_check(suite, "sum_j |phi_k^(j)|^2 = 1", phi_err, 1e-12);
  p.detail = std::to_string(points) + " points, mu = 4";
  out.checks.push_back(p);
  Check sl;
  sl.suite = suite;
  sl.name = "transport defect mu slope";
  sl.value = fit.slope;
  sl.tolerance = -0.7;
  sl.pass = fit.slope >= -1.3 && fit.slope <= -0.7;
  sl.gated = gate_slope;
  sl.detail = "window [-1.3, -0.7], r2 = " + std::to_string(fit.r2);
  out.checks.push_back(sl);
  out.seconds = clock.seconds();
  return out;
}

SuiteResult step_suite(const DirectionFamilySystem &planar, std::uint64_t)
{
  Stopwatch clock;
  const std::string suite = "step-2d";
  TorusGrid g(2, 96);
  TimeGrid tg{0, 1, 3};
  const auto e = EnergyProfile::constant(1.0);
  const auto s = EulerReynoldsState::zero(g, tg);
  const auto params = schedule_params(planar, e, tg, 0, 1, 0.1);
  const auto res = iteration_step(s, e, params, planar);
  const auto &r = res.report;
  double gap = 0.0, parts = 0.0, tr = 0.0, divc = 0.0, divw = 0.0;
  for (const auto &f : r.frames)
  {
    gap = std::max(gap, std::abs(f.energy_gap - 0.5 * f.e));
    parts = std::max(parts, f.sum_of_parts);
    tr = std::max(tr, f.max_trace_R1);
    divc = std::max(divc, f.div_check);
    divw = std::max(divw, f.divergence_w);
  }
  const auto chk = check_state(res.state);
  SuiteResult out;
  out.checks.push_back(bound_check(suite, "energy gap = e / 2 from rest", gap, 1e-10));
  out.checks.push_back(bound_check(suite, "R1 = sum of the five parts", parts, 1e-9));
  out.checks.push_back(bound_check(suite, "R1 trace free", tr, 1e-10));
  out.checks.push_back(bound_check(suite, "div R1 = F - mean F", divc, 1e-9));
  out.checks.push_back(bound_check(suite, "div w = 0", divw, 1e-10));
  out.checks.push_back(bound_check(suite, "Euler-Reynolds residual of the new state",
                                   chk.max_residual, 1e-9));
  out.checks.push_back(flag_check(suite, "energy, stress, velocity and pressure bounds",
                                  r.bounds_ok()));
  out.checks.push_back(flag_check(suite, "H^-1 and second moment gates",
                                  r.h_minus1_ok && r.moments_ok && r.mean_gate_ok));
  out.seconds = clock.seconds();
  return out;
}

SuiteResult null_step_suite(int dim, std::uint64_t seed)
{
  Stopwatch clock;
  std::mt19937_64 rng(seed);
  const std::string suite = "null-step-" + std::to_string(dim) + "d";
  const int nu = dim == 2 ? 5 : 1;
  const auto c = random_coefficients(dim, nu, rng);
  TorusGrid g(dim, dim == 2 ? 32 : 16);
  TimeGrid tg{0, 1, 33};
  const std::array<double, 3> U = dim == 2 ? std::array<double, 3>{0.3, -0.1, 0.0}
                                           : std::array<double, 3>{0.2, -0.1, 0.15};
  auto s = translated_stationary_state(c, 1, U, g, tg);
  const auto rep = null_step(s);
  SuiteResult out;
  out.checks.push_back(bound_check(suite, "energy conserved across samples",
                                   rep.max_energy_drift, rep.tolerance));
  out.checks.push_back(bound_check(suite, "Euler residual", rep.max_residual, rep.tolerance));
  for (auto &p : s.p)
  {
    p = CarrierField(g, FieldRank::Scalar, 1);
  }
  out.checks.push_back(flag_check(suite, "zero pressure control detected", !null_step(s).ok));
  out.seconds = clock.seconds();
  return out;
}

}  // namespace eulerci
