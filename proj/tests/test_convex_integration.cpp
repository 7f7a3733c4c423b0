// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "ci_fixtures.hpp"
#include "doctest.h"
#include "eulerci/convex_integration.hpp"
#include "eulerci/spectral.hpp"
#include "test_helpers.hpp"

using namespace eulerci;
using namespace eulerci::testing;

namespace
{
constexpr double kPi = std::numbers::pi;

EulerReynoldsState with_velocity(const TorusGrid &g, const TimeGrid &tg, double c)
{
  auto s = EulerReynoldsState::zero(g, tg);
  PeriodicField v(g, FieldRank::Vector);
  for (std::size_t i = 0; i < g.size(); ++i)
  {
    v.at(0, i) = c * std::sin(g.coords(i)[1]);
  }
  for (auto &f : s.v)
  {
    f = CarrierField::from_field(v);
  }
  return s;
}
}  // namespace

TEST_CASE("energy profiles")
{
  auto s = EnergyProfile::sinusoid(1.0, 0.1, 1.0, 4.0);
  const double h = 1e-5;
  for (double t : {0.0, 0.7, 2.3})
  {
    CHECK(s.derivative(t) ==
          doctest::Approx((s.value(t + h) - s.value(t - h)) / (2 * h)).epsilon(1e-8));
  }
  CHECK(s.min_over(0, 4) == doctest::Approx(0.9).epsilon(1e-6));
  auto p = EnergyProfile::polynomial({1.0, -0.5, 0.25});
  CHECK(p.value(2.0) == doctest::Approx(1.0));
  CHECK(p.derivative(2.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(EnergyProfile::polynomial({0.5, -1.0}).check_positive(0, 1), ConfigError);
  auto back = EnergyProfile::from_json(s.to_json());
  CHECK(back.value(1.3) == s.value(1.3));
}

TEST_CASE("parameter schedule")
{
  CHECK(IterationParams::mu_for(64, 1.0 / 3) == 4);
  CHECK(IterationParams::mu_for(256, 1.0 / 3) == 8);
  CHECK(IterationParams::mu_for(1, 1.0 / 3) == 1);
  const auto &sys = planar_system();
  TimeGrid tg{0, 1, 5};
  auto p = schedule_params(sys, EnergyProfile::constant(2.0), tg, 3, 64, 0.1);
  CHECK(p.delta == 0.125);
  CHECK(p.eps_prime == doctest::Approx(0.1 / 16));
  CHECK(p.eta == doctest::Approx(0.5 * 2.0 * sys.r0 / (4 * 2 * 4 * kPi * kPi)));
  p.validate();
  auto bad = p;
  bad.holder_alpha = 0.4;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = p;
  bad.mu = 3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("rho and R")
{
  TimeGrid tg{0, 1, 3};
  SUBCASE("examples")
  {
    auto s2 = EulerReynoldsState::zero(TorusGrid(2, 16), tg);
    auto r2 = compute_rho(s2, EnergyProfile::constant(1.0), 1.0);
    CHECK(r2.rho[1] == doctest::Approx(1.0 / (16 * kPi * kPi)).epsilon(1e-14));
    auto s3 = EulerReynoldsState::zero(TorusGrid(3, 8), tg);
    auto r3 = compute_rho(s3, EnergyProfile::constant(1.0), 1.0);
    CHECK(r3.rho[0] == doctest::Approx(1.0 / (6 * std::pow(2 * kPi, 3))).epsilon(1e-14));
    auto R = compute_big_r(s2, r2, 0.1);
    CHECK(max_abs_diff(materialize(R[0], s2.grid()),
                       identity_tensor(s2.grid(), r2.rho[0])) < 1e-15);
  }
  SUBCASE("exhausted budget aborts")
  {
    // int |c sin x2|^2 = 2 pi^2 c^2 = e (1 - delta / 2) = 1/2.
    auto s = with_velocity(TorusGrid(2, 16), tg, 1.0 / (2 * kPi));
    CHECK_THROWS_AS(compute_rho(s, EnergyProfile::constant(1.0), 1.0), PreconditionError);
  }
  SUBCASE("trace of R and the ball gate")
  {
    std::mt19937_64 rng(3);
    TorusGrid g(2, 16);
    auto s = EulerReynoldsState::zero(g, tg);
    for (auto &r : s.stress)
    {
      r = CarrierField::from_field(1e-4 * div_inverse(random_field(g, FieldRank::Vector, 3, rng)));
    }
    auto rho = compute_rho(s, EnergyProfile::constant(1.0), 1.0);
    auto R = compute_big_r(s, rho, 1.0);
    auto Rf = materialize(R[1], g);
    auto tr = trace(Rf);
    for (std::size_t i = 0; i < g.size(); ++i)
    {
      CHECK(std::abs(tr.at(0, i) - 2 * rho.rho[1]) <= 1e-11);
    }
    CHECK_THROWS_AS(compute_big_r(s, rho, 1e-6), PreconditionError);
  }
}

TEST_CASE("pressure update")
{
  TorusGrid g(2, 16);
  // Single pair k = (1, 0), a = 1: w_o = (0, -2 sin x1), psi_o = 2 cos x1.
  PeriodicField w(g, FieldRank::Vector), psi(g, FieldRank::Scalar), p(g, FieldRank::Scalar);
  std::mt19937_64 rng(5);
  p = random_field(g, FieldRank::Scalar, 2, rng);
  for (std::size_t i = 0; i < g.size(); ++i)
  {
    const auto x = g.coords(i);
    w.at(1, i) = -2 * std::sin(x[0]);
    psi.at(0, i) = 2 * std::cos(x[0]);
  }
  auto pc = CarrierField::from_field(p);
  auto p1 = update_pressure(pc, CarrierField::from_field(w), CarrierField::from_field(psi), 1);
  auto diff = materialize(p1, g) - p;
  for (std::size_t i = 0; i < g.size(); ++i)
  {
    CHECK(diff.at(0, i) == doctest::Approx(-2.0).epsilon(1e-12));
  }
  CarrierField zero_w(g, FieldRank::Vector, 1), zero_psi(g, FieldRank::Scalar, 1);
  CHECK(max_abs_diff(materialize(update_pressure(pc, zero_w, zero_psi, 1), g), p) <= 1e-13);

  TorusGrid g3(3, 8);
  auto w3 = random_field(g3, FieldRank::Vector, 2, rng);
  auto p3 = update_pressure(CarrierField(g3, FieldRank::Scalar, 1), CarrierField::from_field(w3),
                            CarrierField(g3, FieldRank::Scalar, 1), 3);
  auto p3f = materialize(p3, g3);
  double mx = -1.0;
  for (std::size_t i = 0; i < g3.size(); ++i)
  {
    mx = std::max(mx, p3f.at(0, i));
  }
  CHECK(mx <= 1e-14);
}

TEST_CASE("perturbation from rest")
{
  const auto &sys = planar_system();
  TorusGrid g(2, 96);
  TimeGrid tg{0, 1, 3};
  auto e = EnergyProfile::constant(1.0);
  auto s = EulerReynoldsState::zero(g, tg);
  auto params = schedule_params(sys, e, tg, 0, 1, 0.1);
  auto rho = compute_rho(s, e, 1.0);
  VelocityPartition part(2, params.mu);
  auto dv = velocity_time_derivative(s, 1);
  auto dR = stress_time_derivative(s);
  auto pert = build_perturbation(s, 1, dv, dR[1], rho, sys, part, params, EngineOptions{});
  // mean of |w_o|^2 equals trace R = d rho.
  const double avg = integral(dot(pert.w_o, pert.w_o))[0] / g.volume();
  CHECK(avg == doctest::Approx(2 * rho.rho[1]).epsilon(1e-8));
  CHECK(sup_norm(pert.w_c) < 1e-12);
  CHECK(sup_norm(divergence(pert.w)) < 1e-10);
  CHECK(std::abs(mean(pert.w)[0]) < 1e-10);
  CHECK(sup_norm(pert.w_o) <= 0.5 * std::sqrt(params.M * params.delta));
  auto v1 = s.v[1] + pert.w;
  CHECK(sup_norm(v1 - s.v[1] - pert.w_o - pert.w_c) <= 1e-12);
  CHECK(sup_norm(pert.w_c + leray_q(pert.w_o)) <= 1e-12);
  CHECK(pert.sup_ds_a == 0.0);
}

TEST_CASE("Reynolds update reproduces a stress in the range of div^-1")
{
  std::mt19937_64 rng(8);
  TorusGrid g(2, 16);
  auto R = CarrierField::from_field(div_inverse(random_field(g, FieldRank::Vector, 3, rng)));
  CarrierField v = CarrierField::from_field(random_field(g, FieldRank::Vector, 3, rng));
  Perturbation none;
  for (auto *f : {&none.w_o, &none.dtw_o, &none.w_c, &none.dtw_c, &none.w, &none.dtw})
  {
    *f = CarrierField(g, FieldRank::Vector, 1);
  }
  none.psi_o = CarrierField(g, FieldRank::Scalar, 1);
  CarrierField q(g, FieldRank::Scalar, 1);
  auto upd = update_reynolds(v, R, none, q);
  CHECK(sup_norm(upd.stress - R) <= 1e-9);
  auto parts = decompose_reynolds(v, R, none, q);
  CHECK(sup_norm(parts.sum() - upd.stress) <= 1e-9);
}

TEST_CASE("iteration step from rest")
{
  const auto &sys = planar_system();
  TorusGrid g(2, 96);
  TimeGrid tg{0, 1, 3};
  auto e = EnergyProfile::constant(1.0);
  auto s = EulerReynoldsState::zero(g, tg);
  auto params = schedule_params(sys, e, tg, 0, 1, 0.1);
  auto res = iteration_step(s, e, params, sys);
  const auto &r = res.report;
  CHECK(r.all_ok());
  for (const auto &f : r.frames)
  {
    CHECK(f.energy_gap == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(f.sup_R1 < 1e-12);
    CHECK(f.sum_of_parts < 1e-9);
    CHECK(f.max_trace_R1 < 1e-10);
    CHECK(f.div_check < 1e-9);
  }
  CHECK(res.state.level == 1);
  auto chk = check_state(res.state);
  CHECK(chk.max_divergence < 1e-9);
  CHECK(chk.max_trace < 1e-10);
  CHECK(chk.max_residual < 1e-9);
  CHECK(r.to_json()["checks"]["all_ok"].get<bool>());

  SUBCASE("grid too coarse for lambda")
  {
    CHECK_THROWS_AS(iteration_step(s, e, params.with_lambda(4), sys), ConfigError);
  }
  SUBCASE("stress hypothesis")
  {
    auto bad = pulsating_stress_state(g, tg, params.eta, 2.0 * 1.5, 0.0);
    CHECK_THROWS_AS(iteration_step(bad, e, params, sys), PreconditionError);
  }
  SUBCASE("energy hypothesis")
  {
    auto bad = with_velocity(g, tg, 0.13);  // int |v|^2 = 0.334: rho > 0, gap < 3/4
    CHECK_THROWS_AS(iteration_step(bad, e, params, sys), PreconditionError);
  }
}

TEST_CASE("carrier-mode step reduces a pulsating stress")
{
  const auto &sys = planar_system();
  TorusGrid g(2, 16);
  TimeGrid tg{0, 1, 3};
  auto e = EnergyProfile::constant(1.0);
  auto params = schedule_params(sys, e, tg, 0, 64, 0.1);
  auto s = pulsating_stress_state(g, tg, params.eta, 0.5, 0.0);
  EngineOptions opts;
  opts.carrier_mode = true;
  opts.sampling.max_slow_points = 64;
  auto res = iteration_step(s, e, params, sys, opts);
  const auto &r = res.report;
  CHECK(r.max_interior(&FrameDiagnostics::sup_R1) < r.sup_R_in);
  CHECK(r.bounds_ok());
  CHECK(r.mean_gate_ok);
  for (const auto &f : r.frames)
  {
    CHECK(f.sum_of_parts <= 1e-9);
    CHECK(f.max_trace_R1 <= 1e-10);
    CHECK(f.divergence_w <= 1e-10);
    CHECK(f.div_check <= 1e-9);
  }
  // The incoming state is exact, so R1 comes only from the perturbation.
  CHECK(check_state(s).max_residual < 1e-12);
}

TEST_CASE("auto_lambda outcomes")
{
  const auto &sys = planar_system();
  TorusGrid g(2, 160);  // grid limit: lambda <= 2
  TimeGrid tg{0, 1, 3};
  auto e = EnergyProfile::constant(1.0);
  auto s = EulerReynoldsState::zero(g, tg);
  auto base = schedule_params(sys, e, tg, 0, 1, 0.1);
  auto yes = auto_lambda(s, e, base, sys, [](const StepReport &) { return true; });
  CHECK(yes.found);
  CHECK(yes.lambda == 1);
  auto no = auto_lambda(s, e, base, sys, [](const StepReport &) { return false; });
  CHECK_FALSE(no.found);
  CHECK(no.tried == std::vector<int>{1, 2});
  CHECK(no.result.has_value());
  CHECK(no.failure.find("ceiling 2") != std::string::npos);
  auto none = auto_lambda(EulerReynoldsState::zero(TorusGrid(2, 16), tg), e, base, sys,
                          [](const StepReport &) { return true; });
  CHECK_FALSE(none.found);
  CHECK(none.tried.empty());
}

TEST_CASE("full run, persistence and resume")
{
  const auto &sys = planar_system();
  TorusGrid g(2, 96);
  TimeGrid tg{0, 1, 3};
  auto e = EnergyProfile::constant(1.0);
  auto zero = EulerReynoldsState::zero(g, tg);
  RunOptions opts;
  opts.n_steps = 0;
  auto r0 = full_run(zero, e, sys, opts);
  CHECK(r0.report.completed);
  CHECK(r0.report.steps.empty());
  CHECK(compute_rho(r0.final_state, e, 1.0).energy[0] == 0.0);

  opts.n_steps = 1;
  int seen = 0;
  opts.on_state = [&](const EulerReynoldsState &) { ++seen; };
  auto r1 = full_run(zero, e, sys, opts);
  CHECK(seen == 2);
  REQUIRE(r1.report.steps.size() == 1);
  const auto &st = r1.report.steps[0];
  CHECK(st.band_ok);
  CHECK(st.stress_ok);
  CHECK(st.increment_ok);
  CHECK(st.gap_ratio_min == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r1.report.all_ok());

  const auto dir = (std::filesystem::temp_directory_path() / "eulerci_state_rt").string();
  save_state(dir, r1.final_state);
  auto back = load_state(dir);
  CHECK(back.level == 1);
  CHECK(back.frames() == 3);
  CHECK(sup_norm(back.v[2] - r1.final_state.v[2]) == 0.0);
  CHECK(sup_norm(back.stress[1] - r1.final_state.stress[1]) == 0.0);
  // Resuming continues the delta schedule at the recorded level.
  auto p = schedule_params(sys, e, tg, back.level, 1, 0.1);
  CHECK(p.delta == 0.5);
  std::filesystem::remove_all(dir);
}

TEST_CASE("null step on a translated stationary flow")
{
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal;
  CoefficientSet c{2, 5, {}};
  for (const auto &k : lattice_sphere(2, 5))
  {
    if (!c.entries.count(k))
    {
      const cplx a(normal(rng), normal(rng));
      c.entries[k] = a;
      c.entries[negate(k)] = std::conj(a);
    }
  }
  TorusGrid g(2, 32);
  TimeGrid tg{0, 1, 33};
  auto s = translated_stationary_state(c, 1, {0.3, -0.1, 0.0}, g, tg);
  auto rep = null_step(s);
  CHECK(rep.ok);
  CHECK(rep.max_energy_drift < 1e-12);
  CHECK(rep.max_residual < 1e-6);
  // Negative control: dropping the pressure breaks the balance.
  for (auto &p : s.p)
  {
    p = CarrierField(g, FieldRank::Scalar, 1);
  }
  CHECK_FALSE(null_step(s).ok);
}
