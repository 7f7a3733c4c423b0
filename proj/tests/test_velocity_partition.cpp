// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "eulerci/velocity_partition.hpp"

using namespace eulerci;

TEST_CASE("bump profile")
{
  CHECK(bump_1d(0.0) == 1.0);
  CHECK(bump_1d(0.75) == 1.0);
  CHECK(bump_1d(-0.75) == 1.0);
  CHECK(bump_1d(1.0) == 0.0);
  CHECK(bump_1d(-1.3) == 0.0);
  CHECK(bump_1d(0.875) == doctest::Approx(0.5));
  for (double s : {-0.95, -0.8, 0.77, 0.9})
  {
    const double h = 1e-6;
    const double fd = (bump_1d(s + h) - bump_1d(s - h)) / (2 * h);
    CHECK(bump_1d_derivative(s) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("squared partition of unity")
{
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int dim : {2, 3})
  {
    VelocityPartition part(dim, 1);
    for (int s = 0; s < 200; ++s)
    {
      double v[3] = {u(rng), u(rng), u(rng)};
      double sum = 0.0;
      for (const auto &l : part.active_cells(v))
      {
        const double a = part.alpha(l, v);
        CHECK(a >= 0.0);
        sum += a * a;
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    double at[3] = {2.0, -1.0, 3.0};
    CHECK(part.alpha({2, -1, dim == 3 ? 3 : 0}, at) == 1.0);
    CHECK(part.alpha({3, -1, dim == 3 ? 3 : 0}, at) == 0.0);
  }
  VelocityPartition part(2, 1);
  double mid[3] = {0.5, 0.0, 0.0};
  CHECK(std::abs(part.alpha({0, 0, 0}, mid) - part.alpha({1, 0, 0}, mid)) < 1e-12);
  CHECK(part.class_of({1, -2, 0}) == 1);
  CHECK(part.class_of({-1, 3, 0}) == 3);
}

TEST_CASE("alpha gradient matches finite differences")
{
  VelocityPartition part(3, 1);
  double v[3] = {0.1, 0.83, -0.12};
  double g[3];
  const IVec l{0, 1, 0};
  part.alpha(l, v, g);
  for (int a = 0; a < 3; ++a)
  {
    double vp[3] = {v[0], v[1], v[2]};
    double vm[3] = {v[0], v[1], v[2]};
    vp[a] += 1e-6;
    vm[a] -= 1e-6;
    const double fd = (part.alpha(l, vp) - part.alpha(l, vm)) / 2e-6;
    CHECK(g[a] == doctest::Approx(fd).epsilon(1e-5).scale(1e-8));
  }
}

TEST_CASE("phase functions")
{
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> t(0.0, 50.0);
  for (int dim : {2, 3})
  {
    VelocityPartition part(dim, 8);
    const IVec k = dim == 2 ? IVec{6, 17, 0} : IVec{1, 2, 6};
    for (int s = 0; s < 100; ++s)
    {
      double v[3] = {u(rng), u(rng), u(rng)};
      const double tau = t(rng);
      double total = 0.0;
      for (int j = 0; j < part.class_count(); ++j)
      {
        auto p = part.phi(j, k, v, tau);
        auto pm = part.phi(j, negate(k), v, tau);
        CHECK(std::abs(std::conj(p) - pm) < 1e-14);
        double mods = 0.0;
        double mv[3] = {8 * v[0], 8 * v[1], 8 * v[2]};
        for (const auto &l : part.active_cells(mv))
        {
          if (part.class_of(l) == j)
          {
            mods += std::pow(part.alpha(l, mv), 2);
          }
        }
        CHECK(std::abs(std::norm(p) - mods) < 1e-12);
        total += std::norm(p);
        // Triangle-inequality bound on the defect.
        const double kn = std::sqrt(static_cast<double>(norm2(k)));
        CHECK(std::abs(part.transport_defect(j, k, v, tau)) <= kn * std::sqrt(dim) / 8.0 + 1e-12);
      }
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
  }
  VelocityPartition part(2, 4);
  double v[3] = {0.5, -0.25, 0.0};  // mu v = (2, -1), class 2
  const IVec k{1, 2, 0};
  const double tau = 3.7;
  auto p = part.phi(2, k, v, tau);
  const double om = (1 * 2 + 2 * -1) / 4.0;
  CHECK(std::abs(p - std::exp(cplx(0.0, -om * tau))) < 1e-15);
  CHECK(std::abs(part.phi(0, k, v, tau)) == 0.0);
  CHECK(std::abs(part.transport_defect(2, k, v, tau)) < 1e-15);
  double w[3] = {0.3, 0.1, 0.0};
  CHECK(std::abs(part.phi(0, k, w, 0.0).imag()) == 0.0);
}

TEST_CASE("phi gradient matches finite differences")
{
  VelocityPartition part(2, 4);
  const IVec k{17, 6, 0};
  double v[3] = {0.21, -0.07, 0.0};
  auto full = part.phi_full(1, k, v, 2.5);
  for (int a = 0; a < 2; ++a)
  {
    double vp[3] = {v[0], v[1], 0.0};
    double vm[3] = {v[0], v[1], 0.0};
    vp[a] += 1e-7;
    vm[a] -= 1e-7;
    auto fd = (part.phi(1, k, vp, 2.5) - part.phi(1, k, vm, 2.5)) / 2e-7;
    CHECK(std::abs(full.dv[a] - fd) < 1e-5);
  }
  auto fdt = (part.phi(1, k, v, 2.5 + 1e-6) - part.phi(1, k, v, 2.5 - 1e-6)) / 2e-6;
  CHECK(std::abs(full.dtau - fdt) < 1e-6);
}

TEST_CASE("transport defect scales like 1/mu")
{
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> t(0.0, 20.0);
  std::vector<std::array<double, 4>> samples(2000);
  for (auto &s : samples)
  {
    s = {u(rng), u(rng), 0.0, t(rng)};
  }
  const IVec k{1, 2, 0};
  std::vector<double> lx;
  std::vector<double> ly;
  for (int mu : {4, 8, 16, 32})
  {
    VelocityPartition part(2, mu);
    double best = 0.0;
    for (const auto &s : samples)
    {
      for (int j = 0; j < 4; ++j)
      {
        best = std::max(best, std::abs(part.transport_defect(j, k, s.data(), s[3])));
      }
    }
    lx.push_back(std::log(mu));
    ly.push_back(std::log(best));
  }
  double mx = 0.0;
  double my = 0.0;
  for (int i = 0; i < 4; ++i)
  {
    mx += lx[i] / 4;
    my += ly[i] / 4;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (int i = 0; i < 4; ++i)
  {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  CHECK(slope >= -1.3);
  CHECK(slope <= -0.7);
}
