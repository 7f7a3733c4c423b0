// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#include "eulerci/velocity_partition.hpp"

#include <cmath>

#include "eulerci/field.hpp"

namespace eulerci
{

namespace
{

double f_exp(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
double f_exp_prime(double u) { return u > 0.0 ? std::exp(-1.0 / u) / (u * u) : 0.0; }

// Smooth step: 0 for u <= 0, 1 for u >= 1.
double step(double u)
{
  const double a = f_exp(u);
  const double b = f_exp(1.0 - u);
  return a / (a + b);
}

double step_prime(double u)
{
  const double a = f_exp(u);
  const double b = f_exp(1.0 - u);
  const double s = a + b;
  if (s == 0.0)
  {
    return 0.0;
  }
  const double da = f_exp_prime(u);
  const double db = -f_exp_prime(1.0 - u);
  return (da * s - a * (da + db)) / (s * s);
}

}  // namespace

double bump_1d(double s) { return step(4.0 * (1.0 - std::abs(s))); }

double bump_1d_derivative(double s)
{
  const double u = 4.0 * (1.0 - std::abs(s));
  const double sign = s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0);
  return -4.0 * sign * step_prime(u);
}

VelocityPartition::VelocityPartition(int dim, int mu) : dim_(dim), mu_(mu)
{
  if (dim != 2 && dim != 3)
  {
    throw Error("velocity partition needs dim 2 or 3");
  }
  if (mu < 1)
  {
    throw Error("mu must be a positive integer");
  }
}

int VelocityPartition::class_of(const IVec &l) const
{
  int c = 0;
  for (int a = 0; a < dim_; ++a)
  {
    if (((l[a] % 2) + 2) % 2 == 1)
    {
      c |= 1 << a;
    }
  }
  return c;
}

double VelocityPartition::bump(const double *x, double *grad) const
{
  double vals[3];
  double ders[3];
  double prod = 1.0;
  for (int a = 0; a < dim_; ++a)
  {
    vals[a] = bump_1d(x[a]);
    ders[a] = bump_1d_derivative(x[a]);
    prod *= vals[a];
  }
  if (grad != nullptr)
  {
    for (int a = 0; a < dim_; ++a)
    {
      double g = ders[a];
      for (int b = 0; b < dim_; ++b)
      {
        if (b != a)
        {
          g *= vals[b];
        }
      }
      grad[a] = g;
    }
  }
  return prod;
}

std::vector<IVec> VelocityPartition::active_cells(const double *v) const
{
  std::vector<IVec> out;
  int lo[3];
  for (int a = 0; a < dim_; ++a)
  {
    lo[a] = static_cast<int>(std::floor(v[a]));
  }
  for (int mask = 0; mask < (1 << dim_); ++mask)
  {
    IVec l{0, 0, 0};
    bool ok = true;
    for (int a = 0; a < dim_; ++a)
    {
      l[a] = lo[a] + ((mask >> a) & 1);
      if (std::abs(v[a] - l[a]) >= 1.0)
      {
        ok = false;
      }
    }
    if (ok)
    {
      out.push_back(l);
    }
  }
  return out;
}

double VelocityPartition::alpha(const IVec &l, const double *v) const
{
  return alpha(l, v, nullptr);
}

double VelocityPartition::alpha(const IVec &l, const double *v, double *grad) const
{
  // alpha_l = phi_l / sqrt(S), S = sum_m phi_m^2 over the active cells.
  auto cells = active_cells(v);
  double S = 0.0;
  double dS[3] = {0.0, 0.0, 0.0};
  double phil = 0.0;
  double dphil[3] = {0.0, 0.0, 0.0};
  for (const auto &m : cells)
  {
    double x[3];
    double g[3];
    for (int a = 0; a < dim_; ++a)
    {
      x[a] = v[a] - m[a];
    }
    const double p = bump(x, g);
    S += p * p;
    for (int a = 0; a < dim_; ++a)
    {
      dS[a] += 2.0 * p * g[a];
    }
    if (m == l)
    {
      phil = p;
      for (int a = 0; a < dim_; ++a)
      {
        dphil[a] = g[a];
      }
    }
  }
  const double root = std::sqrt(S);
  if (grad != nullptr)
  {
    for (int a = 0; a < dim_; ++a)
    {
      grad[a] = dphil[a] / root - 0.5 * phil * dS[a] / (S * root);
    }
  }
  return phil / root;
}

cplx VelocityPartition::phi(int j, const IVec &k, const double *v, double tau) const
{
  return phi_full(j, k, v, tau).value;
}

PhaseValue VelocityPartition::phi_full(int j, const IVec &k, const double *v, double tau) const
{
  double mv[3];
  for (int a = 0; a < dim_; ++a)
  {
    mv[a] = mu_ * v[a];
  }
  PhaseValue out;
  for (const auto &l : active_cells(mv))
  {
    if (class_of(l) != j)
    {
      continue;
    }
    double g[3];
    const double al = alpha(l, mv, g);
    double kl = 0.0;
    for (int a = 0; a < dim_; ++a)
    {
      kl += k[a] * l[a];
    }
    const double omega = kl / mu_;
    const cplx e(std::cos(omega * tau), -std::sin(omega * tau));
    out.value += al * e;
    out.dtau += al * cplx(0.0, -omega) * e;
    for (int a = 0; a < dim_; ++a)
    {
      out.dv[a] += mu_ * g[a] * e;
    }
  }
  return out;
}

cplx VelocityPartition::transport_defect(int j, const IVec &k, const double *v, double tau) const
{
  auto p = phi_full(j, k, v, tau);
  double kv = 0.0;
  for (int a = 0; a < dim_; ++a)
  {
    kv += k[a] * v[a];
  }
  return p.dtau + cplx(0.0, kv) * p.value;
}

}  // namespace eulerci
