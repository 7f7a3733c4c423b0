// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#include "eulerci/stationary_flows.hpp"

#include <algorithm>
#include <cmath>

#include "eulerci/spectral.hpp"

namespace eulerci
{

IVec negate(const IVec &k) { return {-k[0], -k[1], -k[2]}; }

int norm2(const IVec &k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }

std::vector<IVec> lattice_sphere(int dim, int nu)
{
  std::vector<IVec> out;
  if (nu < 1)
  {
    return out;
  }
  const int r = static_cast<int>(std::floor(std::sqrt(static_cast<double>(nu)))) + 1;
  for (int a = -r; a <= r; ++a)
  {
    for (int b = -r; b <= r; ++b)
    {
      if (dim == 2)
      {
        if (a * a + b * b == nu)
        {
          out.push_back({a, b, 0});
        }
        continue;
      }
      const int rest = nu - a * a - b * b;
      if (rest < 0)
      {
        continue;
      }
      const int c = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rest))));
      if (c * c != rest)
      {
        continue;
      }
      out.push_back({a, b, c});
      if (c != 0)
      {
        out.push_back({a, b, -c});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::array<double, 3> beltrami_axis(const IVec &k)
{
  if (norm2(k) == 0)
  {
    throw Error("wave vector k = 0 has no Beltrami basis");
  }
  for (int e = 0; e < 3; ++e)
  {
    // k x e_e
    std::array<double, 3> ev{0.0, 0.0, 0.0};
    ev[e] = 1.0;
    std::array<double, 3> a{k[1] * ev[2] - k[2] * ev[1], k[2] * ev[0] - k[0] * ev[2],
                            k[0] * ev[1] - k[1] * ev[0]};
    const double len = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
    if (len < 1e-12)
    {
      continue;
    }
    for (auto &x : a)
    {
      x /= len;
    }
    for (int c = 0; c < 3; ++c)
    {
      if (std::abs(a[c]) > 1e-12)
      {
        if (a[c] < 0)
        {
          for (auto &x : a)
          {
            x = -x;
          }
        }
        break;
      }
    }
    return a;
  }
  throw Error("no Beltrami axis found");
}

CVec beltrami_vector(const IVec &k)
{
  auto a = beltrami_axis(k);
  const double len = std::sqrt(static_cast<double>(norm2(k)));
  const std::array<double, 3> kh{k[0] / len, k[1] / len, k[2] / len};
  const std::array<double, 3> b{kh[1] * a[2] - kh[2] * a[1], kh[2] * a[0] - kh[0] * a[2],
                                kh[0] * a[1] - kh[1] * a[0]};
  const double s = 1.0 / std::sqrt(2.0);
  return {cplx(a[0], b[0]) * s, cplx(a[1], b[1]) * s, cplx(a[2], b[2]) * s};
}

std::map<IVec, CVec> beltrami_basis(int nu, const std::vector<IVec> &directions)
{
  std::map<IVec, CVec> out;
  for (const auto &k : directions)
  {
    if (norm2(k) != nu)
    {
      throw Error("direction does not lie on |k|^2 = nu");
    }
    out[k] = beltrami_vector(k);
  }
  return out;
}

CVec polarization(int dim, const IVec &k)
{
  const double len = std::sqrt(static_cast<double>(norm2(k)));
  if (len == 0.0)
  {
    throw Error("wave vector k = 0");
  }
  if (dim == 2)
  {
    return {cplx(0.0, -k[1] / len), cplx(0.0, k[0] / len), 0.0};
  }
  auto B = beltrami_vector(k);
  const double s = std::sqrt(2.0);
  return {B[0] * s, B[1] * s, B[2] * s};
}

Eigen::MatrixXd projector(int dim, const IVec &k)
{
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim, dim);
  const double k2 = norm2(k);
  for (int i = 0; i < dim; ++i)
  {
    for (int j = 0; j < dim; ++j)
    {
      m(i, j) -= k[i] * k[j] / k2;
    }
  }
  return m;
}

void CoefficientSet::validate(double tol) const
{
  for (const auto &[k, a] : entries)
  {
    if (norm2(k) != nu)
    {
      throw Error("coefficient on a wave vector with |k|^2 != nu");
    }
    auto it = entries.find(negate(k));
    if (it == entries.end() || std::abs(std::conj(a) - it->second) > tol)
    {
      throw Error("coefficient set violates conj(a_k) = a_{-k}");
    }
  }
}

StationaryFlow assemble_flow(const CoefficientSet &c, int lambda, const TorusGrid &grid)
{
  c.validate();
  const int d = grid.dim();
  if (d != c.dim)
  {
    throw Error("coefficient set and grid dimensions differ");
  }
  for (const auto &[k, a] : c.entries)
  {
    for (int ax = 0; ax < d; ++ax)
    {
      if (2 * std::abs(lambda * k[ax]) >= grid.n())
      {
        throw ConfigError("flow frequency lambda*k is not resolved by the grid (aliasing)");
      }
    }
  }
  StationaryFlow out{PeriodicField(grid, FieldRank::Vector), std::nullopt, 0.0};
  if (d == 2)
  {
    out.Psi = PeriodicField(grid, FieldRank::Scalar);
  }
  // Per-axis exponentials e^{i lambda k_a x_a} make the sum separable per term.
  const int n = grid.n();
  std::vector<cplx> w(static_cast<std::size_t>(d) * grid.size(), 0.0);
  std::vector<cplx> psi(d == 2 ? grid.size() : 0, 0.0);
  std::vector<cplx> ex(static_cast<std::size_t>(3) * n);
  for (const auto &[k, a] : c.entries)
  {
    for (int ax = 0; ax < d; ++ax)
    {
      for (int i = 0; i < n; ++i)
      {
        // Reduce the phase index exactly before converting to an angle.
        const long long ph = (static_cast<long long>(lambda) * k[ax] * i) % n;
        const double ang = kTwoPi * static_cast<double>(ph) / n;
        ex[ax * n + i] = cplx(std::cos(ang), std::sin(ang));
      }
    }
    auto pol = polarization(d, k);
    const double inv_len = 1.0 / std::sqrt(static_cast<double>(norm2(k)));
    for (std::size_t p = 0; p < grid.size(); ++p)
    {
      auto ijk = grid.unravel(p);
      cplx e = a;
      for (int ax = 0; ax < d; ++ax)
      {
        e *= ex[ax * n + ijk[ax]];
      }
      for (int comp = 0; comp < d; ++comp)
      {
        w[comp * grid.size() + p] += e * pol[comp];
      }
      if (d == 2)
      {
        psi[p] += e * inv_len;
      }
    }
  }
  for (std::size_t i = 0; i < w.size(); ++i)
  {
    out.imag_residue = std::max(out.imag_residue, std::abs(w[i].imag()));
    out.W.data()[i] = w[i].real();
  }
  for (std::size_t i = 0; i < psi.size(); ++i)
  {
    out.imag_residue = std::max(out.imag_residue, std::abs(psi[i].imag()));
    out.Psi->data()[i] = psi[i].real();
  }
  out.W.divergence_free = true;
  return out;
}

double stationarity_residual(const StationaryFlow &flow, double nu)
{
  const auto &W = flow.W;
  auto flux = divergence(sym_outer(W, W));
  auto P = dot(W, W);
  P *= 0.5;
  if (flow.Psi)
  {
    auto ps = flow.Psi->component(0);
    auto pp = P.component(0);
    for (std::size_t i = 0; i < pp.size(); ++i)
    {
      pp[i] += 0.5 * nu * ps[i] * ps[i];
    }
  }
  flux -= gradient(P);
  return sup_norm(flux);
}

Eigen::MatrixXd average_ww(const CoefficientSet &c)
{
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(c.dim, c.dim);
  for (const auto &[k, a] : c.entries)
  {
    m += std::norm(a) * projector(c.dim, k);
  }
  return m;
}

Eigen::MatrixXd grid_average_ww(const PeriodicField &W)
{
  const int d = W.grid().dim();
  auto avg = mean(sym_outer(W, W));
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
  {
    for (int j = 0; j < d; ++j)
    {
      m(i, j) = avg[sym_index(i, j, d)];
    }
  }
  return m;
}

}  // namespace eulerci
