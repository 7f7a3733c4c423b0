// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#include "eulerci/carrier_field.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "eulerci/spectral.hpp"

namespace eulerci
{

namespace
{

const IVec kZero{0, 0, 0};

IVec add(const IVec &a, const IVec &b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

// Wavenumbers of a full complex grid index; nyquist set when any axis sits at n/2.
std::array<int, 3> full_mode(const TorusGrid &g, std::size_t idx, bool &nyquist)
{
  auto ijk = g.unravel(idx);
  std::array<int, 3> q{0, 0, 0};
  nyquist = false;
  for (int a = 0; a < g.dim(); ++a)
  {
    if (2 * ijk[a] == g.n())
    {
      nyquist = true;
    }
    q[a] = wavenumber(ijk[a], g.n());
  }
  return q;
}

std::vector<cplx> to_spectrum(const TorusGrid &g, const cplx *env, int ncomp)
{
  std::vector<cplx> out(static_cast<std::size_t>(ncomp) * g.size());
  for (int c = 0; c < ncomp; ++c)
  {
    fft_forward(g, env + c * g.size(), out.data() + c * g.size());
  }
  return out;
}

template <typename Kernel>
CarrierField product(const CarrierField &a, const CarrierField &b, FieldRank out_rank, Kernel k)
{
  if (!(a.grid() == b.grid()) || a.lambda() != b.lambda())
  {
    throw Error("carrier fields live on different grids or scales");
  }
  CarrierField out(a.grid(), out_rank, a.lambda());
  const std::size_t n = a.size();
  const int na = a.components();
  const int nb = b.components();
  const int no = out.components();
  std::vector<cplx> av(na);
  std::vector<cplx> bv(nb);
  std::vector<cplx> ov(no);
  for (const auto &[ma, ea] : a.carriers())
  {
    for (const auto &[mb, eb] : b.carriers())
    {
      auto &eo = out.carrier(add(ma, mb));
      for (std::size_t p = 0; p < n; ++p)
      {
        for (int c = 0; c < na; ++c)
        {
          av[c] = ea[c * n + p];
        }
        for (int c = 0; c < nb; ++c)
        {
          bv[c] = eb[c * n + p];
        }
        k(av.data(), bv.data(), ov.data());
        for (int c = 0; c < no; ++c)
        {
          eo[c * n + p] += ov[c];
        }
      }
    }
  }
  out.prune();
  return out;
}

// Smallest even 2^a 3^b 5^c >= n; FFT sizes with large prime factors are slow.
int smooth_size(int n)
{
  for (int m = n + n % 2;; m += 2)
  {
    int r = m;
    for (int p : {2, 3, 5})
    {
      while (r % p == 0)
      {
        r /= p;
      }
    }
    if (r == 1)
    {
      return m;
    }
  }
}

}  // namespace

CarrierField::CarrierField(const TorusGrid &grid, FieldRank rank, int lambda)
  : grid_(grid), rank_(rank), ncomp_(rank_components(rank, grid.dim())), lambda_(lambda)
{
  if (lambda < 1)
  {
    throw ConfigError("carrier scale lambda must be a positive integer");
  }
}

CarrierField CarrierField::from_field(const PeriodicField &f, int lambda)
{
  CarrierField out(f.grid(), f.rank(), lambda);
  auto &e = out.carrier(kZero);
  for (std::size_t i = 0; i < e.size(); ++i)
  {
    e[i] = f.data()[i];
  }
  return out;
}

CarrierField::Envelope &CarrierField::carrier(const IVec &m)
{
  auto it = carriers_.find(m);
  if (it == carriers_.end())
  {
    it = carriers_.emplace(m, Envelope(static_cast<std::size_t>(ncomp_) * grid_.size(), 0.0)).first;
  }
  return it->second;
}

const CarrierField::Envelope *CarrierField::find(const IVec &m) const
{
  auto it = carriers_.find(m);
  return it == carriers_.end() ? nullptr : &it->second;
}

bool CarrierField::is_grid_field() const
{
  return carriers_.empty() || (carriers_.size() == 1 && carriers_.begin()->first == kZero);
}

int CarrierField::max_carrier() const
{
  int m = 0;
  for (const auto &[k, e] : carriers_)
  {
    for (int a = 0; a < 3; ++a)
    {
      m = std::max(m, std::abs(k[a]));
    }
  }
  return m;
}

double CarrierField::value(int c, std::size_t idx) const
{
  auto it = carriers_.find(kZero);
  return it == carriers_.end() ? 0.0 : it->second[c * grid_.size() + idx].real();
}

CarrierField CarrierField::with_lambda(int lambda) const
{
  if (lambda == lambda_)
  {
    return *this;
  }
  if (!is_grid_field())
  {
    throw ConfigError("cannot relabel a field that carries fast oscillations");
  }
  CarrierField out(grid_, rank_, lambda);
  out.carriers_ = carriers_;
  return out;
}

void CarrierField::prune()
{
  for (auto it = carriers_.begin(); it != carriers_.end();)
  {
    const bool zero =
      std::all_of(it->second.begin(), it->second.end(), [](const cplx &z) { return z == 0.0; });
    it = zero ? carriers_.erase(it) : std::next(it);
  }
}

void CarrierField::check_compatible(const CarrierField &o) const
{
  if (!(grid_ == o.grid_) || rank_ != o.rank_ || lambda_ != o.lambda_)
  {
    throw Error("incompatible carrier fields (grid, rank or lambda differ)");
  }
}

CarrierField &CarrierField::operator+=(const CarrierField &o)
{
  check_compatible(o);
  for (const auto &[m, e] : o.carriers_)
  {
    auto &mine = carrier(m);
    for (std::size_t i = 0; i < e.size(); ++i)
    {
      mine[i] += e[i];
    }
  }
  return *this;
}

CarrierField &CarrierField::operator-=(const CarrierField &o)
{
  check_compatible(o);
  for (const auto &[m, e] : o.carriers_)
  {
    auto &mine = carrier(m);
    for (std::size_t i = 0; i < e.size(); ++i)
    {
      mine[i] -= e[i];
    }
  }
  return *this;
}

CarrierField &CarrierField::operator*=(double s)
{
  for (auto &[m, e] : carriers_)
  {
    for (auto &z : e)
    {
      z *= s;
    }
  }
  return *this;
}

CarrierField operator+(CarrierField a, const CarrierField &b) { return a += b; }
CarrierField operator-(CarrierField a, const CarrierField &b) { return a -= b; }
CarrierField operator*(double s, CarrierField a) { return a *= s; }

CarrierField apply_operator(SpectralOp op, const CarrierField &f, FieldRank out_rank)
{
  const auto &g = f.grid();
  const int d = g.dim();
  const int nin = op_in_components(op, d, f.components());
  const int nout = op_out_components(op, d, f.components());
  if (nin != f.components())
  {
    throw Error("operator input has the wrong number of components");
  }
  if (rank_components(out_rank, d) != nout)
  {
    throw Error("operator output rank does not match");
  }
  CarrierField out(g, out_rank, f.lambda());
  const std::size_t n = g.size();
  std::vector<cplx> in(nin);
  std::vector<cplx> res(nout);
  for (const auto &[m, env] : f.carriers())
  {
    auto spec = to_spectrum(g, env.data(), nin);
    std::vector<cplx> ospec(static_cast<std::size_t>(nout) * n, 0.0);
    for (std::size_t p = 0; p < n; ++p)
    {
      bool nyq = false;
      auto q = full_mode(g, p, nyq);
      if (nyq)
      {
        continue;
      }
      double qs[3];
      for (int a = 0; a < 3; ++a)
      {
        qs[a] = q[a] + static_cast<double>(f.lambda()) * m[a];
      }
      for (int c = 0; c < nin; ++c)
      {
        in[c] = spec[c * n + p];
      }
      apply_symbol(op, d, qs, in.data(), res.data(), nin);
      for (int c = 0; c < nout; ++c)
      {
        ospec[c * n + p] = res[c];
      }
    }
    auto &e = out.carrier(m);
    for (int c = 0; c < nout; ++c)
    {
      fft_inverse(g, ospec.data() + c * n, e.data() + c * n);
    }
  }
  out.prune();
  return out;
}

CarrierField gradient(const CarrierField &f)
{
  return apply_operator(SpectralOp::Gradient, f, FieldRank::Vector);
}

CarrierField divergence(const CarrierField &f)
{
  switch (f.rank())
  {
    case FieldRank::Vector:
      return apply_operator(SpectralOp::Divergence, f, FieldRank::Scalar);
    case FieldRank::SymTensor:
      return apply_operator(SpectralOp::DivergenceSym, f, FieldRank::Vector);
    case FieldRank::Matrix:
      return apply_operator(SpectralOp::DivergenceMatrix, f, FieldRank::Vector);
    default:
      throw Error("divergence needs a vector or tensor field");
  }
}

CarrierField leray_p(const CarrierField &v)
{
  return apply_operator(SpectralOp::LerayP, v, FieldRank::Vector);
}

CarrierField leray_q(const CarrierField &v)
{
  return apply_operator(SpectralOp::LerayQ, v, FieldRank::Vector);
}

CarrierField div_inverse(const CarrierField &v)
{
  if (v.rank() != FieldRank::Vector)
  {
    throw Error("div_inverse needs a vector field");
  }
  return apply_operator(SpectralOp::DivInverse, v, FieldRank::SymTensor);
}

CarrierField dot(const CarrierField &a, const CarrierField &b)
{
  if (a.rank() != FieldRank::Vector || b.rank() != FieldRank::Vector)
  {
    throw Error("dot needs two vector fields");
  }
  const int d = a.grid().dim();
  return product(a, b, FieldRank::Scalar, [d](const cplx *x, const cplx *y, cplx *o) {
    cplx s = 0.0;
    for (int i = 0; i < d; ++i)
    {
      s += x[i] * y[i];
    }
    o[0] = s;
  });
}

CarrierField sym_outer(const CarrierField &a, const CarrierField &b)
{
  if (a.rank() != FieldRank::Vector || b.rank() != FieldRank::Vector)
  {
    throw Error("sym_outer needs two vector fields");
  }
  const int d = a.grid().dim();
  return product(a, b, FieldRank::SymTensor, [d](const cplx *x, const cplx *y, cplx *o) {
    for (int i = 0; i < d; ++i)
    {
      for (int j = i; j < d; ++j)
      {
        o[sym_index(i, j, d)] = 0.5 * (x[i] * y[j] + x[j] * y[i]);
      }
    }
  });
}

CarrierField outer(const CarrierField &a, const CarrierField &b)
{
  if (a.rank() != FieldRank::Vector || b.rank() != FieldRank::Vector)
  {
    throw Error("outer needs two vector fields");
  }
  const int d = a.grid().dim();
  return product(a, b, FieldRank::Matrix, [d](const cplx *x, const cplx *y, cplx *o) {
    for (int i = 0; i < d; ++i)
    {
      for (int j = 0; j < d; ++j)
      {
        o[i * d + j] = x[i] * y[j];
      }
    }
  });
}

CarrierField multiply(const CarrierField &s, const CarrierField &f)
{
  if (s.rank() != FieldRank::Scalar)
  {
    throw Error("multiply needs a scalar first factor");
  }
  const int nc = f.components();
  return product(s, f, f.rank(), [nc](const cplx *x, const cplx *y, cplx *o) {
    for (int c = 0; c < nc; ++c)
    {
      o[c] = x[0] * y[c];
    }
  });
}

CarrierField scalar_identity(const CarrierField &s)
{
  if (s.rank() != FieldRank::Scalar)
  {
    throw Error("scalar_identity needs a scalar field");
  }
  const int d = s.grid().dim();
  CarrierField out(s.grid(), FieldRank::SymTensor, s.lambda());
  const std::size_t n = s.size();
  for (const auto &[m, e] : s.carriers())
  {
    auto &o = out.carrier(m);
    for (int i = 0; i < d; ++i)
    {
      std::copy(e.begin(), e.end(), o.begin() + sym_index(i, i, d) * n);
    }
  }
  return out;
}

CarrierField symmetrize(const CarrierField &mat)
{
  if (mat.rank() != FieldRank::Matrix)
  {
    throw Error("symmetrize needs a matrix field");
  }
  const int d = mat.grid().dim();
  CarrierField out(mat.grid(), FieldRank::SymTensor, mat.lambda());
  const std::size_t n = mat.size();
  for (const auto &[m, e] : mat.carriers())
  {
    auto &o = out.carrier(m);
    for (int i = 0; i < d; ++i)
    {
      for (int j = i; j < d; ++j)
      {
        for (std::size_t p = 0; p < n; ++p)
        {
          o[sym_index(i, j, d) * n + p] = 0.5 * (e[(i * d + j) * n + p] + e[(j * d + i) * n + p]);
        }
      }
    }
  }
  return out;
}

PeriodicField materialize(const CarrierField &f, const TorusGrid &target)
{
  const auto &g = f.grid();
  if (g.dim() != target.dim())
  {
    throw Error("materialize: dimension mismatch");
  }
  const int d = g.dim();
  const int nc = f.components();
  if (target == g && f.is_grid_field())
  {
    // Pointwise values as they are; no spectral truncation.
    PeriodicField out(target, f.rank());
    if (const auto *e = f.find(kZero))
    {
      for (std::size_t i = 0; i < e->size(); ++i)
      {
        out.data()[i] = (*e)[i].real();
      }
    }
    return out;
  }
  const std::size_t nt = target.size();
  std::vector<cplx> spec(static_cast<std::size_t>(nc) * nt, 0.0);
  double scale = 0.0;
  std::vector<std::pair<std::size_t, cplx>> dropped;
  double dropped_max = 0.0;
  for (const auto &[m, env] : f.carriers())
  {
    auto s = to_spectrum(g, env.data(), nc);
    for (std::size_t p = 0; p < g.size(); ++p)
    {
      bool nyq = false;
      auto q = full_mode(g, p, nyq);
      if (nyq)
      {
        continue;
      }
      std::array<int, 3> ijk{0, 0, 0};
      bool fits = true;
      for (int a = 0; a < d; ++a)
      {
        const long long k = q[a] + static_cast<long long>(f.lambda()) * m[a];
        if (2 * std::llabs(k) >= target.n())
        {
          fits = false;
          break;
        }
        ijk[a] = static_cast<int>(k < 0 ? k + target.n() : k);
      }
      for (int c = 0; c < nc; ++c)
      {
        const cplx z = s[c * g.size() + p];
        scale = std::max(scale, std::abs(z));
        if (fits)
        {
          spec[c * nt + target.ravel(ijk)] += z;
        }
        else
        {
          dropped_max = std::max(dropped_max, std::abs(z));
        }
      }
    }
  }
  if (dropped_max > 1e-12 * std::max(scale, 1e-300))
  {
    throw ConfigError("materialize: carrier frequencies exceed the target grid Nyquist limit");
  }
  PeriodicField out(target, f.rank());
  std::vector<cplx> buf(nt);
  for (int c = 0; c < nc; ++c)
  {
    fft_inverse(target, spec.data() + c * nt, buf.data());
    for (std::size_t i = 0; i < nt; ++i)
    {
      out.at(c, i) = buf[i].real();
    }
  }
  return out;
}

CarrierField collapse(const CarrierField &f)
{
  if (f.is_grid_field())
  {
    return f;
  }
  return CarrierField::from_field(materialize(f, f.grid()), f.lambda());
}

std::vector<double> mean(const CarrierField &f)
{
  const auto &g = f.grid();
  const std::size_t n = g.size();
  std::vector<double> out(f.components(), 0.0);
  for (const auto &[m, env] : f.carriers())
  {
    bool ok = true;
    for (int a = 0; a < g.dim(); ++a)
    {
      if (2 * std::llabs(static_cast<long long>(f.lambda()) * m[a]) >= g.n())
      {
        ok = false;
      }
    }
    if (!ok)
    {
      continue;
    }
    for (int c = 0; c < f.components(); ++c)
    {
      cplx s = 0.0;
      for (std::size_t p = 0; p < n; ++p)
      {
        const auto x = g.coords(p);
        double ph = 0.0;
        for (int a = 0; a < g.dim(); ++a)
        {
          ph += f.lambda() * m[a] * x[a];
        }
        s += env[c * n + p] * std::polar(1.0, ph);
      }
      out[c] += s.real() / static_cast<double>(n);
    }
  }
  return out;
}

std::vector<double> integral(const CarrierField &f)
{
  auto m = mean(f);
  for (auto &x : m)
  {
    x *= f.grid().volume();
  }
  return m;
}

double sup_norm(const CarrierField &f, const TwoScaleSampling &s)
{
  const auto &g = f.grid();
  const int d = g.dim();
  const int nc = f.components();
  const std::size_t n = g.size();
  double best = 0.0;
  std::vector<double> vals(nc);
  if (f.is_grid_field())
  {
    if (f.carriers().empty())
    {
      return 0.0;
    }
    const auto &e = f.carriers().begin()->second;
    for (std::size_t p = 0; p < n; ++p)
    {
      for (int c = 0; c < nc; ++c)
      {
        vals[c] = e[c * n + p].real();
      }
      best = std::max(best, magnitude(f.rank(), d, vals.data()));
    }
    return best;
  }
  const int mm = f.max_carrier();
  int nf = std::max(4, s.oversample * (2 * mm + 2));
  nf = smooth_size(nf);
  TorusGrid fast(d, nf);
  int stride = 1;
  while (true)
  {
    std::size_t count = 1;
    for (int a = 0; a < d; ++a)
    {
      count *= static_cast<std::size_t>((g.n() + stride - 1) / stride);
    }
    if (count <= s.max_slow_points || stride >= g.n())
    {
      break;
    }
    ++stride;
  }
  std::vector<std::size_t> slot;
  std::vector<const CarrierField::Envelope *> envs;
  for (const auto &[m, e] : f.carriers())
  {
    std::array<int, 3> ijk{0, 0, 0};
    for (int a = 0; a < d; ++a)
    {
      ijk[a] = ((m[a] % nf) + nf) % nf;
    }
    slot.push_back(fast.ravel(ijk));
    envs.push_back(&e);
  }
  std::vector<std::vector<cplx>> buf(nc, std::vector<cplx>(fast.size()));
  for (std::size_t p = 0; p < n; ++p)
  {
    auto ijk = g.unravel(p);
    bool take = true;
    for (int a = 0; a < d; ++a)
    {
      take = take && (ijk[a] % stride == 0);
    }
    if (!take)
    {
      continue;
    }
    for (int c = 0; c < nc; ++c)
    {
      std::fill(buf[c].begin(), buf[c].end(), cplx(0.0));
      for (std::size_t i = 0; i < envs.size(); ++i)
      {
        buf[c][slot[i]] += (*envs[i])[c * n + p];
      }
      fft_inverse(fast, buf[c].data(), buf[c].data());
    }
    for (std::size_t xi = 0; xi < fast.size(); ++xi)
    {
      for (int c = 0; c < nc; ++c)
      {
        vals[c] = buf[c][xi].real();
      }
      best = std::max(best, magnitude(f.rank(), d, vals.data()));
    }
  }
  return best;
}

double h_minus1_norm(const CarrierField &f)
{
  const auto &g = f.grid();
  const int d = g.dim();
  const std::size_t n = g.size();
  const int nc = f.components();
  // Distinct carriers cannot share a true wavevector once lambda >= n.
  const bool disjoint = f.carriers().size() <= 1 || f.lambda() >= g.n();
  double total = 0.0;
  std::unordered_map<long long, std::vector<cplx>> acc;
  auto key = [](const std::array<long long, 3> &k) {
    const long long off = 1LL << 20;
    return ((k[0] + off) << 42) | ((k[1] + off) << 21) | (k[2] + off);
  };
  auto weight = [](const std::array<long long, 3> &k) {
    const double k2 = static_cast<double>(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    return k2 == 0.0 ? 1.0 : 1.0 / k2;
  };
  for (const auto &[m, env] : f.carriers())
  {
    auto s = to_spectrum(g, env.data(), nc);
    for (std::size_t p = 0; p < n; ++p)
    {
      bool nyq = false;
      auto q = full_mode(g, p, nyq);
      if (nyq)
      {
        continue;
      }
      std::array<long long, 3> k{0, 0, 0};
      for (int a = 0; a < d; ++a)
      {
        k[a] = q[a] + static_cast<long long>(f.lambda()) * m[a];
      }
      if (disjoint)
      {
        const double w = weight(k);
        for (int c = 0; c < nc; ++c)
        {
          total += std::norm(s[c * n + p]) * w;
        }
      }
      else
      {
        auto &slotv = acc[key(k)];
        if (slotv.empty())
        {
          slotv.assign(nc + 1, 0.0);
          slotv[nc] = weight(k);
        }
        for (int c = 0; c < nc; ++c)
        {
          slotv[c] += s[c * n + p];
        }
      }
    }
  }
  for (const auto &[k, v] : acc)
  {
    for (int c = 0; c < nc; ++c)
    {
      total += std::norm(v[c]) * v[nc].real();
    }
  }
  return std::sqrt(total);
}

}  // namespace eulerci
