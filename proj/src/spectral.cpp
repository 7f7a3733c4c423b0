// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#include "eulerci/spectral.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include "json.hpp"
#include <tuple>

namespace eulerci
{

namespace
{

enum class PlanKind
{
  R2C,
  C2R,
  C2CForward,
  C2CBackward
};

// FFTW planning is not thread-safe, so plans are created once under a lock and
// executed through the new-array interface afterwards.
class PlanCache
{
public:
  static PlanCache &instance()
  {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(PlanKind kind, const TorusGrid &grid)
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_tuple(static_cast<int>(kind), grid.dim(), grid.n());
    auto it = plans_.find(key);
    if (it != plans_.end())
    {
      return it->second;
    }
    int dims[3] = {grid.n(), grid.n(), grid.n()};
    const std::size_t n = grid.size();
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    auto *rbuf = fftw_alloc_real(n);
    auto *cbuf = fftw_alloc_complex(n);
    fftw_plan p = nullptr;
    switch (kind)
    {
      case PlanKind::R2C:
        p = fftw_plan_dft_r2c(grid.dim(), dims, rbuf, cbuf, flags);
        break;
      case PlanKind::C2R:
        p = fftw_plan_dft_c2r(grid.dim(), dims, cbuf, rbuf, flags);
        break;
      case PlanKind::C2CForward:
        p = fftw_plan_dft(grid.dim(), dims, cbuf, cbuf, FFTW_FORWARD, flags);
        break;
      case PlanKind::C2CBackward:
        p = fftw_plan_dft(grid.dim(), dims, cbuf, cbuf, FFTW_BACKWARD, flags);
        break;
    }
    fftw_free(rbuf);
    fftw_free(cbuf);
    if (p == nullptr)
    {
      throw Error("FFTW planning failed");
    }
    plans_.emplace(key, p);
    return p;
  }

  ~PlanCache()
  {
    for (auto &[k, p] : plans_)
    {
      fftw_destroy_plan(p);
    }
  }

private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

fftw_complex *as_fftw(cplx *p) { return reinterpret_cast<fftw_complex *>(p); }

// Restores f(-k) = conj f(k) on the k_last = 0 and k_last = n/2 planes.
void enforce_hermitian(const TorusGrid &grid, cplx *s)
{
  const int n = grid.n();
  const int h = n / 2 + 1;
  const std::size_t rows = grid.half_spectrum_size() / h;
  for (int last : {0, n / 2})
  {
    for (std::size_t r = 0; r < rows; ++r)
    {
      // Row index encodes the leading axes; find its negation.
      std::size_t mirror = 0;
      std::size_t rr = r;
      std::size_t mul = 1;
      for (int a = grid.dim() - 2; a >= 0; --a)
      {
        int i = static_cast<int>(rr % n);
        rr /= n;
        mirror += static_cast<std::size_t>((n - i) % n) * mul;
        mul *= n;
      }
      if (mirror < r)
      {
        continue;
      }
      cplx &a = s[r * h + last];
      cplx &b = s[mirror * h + last];
      if (mirror == r)
      {
        a = cplx(a.real(), 0.0);
      }
      else
      {
        const cplx avg = 0.5 * (a + std::conj(b));
        a = avg;
        b = std::conj(avg);
      }
    }
  }
}

}  // namespace

std::array<int, 3> half_mode_wavevector(const TorusGrid &grid, std::size_t m, bool *nyquist)
{
  const int n = grid.n();
  const int h = n / 2 + 1;
  std::array<int, 3> k{0, 0, 0};
  const int d = grid.dim();
  int last = static_cast<int>(m % h);
  m /= h;
  k[d - 1] = last;
  bool nyq = last == n / 2;
  for (int a = d - 2; a >= 0; --a)
  {
    int i = static_cast<int>(m % n);
    m /= n;
    nyq = nyq || i == n / 2;
    k[a] = wavenumber(i, n);
  }
  if (nyquist != nullptr)
  {
    *nyquist = nyq;
  }
  return k;
}

HalfSpectrum forward(const PeriodicField &f)
{
  const auto &grid = f.grid();
  HalfSpectrum s{grid, f.components(), {}};
  s.data.resize(static_cast<std::size_t>(s.ncomp) * s.modes());
  auto plan = PlanCache::instance().get(PlanKind::R2C, grid);
  std::vector<double> buf(grid.size());
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (int c = 0; c < s.ncomp; ++c)
  {
    auto comp = f.component(c);
    for (double x : comp)
    {
      if (!std::isfinite(x))
      {
        throw Error("non-finite sample in field passed to forward transform");
      }
    }
    std::copy(comp.begin(), comp.end(), buf.begin());
    fftw_execute_dft_r2c(plan, buf.data(), as_fftw(s.component(c)));
    cplx *out = s.component(c);
    for (std::size_t m = 0; m < s.modes(); ++m)
    {
      out[m] *= scale;
    }
  }
  return s;
}

PeriodicField inverse(const HalfSpectrum &s, FieldRank rank)
{
  PeriodicField f(s.grid, rank);
  if (f.components() != s.ncomp)
  {
    throw Error("spectrum component count does not match the requested rank");
  }
  auto plan = PlanCache::instance().get(PlanKind::C2R, s.grid);
  std::vector<cplx> buf(s.modes());
  for (int c = 0; c < s.ncomp; ++c)
  {
    std::copy(s.component(c), s.component(c) + s.modes(), buf.begin());
    fftw_execute_dft_c2r(plan, as_fftw(buf.data()), f.component(c).data());
  }
  return f;
}

void fft_forward(const TorusGrid &grid, const cplx *in, cplx *out)
{
  auto plan = PlanCache::instance().get(PlanKind::C2CForward, grid);
  if (in != out)
  {
    std::copy(in, in + grid.size(), out);
  }
  fftw_execute_dft(plan, as_fftw(out), as_fftw(out));
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
  {
    out[i] *= scale;
  }
}

void fft_inverse(const TorusGrid &grid, const cplx *in, cplx *out)
{
  auto plan = PlanCache::instance().get(PlanKind::C2CBackward, grid);
  if (in != out)
  {
    std::copy(in, in + grid.size(), out);
  }
  fftw_execute_dft(plan, as_fftw(out), as_fftw(out));
}

PeriodicField apply_operator(SpectralOp op, const PeriodicField &f, FieldRank out_rank)
{
  const auto &grid = f.grid();
  const int d = grid.dim();
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
  auto in = forward(f);
  HalfSpectrum out{grid, nout, {}};
  out.data.assign(static_cast<std::size_t>(nout) * out.modes(), 0.0);
  cplx vin[9];
  cplx vout[9];
  double q[3];
  const std::size_t M = in.modes();
  for (std::size_t m = 0; m < M; ++m)
  {
    bool nyq = false;
    auto k = half_mode_wavevector(grid, m, &nyq);
    if (nyq)
    {
      continue;
    }
    for (int a = 0; a < d; ++a)
    {
      q[a] = k[a];
    }
    for (int c = 0; c < nin; ++c)
    {
      vin[c] = in.data[c * M + m];
    }
    apply_symbol(op, d, q, vin, vout, f.components());
    for (int c = 0; c < nout; ++c)
    {
      out.data[c * M + m] = vout[c];
    }
  }
  for (int c = 0; c < nout; ++c)
  {
    enforce_hermitian(grid, out.component(c));
  }
  return inverse(out, out_rank);
}

PeriodicField gradient(const PeriodicField &f)
{
  return apply_operator(SpectralOp::Gradient, f, FieldRank::Vector);
}

PeriodicField perp_gradient(const PeriodicField &f)
{
  return apply_operator(SpectralOp::PerpGradient, f, FieldRank::Vector);
}

PeriodicField divergence(const PeriodicField &f)
{
  if (f.rank() == FieldRank::Vector)
  {
    return apply_operator(SpectralOp::Divergence, f, FieldRank::Scalar);
  }
  if (f.rank() == FieldRank::SymTensor)
  {
    return apply_operator(SpectralOp::DivergenceSym, f, FieldRank::Vector);
  }
  throw Error("divergence needs a vector or symmetric tensor field");
}

PeriodicField laplacian(const PeriodicField &f)
{
  return apply_operator(SpectralOp::Laplacian, f, f.rank());
}

PeriodicField curl(const PeriodicField &f)
{
  return apply_operator(SpectralOp::Curl, f, FieldRank::Vector);
}

PeriodicField poisson_solve(const PeriodicField &f)
{
  return apply_operator(SpectralOp::Poisson, f, f.rank());
}

PeriodicField leray_p(const PeriodicField &v)
{
  auto out = apply_operator(SpectralOp::LerayP, v, FieldRank::Vector);
  out.divergence_free = true;
  return out;
}

PeriodicField leray_q(const PeriodicField &v)
{
  return apply_operator(SpectralOp::LerayQ, v, FieldRank::Vector);
}

PeriodicField div_inverse(const PeriodicField &v)
{
  if (v.rank() != FieldRank::Vector)
  {
    throw Error("div_inverse needs a vector field");
  }
  auto out = apply_operator(SpectralOp::DivInverse, v, FieldRank::SymTensor);
  out.trace_free = true;
  return out;
}

PeriodicField dot(const PeriodicField &a, const PeriodicField &b)
{
  if (a.rank() != FieldRank::Vector || b.rank() != FieldRank::Vector)
  {
    throw Error("dot needs two vector fields");
  }
  PeriodicField out(a.grid(), FieldRank::Scalar);
  auto o = out.component(0);
  for (int c = 0; c < a.components(); ++c)
  {
    auto x = a.component(c);
    auto y = b.component(c);
    for (std::size_t i = 0; i < o.size(); ++i)
    {
      o[i] += x[i] * y[i];
    }
  }
  return out;
}

PeriodicField sym_outer(const PeriodicField &a, const PeriodicField &b)
{
  const int d = a.grid().dim();
  PeriodicField out(a.grid(), FieldRank::SymTensor);
  for (int i = 0; i < d; ++i)
  {
    for (int j = i; j < d; ++j)
    {
      auto o = out.component(sym_index(i, j, d));
      auto ai = a.component(i);
      auto aj = a.component(j);
      auto bi = b.component(i);
      auto bj = b.component(j);
      for (std::size_t p = 0; p < o.size(); ++p)
      {
        o[p] = 0.5 * (ai[p] * bj[p] + aj[p] * bi[p]);
      }
    }
  }
  return out;
}

PeriodicField identity_tensor(const TorusGrid &grid, double scale)
{
  PeriodicField out(grid, FieldRank::SymTensor);
  for (int i = 0; i < grid.dim(); ++i)
  {
    auto o = out.component(sym_index(i, i, grid.dim()));
    std::fill(o.begin(), o.end(), scale);
  }
  return out;
}

PeriodicField trace(const PeriodicField &tensor)
{
  const int d = tensor.grid().dim();
  PeriodicField out(tensor.grid(), FieldRank::Scalar);
  auto o = out.component(0);
  for (int i = 0; i < d; ++i)
  {
    auto t = tensor.component(sym_index(i, i, d));
    for (std::size_t p = 0; p < o.size(); ++p)
    {
      o[p] += t[p];
    }
  }
  return out;
}

double matrix_operator_norm(int dim, const double *s)
{
  if (dim == 2)
  {
    const double m = 0.5 * (s[0] + s[2]);
    const double h = 0.5 * (s[0] - s[2]);
    return std::abs(m) + std::hypot(h, s[1]);
  }
  Eigen::Matrix3d a;
  a << s[0], s[1], s[2], s[1], s[3], s[4], s[2], s[4], s[5];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
  es.computeDirect(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double magnitude(FieldRank rank, int dim, const double *comps)
{
  switch (rank)
  {
    case FieldRank::Scalar:
      return std::abs(comps[0]);
    case FieldRank::Vector:
    {
      double s = 0.0;
      for (int c = 0; c < dim; ++c)
      {
        s += comps[c] * comps[c];
      }
      return std::sqrt(s);
    }
    case FieldRank::SymTensor:
      return matrix_operator_norm(dim, comps);
    case FieldRank::Matrix:
    {
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        comps, dim, dim);
      return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
    }
  }
  return 0.0;
}

double pointwise_magnitude(const PeriodicField &f, std::size_t idx)
{
  double v[9];
  for (int c = 0; c < f.components(); ++c)
  {
    v[c] = f.at(c, idx);
  }
  return magnitude(f.rank(), f.grid().dim(), v);
}

std::vector<double> mean(const PeriodicField &f)
{
  std::vector<double> out(f.components(), 0.0);
  for (int c = 0; c < f.components(); ++c)
  {
    // Pairwise-free but compensated summation keeps means at round-off level.
    double s = 0.0;
    double comp = 0.0;
    for (double x : f.component(c))
    {
      const double y = x - comp;
      const double t = s + y;
      comp = (t - s) - y;
      s = t;
    }
    out[c] = s / static_cast<double>(f.size());
  }
  return out;
}

std::vector<double> integral(const PeriodicField &f)
{
  auto m = mean(f);
  for (auto &x : m)
  {
    x *= f.grid().volume();
  }
  return m;
}

double sup_norm(const PeriodicField &f)
{
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
  {
    s = std::max(s, pointwise_magnitude(f, i));
  }
  return s;
}

double holder_seminorm(const PeriodicField &f, double alpha, int radius)
{
  if (!(alpha > 0.0 && alpha < 1.0))
  {
    throw Error("Hölder exponent must lie in (0, 1)");
  }
  const auto &grid = f.grid();
  const int d = grid.dim();
  std::vector<std::array<int, 3>> offsets;
  for (int i = -radius; i <= radius; ++i)
  {
    for (int j = -radius; j <= radius; ++j)
    {
      for (int k = (d == 3 ? -radius : 0); k <= (d == 3 ? radius : 0); ++k)
      {
        std::array<int, 3> o{i, j, k};
        const int r2 = i * i + j * j + k * k;
        if (r2 == 0 || r2 > radius * radius)
        {
          continue;
        }
        // Keep one of each +-o pair.
        if (std::lexicographical_compare(o.begin(), o.end(), std::array<int, 3>{0, 0, 0}.begin(),
                                         std::array<int, 3>{0, 0, 0}.end()))
        {
          continue;
        }
        offsets.push_back(o);
      }
    }
  }
  const int nc = f.components();
  double best = 0.0;
  double diff[9];
  for (const auto &o : offsets)
  {
    const double dist = grid.spacing() *
                        std::sqrt(static_cast<double>(o[0] * o[0] + o[1] * o[1] + o[2] * o[2]));
    const double denom = std::pow(dist, alpha);
    for (std::size_t p = 0; p < f.size(); ++p)
    {
      auto ijk = grid.unravel(p);
      for (int a = 0; a < d; ++a)
      {
        ijk[a] += o[a];
      }
      const std::size_t q = grid.ravel(ijk);
      double mag = 0.0;
      for (int c = 0; c < nc; ++c)
      {
        diff[c] = f.at(c, q) - f.at(c, p);
      }
      mag = magnitude(f.rank(), d, diff);
      best = std::max(best, mag / denom);
    }
  }
  return best;
}

double h_minus1_norm(const PeriodicField &f)
{
  auto s = forward(f);
  const auto &grid = f.grid();
  const int n = grid.n();
  const int h = n / 2 + 1;
  double total = 0.0;
  for (std::size_t m = 0; m < s.modes(); ++m)
  {
    auto k = half_mode_wavevector(grid, m);
    const int last = static_cast<int>(m % h);
    const double weight = (last == 0 || last == n / 2) ? 1.0 : 2.0;
    const double k2 = static_cast<double>(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    const double denom = k2 == 0.0 ? 1.0 : k2;
    for (int c = 0; c < s.ncomp; ++c)
    {
      total += weight * std::norm(s.data[c * s.modes() + m]) / denom;
    }
  }
  return std::sqrt(total);
}

double oscillatory_integral_probe(const PeriodicField &a, const std::array<int, 3> &k, int lambda)
{
  if (a.rank() != FieldRank::Scalar)
  {
    throw Error("oscillatory probe needs a scalar field");
  }
  const auto &grid = a.grid();
  for (int ax = 0; ax < grid.dim(); ++ax)
  {
    if (2 * std::abs(lambda * k[ax]) >= grid.n())
    {
      throw ConfigError("probe frequency is not resolved by the grid (aliasing)");
    }
  }
  cplx s = 0.0;
  auto comp = a.component(0);
  for (std::size_t p = 0; p < grid.size(); ++p)
  {
    auto x = grid.coords(p);
    double phase = 0.0;
    for (int ax = 0; ax < grid.dim(); ++ax)
    {
      phase += lambda * k[ax] * x[ax];
    }
    s += comp[p] * cplx(std::cos(phase), std::sin(phase));
  }
  return std::abs(s) * grid.volume() / static_cast<double>(grid.size());
}

void write_pfield(const std::string &path, const PeriodicField &f, double time)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error("cannot open '" + path + "' for writing");
  }
  nlohmann::json header = {{"format", "pfield"},
                           {"version", 1},
                           {"dim", f.grid().dim()},
                           {"n_per_axis", f.grid().n()},
                           {"rank", rank_name(f.rank())},
                           {"components", f.components()},
                           {"time", time}};
  out << header.dump() << '\n';
  static_assert(std::endian::native == std::endian::little, "little-endian host expected");
  std::vector<double> row(static_cast<std::size_t>(f.components()) * f.size());
  for (std::size_t p = 0; p < f.size(); ++p)
  {
    for (int c = 0; c < f.components(); ++c)
    {
      row[p * f.components() + c] = f.at(c, p);
    }
  }
  out.write(reinterpret_cast<const char *>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
  if (!out)
  {
    throw Error("failed writing '" + path + "'");
  }
}

PeriodicField read_pfield(const std::string &path, double *time)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw Error("cannot open '" + path + "'");
  }
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try
  {
    header = nlohmann::json::parse(line);
  }
  catch (const nlohmann::json::exception &e)
  {
    throw Error("bad .pfield header in '" + path + "': " + e.what());
  }
  TorusGrid grid(header.at("dim").get<int>(), header.at("n_per_axis").get<int>());
  PeriodicField f(grid, rank_from_name(header.at("rank").get<std::string>()));
  if (time != nullptr)
  {
    *time = header.value("time", 0.0);
  }
  std::vector<double> row(static_cast<std::size_t>(f.components()) * f.size());
  in.read(reinterpret_cast<char *>(row.data()),
          static_cast<std::streamsize>(row.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(row.size() * sizeof(double)))
  {
    throw Error("truncated .pfield data in '" + path + "'");
  }
  for (std::size_t p = 0; p < f.size(); ++p)
  {
    for (int c = 0; c < f.components(); ++c)
    {
      f.at(c, p) = row[p * f.components() + c];
    }
  }
  return f;
}

}  // namespace eulerci
