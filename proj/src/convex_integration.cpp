// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#include "eulerci/convex_integration.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "eulerci/spectral.hpp"

namespace eulerci
{

namespace
{

const IVec kZero{0, 0, 0};

double torus_volume(int d) { return std::pow(kTwoPi, d); }

CarrierField constant_field(const TorusGrid &g, FieldRank rank, int lambda,
                            const std::vector<double> &values)
{
  CarrierField f(g, rank, lambda);
  if (std::all_of(values.begin(), values.end(), [](double x) { return x == 0.0; }))
  {
    return f;
  }
  auto &e = f.carrier(kZero);
  for (int c = 0; c < f.components(); ++c)
  {
    std::fill(e.begin() + c * g.size(), e.begin() + (c + 1) * g.size(), cplx(values[c]));
  }
  return f;
}

Eigen::MatrixXd sym_matrix(int d, const std::vector<double> &comps)
{
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
  {
    for (int j = 0; j < d; ++j)
    {
      m(i, j) = comps[sym_index(std::min(i, j), std::max(i, j), d)];
    }
  }
  return m;
}

CarrierField trace_of(const CarrierField &t)
{
  const int d = t.grid().dim();
  CarrierField out(t.grid(), FieldRank::Scalar, t.lambda());
  const std::size_t n = t.size();
  for (const auto &[m, e] : t.carriers())
  {
    auto &o = out.carrier(m);
    for (int i = 0; i < d; ++i)
    {
      const std::size_t off = sym_index(i, i, d) * n;
      for (std::size_t p = 0; p < n; ++p)
      {
        o[p] += e[off + p];
      }
    }
  }
  return out;
}

double max_abs(const std::vector<double> &v)
{
  double m = 0.0;
  for (double x : v)
  {
    m = std::max(m, std::abs(x));
  }
  return m;
}

std::vector<CarrierField> relabel_all(const std::vector<CarrierField> &fs, int lambda)
{
  std::vector<CarrierField> out;
  out.reserve(fs.size());
  for (const auto &f : fs)
  {
    out.push_back(f.with_lambda(lambda));
  }
  return out;
}

EulerReynoldsState relabel_state(const EulerReynoldsState &s, int lambda)
{
  EulerReynoldsState out;
  out.times = s.times;
  out.level = s.level;
  out.v = relabel_all(s.v, lambda);
  out.p = relabel_all(s.p, lambda);
  out.stress = relabel_all(s.stress, lambda);
  out.stress_dt = relabel_all(s.stress_dt, lambda);
  return out;
}

RhoSeries rho_from(const EulerReynoldsState &s, const EnergyProfile &e, double delta,
                   const std::vector<CarrierField> &dvs)
{
  const int d = s.dim();
  const double norm = d * torus_volume(d);
  RhoSeries out;
  for (int i = 0; i < s.frames(); ++i)
  {
    const double t = s.times.at(i);
    const double en = integral(dot(s.v[i], s.v[i]))[0];
    const double den = 2.0 * integral(dot(s.v[i], dvs[i]))[0];
    const double rho = (e.value(t) * (1.0 - delta / 2.0) - en) / norm;
    const double drho = (e.derivative(t) * (1.0 - delta / 2.0) - den) / norm;
    // Relative floor so that an exactly exhausted budget counts as rho = 0.
    if (!(rho > 1e-12 * std::abs(e.value(t)) / norm))
    {
      std::ostringstream msg;
      msg << "energy hypothesis violated: rho = " << rho << " <= 0 at t = " << t
          << " (e = " << e.value(t) << ", int |v|^2 = " << en << ")";
      throw PreconditionError(msg.str());
    }
    out.rho.push_back(rho);
    out.drho.push_back(drho);
    out.energy.push_back(en);
    out.denergy.push_back(den);
  }
  return out;
}

// q = -(|w_o|^2/2 + nu psi_o^2/2) in 2D, -|w_o|^2/2 in 3D.
CarrierField pressure_increment(const CarrierField &w_o, const CarrierField &psi_o, int nu)
{
  CarrierField q = -0.5 * dot(w_o, w_o);
  if (w_o.grid().dim() == 2)
  {
    q -= (0.5 * nu) * multiply(psi_o, psi_o);
  }
  return q;
}

}  // namespace

// ---------------------------------------------------------------- energy

EnergyProfile EnergyProfile::constant(double e)
{
  EnergyProfile p;
  p.kind_ = Kind::Constant;
  p.base_ = e;
  return p;
}

EnergyProfile EnergyProfile::sinusoid(double base, double amplitude, double frequency,
                                      double period)
{
  if (!(period > 0.0))
  {
    throw ConfigError("sinusoid energy profile needs a positive period");
  }
  EnergyProfile p;
  p.kind_ = Kind::Sinusoid;
  p.base_ = base;
  p.amplitude_ = amplitude;
  p.frequency_ = frequency;
  p.period_ = period;
  return p;
}

EnergyProfile EnergyProfile::polynomial(std::vector<double> coeffs)
{
  if (coeffs.empty())
  {
    throw ConfigError("polynomial energy profile needs coefficients");
  }
  EnergyProfile p;
  p.kind_ = Kind::Polynomial;
  p.coeffs_ = std::move(coeffs);
  return p;
}

double EnergyProfile::value(double t) const
{
  switch (kind_)
  {
    case Kind::Constant:
      return base_;
    case Kind::Sinusoid:
      return base_ + amplitude_ * std::sin(kTwoPi * frequency_ * t / period_);
    case Kind::Polynomial:
    {
      double s = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
      {
        s = s * t + *it;
      }
      return s;
    }
  }
  return 0.0;
}

double EnergyProfile::derivative(double t) const
{
  switch (kind_)
  {
    case Kind::Constant:
      return 0.0;
    case Kind::Sinusoid:
    {
      const double w = kTwoPi * frequency_ / period_;
      return amplitude_ * w * std::cos(w * t);
    }
    case Kind::Polynomial:
    {
      double s = 0.0;
      for (std::size_t i = coeffs_.size(); i-- > 1;)
      {
        s = s * t + static_cast<double>(i) * coeffs_[i];
      }
      return s;
    }
  }
  return 0.0;
}

double EnergyProfile::min_over(double t0, double t1, int samples) const
{
  double m = std::min(value(t0), value(t1));
  for (int i = 0; i < samples; ++i)
  {
    m = std::min(m, value(t0 + (t1 - t0) * i / std::max(samples - 1, 1)));
  }
  return m;
}

double EnergyProfile::max_over(double t0, double t1, int samples) const
{
  double m = std::max(value(t0), value(t1));
  for (int i = 0; i < samples; ++i)
  {
    m = std::max(m, value(t0 + (t1 - t0) * i / std::max(samples - 1, 1)));
  }
  return m;
}

void EnergyProfile::check_positive(double t0, double t1, int samples) const
{
  const double m = min_over(t0, t1, samples);
  if (!(m > 0.0))
  {
    throw ConfigError("energy profile is not positive on [t0, t1]: min = " + std::to_string(m));
  }
}

nlohmann::json EnergyProfile::to_json() const
{
  switch (kind_)
  {
    case Kind::Constant:
      return {{"kind", "constant"}, {"value", base_}};
    case Kind::Sinusoid:
      return {{"kind", "sinusoid"},
              {"base", base_},
              {"amplitude", amplitude_},
              {"frequency", frequency_},
              {"period", period_}};
    case Kind::Polynomial:
      return {{"kind", "polynomial"}, {"coefficients", coeffs_}};
  }
  return {};
}

EnergyProfile EnergyProfile::from_json(const nlohmann::json &j)
{
  const std::string kind = j.value("kind", std::string("constant"));
  if (kind == "constant")
  {
    return constant(j.value("value", 1.0));
  }
  if (kind == "sinusoid")
  {
    return sinusoid(j.value("base", 1.0), j.value("amplitude", 0.1), j.value("frequency", 1.0),
                    j.value("period", 1.0));
  }
  if (kind == "polynomial")
  {
    return polynomial(j.at("coefficients").get<std::vector<double>>());
  }
  throw ConfigError("unknown energy profile kind '" + kind + "'");
}

// ---------------------------------------------------------------- state

bool EulerReynoldsState::is_grid_state() const
{
  auto grid_all = [](const std::vector<CarrierField> &fs) {
    return std::all_of(fs.begin(), fs.end(), [](const CarrierField &f) { return f.is_grid_field(); });
  };
  return grid_all(v) && grid_all(p) && grid_all(stress) && grid_all(stress_dt);
}

EulerReynoldsState EulerReynoldsState::zero(const TorusGrid &grid, const TimeGrid &times,
                                            int level)
{
  EulerReynoldsState s;
  s.times = times;
  s.level = level;
  for (int i = 0; i < times.count; ++i)
  {
    s.v.emplace_back(grid, FieldRank::Vector, 1);
    s.p.emplace_back(grid, FieldRank::Scalar, 1);
    s.stress.emplace_back(grid, FieldRank::SymTensor, 1);
  }
  return s;
}

EulerReynoldsState EulerReynoldsState::from_fields(const EvolvingField &v, const EvolvingField &p,
                                                   const EvolvingField &stress, int level)
{
  if (v.frames.size() != p.frames.size() || v.frames.size() != stress.frames.size() ||
      static_cast<int>(v.frames.size()) != v.times.count)
  {
    throw ConfigError("state fields need one frame per time sample");
  }
  EulerReynoldsState s;
  s.times = v.times;
  s.level = level;
  for (std::size_t i = 0; i < v.frames.size(); ++i)
  {
    s.v.push_back(CarrierField::from_field(v.frames[i]));
    s.p.push_back(CarrierField::from_field(p.frames[i]));
    s.stress.push_back(CarrierField::from_field(stress.frames[i]));
  }
  for (const auto &f : stress.dt_frames)
  {
    s.stress_dt.push_back(CarrierField::from_field(f));
  }
  return s;
}

CarrierField velocity_time_derivative(const EulerReynoldsState &s, int frame)
{
  const auto &v = s.v[frame];
  return divergence(s.stress[frame]) - divergence(sym_outer(v, v)) - gradient(s.p[frame]);
}

std::vector<CarrierField> time_derivative(const TimeGrid &times,
                                          const std::vector<CarrierField> &frames)
{
  const int count = static_cast<int>(frames.size());
  std::vector<CarrierField> out;
  out.reserve(count);
  if (count < 2)
  {
    for (const auto &f : frames)
    {
      out.emplace_back(f.grid(), f.rank(), f.lambda());
    }
    return out;
  }
  const int width = std::min(count, 7);
  for (int i = 0; i < count; ++i)
  {
    const int start = std::clamp(i - width / 2, 0, count - width);
    std::vector<double> nodes(width);
    for (int s = 0; s < width; ++s)
    {
      nodes[s] = times.at(start + s);
    }
    auto w = derivative_weights(times.at(i), nodes);
    CarrierField d(frames[i].grid(), frames[i].rank(), frames[i].lambda());
    for (int s = 0; s < width; ++s)
    {
      d += w[s] * frames[start + s];
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<CarrierField> stress_time_derivative(const EulerReynoldsState &s)
{
  if (!s.stress_dt.empty())
  {
    if (s.stress_dt.size() != s.stress.size())
    {
      throw ConfigError("stress_dt needs one frame per time sample");
    }
    return s.stress_dt;
  }
  return time_derivative(s.times, s.stress);
}

StateCheck check_state(const EulerReynoldsState &s, const TwoScaleSampling &sampling)
{
  StateCheck out;
  auto dv = time_derivative(s.times, s.v);
  for (int i = 0; i < s.frames(); ++i)
  {
    out.max_divergence = std::max(out.max_divergence, sup_norm(divergence(s.v[i]), sampling));
    out.max_trace = std::max(out.max_trace, sup_norm(trace_of(s.stress[i]), sampling));
    if (s.times.interior(i))
    {
      auto r = dv[i] + divergence(sym_outer(s.v[i], s.v[i])) + gradient(s.p[i]) -
               divergence(s.stress[i]);
      out.max_residual = std::max(out.max_residual, sup_norm(r, sampling));
    }
  }
  return out;
}

// ---------------------------------------------------------------- parameters

int IterationParams::mu_for(int lambda, double beta)
{
  if (lambda < 1)
  {
    throw ConfigError("lambda must be a positive integer");
  }
  const long e = std::lround(beta * std::log2(static_cast<double>(lambda)));
  return 1 << std::max(0L, e);
}

void IterationParams::validate() const
{
  if (dim != 2 && dim != 3)
  {
    throw ConfigError("dimension must be 2 or 3");
  }
  if (!(holder_alpha > 0.0 && holder_alpha < beta && holder_alpha + 2.0 * beta < 1.0))
  {
    throw ConfigError("exponents need 0 < alpha < beta and alpha + 2 beta < 1");
  }
  if (lambda < 1 || mu < 1 || lambda % mu != 0)
  {
    throw ConfigError("lambda, mu and lambda / mu must be positive integers");
  }
  if (!(delta > 0.0 && delta <= 1.0))
  {
    throw ConfigError("delta must lie in (0, 1]");
  }
  if (!(eta > 0.0) || !(M > 0.0) || !(eps_prime > 0.0))
  {
    throw ConfigError("eta, M and eps' must be positive");
  }
}

IterationParams IterationParams::with_lambda(int lam) const
{
  IterationParams p = *this;
  p.lambda = lam;
  p.mu = mu_for(lam, beta);
  return p;
}

nlohmann::json IterationParams::to_json() const
{
  return {{"dim", dim},
          {"level", level},
          {"delta", delta},
          {"eta", eta},
          {"M", M},
          {"M_prime", M_prime},
          {"lambda", lambda},
          {"mu", mu},
          {"beta", beta},
          {"holder_alpha", holder_alpha},
          {"eps", eps},
          {"eps_prime", eps_prime},
          {"c", c_const},
          {"c_alt", 1.0 / (dim * torus_volume(dim) * 4.0)},
          {"residual_tol", residual_tol},
          {"mean_tol", mean_tol}};
}

double coefficient_bound(const DirectionFamilySystem &sys)
{
  const int d = sys.dim;
  const double sup_b = d == 3 ? std::sqrt(2.0) : 1.0;
  const Eigen::VectorXd id = svec(Eigen::MatrixXd::Identity(d, d));
  double s = 0.0;
  const int classes = 1 << d;
  for (int j = 0; j < std::min(classes, static_cast<int>(sys.gammas.size())); ++j)
  {
    const auto &g = sys.gammas[j];
    for (int p : g.support)
    {
      const double at_id = g.offset(p) + g.slope.row(p).dot(id);
      const double lp = at_id + g.slope.row(p).norm() * std::sqrt(static_cast<double>(d)) * sys.r0;
      s += 2.0 * std::sqrt(std::max(lp, 0.0) / 2.0) * sup_b;
    }
  }
  return s;
}

IterationParams schedule_params(const DirectionFamilySystem &sys, const EnergyProfile &e,
                                const TimeGrid &times, int level, int lambda, double eps,
                                double beta, double holder_alpha)
{
  IterationParams p;
  p.dim = sys.dim;
  p.level = level;
  p.delta = std::ldexp(1.0, -level);
  p.beta = beta;
  p.holder_alpha = holder_alpha;
  p.eps = eps;
  p.eps_prime = eps * std::ldexp(1.0, -level - 1);
  const int d = sys.dim;
  const double vol = torus_volume(d);
  p.c_const = 1.0 / (4.0 * d * vol);
  const double emin = e.min_over(times.t0, times.t1);
  const double emax = e.max_over(times.t0, times.t1);
  p.eta = 0.5 * p.c_const * emin * sys.r0;
  const double S = coefficient_bound(sys);
  p.M_prime = 1.01 * std::max(1.0, 4.0 * S * S);
  // rho <= (3/4) delta e / (d (2pi)^d) under the energy hypothesis, so
  // sup |w_o| <= S sqrt(rho) <= (sqrt(M)/2) sqrt(delta) with this M.
  p.M = std::max(1.01, p.M_prime * 0.75 * emax / (d * vol));
  p.lambda = lambda;
  p.mu = IterationParams::mu_for(lambda, beta);
  return p;
}

int max_grid_lambda(const TorusGrid &grid, int nu)
{
  return static_cast<int>(std::floor(grid.n() / (4.0 * std::sqrt(static_cast<double>(nu)))));
}

// ---------------------------------------------------------------- rho, R

RhoSeries compute_rho(const EulerReynoldsState &s, const EnergyProfile &e, double delta)
{
  std::vector<CarrierField> dvs;
  for (int i = 0; i < s.frames(); ++i)
  {
    dvs.push_back(velocity_time_derivative(s, i));
  }
  return rho_from(s, e, delta, dvs);
}

std::vector<CarrierField> compute_big_r(const EulerReynoldsState &s, const RhoSeries &rho,
                                        double r0, const TwoScaleSampling &sampling)
{
  const int d = s.dim();
  std::vector<CarrierField> out;
  for (int i = 0; i < s.frames(); ++i)
  {
    const double dist = sup_norm(s.stress[i], sampling) / rho.rho[i];
    if (!(dist < r0))
    {
      std::ostringstream msg;
      msg << "stress bound violated: |R/rho - Id| = " << dist << " >= r0 = " << r0
          << " at t = " << s.times.at(i);
      throw PreconditionError(msg.str());
    }
    const auto &st = s.stress[i];
    std::vector<double> diag(rank_components(FieldRank::SymTensor, d), 0.0);
    for (int a = 0; a < d; ++a)
    {
      diag[sym_index(a, a, d)] = rho.rho[i];
    }
    out.push_back(constant_field(st.grid(), FieldRank::SymTensor, st.lambda(), diag) - st);
  }
  return out;
}

// ---------------------------------------------------------------- perturbation

Perturbation build_perturbation(const EulerReynoldsState &s, int frame, const CarrierField &dtv,
                                const CarrierField &dt_stress, const RhoSeries &rho,
                                const DirectionFamilySystem &sys, const VelocityPartition &part,
                                const IterationParams &params, const EngineOptions &opts)
{
  const auto &g = s.grid();
  const int d = g.dim();
  const std::size_t n = g.size();
  const auto &v = s.v[frame];
  const auto &R = s.stress[frame];
  if (!v.is_grid_field() || !R.is_grid_field() || !dtv.is_grid_field() ||
      !dt_stress.is_grid_field())
  {
    throw ConfigError("coefficients need a slow state: collapse v and R before the step");
  }
  const int classes = 1 << d;
  if (static_cast<int>(sys.gammas.size()) < classes || sys.dim != d)
  {
    throw ConfigError("direction family system does not match the dimension");
  }
  const int lam = params.lambda;
  const bool carrier = opts.carrier_mode;
  const int label = carrier ? lam : v.lambda();
  const double r = rho.rho[frame];
  const double dr = rho.drho[frame];
  const double sr = std::sqrt(r);
  const double t = s.times.at(frame);
  const double tau = lam * t;

  struct Dir
  {
    int j;
    int pair;
    IVec k;
    CVec pol;
    double len;
    std::vector<cplx> *w = nullptr, *dtw = nullptr, *psi = nullptr;
  };
  Perturbation out;
  out.w_o = CarrierField(g, FieldRank::Vector, label);
  out.dtw_o = CarrierField(g, FieldRank::Vector, label);
  out.psi_o = CarrierField(g, FieldRank::Scalar, label);
  std::vector<Dir> dirs;
  for (int j = 0; j < classes; ++j)
  {
    const auto &gam = sys.gammas[j];
    for (int p : gam.support)
    {
      for (const IVec &k : {gam.pairs[p], negate(gam.pairs[p])})
      {
        dirs.push_back({j, p, k, polarization(d, k), std::sqrt(static_cast<double>(norm2(k)))});
      }
    }
  }
  if (carrier)
  {
    for (auto &dr_ : dirs)
    {
      dr_.w = &out.w_o.carrier(dr_.k);
      dr_.dtw = &out.dtw_o.carrier(dr_.k);
      if (d == 2)
      {
        dr_.psi = &out.psi_o.carrier(dr_.k);
      }
    }
  }
  std::vector<cplx> *gw = carrier ? nullptr : &out.w_o.carrier(kZero);
  std::vector<cplx> *gdtw = carrier ? nullptr : &out.dtw_o.carrier(kZero);
  std::vector<cplx> *gpsi = (carrier || d != 2) ? nullptr : &out.psi_o.carrier(kZero);

  const int nsym = rank_components(FieldRank::SymTensor, d);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  std::vector<double> Rc(nsym), dRc(nsym);
  std::vector<bool> used(dirs.size(), false);
  std::vector<Eigen::VectorXd> weights(classes), dweights(classes);
  for (std::size_t pt = 0; pt < n; ++pt)
  {
    double vv[3] = {0, 0, 0}, dvv[3] = {0, 0, 0}, mv[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a)
    {
      vv[a] = v.value(a, pt);
      dvv[a] = dtv.value(a, pt);
      mv[a] = params.mu * vv[a];
    }
    for (int c = 0; c < nsym; ++c)
    {
      Rc[c] = R.value(c, pt);
      dRc[c] = dt_stress.value(c, pt);
    }
    const Eigen::MatrixXd Rm = sym_matrix(d, Rc);
    const Eigen::MatrixXd Rt = id - Rm / r;
    const double dist = operator_norm(Rt - id);
    out.ball_distance = std::max(out.ball_distance, dist);
    if (!(dist < sys.r0))
    {
      std::ostringstream msg;
      msg << "gamma ball violated: |R/rho - Id| = " << dist << " >= r0 = " << sys.r0
          << " at t = " << t;
      throw PreconditionError(msg.str());
    }
    const Eigen::MatrixXd dRt = -sym_matrix(d, dRc) / r + Rm * (dr / (r * r));
    const Eigen::VectorXd sv = svec(Rt);
    const Eigen::VectorXd dsv = svec(dRt);
    unsigned active = 0;
    for (const auto &l : part.active_cells(mv))
    {
      active |= 1u << part.class_of(l);
    }
    for (int j = 0; j < classes; ++j)
    {
      if (active & (1u << j))
      {
        weights[j] = sys.gammas[j].offset + sys.gammas[j].slope * sv;
        dweights[j] = sys.gammas[j].slope * dsv;
      }
    }
    const auto x = g.coords(pt);
    cplx acc_w[3] = {0, 0, 0}, acc_dtw[3] = {0, 0, 0}, acc_psi = 0.0;
    for (std::size_t q = 0; q < dirs.size(); ++q)
    {
      const auto &dir = dirs[q];
      if (!(active & (1u << dir.j)))
      {
        continue;
      }
      const auto ph = part.phi_full(dir.j, dir.k, vv, tau);
      if (ph.value == 0.0 && ph.dtau == 0.0)
      {
        continue;
      }
      const double lp = weights[dir.j](dir.pair);
      const double gamma = std::sqrt(std::max(lp, 0.0) / 2.0);
      const double dgamma = gamma > 0.0 ? dweights[dir.j](dir.pair) / (4.0 * gamma) : 0.0;
      cplx dphi_v = 0.0;
      for (int a = 0; a < d; ++a)
      {
        dphi_v += ph.dv[a] * dvv[a];
      }
      const cplx a_k = sr * gamma * ph.value;
      const cplx ds_a =
        (dr / (2.0 * sr)) * gamma * ph.value + sr * dgamma * ph.value + sr * gamma * dphi_v;
      const cplx dtau_a = sr * gamma * ph.dtau;
      const cplx dt_a = ds_a + static_cast<double>(lam) * dtau_a;
      out.sup_a = std::max(out.sup_a, std::abs(a_k));
      out.sup_ds_a = std::max(out.sup_ds_a, std::abs(ds_a));
      out.sup_dtau_a = std::max(out.sup_dtau_a, std::abs(dtau_a));
      used[q] = true;
      if (carrier)
      {
        for (int c = 0; c < d; ++c)
        {
          (*dir.w)[c * n + pt] = a_k * dir.pol[c];
          (*dir.dtw)[c * n + pt] = dt_a * dir.pol[c];
        }
        if (d == 2)
        {
          (*dir.psi)[pt] = a_k / dir.len;
        }
      }
      else
      {
        double kx = 0.0;
        for (int a = 0; a < d; ++a)
        {
          kx += dir.k[a] * x[a];
        }
        const cplx phase = std::polar(1.0, lam * kx);
        for (int c = 0; c < d; ++c)
        {
          acc_w[c] += a_k * dir.pol[c] * phase;
          acc_dtw[c] += dt_a * dir.pol[c] * phase;
        }
        acc_psi += a_k * phase / dir.len;
      }
    }
    if (!carrier)
    {
      for (int c = 0; c < d; ++c)
      {
        (*gw)[c * n + pt] = acc_w[c].real();
        (*gdtw)[c * n + pt] = acc_dtw[c].real();
      }
      if (gpsi)
      {
        (*gpsi)[pt] = acc_psi.real();
      }
    }
  }
  out.active_directions = static_cast<int>(std::count(used.begin(), used.end(), true));
  out.w_o.prune();
  out.dtw_o.prune();
  out.psi_o.prune();
  out.w_c = -1.0 * leray_q(out.w_o);
  out.dtw_c = -1.0 * leray_q(out.dtw_o);
  out.w = out.w_o + out.w_c;
  out.dtw = out.dtw_o + out.dtw_c;
  return out;
}

CarrierField update_pressure(const CarrierField &p, const CarrierField &w_o,
                             const CarrierField &psi_o, int nu)
{
  return p.with_lambda(w_o.lambda()) + pressure_increment(w_o, psi_o, nu);
}

ReynoldsUpdate update_reynolds(const CarrierField &v, const CarrierField &stress,
                               const Perturbation &pert, const CarrierField &q)
{
  // d_t v1 + div(v1 v1) + grad p1 with d_t v = div R - div(v v) - grad p.
  ReynoldsUpdate out;
  out.argument = divergence(stress) + pert.dtw +
                 divergence(2.0 * sym_outer(v, pert.w) + sym_outer(pert.w, pert.w)) + gradient(q);
  out.mean_argument = max_abs(mean(out.argument));
  out.stress = div_inverse(out.argument);
  return out;
}

CarrierField ReynoldsParts::sum() const
{
  return transport + oscillation + error_I + error_II + error_III;
}

ReynoldsParts decompose_reynolds(const CarrierField &v, const CarrierField &stress,
                                 const Perturbation &pert, const CarrierField &q)
{
  ReynoldsParts out;
  const CarrierField v1 = v + pert.w;
  out.transport = div_inverse(pert.dtw_o + divergence(outer(pert.w_o, v)));
  out.oscillation =
    div_inverse(divergence(sym_outer(pert.w_o, pert.w_o) + scalar_identity(q) + stress));
  out.error_I = div_inverse(pert.dtw_c);
  out.error_II =
    div_inverse(divergence(2.0 * sym_outer(v1, pert.w_c) - sym_outer(pert.w_c, pert.w_c)));
  out.error_III = div_inverse(divergence(outer(v, pert.w_o)));
  return out;
}

// ---------------------------------------------------------------- step

double StepReport::max_interior(double FrameDiagnostics::*field) const
{
  double m = 0.0;
  for (const auto &f : frames)
  {
    if (f.interior)
    {
      m = std::max(m, f.*field);
    }
  }
  return m;
}

double StepReport::max_interior_part(int part) const
{
  double m = 0.0;
  for (const auto &f : frames)
  {
    if (f.interior)
    {
      m = std::max(m, f.part_sup[part]);
    }
  }
  return m;
}

nlohmann::json StepReport::to_json() const
{
  nlohmann::json j;
  j["params"] = params.to_json();
  j["mode"] = carrier_mode ? "carrier" : "grid";
  j["sup_R_in"] = sup_R_in;
  j["checks"] = {{"energy", energy_ok},         {"stress", stress_ok},
                 {"velocity", velocity_ok},     {"pressure", pressure_ok},
                 {"h_minus1", h_minus1_ok},     {"moments", moments_ok},
                 {"mean_gate", mean_gate_ok},   {"bounds_ok", bounds_ok()},
                 {"all_ok", all_ok()}};
  j["bounds"] = {{"energy_band", {0.375 * params.delta, 0.625 * params.delta}},
                 {"sup_R1", 0.5 * params.eta * params.delta},
                 {"sup_w", params.M * std::sqrt(params.delta)},
                 {"sup_q", params.M * params.delta},
                 {"eps_prime", params.eps_prime},
                 {"mean_tol", params.mean_tol}};
  j["interior_samples"] = "first and last two time samples excluded when there are at least 7";
  nlohmann::json parts;
  for (int k = 0; k < 5; ++k)
  {
    parts[kPartNames[k]] = max_interior_part(k);
  }
  j["parts_sup"] = parts;
  auto &fr = j["frames"] = nlohmann::json::array();
  for (const auto &f : frames)
  {
    nlohmann::json o = {{"t", f.t},
                        {"interior", f.interior},
                        {"e", f.e},
                        {"rho", f.rho},
                        {"drho", f.drho},
                        {"ball_distance", f.ball_distance},
                        {"energy_gap", f.energy_gap},
                        {"energy_gap_ratio", f.energy_gap / (params.delta * f.e)},
                        {"sup_R1", f.sup_R1},
                        {"sup_w", f.sup_w},
                        {"sup_w_o", f.sup_w_o},
                        {"sup_w_c", f.sup_w_c},
                        {"sup_psi_scaled", f.sup_psi},
                        {"sup_q", f.sup_q},
                        {"h_minus1", f.h_minus1},
                        {"moment_increment_err", f.moment_increment_err},
                        {"moment_stress_err", f.moment_stress_err},
                        {"moment_rho_err", f.moment_rho_err},
                        {"max_offdiag_moment", f.max_offdiag_moment},
                        {"mean_argument", f.mean_argument},
                        {"max_trace_R1", f.max_trace_R1},
                        {"div_check", f.div_check},
                        {"divergence_w", f.divergence_w},
                        {"mean_w", f.mean_w},
                        {"sum_of_parts_err", f.sum_of_parts},
                        {"sup_a", f.sup_a},
                        {"sup_ds_a", f.sup_ds_a},
                        {"sup_dtau_a", f.sup_dtau_a}};
    std::vector<double> m(f.moment.data(), f.moment.data() + f.moment.size());
    o["moment"] = m;
    for (int k = 0; k < 5; ++k)
    {
      o["part_sup"][kPartNames[k]] = f.part_sup[k];
      if (f.part_holder[k] >= 0.0)
      {
        o["part_holder"][kPartNames[k]] = f.part_holder[k];
      }
    }
    fr.push_back(o);
  }
  return j;
}

StepResult iteration_step(const EulerReynoldsState &s_in, const EnergyProfile &e,
                          const IterationParams &params, const DirectionFamilySystem &sys,
                          const EngineOptions &opts)
{
  params.validate();
  if (s_in.frames() == 0 || s_in.frames() != s_in.times.count)
  {
    throw ConfigError("state needs one frame per time sample");
  }
  const auto &grid = s_in.grid();
  const int d = grid.dim();
  if (d != params.dim || d != sys.dim)
  {
    throw ConfigError("state, parameters and family system disagree on the dimension");
  }
  const int lam = params.lambda;
  if (opts.carrier_mode)
  {
    if (!s_in.is_grid_state())
    {
      throw ConfigError("carrier mode needs a slow grid state");
    }
  }
  else if (lam > max_grid_lambda(grid, sys.nu))
  {
    throw ConfigError("grid too coarse: need 4 lambda sqrt(nu) <= n, lambda = " +
                      std::to_string(lam) + ", nu = " + std::to_string(sys.nu) +
                      ", n = " + std::to_string(grid.n()));
  }
  const int label = opts.carrier_mode ? lam : 1;
  const EulerReynoldsState s = relabel_state(s_in, label);
  const TwoScaleSampling cheap{1, std::min<std::size_t>(opts.sampling.max_slow_points, 256)};

  std::vector<CarrierField> dvs;
  for (int i = 0; i < s.frames(); ++i)
  {
    dvs.push_back(velocity_time_derivative(s, i));
  }
  const RhoSeries rho = rho_from(s, e, params.delta, dvs);
  StepReport rep;
  rep.params = params;
  rep.carrier_mode = opts.carrier_mode;
  std::vector<double> sup_R(s.frames());
  for (int i = 0; i < s.frames(); ++i)
  {
    sup_R[i] = sup_norm(s.stress[i], opts.sampling);
  }
  // Hypotheses on the incoming state.
  for (int i = 0; i < s.frames(); ++i)
  {
    const double t = s.times.at(i);
    const double ev = e.value(t);
    const double gap = ev - rho.energy[i];
    if (s.times.interior(i))
    {
      if (gap < 0.75 * params.delta * ev || gap > 1.25 * params.delta * ev)
      {
        std::ostringstream msg;
        msg << "energy hypothesis violated at t = " << t << ": e - int |v|^2 = " << gap
            << " outside [3/4, 5/4] delta e = [" << 0.75 * params.delta * ev << ", "
            << 1.25 * params.delta * ev << "]";
        throw PreconditionError(msg.str());
      }
      if (sup_R[i] > params.eta * params.delta)
      {
        std::ostringstream msg;
        msg << "stress hypothesis violated at t = " << t << ": sup |R| = " << sup_R[i]
            << " > eta delta = " << params.eta * params.delta;
        throw PreconditionError(msg.str());
      }
      rep.sup_R_in = std::max(rep.sup_R_in, sup_R[i]);
    }
  }
  const auto dR = relabel_all(stress_time_derivative(s), label);
  const VelocityPartition part(d, params.mu);

  EulerReynoldsState next;
  next.times = s.times;
  next.level = s.level + 1;
  const double vol = torus_volume(d);
  for (int i = 0; i < s.frames(); ++i)
  {
    const double t = s.times.at(i);
    const auto &v = s.v[i];
    const auto &R = s.stress[i];
    const Perturbation pert =
      build_perturbation(s, i, dvs[i], dR[i], rho, sys, part, params, opts);
    const CarrierField q = pressure_increment(pert.w_o, pert.psi_o, sys.nu);
    const ReynoldsUpdate upd = update_reynolds(v, R, pert, q);
    const ReynoldsParts parts = decompose_reynolds(v, R, pert, q);
    CarrierField v1 = v + pert.w;

    FrameDiagnostics f;
    f.t = t;
    f.interior = s.times.interior(i);
    f.e = e.value(t);
    f.rho = rho.rho[i];
    f.drho = rho.drho[i];
    f.ball_distance = pert.ball_distance;
    f.sup_a = pert.sup_a;
    f.sup_ds_a = pert.sup_ds_a;
    f.sup_dtau_a = pert.sup_dtau_a;
    f.energy_gap = f.e - integral(dot(v1, v1))[0];
    f.sup_R1 = sup_norm(upd.stress, opts.sampling);
    f.sup_w = sup_norm(pert.w, opts.sampling);
    f.sup_w_o = sup_norm(pert.w_o, opts.sampling);
    f.sup_w_c = sup_norm(pert.w_c, opts.sampling);
    f.sup_psi = d == 2 ? std::sqrt(static_cast<double>(sys.nu)) * sup_norm(pert.psi_o, opts.sampling)
                       : 0.0;
    f.sup_q = sup_norm(q, opts.sampling);
    f.h_minus1 = h_minus1_norm(pert.w);
    const Eigen::MatrixXd m1 = sym_matrix(d, integral(sym_outer(v1, v1)));
    const Eigen::MatrixXd m0 = sym_matrix(d, integral(sym_outer(v, v)));
    const Eigen::MatrixXd mw = sym_matrix(d, integral(sym_outer(pert.w_o, pert.w_o)));
    const Eigen::MatrixXd iR =
      vol * f.rho * Eigen::MatrixXd::Identity(d, d) - sym_matrix(d, integral(R));
    f.moment = m1;
    f.moment_increment_err = operator_norm(m1 - m0 - mw);
    f.moment_stress_err = operator_norm(mw - iR);
    f.moment_rho_err = operator_norm(m1 - m0 - iR);
    for (int a = 0; a < d; ++a)
    {
      for (int b = a + 1; b < d; ++b)
      {
        f.max_offdiag_moment = std::max(f.max_offdiag_moment, std::abs(m1(a, b)));
      }
    }
    f.mean_argument = upd.mean_argument;
    f.max_trace_R1 = sup_norm(trace_of(upd.stress), cheap);
    {
      auto mF = mean(upd.argument);
      f.div_check = sup_norm(divergence(upd.stress) - upd.argument +
                               constant_field(grid, FieldRank::Vector, label, mF),
                             cheap);
    }
    f.divergence_w = sup_norm(divergence(pert.w), cheap);
    f.mean_w = max_abs(mean(pert.w));
    f.sum_of_parts = sup_norm(upd.stress - parts.sum(), cheap);
    const CarrierField *pp[5] = {&parts.transport, &parts.oscillation, &parts.error_I,
                                 &parts.error_II, &parts.error_III};
    for (int k = 0; k < 5; ++k)
    {
      f.part_sup[k] = sup_norm(*pp[k], opts.sampling);
      if (opts.holder && pp[k]->is_grid_field())
      {
        f.part_holder[k] = holder_seminorm(materialize(*pp[k], grid), params.holder_alpha);
      }
    }
    rep.frames.push_back(f);

    next.v.push_back(std::move(v1));
    next.p.push_back(s.p[i] + q);
    next.stress.push_back(upd.stress);
  }

  rep.energy_ok = rep.stress_ok = rep.velocity_ok = rep.pressure_ok = true;
  rep.h_minus1_ok = rep.moments_ok = rep.mean_gate_ok = true;
  const double dl = params.delta;
  for (const auto &f : rep.frames)
  {
    if (!f.interior)
    {
      continue;
    }
    rep.energy_ok = rep.energy_ok && f.energy_gap >= 0.375 * dl * f.e && f.energy_gap <= 0.625 * dl * f.e;
    rep.stress_ok = rep.stress_ok && f.sup_R1 <= 0.5 * params.eta * dl;
    rep.velocity_ok = rep.velocity_ok && f.sup_w <= params.M * std::sqrt(dl);
    rep.pressure_ok = rep.pressure_ok && f.sup_q <= params.M * dl;
    rep.h_minus1_ok = rep.h_minus1_ok && f.h_minus1 <= params.eps_prime;
    rep.moments_ok = rep.moments_ok && f.moment_increment_err <= params.eps_prime &&
                     f.moment_stress_err <= params.eps_prime;
    rep.mean_gate_ok = rep.mean_gate_ok && f.mean_argument <= params.mean_tol;
  }
  return {std::move(next), std::move(rep)};
}

AutoLambdaResult auto_lambda(const EulerReynoldsState &s, const EnergyProfile &e,
                             const IterationParams &base, const DirectionFamilySystem &sys,
                             const std::function<bool(const StepReport &)> &accept,
                             int lambda_min, int lambda_max, const EngineOptions &opts)
{
  AutoLambdaResult out;
  int ceiling = opts.carrier_mode ? lambda_max : max_grid_lambda(s.grid(), sys.nu);
  if (!opts.carrier_mode && lambda_max > 0)
  {
    ceiling = std::min(ceiling, lambda_max);
  }
  if (ceiling < 1)
  {
    ceiling = 0;
  }
  for (int lam = std::max(1, lambda_min); lam <= ceiling; lam *= 2)
  {
    out.tried.push_back(lam);
    try
    {
      auto res = iteration_step(s, e, base.with_lambda(lam), sys, opts);
      const bool ok = accept(res.report);
      out.lambda = lam;
      out.result = std::move(res);
      if (ok)
      {
        out.found = true;
        return out;
      }
    }
    catch (const Error &err)
    {
      out.failure = std::string("step failed at lambda = ") + std::to_string(lam) + ": " + err.what();
      return out;
    }
  }
  std::ostringstream msg;
  msg << "no accepted lambda up to the ceiling " << ceiling
      << (opts.carrier_mode ? " (lambda_max)" : " (grid limit 4 lambda sqrt(nu) <= n)");
  if (!out.tried.empty())
  {
    msg << "; largest tried " << out.tried.back();
  }
  out.failure = msg.str();
  return out;
}

// ---------------------------------------------------------------- run

bool RunReport::all_ok() const
{
  if (!completed)
  {
    return false;
  }
  return std::all_of(steps.begin(), steps.end(), [](const RunStepRecord &r) {
    return r.accepted && r.band_ok && r.stress_ok && r.increment_ok;
  });
}

nlohmann::json RunReport::to_json() const
{
  nlohmann::json j;
  j["dim"] = dim;
  j["eta"] = eta;
  j["M"] = M;
  j["eps"] = eps;
  j["completed"] = completed;
  j["failure"] = failure;
  j["all_ok"] = all_ok();
  auto &st = j["steps"] = nlohmann::json::array();
  for (const auto &r : steps)
  {
    nlohmann::json o = {{"step", r.step},
                        {"lambda", r.lambda},
                        {"mu", r.mu},
                        {"accepted", r.accepted},
                        {"gap_ratio_min", r.gap_ratio_min},
                        {"gap_ratio_max", r.gap_ratio_max},
                        {"band", {0.75, 1.25}},
                        {"band_ok", r.band_ok},
                        {"sup_R", r.sup_R},
                        {"sup_R_bound", r.sup_R_bound},
                        {"stress_ok", r.stress_ok},
                        {"increment", r.increment},
                        {"increment_bound", r.increment_bound},
                        {"increment_ok", r.increment_ok},
                        {"h_minus1_cumulative", r.h_minus1},
                        {"h_minus1_bound", r.h_minus1_bound},
                        {"anisotropy", r.anisotropy}};
    if (r.report)
    {
      o["report"] = r.report->to_json();
    }
    st.push_back(o);
  }
  return j;
}

RunResult full_run(const EulerReynoldsState &start, const EnergyProfile &e,
                   const DirectionFamilySystem &sys, const RunOptions &opts)
{
  RunResult out;
  out.final_state = start;
  auto &rep = out.report;
  rep.dim = start.dim();
  rep.eps = opts.eps;
  {
    auto p0 = schedule_params(sys, e, start.times, start.level, 1, opts.eps, opts.beta,
                              opts.holder_alpha);
    rep.eta = p0.eta;
    rep.M = p0.M;
  }
  if (opts.on_state)
  {
    opts.on_state(out.final_state);
  }
  double cum_h = 0.0;
  double cum_eps = 0.0;
  for (int step = 0; step < opts.n_steps; ++step)
  {
    const auto &s = out.final_state;
    const int level = s.level;
    std::optional<StepResult> res;
    bool accepted = false;
    try
    {
      if (!opts.lambdas.empty())
      {
        const int lam = opts.lambdas[std::min<std::size_t>(step, opts.lambdas.size() - 1)];
        auto params = schedule_params(sys, e, s.times, level, lam, opts.eps, opts.beta,
                                      opts.holder_alpha);
        params.mean_tol = opts.mean_tol;
        res = iteration_step(s, e, params, sys, opts.engine);
        accepted = res->report.bounds_ok();
      }
      else
      {
        auto base = schedule_params(sys, e, s.times, level, std::max(1, opts.lambda_min),
                                    opts.eps, opts.beta, opts.holder_alpha);
        base.mean_tol = opts.mean_tol;
        auto ar = auto_lambda(s, e, base, sys, [](const StepReport &r) { return r.bounds_ok(); },
                              opts.lambda_min, opts.lambda_max, opts.engine);
        if (!ar.result)
        {
          rep.failure = "step " + std::to_string(level + 1) + ": " + ar.failure;
          return out;
        }
        res = std::move(ar.result);
        accepted = ar.found;
        if (!accepted)
        {
          rep.failure = "step " + std::to_string(level + 1) + ": " + ar.failure;
        }
      }
    }
    catch (const Error &err)
    {
      rep.failure = "step " + std::to_string(level + 1) + ": " + err.what();
      return out;
    }
    const auto &r = res->report;
    RunStepRecord rec;
    rec.step = level + 1;
    rec.lambda = r.params.lambda;
    rec.mu = r.params.mu;
    rec.accepted = accepted;
    const double dnext = std::ldexp(1.0, -(level + 1));
    rec.gap_ratio_min = std::numeric_limits<double>::infinity();
    rec.gap_ratio_max = -std::numeric_limits<double>::infinity();
    const int d = s.dim();
    for (const auto &f : r.frames)
    {
      if (!f.interior)
      {
        continue;
      }
      const double ratio = f.energy_gap / (dnext * f.e);
      rec.gap_ratio_min = std::min(rec.gap_ratio_min, ratio);
      rec.gap_ratio_max = std::max(rec.gap_ratio_max, ratio);
      const Eigen::MatrixXd aniso = f.moment - (f.e / d) * Eigen::MatrixXd::Identity(d, d);
      rec.anisotropy = std::max(rec.anisotropy, operator_norm(aniso));
    }
    rec.sup_R = r.max_interior(&FrameDiagnostics::sup_R1);
    rec.sup_R_bound = r.params.eta * dnext;
    rec.increment = r.max_interior(&FrameDiagnostics::sup_w);
    rec.increment_bound = r.params.M * std::sqrt(r.params.delta);
    cum_h += r.max_interior(&FrameDiagnostics::h_minus1);
    cum_eps += r.params.eps_prime;
    rec.h_minus1 = cum_h;
    rec.h_minus1_bound = cum_eps;
    rec.band_ok = rec.gap_ratio_min >= 0.75 && rec.gap_ratio_max <= 1.25;
    rec.stress_ok = rec.sup_R <= rec.sup_R_bound;
    rec.increment_ok = rec.increment <= rec.increment_bound;
    rec.report = r;
    rep.steps.push_back(rec);
    out.final_state = std::move(res->state);
    if (opts.on_state)
    {
      opts.on_state(out.final_state);
    }
    if (!accepted)
    {
      if (rep.failure.empty())
      {
        rep.failure = "step " + std::to_string(level + 1) + ": bounds failed at lambda = " +
                      std::to_string(rec.lambda);
      }
      return out;
    }
  }
  rep.completed = true;
  return out;
}

// ---------------------------------------------------------------- persistence

void save_state(const std::string &dir, const EulerReynoldsState &s)
{
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto &g = s.grid();
  nlohmann::json j = {{"level", s.level},
                      {"dim", g.dim()},
                      {"n", g.n()},
                      {"times", {{"t0", s.times.t0}, {"t1", s.times.t1}, {"count", s.times.count}}},
                      {"has_stress_dt", !s.stress_dt.empty()}};
  for (int i = 0; i < s.frames(); ++i)
  {
    const double t = s.times.at(i);
    const std::string idx = std::to_string(i);
    write_pfield(dir + "/v_" + idx + ".pfield", materialize(s.v[i], g), t);
    write_pfield(dir + "/p_" + idx + ".pfield", materialize(s.p[i], g), t);
    write_pfield(dir + "/R_" + idx + ".pfield", materialize(s.stress[i], g), t);
    if (!s.stress_dt.empty())
    {
      write_pfield(dir + "/dR_" + idx + ".pfield", materialize(s.stress_dt[i], g), t);
    }
  }
  std::ofstream(dir + "/state.json") << j.dump(2) << "\n";
}

EulerReynoldsState load_state(const std::string &dir)
{
  std::ifstream in(dir + "/state.json");
  if (!in)
  {
    throw ConfigError("no state.json in " + dir);
  }
  nlohmann::json j;
  in >> j;
  EulerReynoldsState s;
  s.level = j.at("level").get<int>();
  s.times.t0 = j.at("times").at("t0").get<double>();
  s.times.t1 = j.at("times").at("t1").get<double>();
  s.times.count = j.at("times").at("count").get<int>();
  const bool has_dt = j.value("has_stress_dt", false);
  for (int i = 0; i < s.times.count; ++i)
  {
    const std::string idx = std::to_string(i);
    s.v.push_back(CarrierField::from_field(read_pfield(dir + "/v_" + idx + ".pfield")));
    s.p.push_back(CarrierField::from_field(read_pfield(dir + "/p_" + idx + ".pfield")));
    s.stress.push_back(CarrierField::from_field(read_pfield(dir + "/R_" + idx + ".pfield")));
    if (has_dt)
    {
      s.stress_dt.push_back(CarrierField::from_field(read_pfield(dir + "/dR_" + idx + ".pfield")));
    }
  }
  return s;
}

// ---------------------------------------------------------------- null step

EulerReynoldsState translated_stationary_state(const CoefficientSet &c, int lambda,
                                               const std::array<double, 3> &U,
                                               const TorusGrid &grid, const TimeGrid &times)
{
  const int d = grid.dim();
  EulerReynoldsState s;
  s.times = times;
  for (int i = 0; i < times.count; ++i)
  {
    const double t = times.at(i);
    CoefficientSet ct = c;
    for (auto &[k, a] : ct.entries)
    {
      double kU = 0.0;
      for (int b = 0; b < d; ++b)
      {
        kU += k[b] * U[b];
      }
      a *= std::polar(1.0, -lambda * kU * t);
    }
    auto flow = assemble_flow(ct, lambda, grid);
    PeriodicField v = flow.W;
    PeriodicField p(grid, FieldRank::Scalar);
    for (std::size_t pt = 0; pt < grid.size(); ++pt)
    {
      double w2 = 0.0;
      for (int b = 0; b < d; ++b)
      {
        w2 += flow.W.at(b, pt) * flow.W.at(b, pt);
        v.at(b, pt) += U[b];
      }
      double pv = -0.5 * w2;
      if (d == 2 && flow.Psi)
      {
        pv -= 0.5 * c.nu * flow.Psi->at(0, pt) * flow.Psi->at(0, pt);
      }
      p.at(0, pt) = pv;
    }
    s.v.push_back(CarrierField::from_field(v));
    s.p.push_back(CarrierField::from_field(p));
    s.stress.emplace_back(grid, FieldRank::SymTensor, 1);
  }
  return s;
}

nlohmann::json NullStepReport::to_json() const
{
  return {{"energy", energy},
          {"max_energy_drift", max_energy_drift},
          {"max_residual", max_residual},
          {"max_R1", max_R1},
          {"tolerance", tolerance},
          {"ok", ok}};
}

NullStepReport null_step(const EulerReynoldsState &s, double tolerance)
{
  NullStepReport out;
  out.tolerance = tolerance;
  for (int i = 0; i < s.frames(); ++i)
  {
    out.energy.push_back(integral(dot(s.v[i], s.v[i]))[0]);
  }
  const double e0 = out.energy.front();
  for (double en : out.energy)
  {
    out.max_energy_drift =
      std::max(out.max_energy_drift, std::abs(en - e0) / std::max(std::abs(e0), 1e-300));
  }
  // w = 0: v1 = v, p1 = p, and R1 = div^-1(d_t v + div(v v) + grad p).
  auto dv = time_derivative(s.times, s.v);
  for (int i = 0; i < s.frames(); ++i)
  {
    if (!s.times.interior(i))
    {
      continue;
    }
    auto r = dv[i] + divergence(sym_outer(s.v[i], s.v[i])) + gradient(s.p[i]) -
             divergence(s.stress[i]);
    out.max_residual = std::max(out.max_residual, sup_norm(r));
    out.max_R1 = std::max(out.max_R1, sup_norm(div_inverse(r)));
  }
  out.ok = out.max_energy_drift <= tolerance && out.max_residual <= tolerance;
  return out;
}

}  // namespace eulerci
