// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#include "eulerci/geometric_lemma.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace eulerci
{

namespace
{

constexpr double kPi = std::numbers::pi;

// Dense two-phase simplex for: max c.x subject to A x = b, x >= 0.
// Bland's rule; sizes here are a handful of rows and at most a few dozen columns.
struct LpResult
{
  bool feasible = false;
  bool bounded = true;
  double value = 0.0;
  Eigen::VectorXd x;
};

class Tableau
{
public:
  Tableau(const Eigen::MatrixXd &A, const Eigen::VectorXd &b)
    : m_(A.rows()), n_(A.cols()), t_(Eigen::MatrixXd::Zero(A.rows(), A.cols() + A.rows() + 1)),
      basis_(A.rows())
  {
    for (int i = 0; i < m_; ++i)
    {
      const double s = b(i) < 0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = s * A.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, n_ + m_) = s * b(i);
      basis_[i] = n_ + i;
    }
  }

  // Maximizes cost . x over columns with allowed[j]; returns false if unbounded.
  bool run(const Eigen::VectorXd &cost, const std::vector<bool> &allowed)
  {
    const int cols = n_ + m_;
    for (int iter = 0; iter < 10000; ++iter)
    {
      int enter = -1;
      for (int j = 0; j < cols && enter < 0; ++j)
      {
        if (!allowed[j] || is_basic(j))
        {
          continue;
        }
        double z = -cost(j);
        for (int i = 0; i < m_; ++i)
        {
          z += cost(basis_[i]) * t_(i, j);
        }
        if (z < -kEps)
        {
          enter = j;
        }
      }
      if (enter < 0)
      {
        return true;
      }
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < m_; ++i)
      {
        if (t_(i, enter) > kEps)
        {
          const double ratio = t_(i, cols) / t_(i, enter);
          if (leave < 0 || ratio < best - kEps ||
              (std::abs(ratio - best) <= kEps && basis_[i] < basis_[leave]))
          {
            leave = i;
            best = ratio;
          }
        }
      }
      if (leave < 0)
      {
        return false;
      }
      pivot(leave, enter);
    }
    throw Error("simplex iteration limit reached");
  }

  void pivot(int r, int c)
  {
    t_.row(r) /= t_(r, c);
    for (int i = 0; i < m_; ++i)
    {
      if (i != r && t_(i, c) != 0.0)
      {
        t_.row(i) -= t_(i, c) * t_.row(r);
      }
    }
    basis_[r] = c;
  }

  bool is_basic(int j) const { return std::find(basis_.begin(), basis_.end(), j) != basis_.end(); }

  Eigen::VectorXd solution() const
  {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_ + m_);
    for (int i = 0; i < m_; ++i)
    {
      x(basis_[i]) = t_(i, n_ + m_);
    }
    return x;
  }

  int m_;
  int n_;
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
  static constexpr double kEps = 1e-11;
};

LpResult simplex_max(const Eigen::MatrixXd &A, const Eigen::VectorXd &b, const Eigen::VectorXd &c)
{
  const int m = A.rows();
  const int n = A.cols();
  Tableau tab(A, b);
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setConstant(-1.0);
  std::vector<bool> all(n + m, true);
  tab.run(phase1, all);
  Eigen::VectorXd x = tab.solution();
  LpResult res;
  if (x.tail(m).sum() > 1e-9)
  {
    return res;
  }
  res.feasible = true;
  // Drive zero-level artificials out of the basis where possible.
  for (int i = 0; i < m; ++i)
  {
    if (tab.basis_[i] >= n)
    {
      for (int j = 0; j < n; ++j)
      {
        if (!tab.is_basic(j) && std::abs(tab.t_(i, j)) > 1e-9)
        {
          tab.pivot(i, j);
          break;
        }
      }
    }
  }
  std::vector<bool> originals(n + m, false);
  std::fill(originals.begin(), originals.begin() + n, true);
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(n + m);
  cost.head(n) = c;
  res.bounded = tab.run(cost, originals);
  res.x = tab.solution().head(n);
  res.value = c.dot(res.x);
  return res;
}

// Vertices of a regular simplex with D+1 vertices and unit circumradius,
// centred at the origin of R^D (Helmert basis of the sum-zero hyperplane).
std::vector<Eigen::VectorXd> regular_simplex(int D)
{
  std::vector<Eigen::VectorXd> out;
  const double scale = std::sqrt(static_cast<double>(D + 1) / D);
  for (int i = 0; i <= D; ++i)
  {
    Eigen::VectorXd e = Eigen::VectorXd::Constant(D + 1, -1.0 / (D + 1));
    e(i) += 1.0;
    Eigen::VectorXd v(D);
    for (int j = 1; j <= D; ++j)
    {
      Eigen::VectorXd h = Eigen::VectorXd::Zero(D + 1);
      h.head(j).setConstant(1.0);
      h(j) = -j;
      h /= std::sqrt(static_cast<double>(j) * (j + 1));
      v(j - 1) = scale * e.dot(h);
    }
    out.push_back(v);
  }
  return out;
}

// Positive conic decomposition of target over the columns of gens: the first
// subset of size D (lexicographic) whose square system has an all-positive
// solution.
std::optional<std::vector<std::pair<int, double>>> positive_decomposition(
  const Eigen::MatrixXd &gens, const Eigen::VectorXd &target)
{
  const int D = gens.rows();
  const int P = gens.cols();
  if (P < D)
  {
    return std::nullopt;
  }
  std::vector<int> idx(D);
  std::iota(idx.begin(), idx.end(), 0);
  while (true)
  {
    Eigen::MatrixXd sub(D, D);
    for (int c = 0; c < D; ++c)
    {
      sub.col(c) = gens.col(idx[c]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (lu.rank() == D)
    {
      Eigen::VectorXd w = lu.solve(target);
      if ((sub * w - target).norm() < 1e-12 * (1.0 + target.norm()) && w.minCoeff() > 1e-12)
      {
        std::vector<std::pair<int, double>> out;
        for (int c = 0; c < D; ++c)
        {
          out.emplace_back(idx[c], w(c));
        }
        return out;
      }
    }
    // Next combination.
    int i = D - 1;
    while (i >= 0 && idx[i] == P - D + i)
    {
      --i;
    }
    if (i < 0)
    {
      return std::nullopt;
    }
    ++idx[i];
    for (int j = i + 1; j < D; ++j)
    {
      idx[j] = idx[j - 1] + 1;
    }
  }
}

double pair_angle_2d(const IVec &k)
{
  double a = std::atan2(static_cast<double>(k[1]), static_cast<double>(k[0]));
  if (a < 0)
  {
    a += kPi;
  }
  if (a >= kPi)
  {
    a -= kPi;
  }
  return a;
}

}  // namespace

int sym_dim(int dim) { return dim * (dim + 1) / 2; }

Eigen::VectorXd svec(const Eigen::MatrixXd &m)
{
  const int d = m.rows();
  Eigen::VectorXd v(sym_dim(d));
  int c = 0;
  for (int i = 0; i < d; ++i)
  {
    v(c++) = m(i, i);
  }
  for (int i = 0; i < d; ++i)
  {
    for (int j = i + 1; j < d; ++j)
    {
      v(c++) = std::sqrt(2.0) * 0.5 * (m(i, j) + m(j, i));
    }
  }
  return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd &v, int dim)
{
  Eigen::MatrixXd m(dim, dim);
  int c = 0;
  for (int i = 0; i < dim; ++i)
  {
    m(i, i) = v(c++);
  }
  for (int i = 0; i < dim; ++i)
  {
    for (int j = i + 1; j < dim; ++j)
    {
      m(i, j) = m(j, i) = v(c++) / std::sqrt(2.0);
    }
  }
  return m;
}

std::pair<Rational, Rational> rational_circle_point(long long p, long long q)
{
  if (q == 0)
  {
    throw Error("rational parameter with zero denominator");
  }
  // u = p/q: s(u) = (2pq, p^2 - q^2) / (p^2 + q^2).
  const long long den = p * p + q * q;
  auto reduce = [](long long a, long long b) {
    const long long g = std::gcd(a < 0 ? -a : a, b);
    return Rational{a / g, b / g};
  };
  return {reduce(2 * p * q, den), reduce(p * p - q * q, den)};
}

IVec canonical_pair(const IVec &k)
{
  for (int c = 0; c < 3; ++c)
  {
    if (k[c] != 0)
    {
      return k[c] > 0 ? k : negate(k);
    }
  }
  throw Error("zero vector has no antipodal pair");
}

std::vector<std::vector<IVec>> partition_families(int dim, const std::vector<IVec> &points, int N)
{
  if (N < 1)
  {
    throw Error("family count must be positive");
  }
  std::vector<IVec> pairs;
  for (const auto &k : points)
  {
    if (std::find(points.begin(), points.end(), negate(k)) == points.end())
    {
      throw Error("point set is not symmetric under k -> -k");
    }
    auto c = canonical_pair(k);
    if (std::find(pairs.begin(), pairs.end(), c) == pairs.end())
    {
      pairs.push_back(c);
    }
  }
  if (static_cast<int>(pairs.size()) < N)
  {
    throw Error("too few lattice points (" + std::to_string(points.size()) + ") for " +
                std::to_string(N) + " families");
  }
  if (dim == 2)
  {
    std::stable_sort(pairs.begin(), pairs.end(), [](const IVec &a, const IVec &b) {
      return pair_angle_2d(a) < pair_angle_2d(b);
    });
  }
  else
  {
    // Orient into the upper half-space, then sort by polar and azimuthal angle.
    for (auto &k : pairs)
    {
      if (k[2] < 0 || (k[2] == 0 && (k[1] < 0 || (k[1] == 0 && k[0] < 0))))
      {
        k = negate(k);
      }
    }
    auto key = [](const IVec &k) {
      const double r = std::sqrt(static_cast<double>(norm2(k)));
      return std::make_pair(std::acos(k[2] / r), std::atan2(static_cast<double>(k[1]),
                                                            static_cast<double>(k[0])));
    };
    std::stable_sort(pairs.begin(), pairs.end(),
                     [&](const IVec &a, const IVec &b) { return key(a) < key(b); });
    for (auto &k : pairs)
    {
      k = canonical_pair(k);
    }
  }
  std::vector<std::vector<IVec>> fam(N);
  for (std::size_t i = 0; i < pairs.size(); ++i)
  {
    fam[i % N].push_back(pairs[i]);
    fam[i % N].push_back(negate(pairs[i]));
  }
  return fam;
}

double angular_gap(int dim, const std::vector<IVec> &family)
{
  if (family.empty())
  {
    return 2.0 * kPi;
  }
  if (dim == 2)
  {
    std::vector<double> ang;
    for (const auto &k : family)
    {
      double a = std::atan2(static_cast<double>(k[1]), static_cast<double>(k[0]));
      ang.push_back(a < 0 ? a + 2.0 * kPi : a);
    }
    std::sort(ang.begin(), ang.end());
    double gap = ang.front() + 2.0 * kPi - ang.back();
    for (std::size_t i = 1; i < ang.size(); ++i)
    {
      gap = std::max(gap, ang[i] - ang[i - 1]);
    }
    return gap;
  }
  // Covering radius over a Fibonacci sample of the sphere.
  const int samples = 4000;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  double cover = 0.0;
  for (int s = 0; s < samples; ++s)
  {
    const double z = 1.0 - 2.0 * (s + 0.5) / samples;
    const double rad = std::sqrt(1.0 - z * z);
    const double phi = golden * s;
    const double x = rad * std::cos(phi);
    const double y = rad * std::sin(phi);
    double best = -1.0;
    for (const auto &k : family)
    {
      const double r = std::sqrt(static_cast<double>(norm2(k)));
      best = std::max(best, (x * k[0] + y * k[1] + z * k[2]) / r);
    }
    cover = std::max(cover, std::acos(std::clamp(best, -1.0, 1.0)));
  }
  return 2.0 * cover;
}

double circle_hausdorff_distance(const std::vector<IVec> &points)
{
  if (points.empty())
  {
    return 2.0;
  }
  // Every scaled point lies on the circle; the farthest circle point from the
  // set sits mid-arc of the largest gap.
  const double gap = angular_gap(2, points);
  return 2.0 * std::sin(gap / 4.0);
}

double operator_norm(const Eigen::MatrixXd &m)
{
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double interior_margin(int dim, const std::vector<IVec> &pairs)
{
  const int D = sym_dim(dim);
  const int P = static_cast<int>(pairs.size());
  if (P == 0)
  {
    return -1.0;
  }
  // Traceless parts of M_p (trace d - 1) span at most D - 1 dimensions;
  // anything less means the hull is flat around Id / d.
  Eigen::MatrixXd T(D, P);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim, dim) * (dim - 1.0) / dim;
  for (int p = 0; p < P; ++p)
  {
    T.col(p) = svec(projector(dim, pairs[p]) - id);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(T);
  lu.setThreshold(1e-10);
  if (lu.rank() < D - 1)
  {
    return -1.0;
  }
  // Variables (t, s_1..s_P) >= 0 with w_p = t + s_p.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(D + 1, P + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(D + 1);
  for (int r = 0; r < D; ++r)
  {
    A(r, 0) = T.row(r).sum();
    A.row(r).tail(P) = T.row(r);
  }
  A(D, 0) = P;
  A.row(D).tail(P).setOnes();
  b(D) = 1.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(P + 1);
  c(0) = 1.0;
  auto res = simplex_max(A, b, c);
  if (!res.feasible)
  {
    return -1.0;
  }
  return res.value;
}

void GammaData::finalize()
{
  const int D = sym_dim(dim);
  const int P = static_cast<int>(pairs.size());
  // Barycentric coordinates: [svec(A_i); 1] beta = [svec(X); 1].
  Eigen::MatrixXd B(D + 1, D + 1);
  for (int i = 0; i <= D; ++i)
  {
    B.col(i).head(D) = svec(vertices[i]);
    B(D, i) = 1.0;
  }
  Eigen::MatrixXd Binv = B.inverse();
  // Weight matrix lam(i, p).
  Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(D + 1, P);
  for (int i = 0; i <= D; ++i)
  {
    for (const auto &[p, w] : decompositions[i])
    {
      lam(i, p) += w;
    }
  }
  // lambda_p(R) = (1/alpha) sum_i beta_i(alpha R) lam(i, p) with beta affine.
  offset = (Binv.col(D).transpose() * lam).transpose() / alpha;
  slope = (Binv.leftCols(D).transpose() * lam).transpose();
  support.clear();
  for (int p = 0; p < P; ++p)
  {
    if (lam.col(p).maxCoeff() > 0.0)
    {
      support.push_back(p);
    }
  }
}

std::vector<IVec> GammaData::support_directions() const
{
  std::vector<IVec> out;
  for (int p : support)
  {
    out.push_back(pairs[p]);
    out.push_back(negate(pairs[p]));
  }
  return out;
}

Eigen::VectorXd GammaData::pair_weights(const Eigen::MatrixXd &R) const
{
  return offset + slope * svec(R);
}

GammaData build_gamma(int dim, const std::vector<IVec> &family)
{
  GammaData g;
  g.dim = dim;
  for (const auto &k : family)
  {
    auto c = canonical_pair(k);
    if (std::find(g.pairs.begin(), g.pairs.end(), c) == g.pairs.end())
    {
      g.pairs.push_back(c);
    }
  }
  std::sort(g.pairs.begin(), g.pairs.end());
  g.lp_margin = interior_margin(dim, g.pairs);
  if (g.lp_margin <= 1e-6)
  {
    throw Error("family too degenerate: no positive multiple of Id in the interior of its hull "
                "(margin " +
                std::to_string(g.lp_margin) + ")");
  }
  const int D = sym_dim(dim);
  g.alpha = 1.0 / dim;
  Eigen::MatrixXd gens(D, g.pairs.size());
  for (std::size_t p = 0; p < g.pairs.size(); ++p)
  {
    gens.col(p) = svec(projector(dim, g.pairs[p]));
  }
  const auto E = regular_simplex(D);
  const Eigen::VectorXd centre = svec(g.alpha * Eigen::MatrixXd::Identity(dim, dim));
  double tp = g.alpha;
  for (int attempt = 0; attempt < 200; ++attempt, tp *= 0.9)
  {
    std::vector<Eigen::MatrixXd> verts;
    std::vector<std::vector<std::pair<int, double>>> decs;
    bool ok = true;
    for (const auto &e : E)
    {
      Eigen::VectorXd a = centre + tp * e;
      auto dec = positive_decomposition(gens, a);
      if (!dec)
      {
        ok = false;
        break;
      }
      verts.push_back(smat(a, dim));
      decs.push_back(*dec);
    }
    if (!ok)
    {
      continue;
    }
    g.theta_prime = tp;
    g.theta = tp / (D * std::sqrt(static_cast<double>(dim)));
    g.r0 = g.theta / (2.0 * g.alpha);
    g.vertices = std::move(verts);
    g.decompositions = std::move(decs);
    g.finalize();
    return g;
  }
  throw Error("no simplex around alpha*Id admits positive decompositions");
}

std::map<IVec, double> gamma_eval(const GammaData &g, const Eigen::MatrixXd &R)
{
  const double dist = operator_norm(R - Eigen::MatrixXd::Identity(g.dim, g.dim));
  if (!(dist < g.r0))
  {
    throw Error("R lies outside the admissible ball: |R - Id| = " + std::to_string(dist) +
                " >= r0 = " + std::to_string(g.r0));
  }
  auto w = g.pair_weights(R);
  std::map<IVec, double> out;
  for (int p : g.support)
  {
    // lambda_k = lambda_{-k} = w_p / 2 when the pair weight is split evenly.
    const double gamma = std::sqrt(std::max(w(p), 0.0) / 2.0);
    out[g.pairs[p]] = gamma;
    out[negate(g.pairs[p])] = gamma;
  }
  return out;
}

int choose_nu(int dim, int N, const NuSearchOptions &opts)
{
  for (int nu = 1; nu <= opts.search_bound; ++nu)
  {
    auto pts = lattice_sphere(dim, nu);
    if (static_cast<int>(pts.size()) < 2 * N)
    {
      continue;
    }
    auto fam = partition_families(dim, pts, N);
    bool ok = true;
    for (const auto &f : fam)
    {
      if (angular_gap(dim, f) > opts.spread_target + 1e-12)
      {
        ok = false;
        break;
      }
    }
    if (ok && opts.require_gamma)
    {
      for (const auto &f : fam)
      {
        try
        {
          build_gamma(dim, f);
        }
        catch (const Error &)
        {
          ok = false;
          break;
        }
      }
    }
    if (ok)
    {
      return nu;
    }
  }
  throw ConfigError("no admissible nu up to the search bound " + std::to_string(opts.search_bound));
}

DirectionFamilySystem plan_system(int dim, const NuSearchOptions &opts)
{
  NuSearchOptions o = opts;
  o.require_gamma = true;
  const int N = 1 << dim;
  DirectionFamilySystem sys;
  sys.dim = dim;
  sys.nu = choose_nu(dim, N, o);
  sys.spread_target = opts.spread_target;
  sys.families = partition_families(dim, lattice_sphere(dim, sys.nu), N);
  sys.r0 = std::numeric_limits<double>::infinity();
  for (const auto &f : sys.families)
  {
    sys.gammas.push_back(build_gamma(dim, f));
    sys.r0 = std::min(sys.r0, sys.gammas.back().r0);
  }
  return sys;
}

ReconstructionCheck check_reconstruction(const GammaData &g, int samples, std::uint64_t seed,
                                         double fraction)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ReconstructionCheck out;
  out.min_gamma = std::numeric_limits<double>::infinity();
  const int d = g.dim;
  for (int s = 0; s < samples; ++s)
  {
    Eigen::MatrixXd X(d, d);
    for (int i = 0; i < d; ++i)
    {
      for (int j = i; j < d; ++j)
      {
        X(i, j) = X(j, i) = normal(rng);
      }
    }
    X /= operator_norm(X);
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(d, d) + fraction * g.r0 * unit(rng) * X;
    auto gam = gamma_eval(g, R);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
    for (const auto &[k, v] : gam)
    {
      sum += v * v * projector(d, k);
      out.min_gamma = std::min(out.min_gamma, v);
    }
    out.max_error = std::max(out.max_error, operator_norm(sum - R));
  }
  return out;
}

std::uint64_t fnv1a(const std::string &bytes)
{
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes)
  {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace
{
nlohmann::json ivec_json(int dim, const IVec &k)
{
  nlohmann::json j = nlohmann::json::array();
  for (int a = 0; a < dim; ++a)
  {
    j.push_back(k[a]);
  }
  return j;
}

IVec ivec_from(const nlohmann::json &j)
{
  IVec k{0, 0, 0};
  for (std::size_t a = 0; a < j.size() && a < 3; ++a)
  {
    k[a] = j[a].get<int>();
  }
  return k;
}
}  // namespace

nlohmann::json DirectionFamilySystem::to_json() const
{
  nlohmann::json j;
  j["format"] = "direction-family-system";
  j["version"] = 1;
  j["dim"] = dim;
  j["nu"] = nu;
  j["spread_target"] = spread_target;
  j["r0"] = r0;
  j["families"] = nlohmann::json::array();
  for (std::size_t f = 0; f < families.size(); ++f)
  {
    nlohmann::json fj;
    fj["points"] = nlohmann::json::array();
    for (const auto &k : families[f])
    {
      fj["points"].push_back(ivec_json(dim, k));
    }
    if (f >= gammas.size())
    {
      j["families"].push_back(fj);
      continue;
    }
    const auto &g = gammas[f];
    nlohmann::json gj;
    gj["alpha"] = g.alpha;
    gj["theta_prime"] = g.theta_prime;
    gj["theta"] = g.theta;
    gj["r0"] = g.r0;
    gj["lp_margin"] = g.lp_margin;
    gj["pairs"] = nlohmann::json::array();
    for (const auto &k : g.pairs)
    {
      gj["pairs"].push_back(ivec_json(dim, k));
    }
    gj["vertices"] = nlohmann::json::array();
    for (std::size_t i = 0; i < g.vertices.size(); ++i)
    {
      nlohmann::json vj;
      auto sv = svec(g.vertices[i]);
      vj["svec"] = std::vector<double>(sv.data(), sv.data() + sv.size());
      vj["weights"] = nlohmann::json::array();
      for (const auto &[p, w] : g.decompositions[i])
      {
        vj["weights"].push_back({{"pair", p}, {"weight", w}});
      }
      gj["vertices"].push_back(vj);
    }
    fj["gamma"] = gj;
    j["families"].push_back(fj);
  }
  return j;
}

DirectionFamilySystem DirectionFamilySystem::from_json(const nlohmann::json &j)
{
  try
  {
    DirectionFamilySystem s;
    s.dim = j.at("dim").get<int>();
    s.nu = j.at("nu").get<int>();
    s.spread_target = j.value("spread_target", 0.0);
    s.r0 = j.at("r0").get<double>();
    for (const auto &fj : j.at("families"))
    {
      std::vector<IVec> fam;
      for (const auto &p : fj.at("points"))
      {
        fam.push_back(ivec_from(p));
      }
      s.families.push_back(fam);
      if (!fj.contains("gamma"))
      {
        continue;
      }
      const auto &gj = fj.at("gamma");
      GammaData g;
      g.dim = s.dim;
      g.alpha = gj.at("alpha").get<double>();
      g.theta_prime = gj.at("theta_prime").get<double>();
      g.theta = gj.at("theta").get<double>();
      g.r0 = gj.at("r0").get<double>();
      g.lp_margin = gj.value("lp_margin", 0.0);
      for (const auto &p : gj.at("pairs"))
      {
        g.pairs.push_back(ivec_from(p));
      }
      for (const auto &vj : gj.at("vertices"))
      {
        auto sv = vj.at("svec").get<std::vector<double>>();
        g.vertices.push_back(smat(Eigen::Map<Eigen::VectorXd>(sv.data(), sv.size()), s.dim));
        std::vector<std::pair<int, double>> dec;
        for (const auto &w : vj.at("weights"))
        {
          dec.emplace_back(w.at("pair").get<int>(), w.at("weight").get<double>());
        }
        g.decompositions.push_back(dec);
      }
      if (static_cast<int>(g.vertices.size()) != sym_dim(s.dim) + 1)
      {
        throw Error("simplex needs " + std::to_string(sym_dim(s.dim) + 1) + " vertices");
      }
      g.finalize();
      s.gammas.push_back(std::move(g));
    }
    if (!s.gammas.empty() && s.gammas.size() != s.families.size())
    {
      throw Error("gamma data missing for some families");
    }
    return s;
  }
  catch (const nlohmann::json::exception &e)
  {
    throw Error(std::string("malformed direction-family system: ") + e.what());
  }
}

std::uint64_t DirectionFamilySystem::hash() const { return fnv1a(to_json().dump()); }

}  // namespace eulerci
