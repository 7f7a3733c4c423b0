// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EULERCI_GEOMETRIC_LEMMA_HPP
#define EULERCI_GEOMETRIC_LEMMA_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "eulerci/stationary_flows.hpp"

namespace eulerci
{

// Coordinates of a symmetric matrix in a Frobenius-orthonormal basis:
// diagonal entries first, then sqrt(2) times the upper off-diagonal entries.
Eigen::VectorXd svec(const Eigen::MatrixXd &m);
Eigen::MatrixXd smat(const Eigen::VectorXd &v, int dim);
int sym_dim(int dim);

struct Rational
{
  long long num = 0;
  long long den = 1;
};

// s(u) = (2u / (u^2 + 1), (u^2 - 1) / (u^2 + 1)) for u = p / q, in lowest terms.
std::pair<Rational, Rational> rational_circle_point(long long p, long long q);

// Representative of the pair {k, -k}: first nonzero component positive.
IVec canonical_pair(const IVec &k);

// Splits symmetric point sets into N families by dealing antipodal pairs,
// sorted by direction, round robin.
std::vector<std::vector<IVec>> partition_families(int dim, const std::vector<IVec> &points, int N);

// Largest angular gap of a symmetric family: the largest arc between
// neighbouring directions in 2D, twice the covering radius on the sphere in 3D.
double angular_gap(int dim, const std::vector<IVec> &family);

// Hausdorff distance between the unit circle and (1/sqrt(nu)) * points (2D).
double circle_hausdorff_distance(const std::vector<IVec> &points);

struct GammaData
{
  int dim = 2;
  // Representatives of the antipodal pairs offered to the construction.
  std::vector<IVec> pairs;
  double alpha = 0.5;        // alpha * Id is the simplex centre
  double theta_prime = 0.0;  // simplex circumradius (Frobenius)
  double theta = 0.0;        // operator-norm radius of a ball inside the simplex
  double r0 = 0.0;           // theta / (2 alpha)
  double lp_margin = 0.0;    // optimal minimum weight of the feasibility program
  std::vector<Eigen::MatrixXd> vertices;
  // Per vertex: (pair index, positive weight) with vertex = sum weight * M_pair.
  std::vector<std::vector<std::pair<int, double>>> decompositions;

  // Affine form of the pair weights: lambda_p(R) = offset[p] + slope.row(p) . svec(R).
  Eigen::VectorXd offset;
  Eigen::MatrixXd slope;
  // Pairs carrying positive weight in some vertex decomposition.
  std::vector<int> support;

  // Recomputes offset, slope and support from vertices and decompositions.
  void finalize();

  // Family directions actually used: +-k for every supported pair.
  std::vector<IVec> support_directions() const;

  // Pair weights lambda_p(R) for every supported pair, no ball check.
  Eigen::VectorXd pair_weights(const Eigen::MatrixXd &R) const;
};

// Optimal t of: max t s.t. sum_p w_p M_p = (d - 1) Id / d, sum_p w_p = 1, w_p >= t.
// Returns a negative number when infeasible.
double interior_margin(int dim, const std::vector<IVec> &pairs);

// Throws Error when the family is too degenerate to contain a multiple of the
// identity in the interior of the cone spanned by its projectors.
GammaData build_gamma(int dim, const std::vector<IVec> &family);

// gamma_k(R) = sqrt((lambda_k + lambda_{-k}) / 2) over the support of the family,
// so that sum_k gamma_k^2 M_k = R. Throws when |R - Id|_op >= r0.
std::map<IVec, double> gamma_eval(const GammaData &g, const Eigen::MatrixXd &R);

double operator_norm(const Eigen::MatrixXd &m);

struct DirectionFamilySystem
{
  int dim = 2;
  int nu = 1;
  double spread_target = 0.0;
  double r0 = 0.0;
  std::vector<std::vector<IVec>> families;  // full partition (candidates)
  std::vector<GammaData> gammas;  // one per family, or empty

  int family_count() const { return static_cast<int>(families.size()); }
  nlohmann::json to_json() const;
  static DirectionFamilySystem from_json(const nlohmann::json &j);
  std::uint64_t hash() const;
};

struct NuSearchOptions
{
  double spread_target = 1.5707963267948966;
  int search_bound = 20000;
  bool require_gamma = false;
};

// Smallest nu whose lattice sphere splits into N families meeting the spread
// target (and, optionally, each passing build_gamma).
int choose_nu(int dim, int N, const NuSearchOptions &opts);

// choose_nu with gamma construction, returning the assembled system.
DirectionFamilySystem plan_system(int dim, const NuSearchOptions &opts);

// Maximum reconstruction error |sum gamma_k^2 M_k - R| over `samples` random R
// in the ball of radius fraction * r0, and the smallest gamma encountered.
struct ReconstructionCheck
{
  double max_error = 0.0;
  double min_gamma = 0.0;
};
ReconstructionCheck check_reconstruction(const GammaData &g, int samples, std::uint64_t seed,
                                         double fraction = 0.999);

// FNV-1a over a byte string; used for report hashes.
std::uint64_t fnv1a(const std::string &bytes);

}  // namespace eulerci

#endif
