// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EULERCI_STATIONARY_FLOWS_HPP
#define EULERCI_STATIONARY_FLOWS_HPP

#include <Eigen/Dense>
#include <array>
#include <map>
#include <optional>
#include <vector>

#include "eulerci/field.hpp"
#include "eulerci/kernels.hpp"

namespace eulerci
{

using IVec = std::array<int, 3>;
using CVec = std::array<cplx, 3>;

IVec negate(const IVec &k);
int norm2(const IVec &k);

// All k in Z^dim with |k|^2 = nu, in lexicographic order.
std::vector<IVec> lattice_sphere(int dim, int nu);

// Real unit vector orthogonal to k: normalized k x e for the first standard
// basis vector e not parallel to k, sign fixed so that a_{-k} = a_k.
std::array<double, 3> beltrami_axis(const IVec &k);

// Unit Beltrami vector B_k = (a_k + i k/|k| x a_k) / sqrt(2); B_{-k} = conj(B_k).
CVec beltrami_vector(const IVec &k);
std::map<IVec, CVec> beltrami_basis(int nu, const std::vector<IVec> &directions);

// Vector amplitude of the building block b_k(xi) = polarization(k) e^{ik.xi}.
// 2D: i k_perp / |k| with k_perp = (-k2, k1). 3D: sqrt(2) B_k, scaled so that
// the average of b_k (x) conj(b_k) + c.c. is Id - k (x) k / |k|^2 per pair.
CVec polarization(int dim, const IVec &k);

// M_k = Id - k (x) k / |k|^2.
Eigen::MatrixXd projector(int dim, const IVec &k);

struct CoefficientSet
{
  int dim = 2;
  int nu = 1;
  std::map<IVec, cplx> entries;

  // Throws if some |k|^2 != nu or the pairing conj(a_k) = a_{-k} fails.
  void validate(double tol = 1e-14) const;
};

struct StationaryFlow
{
  PeriodicField W;
  std::optional<PeriodicField> Psi;  // 2D only
  double imag_residue = 0.0;
};

// W(x) = sum_k a_k b_k(lambda x) and, in 2D, Psi(x) = sum_k a_k e^{i lambda k.x} / |k|.
StationaryFlow assemble_flow(const CoefficientSet &c, int lambda, const TorusGrid &grid);

// sup | div(W (x) W) - grad P | with P = |W|^2/2 + nu Psi^2/2 (2D) or |W|^2/2 (3D).
// nu is the lattice radius |k|^2; the identity does not depend on lambda.
double stationarity_residual(const StationaryFlow &flow, double nu);

// Closed-form average of W (x) W: sum_k |a_k|^2 M_k.
Eigen::MatrixXd average_ww(const CoefficientSet &c);
// Grid average of W (x) W for comparison.
Eigen::MatrixXd grid_average_ww(const PeriodicField &W);

}  // namespace eulerci

#endif
