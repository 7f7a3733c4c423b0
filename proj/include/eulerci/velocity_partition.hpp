// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EULERCI_VELOCITY_PARTITION_HPP
#define EULERCI_VELOCITY_PARTITION_HPP

#include <array>
#include <vector>

#include "eulerci/kernels.hpp"
#include "eulerci/stationary_flows.hpp"

namespace eulerci
{

// 1D profile: 1 on [-3/4, 3/4], 0 outside (-1, 1), smooth in between.
double bump_1d(double s);
double bump_1d_derivative(double s);

struct PhaseValue
{
  cplx value = 0.0;
  cplx dtau = 0.0;           // d/dtau
  std::array<cplx, 3> dv{};  // gradient in v
};

// Squared partition of unity alpha_l on velocity space with classes
// Z^d / (2Z)^d, rescaled by mu inside the phase functions.
class VelocityPartition
{
public:
  VelocityPartition(int dim, int mu);

  int dim() const { return dim_; }
  int mu() const { return mu_; }
  int class_count() const { return 1 << dim_; }

  // Class index of a lattice point: bit a holds l_a mod 2.
  int class_of(const IVec &l) const;

  double alpha(const IVec &l, const double *v) const;
  // alpha_l and its gradient in v.
  double alpha(const IVec &l, const double *v, double *grad) const;

  // Lattice points whose alpha may be nonzero at v (at most 2^d of them).
  std::vector<IVec> active_cells(const double *v) const;

  // phi_k^(j)(v, tau) = sum_{l in C_j} alpha_l(mu v) e^{-i (k.l/mu) tau}.
  cplx phi(int j, const IVec &k, const double *v, double tau) const;
  // phi with its tau derivative and v gradient.
  PhaseValue phi_full(int j, const IVec &k, const double *v, double tau) const;
  // d_tau phi + i (k.v) phi.
  cplx transport_defect(int j, const IVec &k, const double *v, double tau) const;

private:
  double bump(const double *x, double *grad) const;

  int dim_;
  int mu_;
};

}  // namespace eulerci

#endif
