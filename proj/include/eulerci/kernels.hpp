// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

// Fourier symbols of the linear operators, applied one wavevector at a time.
// Shared by the grid transforms and by the carrier/envelope representation,
// where the wavevector is the envelope mode shifted by the carrier.

#ifndef EULERCI_KERNELS_HPP
#define EULERCI_KERNELS_HPP

#include <complex>

namespace eulerci
{

using cplx = std::complex<double>;

enum class SpectralOp
{
  Gradient,         // scalar -> vector
  PerpGradient,     // scalar -> vector, 2D only: (-d2, d1)
  Divergence,       // vector -> scalar
  DivergenceSym,    // symmetric tensor -> vector, (div A)_i = d_j A_ij
  DivergenceMatrix, // full d x d matrix (row major) -> vector
  Laplacian,        // any number of components
  Poisson,          // inverse Laplacian on mean-free part, any components
  LerayP,           // vector -> vector, divergence-free part
  LerayQ,           // vector -> vector, gradient part plus mean
  DivInverse,       // vector -> symmetric trace-free tensor
  Curl,             // vector -> vector, 3D only
  GradientVector    // vector -> full matrix G_ij = d_j v_i
};

int op_in_components(SpectralOp op, int dim, int ncomp = 1);
int op_out_components(SpectralOp op, int dim, int ncomp = 1);

// out = symbol(q) in. q holds dim real wavevector components. ncomp is only
// used by component-wise operators (Laplacian, Poisson).
void apply_symbol(SpectralOp op, int dim, const double *q, const cplx *in, cplx *out,
                  int ncomp = 1);

}  // namespace eulerci

#endif
