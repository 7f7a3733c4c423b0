// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EULERCI_SPECTRAL_HPP
#define EULERCI_SPECTRAL_HPP

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "eulerci/field.hpp"
#include "eulerci/kernels.hpp"

namespace eulerci
{

// Half spectrum of a real field: coefficient f_k = N^{-1} sum_x f(x) e^{-ik.x},
// last axis restricted to 0..n/2. Components are stored one after the other.
struct HalfSpectrum
{
  TorusGrid grid;
  int ncomp = 0;
  std::vector<cplx> data;

  std::size_t modes() const { return grid.half_spectrum_size(); }
  cplx *component(int c) { return data.data() + c * modes(); }
  const cplx *component(int c) const { return data.data() + c * modes(); }
};

HalfSpectrum forward(const PeriodicField &f);
PeriodicField inverse(const HalfSpectrum &s, FieldRank rank);

// Wavevector of a half-spectrum index, and whether any axis sits at n/2.
std::array<int, 3> half_mode_wavevector(const TorusGrid &grid, std::size_t m,
                                        bool *nyquist = nullptr);

// Complex transforms on the full grid, normalized like forward().
void fft_forward(const TorusGrid &grid, const cplx *in, cplx *out);
void fft_inverse(const TorusGrid &grid, const cplx *in, cplx *out);

// Applies a Fourier symbol to a real field; Nyquist modes of the output are
// zeroed and Hermitian symmetry of the k_last = 0 plane is restored.
PeriodicField apply_operator(SpectralOp op, const PeriodicField &f, FieldRank out_rank);

PeriodicField gradient(const PeriodicField &f);
PeriodicField perp_gradient(const PeriodicField &f);
PeriodicField divergence(const PeriodicField &f);
PeriodicField laplacian(const PeriodicField &f);
PeriodicField curl(const PeriodicField &f);
// Mean-free solution of Laplace u = f - mean(f).
PeriodicField poisson_solve(const PeriodicField &f);
PeriodicField leray_p(const PeriodicField &v);
PeriodicField leray_q(const PeriodicField &v);
// Symmetric trace-free R with div R = v - mean(v).
PeriodicField div_inverse(const PeriodicField &v);

// Pointwise algebra.
PeriodicField dot(const PeriodicField &a, const PeriodicField &b);
// Symmetric part of a (x) b, i.e. (a_i b_j + a_j b_i) / 2.
PeriodicField sym_outer(const PeriodicField &a, const PeriodicField &b);
PeriodicField identity_tensor(const TorusGrid &grid, double scale = 1.0);
PeriodicField trace(const PeriodicField &tensor);

// Pointwise magnitude: |f| for scalars, Euclidean length for vectors and the
// operator norm (largest absolute eigenvalue) for symmetric tensors.
double pointwise_magnitude(const PeriodicField &f, std::size_t idx);
// Same for raw component values of the given rank.
double magnitude(FieldRank rank, int dim, const double *comps);
double matrix_operator_norm(int dim, const double *sym_components);

std::vector<double> mean(const PeriodicField &f);
std::vector<double> integral(const PeriodicField &f);
double sup_norm(const PeriodicField &f);
// Largest difference quotient |f(x) - f(y)| / |x - y|^alpha over pairs of grid
// points at most `radius` cells apart.
double holder_seminorm(const PeriodicField &f, double alpha, int radius = 8);
// sqrt(sum_{k != 0} |f_k|^2 / |k|^2 + |f_0|^2), summed over components.
double h_minus1_norm(const PeriodicField &f);

// |integral of a(x) e^{i lambda k.x}| over the torus for a scalar field a.
double oscillatory_integral_probe(const PeriodicField &a, const std::array<int, 3> &k,
                                int lambda);

// .pfield files: one line of JSON header followed by little-endian doubles,
// row-major over the grid with components innermost.
void write_pfield(const std::string &path, const PeriodicField &f, double time);
PeriodicField read_pfield(const std::string &path, double *time = nullptr);

}  // namespace eulerci

#endif
