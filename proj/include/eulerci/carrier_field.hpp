// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

// Two-scale representation f(x) = sum_m A_m(x) e^{i lambda m.x}: complex
// envelopes A_m sampled on a slow grid, one per integer carrier m. Fourier
// multipliers act on carrier m through the shifted wavevector q + lambda m, so
// derivatives, Leray projections and the div-inverse stay exact while the fast
// oscillation never has to be sampled. Products add carriers.
//
// A field with the single carrier m = 0 is an ordinary grid field.

#ifndef EULERCI_CARRIER_FIELD_HPP
#define EULERCI_CARRIER_FIELD_HPP

#include <map>
#include <vector>

#include "eulerci/field.hpp"
#include "eulerci/kernels.hpp"
#include "eulerci/stationary_flows.hpp"

namespace eulerci
{

class CarrierField
{
public:
  using Envelope = std::vector<cplx>;  // components one after the other

  CarrierField() = default;
  CarrierField(const TorusGrid &grid, FieldRank rank, int lambda);
  static CarrierField from_field(const PeriodicField &f, int lambda = 1);

  const TorusGrid &grid() const { return grid_; }
  FieldRank rank() const { return rank_; }
  int components() const { return ncomp_; }
  int lambda() const { return lambda_; }
  std::size_t size() const { return grid_.size(); }

  const std::map<IVec, Envelope> &carriers() const { return carriers_; }
  // Envelope of carrier m, created as zero when absent.
  Envelope &carrier(const IVec &m);
  const Envelope *find(const IVec &m) const;
  // True when only the zero carrier is present.
  bool is_grid_field() const;
  // Largest |m_a| over the carriers.
  int max_carrier() const;
  // Real value of a grid field at a point (zero carrier only).
  double value(int c, std::size_t idx) const;
  // Same field labelled with another lambda; only grid fields can change label.
  CarrierField with_lambda(int lambda) const;

  // Drops carriers whose envelope is identically zero.
  void prune();

  CarrierField &operator+=(const CarrierField &o);
  CarrierField &operator-=(const CarrierField &o);
  CarrierField &operator*=(double s);

private:
  void check_compatible(const CarrierField &o) const;

  TorusGrid grid_;
  FieldRank rank_ = FieldRank::Scalar;
  int ncomp_ = 1;
  int lambda_ = 1;
  std::map<IVec, Envelope> carriers_;
};

CarrierField operator+(CarrierField a, const CarrierField &b);
CarrierField operator-(CarrierField a, const CarrierField &b);
CarrierField operator*(double s, CarrierField a);

// Fourier multiplier applied per carrier. Slow Nyquist modes are zeroed.
CarrierField apply_operator(SpectralOp op, const CarrierField &f, FieldRank out_rank);
CarrierField gradient(const CarrierField &f);
CarrierField divergence(const CarrierField &f);  // vector, symmetric tensor or matrix
CarrierField leray_p(const CarrierField &v);
CarrierField leray_q(const CarrierField &v);
CarrierField div_inverse(const CarrierField &v);

// Pointwise products; carriers add.
CarrierField dot(const CarrierField &a, const CarrierField &b);
CarrierField sym_outer(const CarrierField &a, const CarrierField &b);
// a_i b_j, row major.
CarrierField outer(const CarrierField &a, const CarrierField &b);
// Scalar times any rank.
CarrierField multiply(const CarrierField &s, const CarrierField &f);
// s Id for a scalar s.
CarrierField scalar_identity(const CarrierField &s);
// Symmetric part of a matrix field.
CarrierField symmetrize(const CarrierField &m);

// Samples the field on `target`, placing every envelope mode q at q + lambda m.
// A grid field materialized on its own grid keeps its pointwise values.
// Throws ConfigError when some mode does not fit below the target Nyquist.
PeriodicField materialize(const CarrierField &f, const TorusGrid &target);
// materialize onto the field's own slow grid, as a single-carrier field.
CarrierField collapse(const CarrierField &f);

// Spatial mean per component (exact: only modes with q + lambda m = 0 count).
std::vector<double> mean(const CarrierField &f);
// Integral over the torus per component.
std::vector<double> integral(const CarrierField &f);

// Sup of the pointwise magnitude. The fast phase xi = lambda x is sampled
// independently of the slow position on a grid of `oversample` times the
// Nyquist size of the carriers; slow points are visited with stride chosen so
// that at most `max_slow_points` are used. For single-carrier fields this is
// the plain grid sup.
struct TwoScaleSampling
{
  int oversample = 2;
  std::size_t max_slow_points = 4096;
};
double sup_norm(const CarrierField &f, const TwoScaleSampling &s = {});

// sqrt(sum_{k != 0} |f_k|^2 / |k|^2 + |f_0|^2) over true wavevectors k = q + lambda m.
double h_minus1_norm(const CarrierField &f);

}  // namespace eulerci

#endif
