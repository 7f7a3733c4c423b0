// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EULERCI_FIELD_HPP
#define EULERCI_FIELD_HPP

#include <array>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eulerci
{

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Base class for all library errors.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Configuration or feasibility problem detected before any computation.
class ConfigError : public Error
{
public:
  using Error::Error;
};

// Uniform periodic grid on [0, 2pi)^dim with n points per axis.
class TorusGrid
{
public:
  TorusGrid() = default;
  TorusGrid(int dim, int n);

  int dim() const { return dim_; }
  int n() const { return n_; }
  std::size_t size() const { return size_; }
  double spacing() const { return kTwoPi / n_; }
  double volume() const;

  // Number of complex coefficients in the real-to-complex half spectrum.
  std::size_t half_spectrum_size() const;

  // Multi-index of a linear point index, axis 0 slowest.
  std::array<int, 3> unravel(std::size_t idx) const;
  std::size_t ravel(const std::array<int, 3> &ijk) const;
  std::array<double, 3> coords(std::size_t idx) const;

  bool operator==(const TorusGrid &o) const { return dim_ == o.dim_ && n_ == o.n_; }

private:
  int dim_ = 0;
  int n_ = 0;
  std::size_t size_ = 0;
};

// Signed wavenumber of FFT index i on an axis with n points.
inline int wavenumber(int i, int n) { return i <= n / 2 ? i : i - n; }

enum class FieldRank
{
  Scalar,
  Vector,
  SymTensor,
  Matrix  // full d x d, row major; used for non-symmetric products
};

int rank_components(FieldRank rank, int dim);
std::string rank_name(FieldRank rank);
FieldRank rank_from_name(const std::string &name);

// Component index of entry (i, j) of a symmetric tensor stored as its upper
// triangle, row by row: (11, 12, 22) in 2D and (11, 12, 13, 22, 23, 33) in 3D.
int sym_index(int i, int j, int dim);

// Real field sampled on a TorusGrid, components stored one after the other.
class PeriodicField
{
public:
  PeriodicField() = default;
  PeriodicField(const TorusGrid &grid, FieldRank rank);

  const TorusGrid &grid() const { return grid_; }
  FieldRank rank() const { return rank_; }
  int components() const { return ncomp_; }
  std::size_t size() const { return grid_.size(); }

  std::span<double> component(int c);
  std::span<const double> component(int c) const;
  std::vector<double> &data() { return data_; }
  const std::vector<double> &data() const { return data_; }

  double &at(int c, std::size_t idx) { return data_[c * grid_.size() + idx]; }
  double at(int c, std::size_t idx) const { return data_[c * grid_.size() + idx]; }

  // Flags recording structural claims; checked by validate().
  bool trace_free = false;
  bool divergence_free = false;

  PeriodicField &operator+=(const PeriodicField &o);
  PeriodicField &operator-=(const PeriodicField &o);
  PeriodicField &operator*=(double s);

private:
  TorusGrid grid_;
  FieldRank rank_ = FieldRank::Scalar;
  int ncomp_ = 1;
  std::vector<double> data_;
};

PeriodicField operator+(PeriodicField a, const PeriodicField &b);
PeriodicField operator-(PeriodicField a, const PeriodicField &b);
PeriodicField operator*(double s, PeriodicField a);

// Uniform time samples t_i = t0 + i * dt, i = 0..count-1.
struct TimeGrid
{
  double t0 = 0.0;
  double t1 = 1.0;
  int count = 9;

  double dt() const { return count > 1 ? (t1 - t0) / (count - 1) : 0.0; }
  double at(int i) const { return t0 + i * dt(); }
  // Samples used for bound checks: the first and last two are excluded when
  // there are enough of them.
  bool interior(int i) const { return count < 7 || (i >= 2 && i < count - 2); }
};

struct EvolvingField
{
  TimeGrid times;
  std::vector<PeriodicField> frames;
  // Analytic time derivatives when known; empty otherwise.
  std::vector<PeriodicField> dt_frames;

  bool has_dt() const { return !dt_frames.empty(); }
};

// Time derivative of a sampled family of fields by 6th order finite
// differences (7-point stencils, one-sided near the ends).
std::vector<PeriodicField> time_derivative(const TimeGrid &times,
                                           const std::vector<PeriodicField> &frames);

// Finite-difference weights for the first derivative at x0 on the nodes xs.
std::vector<double> derivative_weights(double x0, const std::vector<double> &xs);

}  // namespace eulerci

#endif
