// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#include "eulerci/field.hpp"

#include <algorithm>
#include <cmath>

namespace eulerci
{

TorusGrid::TorusGrid(int dim, int n) : dim_(dim), n_(n)
{
  if (dim != 2 && dim != 3)
  {
    throw ConfigError("grid dimension must be 2 or 3, got " + std::to_string(dim));
  }
  if (n < 4 || n % 2 != 0)
  {
    throw ConfigError("points per axis must be even and at least 4, got " +
                      std::to_string(n));
  }
  size_ = 1;
  for (int a = 0; a < dim; ++a)
  {
    size_ *= static_cast<std::size_t>(n);
  }
}

double TorusGrid::volume() const { return std::pow(kTwoPi, dim_); }

std::size_t TorusGrid::half_spectrum_size() const
{
  return size_ / n_ * static_cast<std::size_t>(n_ / 2 + 1);
}

std::array<int, 3> TorusGrid::unravel(std::size_t idx) const
{
  std::array<int, 3> ijk{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a)
  {
    ijk[a] = static_cast<int>(idx % n_);
    idx /= n_;
  }
  return ijk;
}

std::size_t TorusGrid::ravel(const std::array<int, 3> &ijk) const
{
  std::size_t idx = 0;
  for (int a = 0; a < dim_; ++a)
  {
    int i = ((ijk[a] % n_) + n_) % n_;
    idx = idx * n_ + i;
  }
  return idx;
}

std::array<double, 3> TorusGrid::coords(std::size_t idx) const
{
  auto ijk = unravel(idx);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a)
  {
    x[a] = ijk[a] * spacing();
  }
  return x;
}

int rank_components(FieldRank rank, int dim)
{
  switch (rank)
  {
    case FieldRank::Scalar:
      return 1;
    case FieldRank::Vector:
      return dim;
    case FieldRank::SymTensor:
      return dim * (dim + 1) / 2;
    case FieldRank::Matrix:
      return dim * dim;
  }
  return 1;
}

std::string rank_name(FieldRank rank)
{
  switch (rank)
  {
    case FieldRank::Scalar:
      return "scalar";
    case FieldRank::Vector:
      return "vector";
    case FieldRank::SymTensor:
      return "sym_tensor";
    case FieldRank::Matrix:
      return "matrix";
  }
  return "scalar";
}

FieldRank rank_from_name(const std::string &name)
{
  if (name == "scalar")
  {
    return FieldRank::Scalar;
  }
  if (name == "vector")
  {
    return FieldRank::Vector;
  }
  if (name == "sym_tensor")
  {
    return FieldRank::SymTensor;
  }
  if (name == "matrix")
  {
    return FieldRank::Matrix;
  }
  throw Error("unknown field rank '" + name + "'");
}

int sym_index(int i, int j, int dim)
{
  if (i > j)
  {
    std::swap(i, j);
  }
  // Offset of row i in the packed upper triangle.
  return i * dim - i * (i - 1) / 2 + (j - i);
}

PeriodicField::PeriodicField(const TorusGrid &grid, FieldRank rank)
  : grid_(grid), rank_(rank), ncomp_(rank_components(rank, grid.dim())),
    data_(static_cast<std::size_t>(ncomp_) * grid.size(), 0.0)
{
}

std::span<double> PeriodicField::component(int c)
{
  return {data_.data() + c * grid_.size(), grid_.size()};
}

std::span<const double> PeriodicField::component(int c) const
{
  return {data_.data() + c * grid_.size(), grid_.size()};
}

namespace
{
void check_compatible(const PeriodicField &a, const PeriodicField &b)
{
  if (!(a.grid() == b.grid()) || a.rank() != b.rank())
  {
    throw Error("field shapes do not match");
  }
}
}  // namespace

PeriodicField &PeriodicField::operator+=(const PeriodicField &o)
{
  check_compatible(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i)
  {
    data_[i] += o.data_[i];
  }
  return *this;
}

PeriodicField &PeriodicField::operator-=(const PeriodicField &o)
{
  check_compatible(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i)
  {
    data_[i] -= o.data_[i];
  }
  return *this;
}

PeriodicField &PeriodicField::operator*=(double s)
{
  for (auto &x : data_)
  {
    x *= s;
  }
  return *this;
}

PeriodicField operator+(PeriodicField a, const PeriodicField &b) { return a += b; }
PeriodicField operator-(PeriodicField a, const PeriodicField &b) { return a -= b; }
PeriodicField operator*(double s, PeriodicField a) { return a *= s; }

// Fornberg's recursion restricted to the first derivative.
std::vector<double> derivative_weights(double x0, const std::vector<double> &xs)
{
  const int n = static_cast<int>(xs.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(2, 0.0));
  double c1 = 1.0;
  double c4 = xs[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i)
  {
    const int mn = std::min(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - x0;
    for (int j = 0; j < i; ++j)
    {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1)
      {
        for (int k = mn; k >= 1; --k)
        {
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
      {
        c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i)
  {
    w[i] = c[i][1];
  }
  return w;
}

std::vector<PeriodicField> time_derivative(const TimeGrid &times,
                                           const std::vector<PeriodicField> &frames)
{
  const int count = static_cast<int>(frames.size());
  std::vector<PeriodicField> out;
  out.reserve(count);
  if (count < 2)
  {
    for (const auto &f : frames)
    {
      PeriodicField z(f.grid(), f.rank());
      out.push_back(std::move(z));
    }
    return out;
  }
  const int width = std::min(count, 7);
  for (int i = 0; i < count; ++i)
  {
    int start = std::clamp(i - width / 2, 0, count - width);
    std::vector<double> nodes(width);
    for (int s = 0; s < width; ++s)
    {
      nodes[s] = times.at(start + s);
    }
    auto w = derivative_weights(times.at(i), nodes);
    PeriodicField d(frames[i].grid(), frames[i].rank());
    auto &dd = d.data();
    for (int s = 0; s < width; ++s)
    {
      const auto &src = frames[start + s].data();
      for (std::size_t k = 0; k < dd.size(); ++k)
      {
        dd[k] += w[s] * src[k];
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace eulerci
