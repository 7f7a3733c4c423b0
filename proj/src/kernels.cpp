// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#include "eulerci/kernels.hpp"

#include "eulerci/field.hpp"

namespace eulerci
{

namespace
{
constexpr cplx I{0.0, 1.0};

double norm2(int dim, const double *q)
{
  double s = 0.0;
  for (int a = 0; a < dim; ++a)
  {
    s += q[a] * q[a];
  }
  return s;
}
}  // namespace

int op_in_components(SpectralOp op, int dim, int ncomp)
{
  switch (op)
  {
    case SpectralOp::Gradient:
    case SpectralOp::PerpGradient:
      return 1;
    case SpectralOp::Divergence:
    case SpectralOp::LerayP:
    case SpectralOp::LerayQ:
    case SpectralOp::DivInverse:
    case SpectralOp::Curl:
    case SpectralOp::GradientVector:
      return dim;
    case SpectralOp::DivergenceSym:
      return dim * (dim + 1) / 2;
    case SpectralOp::DivergenceMatrix:
      return dim * dim;
    case SpectralOp::Laplacian:
    case SpectralOp::Poisson:
      return ncomp;
  }
  return 1;
}

int op_out_components(SpectralOp op, int dim, int ncomp)
{
  switch (op)
  {
    case SpectralOp::Gradient:
    case SpectralOp::PerpGradient:
    case SpectralOp::DivergenceSym:
    case SpectralOp::DivergenceMatrix:
    case SpectralOp::LerayP:
    case SpectralOp::LerayQ:
    case SpectralOp::Curl:
      return dim;
    case SpectralOp::Divergence:
      return 1;
    case SpectralOp::DivInverse:
      return dim * (dim + 1) / 2;
    case SpectralOp::GradientVector:
      return dim * dim;
    case SpectralOp::Laplacian:
    case SpectralOp::Poisson:
      return ncomp;
  }
  return 1;
}

void apply_symbol(SpectralOp op, int dim, const double *q, const cplx *in, cplx *out,
                  int ncomp)
{
  const double q2 = norm2(dim, q);
  const bool zero = q2 == 0.0;
  switch (op)
  {
    case SpectralOp::Gradient:
      for (int a = 0; a < dim; ++a)
      {
        out[a] = I * q[a] * in[0];
      }
      return;
    case SpectralOp::PerpGradient:
      if (dim != 2)
      {
        throw Error("perpendicular gradient is only defined in 2D");
      }
      out[0] = -I * q[1] * in[0];
      out[1] = I * q[0] * in[0];
      return;
    case SpectralOp::Divergence:
    {
      cplx s = 0.0;
      for (int a = 0; a < dim; ++a)
      {
        s += q[a] * in[a];
      }
      out[0] = I * s;
      return;
    }
    case SpectralOp::DivergenceSym:
      for (int i = 0; i < dim; ++i)
      {
        cplx s = 0.0;
        for (int j = 0; j < dim; ++j)
        {
          s += q[j] * in[sym_index(i, j, dim)];
        }
        out[i] = I * s;
      }
      return;
    case SpectralOp::DivergenceMatrix:
      for (int i = 0; i < dim; ++i)
      {
        cplx s = 0.0;
        for (int j = 0; j < dim; ++j)
        {
          s += q[j] * in[i * dim + j];
        }
        out[i] = I * s;
      }
      return;
    case SpectralOp::Laplacian:
      for (int c = 0; c < ncomp; ++c)
      {
        out[c] = -q2 * in[c];
      }
      return;
    case SpectralOp::Poisson:
      for (int c = 0; c < ncomp; ++c)
      {
        out[c] = zero ? cplx(0.0) : -in[c] / q2;
      }
      return;
    case SpectralOp::LerayP:
    case SpectralOp::LerayQ:
    {
      if (zero)
      {
        for (int a = 0; a < dim; ++a)
        {
          out[a] = op == SpectralOp::LerayQ ? in[a] : cplx(0.0);
        }
        return;
      }
      cplx qv = 0.0;
      for (int a = 0; a < dim; ++a)
      {
        qv += q[a] * in[a];
      }
      for (int a = 0; a < dim; ++a)
      {
        const cplx g = q[a] * qv / q2;
        out[a] = op == SpectralOp::LerayQ ? g : in[a] - g;
      }
      return;
    }
    case SpectralOp::Curl:
      if (dim != 3)
      {
        throw Error("curl is only defined in 3D");
      }
      out[0] = I * (q[1] * in[2] - q[2] * in[1]);
      out[1] = I * (q[2] * in[0] - q[0] * in[2]);
      out[2] = I * (q[0] * in[1] - q[1] * in[0]);
      return;
    case SpectralOp::GradientVector:
      for (int i = 0; i < dim; ++i)
      {
        for (int j = 0; j < dim; ++j)
        {
          out[i * dim + j] = I * q[j] * in[i];
        }
      }
      return;
    case SpectralOp::DivInverse:
    {
      const int nout = dim * (dim + 1) / 2;
      if (zero)
      {
        for (int c = 0; c < nout; ++c)
        {
          out[c] = 0.0;
        }
        return;
      }
      // u solves Laplace u = v; G_ij = d_j u_i.
      cplx u[3];
      cplx divu = 0.0;
      for (int a = 0; a < dim; ++a)
      {
        u[a] = -in[a] / q2;
        divu += I * q[a] * u[a];
      }
      if (dim == 2)
      {
        for (int i = 0; i < 2; ++i)
        {
          for (int j = i; j < 2; ++j)
          {
            cplx r = I * (q[j] * u[i] + q[i] * u[j]);
            if (i == j)
            {
              r -= divu;
            }
            out[sym_index(i, j, 2)] = r;
          }
        }
        return;
      }
      cplx qu = 0.0;
      for (int a = 0; a < 3; ++a)
      {
        qu += q[a] * u[a];
      }
      cplx pu[3];
      for (int a = 0; a < 3; ++a)
      {
        pu[a] = u[a] - q[a] * qu / q2;
      }
      for (int i = 0; i < 3; ++i)
      {
        for (int j = i; j < 3; ++j)
        {
          cplx r = 0.25 * I * (q[j] * pu[i] + q[i] * pu[j]) +
                   0.75 * I * (q[j] * u[i] + q[i] * u[j]);
          if (i == j)
          {
            r -= 0.5 * divu;
          }
          out[sym_index(i, j, 3)] = r;
        }
      }
      return;
    }
  }
}

}  // namespace eulerci
