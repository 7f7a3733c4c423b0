// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

// States shared by the iteration tests and the acceptance suite.

#ifndef EULERCI_CI_FIXTURES_HPP
#define EULERCI_CI_FIXTURES_HPP

#include <cmath>

#include "eulerci/convex_integration.hpp"
#include "eulerci/spectral.hpp"

namespace eulerci::testing
{

inline const DirectionFamilySystem &planar_system()
{
  static const DirectionFamilySystem sys = plan_system(2, NuSearchOptions{});
  return sys;
}

// Exact Euler-Reynolds state with a shear velocity A sin(x2) e1, pressure
// p = a(t) f and stress R = a(t) div^-1 grad f, where
// f = cos x1 + sin(x1 + x2) and a(t) = s (1 + sin(2 pi t) / 2). The scale s
// puts sup |R| at `fraction` of eta. d_t R is supplied analytically.
inline EulerReynoldsState pulsating_stress_state(const TorusGrid &g, const TimeGrid &tg,
                                                 double eta, double fraction, double shear)
{
  PeriodicField f(g, FieldRank::Scalar);
  PeriodicField v(g, FieldRank::Vector);
  for (std::size_t i = 0; i < g.size(); ++i)
  {
    const auto x = g.coords(i);
    f.at(0, i) = std::cos(x[0]) + std::sin(x[0] + x[1]);
    v.at(0, i) = shear * std::sin(x[1]);
  }
  const PeriodicField r = div_inverse(gradient(f));
  const double s = fraction * eta / (1.5 * sup_norm(r));
  EvolvingField V{tg, {}, {}}, P{tg, {}, {}}, R{tg, {}, {}};
  for (int i = 0; i < tg.count; ++i)
  {
    const double t = tg.at(i);
    const double a = s * (1.0 + 0.5 * std::sin(kTwoPi * t));
    const double da = s * 0.5 * kTwoPi * std::cos(kTwoPi * t);
    V.frames.push_back(v);
    P.frames.push_back(a * f);
    R.frames.push_back(a * r);
    R.dt_frames.push_back(da * r);
  }
  return EulerReynoldsState::from_fields(V, P, R, 0);
}

}  // namespace eulerci::testing

#endif
