// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

// Property suites shared by `eulerci verify` and the acceptance binary.

#ifndef EULERCI_VERIFICATION_HPP
#define EULERCI_VERIFICATION_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "eulerci/convex_integration.hpp"
#include "json.hpp"

namespace eulerci
{

struct Check
{
  std::string suite;
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  // Scaling fits are reported but do not gate exit codes.
  bool gated = true;
  std::string detail;

  nlohmann::json to_json() const;
};

// value <= tolerance.
Check bound_check(std::string suite, std::string name, double value, double tolerance);

struct SuiteResult
{
  std::vector<Check> checks;
  double seconds = 0.0;

  bool ok() const;  // every gated check passes
  void append(const SuiteResult &other);
  nlohmann::json to_json() const;
};

// Least squares fit of log y = slope log x + intercept. ConfigError on fewer
// than two points or nonpositive data.
struct ScalingFit
{
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;  // 1 when y is exactly constant
  int points = 0;

  nlohmann::json to_json() const;
};
ScalingFit fit_scaling(const std::vector<double> &x, const std::vector<double> &y);

// Random real trigonometric polynomial with wavenumbers |k_a| <= degree,
// sampled pointwise.
PeriodicField random_trig_field(const TorusGrid &grid, FieldRank rank, int degree,
                                std::mt19937_64 &rng);

// Random coefficients over the full lattice sphere with conj(a_k) = a_{-k}.
CoefficientSet random_coefficients(int dim, int nu, std::mt19937_64 &rng);

// div(div^-1 v) = v - mean v, trace of div^-1 v, Leray idempotence and
// complementarity over `count` random fields on an n^dim grid.
SuiteResult operator_suite(int dim, int n, int count, std::uint64_t seed);

// Stationarity residual and closed-form average of W (x) W for `count` random
// coefficient sets spread over the given radii.
SuiteResult stationarity_suite(int dim, const std::vector<int> &nus, int count,
                               std::uint64_t seed);

// Reconstruction over every family of the system, plus rejection of a single
// pair family.
SuiteResult reconstruction_suite(const DirectionFamilySystem &sys, int samples,
                                 std::uint64_t seed);

// Partition of unity identities at `points` random velocities and the
// log-log slope of the transport defect over mu in {4, 8, 16, 32}.
// `gate_slope` turns the slope into a gated check.
SuiteResult partition_suite(int dim, int points, std::uint64_t seed, bool gate_slope);

// One grid step from rest in 2D: step identities and the bound flags.
SuiteResult step_suite(const DirectionFamilySystem &planar, std::uint64_t seed);

// Null step on a Galilean-translated stationary flow, with the zero pressure
// negative control.
SuiteResult null_step_suite(int dim, std::uint64_t seed);

}  // namespace eulerci

#endif
