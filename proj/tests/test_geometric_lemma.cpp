// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#include <numbers>
#include <set>

#include "doctest.h"
#include "eulerci/geometric_lemma.hpp"

using namespace eulerci;

TEST_CASE("rational circle points")
{
  auto [x0, y0] = rational_circle_point(0, 1);
  CHECK(x0.num == 0);
  CHECK(y0.num == -1);
  CHECK(y0.den == 1);
  auto [x1, y1] = rational_circle_point(1, 1);
  CHECK(x1.num == 1);
  CHECK(x1.den == 1);
  CHECK(y1.num == 0);
  auto [x, y] = rational_circle_point(1, 2);
  CHECK(x.num == 4);
  CHECK(x.den == 5);
  CHECK(y.num == -3);
  CHECK(y.den == 5);
  // Scaled by the denominator the point lies on the lattice sphere of nu = 25.
  auto pts = lattice_sphere(2, 25);
  CHECK(std::find(pts.begin(), pts.end(), IVec{4, -3, 0}) != pts.end());
  // Every rational point with denominator dividing 5 appears in the nu = 25 set.
  for (long long p = -12; p <= 12; ++p)
  {
    for (long long q = 1; q <= 12; ++q)
    {
      auto [a, b] = rational_circle_point(p, q);
      if (5 % a.den == 0 && 5 % b.den == 0)
      {
        IVec k{static_cast<int>(a.num * (5 / a.den)), static_cast<int>(b.num * (5 / b.den)), 0};
        CHECK(std::find(pts.begin(), pts.end(), k) != pts.end());
      }
    }
  }
}

TEST_CASE("partition into families")
{
  auto five = partition_families(2, lattice_sphere(2, 5), 4);
  REQUIRE(five.size() == 4);
  for (const auto &f : five)
  {
    CHECK(f.size() == 2);
    CHECK(f[0] == negate(f[1]));
  }
  auto one = partition_families(2, lattice_sphere(2, 5), 1);
  CHECK(one[0].size() == 8);
  auto tw = partition_families(2, lattice_sphere(2, 25), 4);
  CHECK(tw[0].size() == 4);
  CHECK(tw[1].size() == 4);
  CHECK(tw[2].size() == 2);
  CHECK(tw[3].size() == 2);
  CHECK_THROWS_AS(partition_families(2, lattice_sphere(2, 1), 4), Error);
  CHECK_THROWS_AS(partition_families(2, {{1, 0, 0}}, 1), Error);

  // Disjoint, symmetric, and covering.
  auto pts = lattice_sphere(3, 41);
  auto fam = partition_families(3, pts, 8);
  std::size_t total = 0;
  std::set<IVec> seen;
  for (const auto &f : fam)
  {
    total += f.size();
    for (const auto &k : f)
    {
      CHECK(std::find(f.begin(), f.end(), negate(k)) != f.end());
      CHECK(seen.insert(k).second);
    }
  }
  CHECK(total == pts.size());
}

TEST_CASE("angular gaps")
{
  CHECK(angular_gap(2, lattice_sphere(2, 1)) == doctest::Approx(std::numbers::pi / 2));
  CHECK(angular_gap(2, {{1, 0, 0}, {-1, 0, 0}}) == doctest::Approx(std::numbers::pi));
  auto octa = lattice_sphere(3, 1);
  // Covering radius of the octahedron directions is acos(1/sqrt(3)).
  CHECK(angular_gap(3, octa) == doctest::Approx(2.0 * std::acos(1.0 / std::sqrt(3.0))).epsilon(1e-2));
}

TEST_CASE("interior margin program")
{
  // nu = 1: w = (1/2, 1/2) gives Id / 2 but the hull is flat.
  CHECK(interior_margin(2, {{1, 0, 0}, {0, 1, 0}}) < 0.0);
  CHECK(interior_margin(2, {{1, 0, 0}}) < 0.0);
  // Three directions at 60 degrees: equal weights 1/3 are optimal.
  // (2, 0), (1, 2), (-1, 2) are not exactly 60 degrees; use the nu = 5 set.
  const double m = interior_margin(2, {{1, 2, 0}, {2, 1, 0}, {1, -2, 0}, {2, -1, 0}});
  CHECK(m > 1e-6);
  CHECK(m <= 0.25 + 1e-12);
}

TEST_CASE("build_gamma rejects degenerate families")
{
  CHECK_THROWS_AS(build_gamma(2, {{1, 0, 0}, {-1, 0, 0}}), Error);
  CHECK_THROWS_AS(build_gamma(2, lattice_sphere(2, 1)), Error);
  CHECK_THROWS_AS(build_gamma(2, {{1, 2, 0}, {-1, -2, 0}, {2, 1, 0}, {-2, -1, 0}}), Error);
}

TEST_CASE("build_gamma on the full nu = 5 set")
{
  auto g = build_gamma(2, lattice_sphere(2, 5));
  CHECK(g.vertices.size() == 4);
  CHECK(g.r0 > 0.0);
  CHECK(g.r0 == doctest::Approx(g.theta / (2.0 * g.alpha)));
  for (std::size_t i = 0; i < g.vertices.size(); ++i)
  {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2, 2);
    for (const auto &[p, w] : g.decompositions[i])
    {
      CHECK(w > 0.0);
      sum += w * projector(2, g.pairs[p]);
    }
    CHECK((sum - g.vertices[i]).norm() < 1e-12);
  }
  auto gam = gamma_eval(g, Eigen::MatrixXd::Identity(2, 2));
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2, 2);
  for (const auto &[k, v] : gam)
  {
    CHECK(v > 0.0);
    CHECK(gam.at(negate(k)) == v);
    sum += v * v * projector(2, k);
  }
  CHECK((sum - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
  auto rc = check_reconstruction(g, 500, 1);
  CHECK(rc.max_error < 1e-9);
  CHECK(rc.min_gamma > 0.0);

  // Just outside the ball.
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(2, 2);
  R(0, 0) += g.r0 + 1e-3;
  CHECK_THROWS_AS(gamma_eval(g, R), Error);

  // Pair weights are affine in R.
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd B = A;
  A(0, 1) = A(1, 0) = 0.3 * g.r0;
  B(0, 0) -= 0.4 * g.r0;
  auto wa = g.pair_weights(A);
  auto wb = g.pair_weights(B);
  auto wm = g.pair_weights(0.5 * (A + B));
  CHECK((0.5 * (wa + wb) - wm).norm() < 1e-13);
}

TEST_CASE("planned systems")
{
  NuSearchOptions opts;
  opts.spread_target = std::numbers::pi / 2;
  auto sys = plan_system(2, opts);
  CHECK(sys.nu == 325);
  CHECK(sys.family_count() == 4);
  for (std::size_t f = 0; f < sys.gammas.size(); ++f)
  {
    CHECK(angular_gap(2, sys.families[f]) <= opts.spread_target);
    auto rc = check_reconstruction(sys.gammas[f], 500, 7 + f);
    CHECK(rc.max_error < 1e-9);
    CHECK(rc.min_gamma > 0.0);
  }
  CHECK(circle_hausdorff_distance(lattice_sphere(2, sys.nu)) <= opts.spread_target);

  // Serialization round trip keeps the weights.
  auto back = DirectionFamilySystem::from_json(nlohmann::json::parse(sys.to_json().dump()));
  CHECK(back.hash() == sys.hash());
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(2, 2);
  R(0, 1) = R(1, 0) = 0.5 * sys.r0;
  CHECK((back.gammas[1].pair_weights(R) - sys.gammas[1].pair_weights(R)).norm() < 1e-14);

  NuSearchOptions one;
  one.spread_target = std::numbers::pi;
  CHECK(choose_nu(2, 1, one) == 1);

  NuSearchOptions tiny;
  tiny.spread_target = 0.01;
  tiny.search_bound = 50;
  CHECK_THROWS_AS(choose_nu(2, 4, tiny), ConfigError);
}
