#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "semihelix/construct.hpp"
#include "test_helpers.hpp"

using namespace semihelix;
using semihelix::testing::circle_fixture;
using semihelix::testing::make_vec;
using semihelix::testing::preset_suite;
using semihelix::testing::random_in_box;
using Catch::Matchers::WithinAbs;

namespace {
const Vec kU0 = Vec::Zero(1);  // circle parameter mapping to (1, 0)
}

TEST_CASE("sweep frame fields at exact angles") {
  const SemiHelixSpec spec = circle_fixture();
  const Vec d = spec.d.vec();
  const Vec eta = spec.eta(kU0);  // (1, 0, 0)
  REQUIRE((eta - make_vec({1, 0, 0})).norm() < 1e-15);

  SECTION("t_theta") {
    REQUIRE((t_theta(spec, kU0, 0.0) - d).norm() < 1e-15);
    REQUIRE((t_theta(spec, kU0, kPi / 2) - eta).norm() < 1e-15);
    const Vec expected = make_vec({0.5, 0.0, std::sqrt(3.0) / 2.0});
    REQUIRE((t_theta(spec, kU0, kPi / 6) - expected).norm() < 1e-15);
  }
  SECTION("t_phi") {
    REQUIRE((t_phi(spec, kU0, 0.0) - d).norm() < 1e-15);
    REQUIRE((t_phi(spec, kU0, kPi) - eta).norm() < 1e-15);
    const Vec expected = make_vec({std::sqrt(2.0) / 2.0, 0.0, std::sqrt(2.0) / 2.0});
    REQUIRE((t_phi(spec, kU0, kPi / 2) - expected).norm() < 1e-15);
  }
  SECTION("xi_theta") {
    REQUIRE((xi_theta(spec, kU0, 0.0) + eta).norm() < 1e-15);
    const Vec expected = make_vec({-std::sqrt(3.0) / 2.0, 0.0, 0.5});
    REQUIRE((xi_theta(spec, kU0, kPi / 6) - expected).norm() < 1e-15);
    REQUIRE(std::abs(xi_theta(spec, kU0, 0.77).dot(t_theta(spec, kU0, 0.77))) < 1e-15);
  }
}

TEST_CASE("frame algebra over random samples") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> theta_dist(-kPi + 0.01, kPi - 0.01);
  for (const SemiHelixSpec& spec : preset_suite()) {
    const Vec d = spec.d.vec();
    for (int rep = 0; rep < 50; ++rep) {
      const Vec u = random_in_box(spec.base.immersion.domain, rng);
      const double theta = theta_dist(rng);
      const Vec tt = t_theta(spec, u, theta);
      const Vec tp = t_phi(spec, u, theta);
      const Vec xi = xi_theta(spec, u, theta);
      REQUIRE(std::abs(tt.norm() - 1.0) < 1e-12);
      REQUIRE(std::abs(tp.norm() - 1.0) < 1e-12);
      REQUIRE(std::abs(xi.norm() - 1.0) < 1e-12);
      REQUIRE(std::abs(xi.dot(tt)) < 1e-12);
      REQUIRE(std::abs(xi.dot(d) - std::sin(theta)) < 1e-12);
    }
  }
}

TEST_CASE("chord identity") {
  std::mt19937_64 rng(43);
  const SemiHelixSpec spec = circle_fixture();
  for (int i = 0; i <= 2000; ++i) {
    const double theta = -kPi + 0.01 + i * (2 * kPi - 0.02) / 2000.0;
    const Vec u = random_in_box(spec.base.immersion.domain, rng);
    const Vec eta = spec.eta(u);
    const Vec d = spec.d.vec();
    const Vec chord = chord_factor(spec.r, theta) * t_phi(spec, u, theta);
    const Vec expanded = spec.r * (1.0 - std::cos(theta)) * eta + spec.r * std::sin(theta) * d;
    REQUIRE((chord - expanded).norm() < 1e-12);
    if (theta >= 0) {
      const Vec root_form =
          spec.r * std::sqrt(2.0 * (1.0 - std::cos(theta))) * t_phi(spec, u, theta);
      REQUIRE((chord - root_form).norm() < 1e-12);
    }
  }
}

TEST_CASE("sweep point examples") {
  const SemiHelixSpec spec = circle_fixture();
  REQUIRE((sweep_point(spec, kU0, 0.0) - make_vec({1, 0, 0})).norm() < 1e-15);
  // Chord form and expanded form both give (2, 0, 1) at theta = pi/2.
  REQUIRE((sweep_point(spec, kU0, kPi / 2) - make_vec({2, 0, 1})).norm() < 1e-14);
  // Signed chord: the negative angle lands on the same circle below the base.
  REQUIRE((sweep_point(spec, kU0, -kPi / 2) - make_vec({2, 0, -1})).norm() < 1e-14);
}

TEST_CASE("sweep circle properties") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> theta_dist(-kPi + 0.01, kPi - 0.01);
  for (const SemiHelixSpec& spec : preset_suite()) {
    for (int rep = 0; rep < 30; ++rep) {
      const Vec u = random_in_box(spec.base.immersion.domain, rng);
      const double theta = theta_dist(rng);
      const Vec x = spec.base_point(u);
      const Vec center = x + spec.r * spec.eta(u);
      const Vec y = sweep_point(spec, u, theta);
      REQUIRE(std::abs((y - center).norm() - spec.r) < 1e-12);
      REQUIRE(std::abs(spec.d.dot(y) - spec.r * std::sin(theta)) < 1e-12);
      // Tangency: d/dtheta of the sweep is r T_theta.
      const double h = 1e-6;
      const Vec fd =
          (sweep_point(spec, u, theta + h) - sweep_point(spec, u, theta - h)) / (2.0 * h);
      REQUIRE((fd - spec.r * t_theta(spec, u, theta)).norm() < 1e-8);
    }
  }
}

TEST_CASE("immerse gates on the window") {
  const SemiHelixSpec spec = circle_fixture(1.0, 0.0, kPi / 6);
  REQUIRE_NOTHROW(immerse(spec, kU0, 0.3));
  REQUIRE_THROWS_AS(immerse(spec, kU0, kPi / 6), WindowViolation);
  REQUIRE_THROWS_AS(immerse(spec, kU0, -0.6), WindowViolation);
}

TEST_CASE("product surface structure") {
  const SemiHelixSpec spec = circle_fixture(1.0, 0.0, kPi / 3);
  const ParamImmersion m = build_product_surface(spec);
  REQUIRE(m.domain_dim == 2);
  REQUIRE(m.ambient_dim == 3);
  REQUIRE(m.has_analytic_jacobian());

  std::mt19937_64 rng(45);
  for (int rep = 0; rep < 25; ++rep) {
    const Vec up = random_in_box(m.domain, rng);
    const Vec via_chart = evaluate(m, up);
    const Vec direct = immerse(spec, Vec(up.head(1)), up(1));
    REQUIRE((via_chart - direct).norm() == 0.0);
  }

  // Full rank across a 64x33 grid (SVD oracle).
  const RankReport rank = check_immersion_rank(m, SampleGrid(m.domain, {64, 33}));
  REQUIRE(rank.min_singular_value > 0.4);
}

TEST_CASE("analytic product Jacobian matches finite differences") {
  for (const SemiHelixSpec& spec : preset_suite()) {
    const ParamImmersion m = build_product_surface(spec);
    REQUIRE(m.has_analytic_jacobian());
    const ParamImmersion fd = m.without_analytic_jacobian();
    std::mt19937_64 rng(46);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const Vec up = random_in_box(m.domain, rng);
      worst = std::max(worst, (jacobian(m, up) - jacobian(fd, up)).cwiseAbs().maxCoeff());
    }
    REQUIRE(worst < 1e-6);
  }
}

TEST_CASE("certification of a constructed fixture") {
  const SemiHelixSpec spec = circle_fixture(1.0, 0.0, kPi / 6);
  const ParamImmersion m = build_product_surface(spec);
  const SampleGrid grid(m.domain, {64, 33});
  auto theta_ref = [](const Vec& u) { return u(1); };

  const VerificationReport report =
      verify_semihelix(m, spec.d, spec.window, grid, theta_ref);
  REQUIRE(report.pass);
  REQUIRE(report.max_angle_error_vs_param < 1e-9);
  REQUIRE(report.theta_min > spec.window.lo());
  REQUIRE(report.theta_max < spec.window.hi());
  REQUIRE(report.rank_deficient_nodes.empty());

  // The same certification through finite differences.
  const VerificationReport fd_report =
      verify_semihelix(m.without_analytic_jacobian(), spec.d, spec.window, grid, theta_ref);
  REQUIRE(fd_report.pass);
  REQUIRE(fd_report.max_angle_error_vs_param < 1e-6);
}

TEST_CASE("plane fails certification against a narrow window") {
  const OrientedSurface plane = make_plane(2);
  const AngleWindow window(0.0, kPi / 6);
  const Direction d(make_vec({0, 0, 1}));
  const VerificationReport report =
      verify_semihelix(plane.immersion, d, window, SampleGrid(plane.immersion.domain, {8, 8}));
  REQUIRE_FALSE(report.pass);
  REQUIRE_THAT(std::abs(report.theta_max), WithinAbs(kPi / 2, 1e-12));
}

TEST_CASE("cylinder certifies as a constant-angle surface") {
  const OrientedSurface cyl = make_cylinder(1.0);
  const Direction d(make_vec({0, 0, 1}));
  const SampleGrid grid(cyl.immersion.domain, {48, 9});

  SECTION("within any positive window") {
    const VerificationReport report =
        verify_semihelix(cyl.immersion, d, AngleWindow(0.0, 0.3), grid);
    REQUIRE(report.pass);
    REQUIRE(std::abs(report.theta_min) < 1e-12);
    REQUIRE(std::abs(report.theta_max) < 1e-12);
  }
  SECTION("as the degenerate zero-width window") {
    const VerificationReport report =
        verify_semihelix(cyl.immersion, d, AngleWindow(0.0, 0.0), grid);
    REQUIRE(report.pass);
    REQUIRE(report.worst_violation < 1e-9);
  }
}

TEST_CASE("immersion rank detects the oversized inward sweep") {
  // Inward base normal with r = 5: the sweep passes through the circle's
  // center, collapsing the u-column of the Jacobian at large |theta|.
  const SemiHelixSpec bad(flip_normal(make_circle(1.0)), 5.0, AngleWindow(0.0, kPi / 3),
                          Direction(Vec::Unit(3, 2)));
  const ParamImmersion m = build_product_surface(bad);
  const RankReport rank = check_immersion_rank(m, SampleGrid(m.domain, {48, 4001}));
  REQUIRE(rank.min_singular_value < 1e-3);
  // The collapse happens where r (1 - cos theta) = 1.
  const double theta_star = std::acos(1.0 - 1.0 / 5.0);
  REQUIRE(std::abs(std::abs(rank.argmin_node(1)) - theta_star) < 1e-2);

  // The healthy outward sweep stays well-conditioned.
  const SemiHelixSpec good = circle_fixture(1.0, 0.0, kPi / 3);
  const RankReport ok =
      check_immersion_rank(build_product_surface(good), SampleGrid(m.domain, {48, 65}));
  REQUIRE(ok.min_singular_value > 0.4);
}

TEST_CASE("plane base keeps unit minimum singular value") {
  const SemiHelixSpec spec(make_plane(1), 1.0, AngleWindow(0.0, kPi / 6),
                           Direction(Vec::Unit(3, 2)));
  const ParamImmersion m = build_product_surface(spec);
  const RankReport rank = check_immersion_rank(m, SampleGrid(m.domain, {16, 17}));
  REQUIRE_THAT(rank.min_singular_value, WithinAbs(1.0, 1e-12));
}

TEST_CASE("spec validation") {
  REQUIRE_THROWS_AS(SemiHelixSpec(make_circle(1.0), -1.0, AngleWindow(0.0, 0.3),
                                  Direction(Vec::Unit(3, 2))),
                    ValidationError);
  // Direction not orthogonal to the base hyperplane.
  REQUIRE_THROWS_AS(SemiHelixSpec(make_circle(1.0), 1.0, AngleWindow(0.0, 0.3),
                                  Direction::normalized(make_vec({1, 0, 1}))),
                    ValidationError);
  // Dimension mismatch.
  REQUIRE_THROWS_AS(
      SemiHelixSpec(make_circle(1.0), 1.0, AngleWindow(0.0, 0.3), Direction(Vec::Unit(4, 3))),
      ValidationError);
}
