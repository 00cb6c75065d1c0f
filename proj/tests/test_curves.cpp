#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "semihelix/curves.hpp"
#include "test_helpers.hpp"

using namespace semihelix;
using semihelix::testing::circle_fixture;
using semihelix::testing::make_vec;
using semihelix::testing::preset_suite;
using semihelix::testing::random_in_box;
using Catch::Matchers::WithinAbs;

namespace {

/// Fiber circle of a constructed spec in closed form: center x + r eta,
/// basis e1 = -eta, e2 = d, angular rate 1/r, phased at the start angle.
ClosedFormArc construction_arc(const SemiHelixSpec& spec, const Vec& u, double theta_start) {
  const Vec eta = spec.eta(u);
  const Vec center = spec.base_point(u) + spec.r * eta;
  const int n = spec.ambient_dim();
  const auto basis_vectors = extend_orthonormal_basis({Vec(-eta), spec.d.vec()}, n);
  Mat basis(n, n);
  for (int j = 0; j < n; ++j) basis.col(j) = basis_vectors[j];
  return ClosedFormArc(1.0 / spec.r, theta_start, Vec(basis.transpose() * center), basis);
}

}  // namespace

TEST_CASE("t_theta_field") {
  SECTION("cylinder: d already tangent") {
    const OrientedSurface cyl = make_cylinder(1.0);
    const Direction d(make_vec({0, 0, 1}));
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 10; ++rep) {
      const Vec u = random_in_box(cyl.immersion.domain, rng);
      REQUIRE((t_theta_field(cyl.immersion, d, u).vec() - d.vec()).norm() < 1e-12);
    }
  }
  SECTION("constructed fixture: equals the sweep frame") {
    const SemiHelixSpec spec = circle_fixture(1.0, 0.0, kPi / 3);
    const ParamImmersion m = build_product_surface(spec);
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 20; ++rep) {
      const Vec up = random_in_box(m.domain, rng);
      const Vec field = t_theta_field(m, spec.d, up).vec();
      const Vec expected = t_theta(spec, Vec(up.head(1)), up(1));
      REQUIRE((field - expected).norm() < 1e-9);
    }
  }
  SECTION("plane: d normal to the surface") {
    const OrientedSurface plane = make_plane(2);
    REQUIRE_THROWS_AS(t_theta_field(plane.immersion, Direction(make_vec({0, 0, 1})),
                                    Vec(Vec::Zero(2))),
                      TangentDegenerate);
  }
}

TEST_CASE("trace on the circle fixture follows the exact fiber circle") {
  const SemiHelixSpec spec = circle_fixture(1.0, 0.0, kPi / 3);
  const ParamImmersion m = build_product_surface(spec);
  const Vec start = make_vec({0.0, 0.0});  // base point (1,0,0), theta = 0

  const IntegralCurve curve = trace_integral_curve(m, spec.d, start, kPi / 6, 1e-3);
  REQUIRE_FALSE(curve.exited_domain);
  REQUIRE_THAT(curve.t.back(), WithinAbs(kPi / 6, 1e-12));
  // Exact circle (2 - cos t, 0, sin t) centered at (2, 0, 0).
  const Vec expected = make_vec({2.0 - std::sqrt(3.0) / 2.0, 0.0, 0.5});
  REQUIRE((curve.points.back() - expected).norm() < 1e-8);

  for (size_t i = 0; i + 1 < curve.t.size(); ++i) {
    const double dt = curve.t[i + 1] - curve.t[i];
    const double speed = (curve.points[i + 1] - curve.points[i]).norm() / dt;
    REQUIRE_THAT(speed, WithinAbs(1.0, 1e-3));
  }
}

TEST_CASE("trace on the cylinder is a unit-speed ruling") {
  const OrientedSurface cyl = make_cylinder(1.0);
  const Direction d(make_vec({0, 0, 1}));
  const Vec start = make_vec({1.0, -0.5});
  const IntegralCurve curve = trace_integral_curve(cyl.immersion, d, start, 1.0, 1e-2);
  REQUIRE(curve.points.size() > 10);
  const Vec p0 = curve.points.front();
  for (size_t i = 0; i < curve.points.size(); ++i) {
    const Vec expected = p0 + curve.t[i] * d.vec();
    REQUIRE((curve.points[i] - expected).norm() < 1e-10);
    REQUIRE(std::abs(curve.theta[i]) < 1e-12);
  }
}

TEST_CASE("zero-length span gives a single node") {
  const SemiHelixSpec spec = circle_fixture();
  const ParamImmersion m = build_product_surface(spec);
  const Vec start = make_vec({0.3, 0.1});
  const IntegralCurve curve = trace_integral_curve(m, spec.d, start, 0.0, 1e-3);
  REQUIRE(curve.points.size() == 1);
  REQUIRE((curve.points.front() - evaluate(m, start)).norm() == 0.0);
}

TEST_CASE("trace reports a domain exit with a partial curve") {
  const SemiHelixSpec spec = circle_fixture(1.0, 0.0, kPi / 6);
  const ParamImmersion m = build_product_surface(spec);
  const Vec start = make_vec({0.0, 0.0});
  // The window ends well before the requested span.
  const IntegralCurve curve = trace_integral_curve(m, spec.d, start, 5.0, 1e-3);
  REQUIRE(curve.exited_domain);
  REQUIRE(curve.points.size() > 100);
  REQUIRE(curve.t.back() < 5.0);
}

TEST_CASE("closed form arc evaluation") {
  const Mat basis = Mat::Identity(4, 4);
  SECTION("cosine start") {
    const ClosedFormArc arc(1.0, 0.0, Vec(Vec::Zero(4)), basis);
    REQUIRE((closed_form_arc_eval(arc, 0.0) - Vec(Vec::Unit(4, 0))).norm() < 1e-15);
  }
  SECTION("rate 2 gives radius 1/2") {
    const ClosedFormArc arc(2.0, 0.0, Vec(Vec::Zero(4)), basis);
    for (double t : {0.0, 0.3, 1.1}) {
      REQUIRE_THAT(closed_form_arc_eval(arc, t).norm(), WithinAbs(0.5, 1e-15));
    }
  }
  SECTION("phase pi/2 starts on e2") {
    const ClosedFormArc arc(1.0, kPi / 2, Vec(Vec::Zero(4)), basis);
    REQUIRE((closed_form_arc_eval(arc, 0.0) - Vec(Vec::Unit(4, 1))).norm() < 1e-15);
  }
}

TEST_CASE("fit_circle") {
  SECTION("exact synthetic circle in the xz-plane") {
    std::vector<Vec> pts;
    for (int i = 0; i < 50; ++i) {
      const double a = 2 * kPi * i / 50.0;
      pts.push_back(make_vec({2.0 + std::cos(a), 0.0, std::sin(a)}));
    }
    const CircleFit fit = fit_circle(pts);
    REQUIRE((fit.center - make_vec({2, 0, 0})).norm() < 1e-10);
    REQUIRE_THAT(fit.radius, WithinAbs(1.0, 1e-10));
    REQUIRE(fit.rms_planarity < 1e-12);
    REQUIRE(fit.rms_radial < 1e-12);
    REQUIRE(std::abs(fit.plane_basis.col(0)(1)) < 1e-10);
    REQUIRE(std::abs(fit.plane_basis.col(1)(1)) < 1e-10);
  }
  SECTION("radial noise sigma 1e-4") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> noise(0.0, 1e-4);
    std::vector<Vec> pts;
    for (int i = 0; i < 200; ++i) {
      const double a = 2 * kPi * i / 200.0;
      const double rho = 1.0 + noise(rng);
      pts.push_back(make_vec({2.0 + rho * std::cos(a), 0.0, rho * std::sin(a)}));
    }
    const CircleFit fit = fit_circle(pts);
    REQUIRE(std::abs(fit.radius - 1.0) < 5e-4);
  }
  SECTION("collinear points rejected") {
    const std::vector<Vec> pts = {make_vec({0, 0, 0}), make_vec({1, 0, 0}), make_vec({2, 0, 0}),
                                  make_vec({3, 0, 0})};
    REQUIRE_THROWS_AS(fit_circle(pts), DegenerateGeometry);
    REQUIRE_THROWS_AS(fit_circle({pts[0], pts[1], pts[2]}), DegenerateGeometry);
  }
}

TEST_CASE("theta_linearity") {
  SECTION("fixture trace has slope 1/r") {
    const SemiHelixSpec spec = circle_fixture(1.0, 0.0, kPi / 3);
    const ParamImmersion m = build_product_surface(spec);
    const IntegralCurve curve =
        trace_integral_curve(m, spec.d, make_vec({0.0, -0.5}), 1.0, 1e-3);
    const ThetaLine line = theta_linearity(curve);
    REQUIRE_THAT(line.slope, WithinAbs(1.0, 1e-6));
    REQUIRE(line.max_residual < 1e-6);
  }
  SECTION("synthetic linear angles recover the rate exactly") {
    IntegralCurve curve;
    for (int i = 0; i <= 100; ++i) {
      const double t = i * 0.01;
      curve.t.push_back(t);
      curve.theta.push_back(2.0 * t + 0.1);
      curve.points.push_back(make_vec({t, 0, 0}));
      curve.params.push_back(make_vec({t}));
    }
    const ThetaLine line = theta_linearity(curve);
    REQUIRE_THAT(line.slope, WithinAbs(2.0, 1e-12));
    REQUIRE_THAT(line.intercept, WithinAbs(0.1, 1e-12));
    REQUIRE(line.max_residual < 1e-12);
  }
  SECTION("cylinder ruling has slope zero") {
    const OrientedSurface cyl = make_cylinder(1.0);
    const IntegralCurve curve = trace_integral_curve(
        cyl.immersion, Direction(make_vec({0, 0, 1})), make_vec({0.5, -0.9}), 1.5, 1e-2);
    const ThetaLine line = theta_linearity(curve);
    REQUIRE(std::abs(line.slope) < 1e-12);
    REQUIRE(line.max_residual < 1e-12);
  }
  SECTION("too few nodes rejected") {
    IntegralCurve curve;
    curve.t = {0.0, 0.1};
    curve.theta = {0.0, 0.1};
    REQUIRE_THROWS_AS(theta_linearity(curve), InsufficientData);
  }
}

TEST_CASE("RK4 traces match the closed-form circles") {
  std::mt19937_64 rng(99);
  for (const SemiHelixSpec& spec : preset_suite()) {
    const ParamImmersion m = build_product_surface(spec);
    const Vec up = random_in_box(m.domain, rng, 0.2);
    const Vec u_base = up.head(up.size() - 1);
    const double theta_start = up(up.size() - 1);

    // Span one full window traversal or what remains of it.
    const double span = spec.r * (m.domain.hi(m.domain_dim - 1) - theta_start);
    if (span < 10 * 1e-3) continue;
    const IntegralCurve curve = trace_integral_curve(m, spec.d, up, span, 1e-3);

    const ClosedFormArc arc = construction_arc(spec, u_base, theta_start);
    REQUIRE(max_deviation_from_arc(curve, arc) < 1e-8);

    // The fitted circle recovers the sweep radius and center.
    const CircleFit fit = fit_circle(curve.points);
    REQUIRE(std::abs(fit.radius - spec.r) < 1e-6);
    const Vec center = spec.base_point(u_base) + spec.r * spec.eta(u_base);
    REQUIRE((fit.center - center).norm() < 1e-6);
    REQUIRE(fit.rms_planarity < 1e-8);

    // Fitted plane is spanned by eta and d (principal angles ~ 1).
    Mat span_ed(spec.ambient_dim(), 2);
    span_ed.col(0) = spec.eta(u_base);
    span_ed.col(1) = spec.d.vec();
    Eigen::JacobiSVD<Mat> svd(fit.plane_basis.transpose() * span_ed);
    REQUIRE(svd.singularValues()(1) > 1.0 - 1e-6);

    const ThetaLine line = theta_linearity(curve);
    REQUIRE(std::abs(line.slope - 1.0 / spec.r) < 1e-6);
    REQUIRE(line.max_residual < 1e-6);
  }
}

TEST_CASE("arc_from_circle_fit reproduces a traced fiber") {
  const SemiHelixSpec spec = circle_fixture(0.5, 0.0, kPi / 3);
  const ParamImmersion m = build_product_surface(spec);
  const Vec start = make_vec({1.0, -0.2});
  const IntegralCurve curve = trace_integral_curve(m, spec.d, start, 0.45, 1e-3);
  const CircleFit fit = fit_circle(curve.points);
  const Vec v0 = t_theta_field(m, spec.d, start).vec();
  const ClosedFormArc arc = arc_from_circle_fit(fit, curve.points.front(), v0);
  REQUIRE(max_deviation_from_arc(curve, arc) < 1e-7);
}
