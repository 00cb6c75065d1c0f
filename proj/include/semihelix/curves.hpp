#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "semihelix/construct.hpp"
#include "semihelix/immersion.hpp"

namespace semihelix {

/// Unit tangential component of the axis direction d at a surface point:
/// T = (d - <d, xi> xi) / |d - <d, xi> xi|. Independent of the normal sign.
inline Direction t_theta_field(const ParamImmersion& m, const Direction& d, const Vec& u) {
  const TangentFrame frame = tangent_frame(m, u, d);
  const Vec& xi = frame.normal.vec();
  const Vec w = d.vec() - d.dot(xi) * xi;
  const double norm = w.norm();
  if (norm < 1e-10) {
    throw TangentDegenerate("t_theta_field: d is normal to the surface (theta at +-pi/2)");
  }
  return Direction(w / norm, 1e-9);
}

/// Least-squares pullback of an ambient vector through the Jacobian.
inline Vec pullback_through_jacobian(const Mat& j, const Vec& w) {
  return j.colPivHouseholderQr().solve(w);
}

/// Traced integral curve of the tangential field: uniform t grid (with one
/// shorter closing step when the span is not a step multiple), parameter and
/// ambient points, and the angle recorded continuously along the curve.
struct IntegralCurve {
  std::vector<double> t;
  std::vector<Vec> params;
  std::vector<Vec> points;
  std::vector<double> theta;
  std::vector<Vec> normals;  // continuity-oriented unit normals per node
  bool exited_domain = false;
};

namespace detail {

struct FieldSample {
  Vec u_dot;
  Vec xi;
  double theta_canonical = 0.0;
};

inline FieldSample sample_field(const ParamImmersion& m, const Direction& d, const Vec& u,
                                double sign) {
  const TangentFrame frame = tangent_frame(m, u, d);
  const Vec& xi = frame.normal.vec();
  const Vec w = d.vec() - d.dot(xi) * xi;
  const double norm = w.norm();
  if (norm < 1e-10) {
    throw TangentDegenerate("trace: tangential component of d vanished along the curve");
  }
  FieldSample s;
  s.u_dot = sign * pullback_through_jacobian(jacobian(m, u), Vec(w / norm));
  s.xi = xi;
  s.theta_canonical = frame.theta;
  return s;
}

/// One classical RK4 step in parameter space. Returns nullopt when any stage
/// leaves the evaluable region (treated as a domain exit by the caller).
inline std::optional<Vec> rk4_step(const ParamImmersion& m, const Direction& d, const Vec& u,
                                   double h, double sign) {
  try {
    const Vec k1 = sample_field(m, d, u, sign).u_dot;
    const Vec k2 = sample_field(m, d, Vec(u + 0.5 * h * k1), sign).u_dot;
    const Vec k3 = sample_field(m, d, Vec(u + 0.5 * h * k2), sign).u_dot;
    const Vec k4 = sample_field(m, d, Vec(u + h * k3), sign).u_dot;
    return Vec(u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  } catch (const WindowViolation&) {
    return std::nullopt;
  } catch (const EvaluationFailure&) {
    return std::nullopt;
  }
}

/// Flips the recorded angles when the continuity-oriented normal points
/// toward the curve's center of curvature; the convention is an outward
/// normal, under which the angle grows along the motion.
inline void fix_theta_sign_outward(IntegralCurve& curve) {
  if (curve.points.size() < 3) return;
  double alignment = 0.0;
  for (size_t i = 1; i + 1 < curve.points.size(); ++i) {
    const Vec bend = curve.points[i - 1] + curve.points[i + 1] - 2.0 * curve.points[i];
    alignment += curve.normals[i].dot(bend);
  }
  if (alignment > 0.0) {
    for (double& t : curve.theta) t = -t;
    for (Vec& n : curve.normals) n = -n;
  }
}

}  // namespace detail

/// Classical RK4 trace of the tangential field of d, integrated in parameter
/// space so iterates stay on the chart. Stops early (exited_domain) when the
/// next node or an RK4 stage leaves the domain; `backward` follows -T.
/// Angles are chained continuously along the curve; with `fix_outward` the
/// remaining global sign is set by the outward-normal convention.
inline IntegralCurve trace_integral_curve(const ParamImmersion& m, const Direction& d,
                                          const Vec& u0, double t_span, double h,
                                          bool backward = false, bool fix_outward = true) {
  if (!(h > 0)) throw ValidationError("trace_integral_curve: step must be positive");
  if (t_span < 0) throw ValidationError("trace_integral_curve: span must be nonnegative");
  const double sign = backward ? -1.0 : 1.0;

  IntegralCurve curve;

  auto record = [&](double t, const Vec& u) {
    const auto field = detail::sample_field(m, d, u, sign);
    double flip = 1.0;
    if (!curve.normals.empty() && curve.normals.back().dot(field.xi) < 0) flip = -1.0;
    curve.t.push_back(t);
    curve.params.push_back(u);
    curve.points.push_back(evaluate(m, u));
    curve.theta.push_back(flip * field.theta_canonical);
    curve.normals.push_back(Vec(flip * field.xi));
  };

  record(0.0, u0);
  double t = 0.0;
  while (t_span - t > 1e-14) {
    const double step = std::min(h, t_span - t);
    const auto next = detail::rk4_step(m, d, curve.params.back(), step, sign);
    if (!next || !m.domain.contains(*next)) {
      curve.exited_domain = true;
      break;
    }
    t += step;
    record(t, *next);
  }

  if (fix_outward) detail::fix_theta_sign_outward(curve);
  return curve;
}

/// Circle arc in closed form over an orthonormal basis: components
/// ( (1/a) cos(a t + phase) + c1, (1/a) sin(a t + phase) + c2, c3, ..., cn ).
struct ClosedFormArc {
  double a = 1.0;      // angular rate; the circle radius is 1/a
  double phase = 0.0;
  Vec offsets;         // c_i, one per basis vector
  Mat basis;           // n x n, orthonormal columns e1..en

  ClosedFormArc(double a_in, double phase_in, Vec offsets_in, Mat basis_in)
      : a(a_in), phase(phase_in), offsets(std::move(offsets_in)), basis(std::move(basis_in)) {
    if (a == 0.0) throw ValidationError("ClosedFormArc: angular rate must be nonzero");
    if (basis.rows() != basis.cols() || offsets.size() != basis.rows()) {
      throw ValidationError("ClosedFormArc: basis/offsets dimension mismatch");
    }
    if ((basis.transpose() * basis - Mat::Identity(basis.rows(), basis.cols()))
            .cwiseAbs()
            .maxCoeff() > 1e-10) {
      throw ValidationError("ClosedFormArc: basis not orthonormal");
    }
  }
};

inline Vec closed_form_arc_eval(const ClosedFormArc& arc, double t) {
  const int n = static_cast<int>(arc.offsets.size());
  Vec comp = arc.offsets;
  comp(0) += std::cos(arc.a * t + arc.phase) / arc.a;
  comp(1) += std::sin(arc.a * t + arc.phase) / arc.a;
  return arc.basis * comp;
}

/// Plane + circle fit of a traced arc: principal plane through the centroid,
/// algebraic (Kasa) in-plane fit, then one Gauss-Newton refinement of the
/// geometric distance.
struct CircleFit {
  Vec center;
  double radius = 0.0;
  Mat plane_basis;  // ambient_dim x 2, orthonormal
  double rms_planarity = 0.0;
  double rms_radial = 0.0;
};

inline CircleFit fit_circle(const std::vector<Vec>& points) {
  const size_t n = points.size();
  if (n < 4) throw DegenerateGeometry("fit_circle: need at least 4 points");
  const int m = static_cast<int>(points[0].size());

  Vec centroid = Vec::Zero(m);
  for (const Vec& p : points) centroid += p;
  centroid /= static_cast<double>(n);

  Mat centered(n, m);
  for (size_t i = 0; i < n; ++i) centered.row(i) = (points[i] - centroid).transpose();
  Eigen::JacobiSVD<Mat> svd(centered, Eigen::ComputeThinV);
  const double s0 = svd.singularValues()(0);
  const double s1 = svd.singularValues()(1);
  if (!(s1 > 1e-10 * s0)) {
    throw DegenerateGeometry("fit_circle: points nearly collinear or coincident");
  }
  Mat plane = svd.matrixV().leftCols(2);

  // In-plane coordinates and the linearized center/radius solve.
  Mat ab = centered * plane;  // n x 2
  Mat a(n, 3);
  Vec rhs(n);
  for (size_t i = 0; i < n; ++i) {
    a(i, 0) = 2.0 * ab(i, 0);
    a(i, 1) = 2.0 * ab(i, 1);
    a(i, 2) = 1.0;
    rhs(i) = ab.row(i).squaredNorm();
  }
  Vec sol = a.colPivHouseholderQr().solve(rhs);
  double c0 = sol(0), c1 = sol(1);
  double radius = std::sqrt(std::max(0.0, sol(2) + c0 * c0 + c1 * c1));
  if (!(radius > 0)) throw DegenerateGeometry("fit_circle: zero radius");

  // One Gauss-Newton step on the geometric residuals.
  Mat jac(n, 3);
  Vec res(n);
  for (size_t i = 0; i < n; ++i) {
    const double dx = ab(i, 0) - c0;
    const double dy = ab(i, 1) - c1;
    const double rho = std::hypot(dx, dy);
    if (rho < 1e-14) throw DegenerateGeometry("fit_circle: point at the fitted center");
    res(i) = rho - radius;
    jac(i, 0) = -dx / rho;
    jac(i, 1) = -dy / rho;
    jac(i, 2) = -1.0;
  }
  const Vec delta = jac.colPivHouseholderQr().solve(Vec(-res));
  c0 += delta(0);
  c1 += delta(1);
  radius += delta(2);
  if (!(radius > 0)) throw DegenerateGeometry("fit_circle: refinement collapsed the radius");

  CircleFit fit;
  fit.plane_basis = plane;
  fit.center = centroid + c0 * plane.col(0) + c1 * plane.col(1);
  fit.radius = radius;

  double planar_sq = 0.0, radial_sq = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Vec rel = points[i] - fit.center;
    const Vec in_plane = plane * (plane.transpose() * rel);
    planar_sq += (rel - in_plane).squaredNorm();
    radial_sq += std::pow(in_plane.norm() - radius, 2);
  }
  fit.rms_planarity = std::sqrt(planar_sq / static_cast<double>(n));
  fit.rms_radial = std::sqrt(radial_sq / static_cast<double>(n));
  return fit;
}

/// Least-squares line through the (t, theta) samples of a curve.
struct ThetaLine {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

inline ThetaLine theta_linearity(const IntegralCurve& curve) {
  const size_t n = curve.t.size();
  if (n < 3 || curve.theta.size() != n) {
    throw InsufficientData("theta_linearity: need at least 3 nodes with recorded angles");
  }
  double st = 0, stt = 0, sy = 0, sty = 0;
  for (size_t i = 0; i < n; ++i) {
    st += curve.t[i];
    stt += curve.t[i] * curve.t[i];
    sy += curve.theta[i];
    sty += curve.t[i] * curve.theta[i];
  }
  const double count = static_cast<double>(n);
  const double denom = count * stt - st * st;
  if (std::abs(denom) < 1e-300) throw DegenerateGeometry("theta_linearity: degenerate t grid");
  ThetaLine line;
  line.slope = (count * sty - st * sy) / denom;
  line.intercept = (sy - line.slope * st) / count;
  for (size_t i = 0; i < n; ++i) {
    line.max_residual =
        std::max(line.max_residual, std::abs(curve.theta[i] - (line.slope * curve.t[i] + line.intercept)));
  }
  return line;
}

/// Closed-form arc through a fitted circle, phased at a start point with a
/// start velocity. The extended basis makes the componentwise form exact.
inline ClosedFormArc arc_from_circle_fit(const CircleFit& fit, const Vec& p0, const Vec& v0) {
  const int n = static_cast<int>(p0.size());
  const Mat proj = fit.plane_basis * fit.plane_basis.transpose();
  Vec e1 = proj * (p0 - fit.center);
  if (e1.norm() < 1e-12) throw DegenerateGeometry("arc_from_circle_fit: start at circle center");
  e1.normalize();
  Vec e2 = proj * v0;
  e2 -= e1.dot(e2) * e1;
  if (e2.norm() < 1e-12) throw DegenerateGeometry("arc_from_circle_fit: start velocity radial");
  e2.normalize();
  const auto basis_vectors = extend_orthonormal_basis({e1, e2}, n);
  Mat basis(n, n);
  for (int j = 0; j < n; ++j) basis.col(j) = basis_vectors[j];
  Vec offsets = basis.transpose() * fit.center;
  return ClosedFormArc(1.0 / fit.radius, 0.0, offsets, basis);
}

inline double max_deviation_from_arc(const IntegralCurve& curve, const ClosedFormArc& arc) {
  double worst = 0.0;
  for (size_t i = 0; i < curve.t.size(); ++i) {
    worst = std::max(worst, (curve.points[i] - closed_form_arc_eval(arc, curve.t[i])).norm());
  }
  return worst;
}

}  // namespace semihelix
