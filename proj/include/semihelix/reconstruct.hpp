#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semihelix/construct.hpp"
#include "semihelix/curves.hpp"
#include "semihelix/spline.hpp"

namespace semihelix {

/// Roots of the hyperplane offset along parametric grid lines.
struct SliceCurve {
  std::vector<Vec> params;
  std::vector<Vec> points;
};

/// Scans every grid line for sign changes of <psi(u) - q.point, q.normal> and
/// refines each bracket by bisection to |offset| <= tol.
inline SliceCurve slice_by_hyperplane(const ParamImmersion& m, const Hyperplane& q,
                                      const SampleGrid& grid, double tol) {
  if (!(tol > 0)) throw ValidationError("slice_by_hyperplane: tol must be positive");
  SliceCurve slice;
  auto offset = [&](const Vec& u) { return q.signed_offset(evaluate(m, u)); };

  for (int axis = 0; axis < grid.axes(); ++axis) {
    for (size_t flat = 0; flat < grid.size(); ++flat) {
      auto idx = grid.multi_index(flat);
      if (idx[axis] != 0) continue;  // line starts only
      double g_prev = 0.0;
      Vec u_prev;
      for (int i = 0; i < grid.counts[axis]; ++i) {
        idx[axis] = i;
        const Vec u = grid.node(idx);
        const double g = offset(u);
        if (std::abs(g) <= tol && axis == 0) {
          slice.params.push_back(u);
          slice.points.push_back(evaluate(m, u));
        } else if (i > 0 && g_prev * g < 0) {
          Vec a = u_prev, b = u;
          double ga = g_prev;
          for (int it = 0; it < 200; ++it) {
            const Vec mid = 0.5 * (a + b);
            const double gm = offset(mid);
            if (std::abs(gm) <= tol) {
              slice.params.push_back(mid);
              slice.points.push_back(evaluate(m, mid));
              break;
            }
            if (ga * gm < 0) {
              b = mid;
            } else {
              a = mid;
              ga = gm;
            }
          }
        }
        g_prev = g;
        u_prev = u;
      }
    }
  }
  if (slice.params.empty()) {
    throw EmptySlice("slice_by_hyperplane: no grid line crosses the hyperplane");
  }
  return slice;
}

struct TraceOptions {
  double step = 1e-3;
  double max_span = 10.0;
  double zero_angle_tol = 1e-9;
};

/// A full fiber arc through a point: both trace directions concatenated with
/// one coherent angle chain, plus the fitted circle (when one exists).
struct Fiber {
  IntegralCurve arc;
  size_t start_index = 0;  // index of the seed point in the arc
  CircleFit fit;
  bool fit_valid = false;
};

namespace detail {

inline Fiber fiber_through(const ParamImmersion& m, const Direction& d, const Vec& u0,
                           const TraceOptions& opts) {
  IntegralCurve fwd =
      trace_integral_curve(m, d, u0, opts.max_span, opts.step, false, /*fix_outward=*/false);
  IntegralCurve bwd =
      trace_integral_curve(m, d, u0, opts.max_span, opts.step, true, /*fix_outward=*/false);

  Fiber fiber;
  IntegralCurve& arc = fiber.arc;
  const size_t nb = bwd.t.size();
  for (size_t j = nb; j-- > 1;) {
    arc.t.push_back(-bwd.t[j]);
    arc.params.push_back(bwd.params[j]);
    arc.points.push_back(bwd.points[j]);
    arc.theta.push_back(bwd.theta[j]);
    arc.normals.push_back(bwd.normals[j]);
  }
  fiber.start_index = arc.t.size();
  for (size_t j = 0; j < fwd.t.size(); ++j) {
    arc.t.push_back(fwd.t[j]);
    arc.params.push_back(fwd.params[j]);
    arc.points.push_back(fwd.points[j]);
    arc.theta.push_back(fwd.theta[j]);
    arc.normals.push_back(fwd.normals[j]);
  }
  arc.exited_domain = fwd.exited_domain || bwd.exited_domain;
  fix_theta_sign_outward(arc);

  try {
    fiber.fit = fit_circle(arc.points);
    fiber.fit_valid = true;
  } catch (const DegenerateGeometry&) {
    fiber.fit_valid = false;  // straight fiber; radius undefined
  }
  return fiber;
}

/// Bisection refinement of a zero-angle crossing between arc nodes i and i+1.
/// Returns the refined parameter point; the angle sign is chained from the
/// oriented normal at node i.
inline Vec refine_zero_crossing(const ParamImmersion& m, const Direction& d, const Fiber& fiber,
                                size_t i, double tol) {
  const IntegralCurve& arc = fiber.arc;
  double lo = 0.0, hi = arc.t[i + 1] - arc.t[i];
  double theta_lo = arc.theta[i];
  Vec best = arc.params[i];
  if (std::abs(theta_lo) <= tol) return best;
  if (std::abs(arc.theta[i + 1]) <= tol) return arc.params[i + 1];

  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto u_mid = rk4_step(m, d, arc.params[i], mid, 1.0);
    if (!u_mid) break;
    const auto field = sample_field(m, d, *u_mid, 1.0);
    const double sgn = arc.normals[i].dot(field.xi) >= 0 ? 1.0 : -1.0;
    const double theta_mid = sgn * field.theta_canonical;
    best = *u_mid;
    if (std::abs(theta_mid) <= tol) return best;
    if (theta_lo * theta_mid < 0) {
      hi = mid;
    } else {
      lo = mid;
      theta_lo = theta_mid;
    }
  }
  return best;
}

}  // namespace detail

/// Zero-angle point of the fiber through a surface point. When the crossing
/// lies on the reachable arc it is refined on-surface; otherwise the fiber's
/// fitted circle supplies the off-surface extension.
struct ZeroAngleResult {
  Vec q;
  double theta_p = 0.0;
  bool extended = false;
  bool fit_valid = false;
  CircleFit fit;
  Vec eta_q;  // unit, orthogonal to d, the base normal direction at q
};

inline ZeroAngleResult trace_to_zero_angle(const ParamImmersion& m, const Direction& d,
                                           const Vec& u_p, const TraceOptions& opts = {}) {
  const Fiber fiber = detail::fiber_through(m, d, u_p, opts);
  const IntegralCurve& arc = fiber.arc;

  ZeroAngleResult result;
  result.fit = fiber.fit;
  result.fit_valid = fiber.fit_valid;
  result.theta_p = arc.theta[fiber.start_index];

  if (std::abs(result.theta_p) <= opts.zero_angle_tol) {
    // Zero-length trace: p is its own zero-angle point.
    result.q = arc.points[fiber.start_index];
  } else {
    // Nearest zero crossing to the start, if the arc reaches one.
    std::optional<size_t> crossing;
    size_t best_distance = arc.theta.size();
    for (size_t i = 0; i + 1 < arc.theta.size(); ++i) {
      const bool crosses =
          std::abs(arc.theta[i]) <= opts.zero_angle_tol || arc.theta[i] * arc.theta[i + 1] < 0;
      if (!crosses) continue;
      const size_t distance =
          i >= fiber.start_index ? i - fiber.start_index : fiber.start_index - i;
      if (distance < best_distance) {
        best_distance = distance;
        crossing = i;
      }
    }

    if (crossing) {
      const Vec u_q = detail::refine_zero_crossing(m, d, fiber, *crossing, opts.zero_angle_tol);
      result.q = evaluate(m, u_q);
      result.extended = false;
    } else {
      // Extend along the fitted circle: the zero-angle point is the circle
      // point whose radial direction is orthogonal to d, on the arc's side.
      if (!fiber.fit_valid) {
        throw FitFailure(
            "trace_to_zero_angle: extension needed but the fiber circle fit is degenerate");
      }
      size_t jmin = 0;
      for (size_t j = 1; j < arc.theta.size(); ++j) {
        if (std::abs(arc.theta[j]) < std::abs(arc.theta[jmin])) jmin = j;
      }
      Vec radial = arc.points[jmin] - fiber.fit.center;
      radial -= d.dot(radial) * d.vec();
      if (radial.norm() < 1e-10 * fiber.fit.radius) {
        throw FitFailure("trace_to_zero_angle: extension radial direction degenerate");
      }
      radial.normalize();
      result.q = fiber.fit.center + fiber.fit.radius * radial;
      result.extended = true;
    }
  }

  if (fiber.fit_valid) {
    Vec eta = fiber.fit.center - result.q;
    eta -= d.dot(eta) * d.vec();
    const double eta_norm = eta.norm();
    if (eta_norm < 1e-10 * fiber.fit.radius) {
      throw FitFailure("trace_to_zero_angle: base normal at q degenerate");
    }
    result.eta_q = eta / eta_norm;
  } else {
    // Straight fiber: the chord vanishes with theta, so the normal is unused.
    result.eta_q = Vec::Zero(result.q.size());
  }
  return result;
}

struct RadiusEstimate {
  double r_hat = 0.0;
  CircleFit fit;
  IntegralCurve arc;
};

/// Radius of the fiber circle through a point, from the traced arc.
inline RadiusEstimate estimate_radius(const ParamImmersion& m, const Direction& d, const Vec& u_p,
                                      const TraceOptions& opts = {}) {
  const Fiber fiber = detail::fiber_through(m, d, u_p, opts);
  if (!fiber.fit_valid) {
    throw DegenerateGeometry("estimate_radius: fiber is straight; radius undefined");
  }
  RadiusEstimate est;
  est.r_hat = fiber.fit.radius;
  est.fit = fiber.fit;
  est.arc = fiber.arc;
  return est;
}

/// Residual of the local product decomposition
/// p = q + 2 r sin(theta_p / 2) T_phi(q).
inline double verify_decomposition(const Vec& p, const Vec& q, double r_hat, double theta_p,
                                   const Vec& eta_q, const Direction& d) {
  const Vec chord = chord_factor(r_hat, theta_p) * sweep_t_phi(eta_q, d.vec(), theta_p);
  return (p - q - chord).norm();
}

struct NeighborhoodEntry {
  Vec u;        // parameter of the sample
  Vec y;        // sample point on the surface
  Vec y_prime;  // its zero-angle point
  Vec eta;      // base normal at y_prime
  double theta_y = 0.0;
  double residual = 0.0;
  bool extended = false;
  std::string status = "ok";
};

struct ReconstructOptions {
  double extent_fraction = 0.1;     // neighborhood size per axis
  std::vector<int> counts;          // neighborhood grid; default 5 per axis
  double residual_tol = 1e-6;
  double height_tol = 1e-8;
  TraceOptions trace;
};

struct ReconstructionReport {
  Vec p;
  double theta_p = 0.0;
  Vec q;
  double r_hat = 0.0;
  double decomposition_residual = 0.0;
  std::vector<NeighborhoodEntry> neighborhood;
  double max_neighborhood_residual = 0.0;
  double zero_angle_height_spread = 0.0;
  bool pass = false;
  // Grid metadata, kept so the local product surface can be rebuilt.
  Box neighborhood_box;
  std::vector<int> neighborhood_counts;
};

namespace detail {

/// Neighborhood box of the requested fractional extent, slid (not shrunk)
/// to stay inside the domain.
inline Box neighborhood_box(const Box& domain, const Vec& u_p, double fraction) {
  const int k = domain.dim();
  Vec lo(k), hi(k);
  for (int a = 0; a < k; ++a) {
    const double half = 0.5 * fraction * domain.extent(a);
    double l = u_p(a) - half, h = u_p(a) + half;
    if (l < domain.lo(a)) {
      h += domain.lo(a) - l;
      l = domain.lo(a);
    }
    if (h > domain.hi(a)) {
      l -= h - domain.hi(a);
      h = domain.hi(a);
    }
    lo(a) = std::max(l, domain.lo(a));
    hi(a) = std::min(h, domain.hi(a));
  }
  return Box(lo, hi);
}

}  // namespace detail

/// Local reconstruction around p: per-sample zero-angle points and
/// decomposition residuals against the single fiber radius estimated at p,
/// plus the translation check that all zero-angle points share one height
/// along d.
inline ReconstructionReport reconstruct_local(const ParamImmersion& m, const Direction& d,
                                              const Vec& u_p, ReconstructOptions opts = {}) {
  ReconstructionReport report;
  report.p = evaluate(m, u_p);

  const ZeroAngleResult at_p = trace_to_zero_angle(m, d, u_p, opts.trace);
  if (!at_p.fit_valid) {
    throw FitFailure("reconstruct_local: fiber through p is straight; no sweep radius");
  }
  report.theta_p = at_p.theta_p;
  report.q = at_p.q;
  report.r_hat = at_p.fit.radius;
  report.decomposition_residual =
      verify_decomposition(report.p, at_p.q, report.r_hat, at_p.theta_p, at_p.eta_q, d);

  if (opts.counts.empty()) opts.counts.assign(m.domain_dim, 5);
  if (static_cast<int>(opts.counts.size()) != m.domain_dim) {
    throw ValidationError("reconstruct_local: neighborhood counts dimension mismatch");
  }
  report.neighborhood_box = detail::neighborhood_box(m.domain, u_p, opts.extent_fraction);
  report.neighborhood_counts = opts.counts;
  const SampleGrid grid(report.neighborhood_box, opts.counts);

  double height_min = std::numeric_limits<double>::infinity();
  double height_max = -std::numeric_limits<double>::infinity();
  bool all_ok = true;

  for (size_t i = 0; i < grid.size(); ++i) {
    NeighborhoodEntry entry;
    entry.u = grid.node(i);
    try {
      entry.y = evaluate(m, entry.u);
      const ZeroAngleResult za = trace_to_zero_angle(m, d, entry.u, opts.trace);
      if (!za.fit_valid) throw FitFailure("fiber circle fit degenerate");
      entry.y_prime = za.q;
      entry.eta = za.eta_q;
      entry.theta_y = za.theta_p;
      entry.extended = za.extended;
      entry.residual = verify_decomposition(entry.y, za.q, report.r_hat, za.theta_p, za.eta_q, d);
      report.max_neighborhood_residual =
          std::max(report.max_neighborhood_residual, entry.residual);
      const double height = d.dot(za.q);
      height_min = std::min(height_min, height);
      height_max = std::max(height_max, height);
    } catch (const Error& e) {
      entry.status = e.what();
      all_ok = false;
    }
    report.neighborhood.push_back(std::move(entry));
  }

  report.zero_angle_height_spread = (height_max >= height_min) ? height_max - height_min : 0.0;
  report.pass = all_ok && report.max_neighborhood_residual < opts.residual_tol &&
                report.zero_angle_height_spread < opts.height_tol &&
                report.decomposition_residual < opts.residual_tol;
  return report;
}

namespace detail {

/// Averages the per-sample zero-angle data over the trailing grid axis,
/// leaving one value per base-axes node. Entries must all be "ok".
inline void collapse_last_axis(const ReconstructionReport& report, std::vector<Vec>& y_out,
                               std::vector<Vec>& eta_out, std::vector<int>& base_counts) {
  const auto& counts = report.neighborhood_counts;
  const int axes = static_cast<int>(counts.size());
  base_counts.assign(counts.begin(), counts.end() - 1);
  size_t base_nodes = 1;
  for (int c : base_counts) base_nodes *= static_cast<size_t>(c);
  const size_t layers = static_cast<size_t>(counts[axes - 1]);

  y_out.assign(base_nodes, Vec());
  eta_out.assign(base_nodes, Vec());
  for (size_t b = 0; b < base_nodes; ++b) {
    Vec y_sum, eta_sum;
    for (size_t l = 0; l < layers; ++l) {
      const size_t flat = b * layers + l;
      const auto& entry = report.neighborhood[flat];
      if (entry.status != "ok") {
        throw ValidationError("rebuild: neighborhood entry failed: " + entry.status);
      }
      if (y_sum.size() == 0) {
        y_sum = entry.y_prime;
        eta_sum = entry.eta;
      } else {
        y_sum += entry.y_prime;
        eta_sum += entry.eta;
      }
    }
    y_out[b] = y_sum / static_cast<double>(layers);
    eta_out[b] = eta_sum / static_cast<double>(layers);
  }
}

}  // namespace detail

/// Rebuilds the local product surface from a reconstruction report: the
/// recovered zero-angle patch (spline-interpolated) becomes the base, swept
/// with the estimated radius over the given window.
inline ParamImmersion rebuild_from_report(const ReconstructionReport& report,
                                          const AngleWindow& window, const Direction& d) {
  const int n = static_cast<int>(report.p.size());
  const int k = static_cast<int>(report.neighborhood_counts.size()) - 1;
  if (k < 1 || k > 2) throw ValidationError("rebuild_from_report: base dimension must be 1 or 2");

  std::vector<Vec> y_nodes, eta_nodes;
  std::vector<int> base_counts;
  detail::collapse_last_axis(report, y_nodes, eta_nodes, base_counts);

  // Frame with d last: spatial coordinates then height along d.
  const auto ext = extend_orthonormal_basis({d.vec()}, n);
  Mat rot(n, n);  // columns: spatial basis then d
  for (int j = 1; j < n; ++j) rot.col(j - 1) = ext[j];
  rot.col(n - 1) = d.vec();

  double height_mean = 0.0;
  for (const Vec& y : y_nodes) height_mean += d.dot(y);
  height_mean /= static_cast<double>(y_nodes.size());

  auto spatial = [&](const Vec& y) { return Vec(rot.leftCols(n - 1).transpose() * y); };

  const Box& nb = report.neighborhood_box;
  Box base_box(nb.lo.head(k), nb.hi.head(k));

  // Spline evaluators for the recovered base patch and its normal field.
  std::function<Vec(const Vec&)> base_eval, eta_eval;
  if (k == 1) {
    Mat y_values(static_cast<int>(y_nodes.size()), n - 1);
    Mat eta_values(static_cast<int>(eta_nodes.size()), n - 1);
    for (size_t i = 0; i < y_nodes.size(); ++i) {
      y_values.row(static_cast<int>(i)) = spatial(y_nodes[i]).transpose();
      eta_values.row(static_cast<int>(i)) = spatial(eta_nodes[i]).transpose();
    }
    const double dx = base_box.extent(0) / (base_counts[0] - 1);
    auto ys = std::make_shared<CubicSpline1D>(base_box.lo(0), dx, y_values);
    auto es = std::make_shared<CubicSpline1D>(base_box.lo(0), dx, eta_values);
    base_eval = [ys](const Vec& u) { return ys->eval(u(0)); };
    eta_eval = [es](const Vec& u) { return es->eval(u(0)); };
  } else {
    std::vector<Mat> y_rows, eta_rows;
    for (int i = 0; i < base_counts[0]; ++i) {
      Mat yr(base_counts[1], n - 1), er(base_counts[1], n - 1);
      for (int j = 0; j < base_counts[1]; ++j) {
        const size_t flat = static_cast<size_t>(i) * base_counts[1] + j;
        yr.row(j) = spatial(y_nodes[flat]).transpose();
        er.row(j) = spatial(eta_nodes[flat]).transpose();
      }
      y_rows.push_back(std::move(yr));
      eta_rows.push_back(std::move(er));
    }
    const double dx = base_box.extent(0) / (base_counts[0] - 1);
    const double dy = base_box.extent(1) / (base_counts[1] - 1);
    auto ys = std::make_shared<CubicSpline2D>(base_box.lo(0), dx, base_box.lo(1), dy, y_rows);
    auto es = std::make_shared<CubicSpline2D>(base_box.lo(0), dx, base_box.lo(1), dy, eta_rows);
    base_eval = [ys](const Vec& u) { return ys->eval(u(0), u(1)); };
    eta_eval = [es](const Vec& u) { return es->eval(u(0), u(1)); };
  }

  OrientedSurface base;
  base.name = "recovered-base";
  base.immersion.domain_dim = k;
  base.immersion.ambient_dim = n - 1;
  base.immersion.domain = base_box;
  base.immersion.eval = base_eval;
  // The interpolated normal is re-orthogonalized against the interpolated
  // tangents so the frame identities hold exactly on the rebuilt base.
  ParamImmersion base_chart = base.immersion;
  base.normal = [base_chart, eta_eval](const Vec& u) {
    const Mat j = fd_jacobian(base_chart, u);
    Eigen::JacobiSVD<Mat> svd(j, Eigen::ComputeFullU);
    Vec eta = eta_eval(u);
    for (int c = 0; c < j.cols(); ++c) {
      const Vec tangent = svd.matrixU().col(c);
      eta -= tangent.dot(eta) * tangent;
    }
    const double norm = eta.norm();
    if (norm < 1e-8) throw EvaluationFailure("rebuilt base: normal degenerate");
    return Vec(eta / norm);
  };

  const SemiHelixSpec spec(base, report.r_hat, window, Direction(Vec::Unit(n, n - 1)), 1e-5);
  const ParamImmersion product = build_product_surface(spec);

  // Map back from the d-last frame to ambient coordinates.
  ParamImmersion out = product;
  const Vec shift = height_mean * d.vec();
  out.eval = [product, rot, shift](const Vec& u) {
    return Vec(rot * product.eval(u) + shift);
  };
  out.jac = nullptr;
  return out;
}

/// Gauss-Newton projection distance from a point to a chart, seeded at u.
inline double point_to_surface_distance(const ParamImmersion& m, const Vec& z, Vec u,
                                        int max_iters = 30) {
  u = m.domain.clamp(u);
  double best = (evaluate(m, u) - z).norm();
  for (int it = 0; it < max_iters; ++it) {
    const Vec residual = evaluate(m, u) - z;
    const Mat j = jacobian(m, u);
    const Vec step = j.colPivHouseholderQr().solve(Vec(-residual));
    if (!step.allFinite()) break;
    u = m.domain.clamp(Vec(u + step));
    best = std::min(best, (evaluate(m, u) - z).norm());
    if (step.norm() < 1e-13) break;
  }
  return best;
}

/// max over samples of surface `a` (on `grid`) of the projection distance to
/// surface `b`, seeding the projection at the same parameter values.
inline double directed_hausdorff(const ParamImmersion& a, const ParamImmersion& b,
                                 const SampleGrid& grid) {
  double worst = 0.0;
  for (size_t i = 0; i < grid.size(); ++i) {
    const Vec u = grid.node(i);
    const Vec z = evaluate(a, u);
    worst = std::max(worst, point_to_surface_distance(b, z, u));
  }
  return worst;
}

}  // namespace semihelix
