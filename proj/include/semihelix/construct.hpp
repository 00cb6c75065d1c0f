#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "semihelix/immersion.hpp"

namespace semihelix {

// Sweep-plane frame fields. eta is the base normal and d the axis direction,
// assumed unit and mutually orthogonal; all three outputs are then unit.
inline Vec sweep_t_theta(const Vec& eta, const Vec& d, double theta) {
  return std::sin(theta) * eta + std::cos(theta) * d;
}

// With phi = (pi - theta)/2 this is cos(phi) eta + sin(phi) d.
inline Vec sweep_t_phi(const Vec& eta, const Vec& d, double theta) {
  return std::sin(theta / 2) * eta + std::cos(theta / 2) * d;
}

inline Vec sweep_xi_theta(const Vec& eta, const Vec& d, double theta) {
  return -std::cos(theta) * eta + std::sin(theta) * d;
}

/// Signed chord length 2 r sin(theta/2) of the sweep circle. Matches
/// r sqrt(2 (1 - cos theta)) for theta >= 0 and extends it smoothly
/// through theta = 0.
inline double chord_factor(double r, double theta) { return 2.0 * r * std::sin(theta / 2); }

/// Lift of a point of R^{n-1} into the height-zero slice of R^n.
inline Vec embed_in_ambient(const Vec& x) {
  Vec y = Vec::Zero(x.size() + 1);
  y.head(x.size()) = x;
  return y;
}

/// Full input of the circle-sweep construction: an oriented base hypersurface
/// of R^{n-1}, sweep radius, angle window, and the axis direction in R^n.
struct SemiHelixSpec {
  OrientedSurface base;
  double r = 1.0;
  AngleWindow window{0.0, 0.0};
  Direction d;

  SemiHelixSpec(OrientedSurface base_in, double r_in, AngleWindow window_in, Direction d_in,
                double validation_tol = 1e-7)
      : base(std::move(base_in)), r(r_in), window(window_in), d(std::move(d_in)) {
    if (!(r > 0)) throw ValidationError("SemiHelixSpec: sweep radius must be positive");
    if (d.dim() != base.immersion.ambient_dim + 1) {
      throw ValidationError("SemiHelixSpec: direction dimension must be base ambient + 1");
    }
    if (!base.normal) throw ValidationError("SemiHelixSpec: base normal field required");
    // Sample the base: it must sit at height zero along d with normals
    // orthogonal to d, i.e. live in the hyperplane d-perp.
    const Box& box = base.immersion.domain;
    std::vector<Vec> probes = {box.center()};
    probes.push_back(box.lo);
    probes.push_back(box.hi);
    probes.push_back(Vec(0.75 * box.lo + 0.25 * box.hi));
    probes.push_back(Vec(0.25 * box.lo + 0.75 * box.hi));
    for (const Vec& u : probes) {
      const Vec x = embed_in_ambient(evaluate(base.immersion, u));
      const Vec eta = embed_in_ambient(base.normal(u));
      if (std::abs(d.dot(x)) > validation_tol) {
        throw ValidationError("SemiHelixSpec: base point not at height zero along d");
      }
      if (std::abs(d.dot(eta)) > validation_tol) {
        throw ValidationError("SemiHelixSpec: base normal not orthogonal to d");
      }
      if (std::abs(eta.norm() - 1.0) > 1e-6) {
        throw ValidationError("SemiHelixSpec: base normal field not unit length");
      }
    }
  }

  int ambient_dim() const { return base.immersion.ambient_dim + 1; }

  Vec base_point(const Vec& u) const { return embed_in_ambient(evaluate(base.immersion, u)); }
  Vec eta(const Vec& u) const { return embed_in_ambient(base.normal(u)); }
};

inline Vec t_theta(const SemiHelixSpec& spec, const Vec& u, double theta) {
  return sweep_t_theta(spec.eta(u), spec.d.vec(), theta);
}

inline Vec t_phi(const SemiHelixSpec& spec, const Vec& u, double theta) {
  return sweep_t_phi(spec.eta(u), spec.d.vec(), theta);
}

inline Vec xi_theta(const SemiHelixSpec& spec, const Vec& u, double theta) {
  return sweep_xi_theta(spec.eta(u), spec.d.vec(), theta);
}

/// The ungated sweep formula x + 2 r sin(theta/2) T_phi(x), equal to
/// x + r (1 - cos theta) eta + r sin(theta) d.
inline Vec sweep_point(const SemiHelixSpec& spec, const Vec& u, double theta) {
  return Vec(spec.base_point(u) + chord_factor(spec.r, theta) * t_phi(spec, u, theta));
}

/// The sweep immersion, restricted to the spec's angle window.
inline Vec immerse(const SemiHelixSpec& spec, const Vec& u, double theta) {
  if (!spec.window.contains(theta)) {
    std::ostringstream msg;
    msg << "immerse: theta = " << theta << " outside the open window (" << spec.window.lo()
        << ", " << spec.window.hi() << ")";
    throw WindowViolation(msg.str());
  }
  return sweep_point(spec, u, theta);
}

// The sampled theta axis keeps a small inset from the open window ends so
// every chart point is strictly admissible.
inline constexpr double kThetaAxisInset = 1e-3;

/// Product chart (base params, theta) -> R^n of the swept hypersurface.
/// Analytic Jacobians come through when the base provides both its own
/// Jacobian and the normal derivative.
inline ParamImmersion build_product_surface(const SemiHelixSpec& spec) {
  const int k = spec.base.immersion.domain_dim;
  const int n = spec.ambient_dim();
  ParamImmersion m;
  m.domain_dim = k + 1;
  m.ambient_dim = n;

  Vec lo(k + 1), hi(k + 1);
  lo.head(k) = spec.base.immersion.domain.lo;
  hi.head(k) = spec.base.immersion.domain.hi;
  const double halfwidth = spec.window.epsilon * (1.0 - kThetaAxisInset);
  lo(k) = spec.window.theta0 - halfwidth;
  hi(k) = spec.window.theta0 + halfwidth;
  m.domain = Box(lo, hi);

  const SemiHelixSpec s = spec;
  m.eval = [s, k](const Vec& up) {
    return immerse(s, up.head(k), up(k));
  };
  if (spec.base.immersion.has_analytic_jacobian() && spec.base.has_normal_jacobian()) {
    m.jac = [s, k, n](const Vec& up) {
      const Vec u = up.head(k);
      const double theta = up(k);
      const Mat base_j = s.base.immersion.jac(u);
      const Mat eta_j = s.base.normal_jacobian(u);
      Mat j = Mat::Zero(n, k + 1);
      const double radial = s.r * (1.0 - std::cos(theta));
      for (int a = 0; a < k; ++a) {
        j.col(a).head(n - 1) = base_j.col(a) + radial * eta_j.col(a);
      }
      j.col(k) = s.r * sweep_t_theta(s.eta(u), s.d.vec(), theta);
      return j;
    };
  }
  return m;
}

/// Outcome of the bounded-angle certification sweep.
struct VerificationReport {
  double theta_min = 0.0;
  double theta_max = 0.0;
  double worst_violation = 0.0;  // max over nodes of |theta - theta0| - epsilon
  double max_angle_error_vs_param = std::numeric_limits<double>::quiet_NaN();
  double min_jacobian_sv = std::numeric_limits<double>::infinity();
  std::vector<size_t> rank_deficient_nodes;
  bool orientation_flipped = false;
  bool orientation_conflict = false;
  bool pass = false;
};

// Tolerance for the constant-angle (epsilon = 0) certification.
inline constexpr double kHelixAngleTol = 1e-9;

/// Certifies the bounded-angle property from tangent frames alone. Angles are
/// computed by the SVD frame pipeline at every grid node, oriented coherently;
/// the one remaining global sign is chosen against the reference angles when
/// given, and otherwise to best satisfy the window.
inline VerificationReport verify_semihelix(
    const ParamImmersion& m, const Direction& d, const AngleWindow& window, const SampleGrid& grid,
    const std::function<double(const Vec&)>& theta_ref = nullptr) {
  VerificationReport report;
  std::vector<std::optional<TangentFrame>> frames(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    try {
      frames[i] = tangent_frame(m, grid.node(i), d);
    } catch (const RankDeficient&) {
      report.rank_deficient_nodes.push_back(i);
    }
  }

  const auto orientation = detail::propagate_orientation(frames, grid, d);
  report.orientation_conflict = orientation.conflict;

  std::vector<double> theta;
  std::vector<double> ref;
  theta.reserve(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!frames[i]) continue;
    const int sign = orientation.conflict ? 1 : orientation.sign[i];
    theta.push_back(sign * frames[i]->theta);
    if (theta_ref) ref.push_back(theta_ref(grid.node(i)));
    report.min_jacobian_sv = std::min(report.min_jacobian_sv, frames[i]->sigma_min);
  }
  if (theta.empty()) {
    report.pass = false;
    return report;
  }

  auto max_violation = [&](double sign) {
    double worst = -std::numeric_limits<double>::infinity();
    for (double t : theta) worst = std::max(worst, window.violation(sign * t));
    return worst;
  };
  auto max_ref_error = [&](double sign) {
    double worst = 0.0;
    for (size_t i = 0; i < theta.size(); ++i) worst = std::max(worst, std::abs(sign * theta[i] - ref[i]));
    return worst;
  };

  double sign = 1.0;
  if (theta_ref) {
    sign = max_ref_error(1.0) <= max_ref_error(-1.0) ? 1.0 : -1.0;
  } else {
    sign = max_violation(1.0) <= max_violation(-1.0) ? 1.0 : -1.0;
  }
  report.orientation_flipped = sign < 0;

  report.theta_min = std::numeric_limits<double>::infinity();
  report.theta_max = -std::numeric_limits<double>::infinity();
  for (double t : theta) {
    report.theta_min = std::min(report.theta_min, sign * t);
    report.theta_max = std::max(report.theta_max, sign * t);
  }
  report.worst_violation = max_violation(sign);
  if (theta_ref) report.max_angle_error_vs_param = max_ref_error(sign);

  const bool angles_ok = window.epsilon == 0.0 ? report.worst_violation < kHelixAngleTol
                                               : report.worst_violation < 0.0;
  report.pass = angles_ok && report.rank_deficient_nodes.empty() && !orientation.conflict;
  return report;
}

struct RankReport {
  double min_singular_value = std::numeric_limits<double>::infinity();
  Vec argmin_node;
  size_t argmin_flat = 0;
};

/// Minimum Jacobian singular value over the grid, locating where the chart
/// comes closest to losing immersion rank.
inline RankReport check_immersion_rank(const ParamImmersion& m, const SampleGrid& grid) {
  RankReport report;
  for (size_t i = 0; i < grid.size(); ++i) {
    const Vec u = grid.node(i);
    const Mat j = jacobian(m, u);
    Eigen::JacobiSVD<Mat> svd(j);
    const double smin = svd.singularValues()(m.domain_dim - 1);
    if (smin < report.min_singular_value) {
      report.min_singular_value = smin;
      report.argmin_node = u;
      report.argmin_flat = i;
    }
  }
  return report;
}

}  // namespace semihelix
