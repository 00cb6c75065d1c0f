#pragma once

#include <cmath>
#include <vector>

#include "semihelix/euclid.hpp"

namespace semihelix {

/// Point samples of a surface with their oriented unit normals.
struct OrientedPointCloud {
  std::vector<Vec> points;
  std::vector<Vec> normals;

  void validate() const {
    if (points.size() != normals.size()) {
      throw ValidationError("OrientedPointCloud: points/normals length mismatch");
    }
    for (const Vec& n : normals) {
      if (std::abs(n.norm() - 1.0) > 1e-6) {
        throw ValidationError("OrientedPointCloud: normals must be unit within 1e-6");
      }
    }
  }
};

struct DirectionFit {
  Direction d;
  double theta0 = 0.0;   // midrange of the fitted angles
  double spread = 0.0;   // half-range; the smallest window radius containing them
  bool ambiguous = false;
};

namespace detail {

struct AngleRange {
  double lo = 0.0, hi = 0.0;
  double half() const { return 0.5 * (hi - lo); }
  double mid() const { return 0.5 * (hi + lo); }
};

inline AngleRange angle_range(const Vec& d, const std::vector<Vec>& normals) {
  AngleRange r;
  r.lo = std::numeric_limits<double>::infinity();
  r.hi = -std::numeric_limits<double>::infinity();
  for (const Vec& xi : normals) {
    const double s = std::clamp(d.dot(xi), -1.0, 1.0);
    const double theta = std::copysign(std::asin(std::abs(s)), s);
    r.lo = std::min(r.lo, theta);
    r.hi = std::max(r.hi, theta);
  }
  return r;
}

/// 1D golden-section line search of the half-range along a great circle of
/// the sphere, restricted to a local bracket.
inline double rotate_search(const Vec& d, const Vec& w, const std::vector<Vec>& normals,
                            double bracket) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  auto objective = [&](double t) {
    return angle_range(Vec(std::cos(t) * d + std::sin(t) * w), normals).half();
  };
  double a = -bracket, b = bracket;
  double c = b - gr * (b - a);
  double e = a + gr * (b - a);
  double fc = objective(c), fe = objective(e);
  for (int it = 0; it < 80; ++it) {
    if (fc < fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - gr * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + gr * (b - a);
      fe = objective(e);
    }
    if (b - a < 1e-13) break;
  }
  const double t = 0.5 * (a + b);
  return objective(t) < objective(0.0) ? t : 0.0;
}

}  // namespace detail

/// Fits the axis direction that makes the cloud's normals span the smallest
/// angle window: minimizes the half-range of arcsin<d, xi_i> over unit d.
/// Initialized from the extreme eigenvectors of the normals' second-moment
/// matrix, refined by projected coordinate descent on the sphere.
inline DirectionFit fit_direction(const OrientedPointCloud& cloud) {
  cloud.validate();
  if (cloud.normals.size() < 10) {
    throw InsufficientData("fit_direction: need at least 10 oriented samples");
  }
  const int n = static_cast<int>(cloud.normals.front().size());
  const auto& normals = cloud.normals;

  Mat moment = Mat::Zero(n, n);
  for (const Vec& xi : normals) moment += xi * xi.transpose();
  moment /= static_cast<double>(normals.size());
  Eigen::SelfAdjointEigenSolver<Mat> eig(moment);

  const Vec cand_small = eig.eigenvectors().col(0);
  const Vec cand_large = eig.eigenvectors().col(n - 1);
  const double obj_small = detail::angle_range(cand_small, normals).half();
  const double obj_large = detail::angle_range(cand_large, normals).half();

  DirectionFit result{Direction(Vec::Unit(n, 0)), 0.0, 0.0, false};
  Vec d = obj_small <= obj_large ? cand_small : cand_large;
  if (std::abs(obj_small - obj_large) <= 1e-9) {
    result.ambiguous = true;
    d = cand_small;  // tie: the first (smallest-eigenvalue) candidate wins
  }

  double best = detail::angle_range(d, normals).half();
  double bracket = 0.4;
  for (int sweep = 0; sweep < 200; ++sweep) {
    double improvement = 0.0;
    for (int axis = 0; axis < n; ++axis) {
      Vec w = Vec::Unit(n, axis);
      w -= w.dot(d) * d;
      const double wn = w.norm();
      if (wn < 1e-12) continue;
      w /= wn;
      const double t = detail::rotate_search(d, w, normals, bracket);
      if (t != 0.0) {
        d = std::cos(t) * d + std::sin(t) * w;
        d.normalize();
        const double now = detail::angle_range(d, normals).half();
        improvement += best - now;
        best = now;
      }
    }
    if (improvement < 1e-10) {
      if (bracket < 2e-3) break;
      bracket *= 0.25;
    }
  }

  for (int i = 0; i < n; ++i) {
    if (std::abs(d(i)) > 1e-12) {
      if (d(i) < 0) d = -d;
      break;
    }
  }

  const auto range = detail::angle_range(d, normals);
  result.d = Direction(d, 1e-9);
  result.theta0 = range.mid();
  result.spread = range.half();
  return result;
}

}  // namespace semihelix
