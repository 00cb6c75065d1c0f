#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "semihelix/errors.hpp"

namespace semihelix {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kUnitTol = 1e-12;
inline constexpr double kGramConditionLimit = 1e12;

inline bool all_finite(const Vec& v) { return v.allFinite(); }

/// Unit vector in R^n, validated to |v| = 1 within `tol` at construction.
/// Coordinates are stored as given (negation stays exact).
class Direction {
 public:
  explicit Direction(Vec v, double tol = kUnitTol) : v_(std::move(v)) {
    if (!all_finite(v_)) throw ValidationError("Direction: non-finite coordinates");
    const double norm = v_.norm();
    if (std::abs(norm - 1.0) > tol) {
      std::ostringstream msg;
      msg << "Direction: vector norm " << norm << " deviates from 1 by more than " << tol;
      throw ValidationError(msg.str());
    }
  }

  /// Builds a direction from an arbitrary nonzero vector.
  static Direction normalized(Vec v) {
    const double norm = v.norm();
    if (!(norm > 1e-14) || !all_finite(v)) {
      throw ValidationError("Direction: cannot normalize a (near-)zero vector");
    }
    return Direction(v / norm, 1e-9);
  }

  const Vec& vec() const { return v_; }
  int dim() const { return static_cast<int>(v_.size()); }
  double dot(const Vec& w) const { return v_.dot(w); }
  double dot(const Direction& w) const { return v_.dot(w.v_); }
  Direction negated() const { return Direction(-v_); }

 private:
  Vec v_;
};

/// Open angle interval (theta0 - epsilon, theta0 + epsilon) inside (-pi/2, pi/2).
/// epsilon = 0 degenerates to the single constant angle theta0.
struct AngleWindow {
  double theta0 = 0.0;
  double epsilon = 0.0;

  AngleWindow(double theta0_in, double epsilon_in) : theta0(theta0_in), epsilon(epsilon_in) {
    if (!(epsilon >= 0.0) || !(epsilon < kPi / 2)) {
      std::ostringstream msg;
      msg << "AngleWindow: epsilon = " << epsilon << " must lie in [0, pi/2)";
      throw ValidationError(msg.str());
    }
    if (theta0 - epsilon < -kPi / 2 || theta0 + epsilon > kPi / 2) {
      std::ostringstream msg;
      msg << "AngleWindow: (" << theta0 - epsilon << ", " << theta0 + epsilon
          << ") is not contained in (-pi/2, pi/2)";
      throw ValidationError(msg.str());
    }
  }

  double lo() const { return theta0 - epsilon; }
  double hi() const { return theta0 + epsilon; }

  /// Positive outside the window, negative strictly inside; for epsilon = 0
  /// this is the distance to theta0.
  double violation(double theta) const { return std::abs(theta - theta0) - epsilon; }

  bool contains(double theta) const {
    if (epsilon == 0.0) return theta == theta0;
    return violation(theta) < 0.0;
  }
};

/// Affine hyperplane {y : <y - point, normal> = 0}.
struct Hyperplane {
  Vec point;
  Direction normal;

  Hyperplane(Vec point_in, Direction normal_in)
      : point(std::move(point_in)), normal(std::move(normal_in)) {
    if (point.size() != normal.dim()) {
      throw ValidationError("Hyperplane: point/normal dimension mismatch");
    }
  }

  double signed_offset(const Vec& y) const { return normal.dot(y - point); }
};

inline bool hyperplane_slice_test(const Hyperplane& q, const Vec& y, double tol) {
  if (!(tol > 0.0)) throw ValidationError("hyperplane_slice_test: tol must be positive");
  return std::abs(q.signed_offset(y)) <= tol;
}

/// Orthogonal projection of v onto span(basis). The basis need not be
/// orthonormal; the Gram system is solved directly and gated on conditioning.
inline Vec project_onto_subspace(const Vec& v, const std::vector<Vec>& basis) {
  if (basis.empty()) return Vec::Zero(v.size());
  const int n = static_cast<int>(v.size());
  const int k = static_cast<int>(basis.size());
  Mat b(n, k);
  for (int j = 0; j < k; ++j) {
    if (basis[j].size() != n) throw ValidationError("project_onto_subspace: dimension mismatch");
    b.col(j) = basis[j];
  }
  const Mat gram = b.transpose() * b;
  Eigen::JacobiSVD<Mat> svd(gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(k - 1);
  if (!(smin > 0.0) || smax / smin > kGramConditionLimit) {
    std::ostringstream msg;
    msg << "project_onto_subspace: Gram matrix condition "
        << (smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity())
        << " exceeds " << kGramConditionLimit;
    throw DegenerateBasis(msg.str());
  }
  const Vec coeffs = svd.solve(b.transpose() * v);
  return b * coeffs;
}

/// Signed angle between a direction and the tangent hyperplane with unit
/// normal xi, measured as arcsin<d, xi>. Odd in xi by construction.
inline double signed_angle(const Direction& d, const Direction& xi) {
  const double s = std::clamp(d.dot(xi), -1.0, 1.0);
  return std::copysign(std::asin(std::abs(s)), s);
}

namespace detail {

inline void check_orthonormal(const std::vector<Vec>& vectors, double tol) {
  for (size_t i = 0; i < vectors.size(); ++i) {
    for (size_t j = i; j < vectors.size(); ++j) {
      const double want = (i == j) ? 1.0 : 0.0;
      if (std::abs(vectors[i].dot(vectors[j]) - want) > tol) {
        std::ostringstream msg;
        msg << "vectors " << i << "," << j << " fail orthonormality within " << tol;
        throw DegenerateBasis(msg.str());
      }
    }
  }
}

}  // namespace detail

/// Completes an orthonormal set to a full basis of R^n. The completion is
/// deterministic: coordinate axes are orthogonalized in index order and
/// near-dependent candidates are skipped.
inline std::vector<Vec> extend_orthonormal_basis(const std::vector<Vec>& partial, int n) {
  constexpr double kDependentSkip = 1e-4;
  for (const Vec& v : partial) {
    if (v.size() != n) throw DegenerateBasis("extend_orthonormal_basis: dimension mismatch");
  }
  if (static_cast<int>(partial.size()) > n) {
    throw DegenerateBasis("extend_orthonormal_basis: more vectors than dimensions");
  }
  detail::check_orthonormal(partial, 1e-10);

  std::vector<Vec> basis = partial;
  for (int axis = 0; axis < n && static_cast<int>(basis.size()) < n; ++axis) {
    Vec w = Vec::Unit(n, axis);
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vec& b : basis) w -= b.dot(w) * b;
    }
    const double norm = w.norm();
    if (norm < kDependentSkip) continue;
    basis.push_back(w / norm);
  }
  if (static_cast<int>(basis.size()) != n) {
    throw DegenerateBasis("extend_orthonormal_basis: completion failed");
  }
  return basis;
}

}  // namespace semihelix
