#pragma once

#include <cmath>
#include <vector>

#include "semihelix/euclid.hpp"

namespace semihelix {

/// Not-a-knot cubic spline through vector-valued samples on a uniform grid.
/// Fourth-order accurate in the interior and at the ends, which the local
/// surface rebuild relies on.
class CubicSpline1D {
 public:
  CubicSpline1D(double x0, double dx, Mat values)
      : x0_(x0), dx_(dx), values_(std::move(values)) {
    const int n = static_cast<int>(values_.rows());
    if (n < 4) throw ValidationError("CubicSpline1D: need at least 4 samples");
    if (!(dx_ > 0)) throw ValidationError("CubicSpline1D: spacing must be positive");

    Mat sys = Mat::Zero(n, n);
    Mat rhs = Mat::Zero(n, values_.cols());
    for (int i = 1; i + 1 < n; ++i) {
      sys(i, i - 1) = 1.0;
      sys(i, i) = 4.0;
      sys(i, i + 1) = 1.0;
      rhs.row(i) =
          6.0 * (values_.row(i - 1) - 2.0 * values_.row(i) + values_.row(i + 1)) / (dx_ * dx_);
    }
    sys(0, 0) = 1.0;
    sys(0, 1) = -2.0;
    sys(0, 2) = 1.0;
    sys(n - 1, n - 3) = 1.0;
    sys(n - 1, n - 2) = -2.0;
    sys(n - 1, n - 1) = 1.0;
    second_ = sys.partialPivLu().solve(rhs);
  }

  int components() const { return static_cast<int>(values_.cols()); }

  Vec eval(double x) const {
    const int n = static_cast<int>(values_.rows());
    int i = static_cast<int>(std::floor((x - x0_) / dx_));
    i = std::clamp(i, 0, n - 2);
    const double s = (x - (x0_ + i * dx_)) / dx_;
    const double a = 1.0 - s;
    const double w0 = (a * a * a - a) * dx_ * dx_ / 6.0;
    const double w1 = (s * s * s - s) * dx_ * dx_ / 6.0;
    return Vec(a * values_.row(i).transpose() + s * values_.row(i + 1).transpose() +
               w0 * second_.row(i).transpose() + w1 * second_.row(i + 1).transpose());
  }

 private:
  double x0_, dx_;
  Mat values_;
  Mat second_;
};

/// Tensor-product spline over a uniform 2D grid: per-row splines along the
/// second axis, recombined by a cross spline along the first axis per query.
class CubicSpline2D {
 public:
  CubicSpline2D(double x0, double dx, double y0, double dy, std::vector<Mat> rows)
      : x0_(x0), dx_(dx) {
    if (rows.size() < 4) throw ValidationError("CubicSpline2D: need at least 4 rows");
    rows_.reserve(rows.size());
    for (Mat& row : rows) rows_.emplace_back(y0, dy, std::move(row));
  }

  Vec eval(double x, double y) const {
    const int c = rows_.front().components();
    Mat cross(static_cast<int>(rows_.size()), c);
    for (size_t i = 0; i < rows_.size(); ++i) cross.row(i) = rows_[i].eval(y).transpose();
    return CubicSpline1D(x0_, dx_, cross).eval(x);
  }

 private:
  double x0_, dx_;
  std::vector<CubicSpline1D> rows_;
};

}  // namespace semihelix
