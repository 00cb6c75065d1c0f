#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "semihelix/euclid.hpp"

namespace semihelix {

/// Axis-aligned parameter box in R^k. Degenerate axes (lo == hi) are allowed.
struct Box {
  Vec lo, hi;

  Box() = default;
  Box(Vec lo_in, Vec hi_in) : lo(std::move(lo_in)), hi(std::move(hi_in)) {
    if (lo.size() != hi.size()) throw ValidationError("Box: lo/hi dimension mismatch");
    for (int i = 0; i < lo.size(); ++i) {
      if (!(lo(i) <= hi(i))) throw ValidationError("Box: lo > hi on some axis");
    }
  }

  int dim() const { return static_cast<int>(lo.size()); }
  double extent(int axis) const { return hi(axis) - lo(axis); }
  Vec center() const { return 0.5 * (lo + hi); }

  bool contains(const Vec& u, double pad = 0.0) const {
    for (int i = 0; i < lo.size(); ++i) {
      if (u(i) < lo(i) - pad || u(i) > hi(i) + pad) return false;
    }
    return true;
  }

  Vec clamp(const Vec& u) const {
    Vec out = u;
    for (int i = 0; i < lo.size(); ++i) out(i) = std::clamp(out(i), lo(i), hi(i));
    return out;
  }
};

/// Chart-based hypersurface: a map from a parameter box in R^k into R^m.
/// When `jac` is empty the Jacobian falls back to finite differences.
struct ParamImmersion {
  int domain_dim = 0;
  int ambient_dim = 0;
  Box domain;
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jac;

  bool has_analytic_jacobian() const { return static_cast<bool>(jac); }

  ParamImmersion without_analytic_jacobian() const {
    ParamImmersion out = *this;
    out.jac = nullptr;
    return out;
  }
};

inline Vec evaluate(const ParamImmersion& s, const Vec& u) {
  if (u.size() != s.domain_dim) throw EvaluationFailure("evaluate: parameter dimension mismatch");
  Vec y = s.eval(u);
  if (y.size() != s.ambient_dim || !all_finite(y)) {
    throw EvaluationFailure("evaluate: evaluator returned a non-finite or mis-sized point");
  }
  return y;
}

/// Central-difference Jacobian with step cbrt(eps) * max(1, |u_j|), shrinking
/// to second-order one-sided stencils at the domain boundary.
inline Mat fd_jacobian(const ParamImmersion& s, const Vec& u) {
  const double root_eps = std::cbrt(std::numeric_limits<double>::epsilon());
  Mat j(s.ambient_dim, s.domain_dim);
  for (int a = 0; a < s.domain_dim; ++a) {
    const double h = root_eps * std::max(1.0, std::abs(u(a)));
    auto at = [&](double offset) {
      Vec p = u;
      p(a) += offset;
      return evaluate(s, p);
    };
    const bool room_up = u(a) + h <= s.domain.hi(a);
    const bool room_down = u(a) - h >= s.domain.lo(a);
    if (room_up && room_down) {
      j.col(a) = (at(h) - at(-h)) / (2.0 * h);
    } else if (u(a) + 2 * h <= s.domain.hi(a)) {
      j.col(a) = (-3.0 * at(0) + 4.0 * at(h) - at(2 * h)) / (2.0 * h);
    } else if (u(a) - 2 * h >= s.domain.lo(a)) {
      j.col(a) = (3.0 * at(0) - 4.0 * at(-h) + at(-2 * h)) / (2.0 * h);
    } else if (room_up) {
      j.col(a) = (at(h) - at(0)) / h;
    } else if (room_down) {
      j.col(a) = (at(0) - at(-h)) / h;
    } else {
      // Degenerate axis; the map cannot vary along it.
      j.col(a).setZero();
    }
  }
  return j;
}

inline Mat jacobian(const ParamImmersion& s, const Vec& u) {
  if (!s.domain.contains(u)) {
    throw EvaluationFailure("jacobian: parameter point outside the domain box");
  }
  if (s.has_analytic_jacobian()) {
    Mat j = s.jac(u);
    if (j.rows() != s.ambient_dim || j.cols() != s.domain_dim || !j.allFinite()) {
      throw EvaluationFailure("jacobian: analytic Jacobian non-finite or mis-sized");
    }
    return j;
  }
  return fd_jacobian(s, u);
}

/// Uniform sampling grid over a box; counts >= 2 per axis, nodes include the
/// box faces. On degenerate axes every node sits at the collapsed value.
struct SampleGrid {
  Box box;
  std::vector<int> counts;

  SampleGrid(Box box_in, std::vector<int> counts_in)
      : box(std::move(box_in)), counts(std::move(counts_in)) {
    if (static_cast<int>(counts.size()) != box.dim()) {
      throw ValidationError("SampleGrid: counts/box dimension mismatch");
    }
    for (int c : counts) {
      if (c < 2) throw ValidationError("SampleGrid: counts must be >= 2 per axis");
    }
  }

  int axes() const { return static_cast<int>(counts.size()); }

  size_t size() const {
    size_t n = 1;
    for (int c : counts) n *= static_cast<size_t>(c);
    return n;
  }

  std::vector<int> multi_index(size_t flat) const {
    std::vector<int> idx(counts.size());
    for (int a = axes() - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(flat % static_cast<size_t>(counts[a]));
      flat /= static_cast<size_t>(counts[a]);
    }
    return idx;
  }

  size_t flat_index(const std::vector<int>& idx) const {
    size_t flat = 0;
    for (int a = 0; a < axes(); ++a) flat = flat * static_cast<size_t>(counts[a]) + idx[a];
    return flat;
  }

  Vec node(const std::vector<int>& idx) const {
    Vec u(axes());
    for (int a = 0; a < axes(); ++a) {
      const double t =
          counts[a] > 1 ? static_cast<double>(idx[a]) / static_cast<double>(counts[a] - 1) : 0.0;
      u(a) = box.lo(a) + t * box.extent(a);
    }
    return u;
  }

  Vec node(size_t flat) const { return node(multi_index(flat)); }
};

/// Orthonormal tangent frame of a hypersurface point, with the signed angle
/// between the query direction and the tangent hyperplane.
struct TangentFrame {
  Vec point;
  Mat tangent_basis;  // ambient_dim x domain_dim, orthonormal columns
  Direction normal;
  double theta = 0.0;
  double sigma_min = 0.0;  // smallest/largest Jacobian singular values
  double sigma_max = 0.0;
};

/// Frame from the SVD of the Jacobian: tangent basis from the leading left
/// singular vectors, normal from the trailing one. The normal sign is made
/// deterministic by forcing the largest-magnitude coordinate positive;
/// coherent orientation over a grid is a separate step.
inline TangentFrame tangent_frame(const ParamImmersion& s, const Vec& u, const Direction& d) {
  if (s.ambient_dim != s.domain_dim + 1) {
    throw ValidationError("tangent_frame: not a hypersurface chart (m != k+1)");
  }
  if (d.dim() != s.ambient_dim) throw ValidationError("tangent_frame: direction dimension mismatch");
  const Mat j = jacobian(s, u);
  Eigen::JacobiSVD<Mat> svd(j, Eigen::ComputeFullU);
  const int k = s.domain_dim;
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(k - 1);
  if (!(smin > 1e-8 * smax)) {
    std::ostringstream msg;
    msg << "tangent_frame: rank gate failed (sigma_min/sigma_max = "
        << (smax > 0 ? smin / smax : 0.0) << ")";
    throw RankDeficient(msg.str());
  }
  Vec xi = svd.matrixU().col(k);
  int imax = 0;
  xi.cwiseAbs().maxCoeff(&imax);
  if (xi(imax) < 0) xi = -xi;

  Direction normal(xi, 1e-9);
  const double theta = signed_angle(d, normal);
  return TangentFrame{evaluate(s, u), svd.matrixU().leftCols(k), std::move(normal), theta, smin,
                      smax};
}

namespace detail {

struct OrientationResult {
  std::vector<int> sign;  // +1/-1 per node, 0 where no frame exists
  bool conflict = false;
  size_t conflict_a = 0, conflict_b = 0;
};

/// Chooses +-1 signs for the normals so adjacent grid nodes agree. The seed
/// sign per connected component prefers <xi, d> >= 0, falling back to a
/// positive first nonzero coordinate. After propagation every grid edge is
/// audited; a non-positive inner product marks a conflict.
inline OrientationResult propagate_orientation(
    const std::vector<std::optional<TangentFrame>>& frames, const SampleGrid& grid,
    const Direction& d) {
  OrientationResult result;
  const size_t n = grid.size();
  result.sign.assign(n, 0);

  auto seed_sign = [&](const TangentFrame& f) {
    const double s = f.normal.dot(d.vec());
    if (std::abs(s) > 1e-12) return s >= 0 ? 1 : -1;
    for (int i = 0; i < f.normal.dim(); ++i) {
      if (std::abs(f.normal.vec()(i)) > 1e-12) return f.normal.vec()(i) > 0 ? 1 : -1;
    }
    return 1;
  };

  std::vector<size_t> queue;
  for (size_t start = 0; start < n; ++start) {
    if (!frames[start] || result.sign[start] != 0) continue;
    result.sign[start] = seed_sign(*frames[start]);
    queue.clear();
    queue.push_back(start);
    while (!queue.empty()) {
      const size_t cur = queue.back();
      queue.pop_back();
      const auto idx = grid.multi_index(cur);
      for (int a = 0; a < grid.axes(); ++a) {
        for (int step : {-1, 1}) {
          auto nb = idx;
          nb[a] += step;
          if (nb[a] < 0 || nb[a] >= grid.counts[a]) continue;
          const size_t nf = grid.flat_index(nb);
          if (!frames[nf] || result.sign[nf] != 0) continue;
          const double dot = frames[cur]->normal.dot(frames[nf]->normal);
          result.sign[nf] = dot >= 0.0 ? result.sign[cur] : -result.sign[cur];
          queue.push_back(nf);
        }
      }
    }
  }

  // Audit every edge.
  for (size_t f = 0; f < n; ++f) {
    if (!frames[f]) continue;
    const auto idx = grid.multi_index(f);
    for (int a = 0; a < grid.axes(); ++a) {
      auto nb = idx;
      nb[a] += 1;
      if (nb[a] >= grid.counts[a]) continue;
      const size_t g = grid.flat_index(nb);
      if (!frames[g]) continue;
      const double dot =
          result.sign[f] * result.sign[g] * frames[f]->normal.dot(frames[g]->normal);
      if (!(dot > 0.0)) {
        result.conflict = true;
        result.conflict_a = f;
        result.conflict_b = g;
        return result;
      }
    }
  }
  return result;
}

}  // namespace detail

/// Computes frames at every grid node and flips normal signs into a coherent
/// field. Throws OrientationConflict when no coherent choice exists at this
/// resolution instead of silently flipping.
inline std::vector<TangentFrame> orient_normal_field(const ParamImmersion& s,
                                                     const SampleGrid& grid, const Direction& d) {
  std::vector<std::optional<TangentFrame>> frames(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) frames[i] = tangent_frame(s, grid.node(i), d);

  const auto orientation = detail::propagate_orientation(frames, grid, d);
  if (orientation.conflict) {
    std::ostringstream msg;
    msg << "orient_normal_field: adjacent nodes " << orientation.conflict_a << " and "
        << orientation.conflict_b << " admit no coherent normal orientation";
    throw OrientationConflict(msg.str());
  }

  std::vector<TangentFrame> out;
  out.reserve(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    TangentFrame f = *frames[i];
    if (orientation.sign[i] < 0) {
      f.normal = f.normal.negated();
      f.theta = signed_angle(d, f.normal);
    }
    out.push_back(std::move(f));
  }
  return out;
}

/// Hypersurface chart bundled with a coherently oriented unit normal field
/// (and optionally its parameter derivative), both given per parameter point.
struct OrientedSurface {
  ParamImmersion immersion;
  std::function<Vec(const Vec&)> normal;
  std::function<Mat(const Vec&)> normal_jacobian;  // optional, ambient_dim x domain_dim
  std::string name;

  bool has_normal_jacobian() const { return static_cast<bool>(normal_jacobian); }
};

inline OrientedSurface flip_normal(OrientedSurface s) {
  auto normal = s.normal;
  s.normal = [normal](const Vec& u) { return Vec(-normal(u)); };
  if (s.normal_jacobian) {
    auto nj = s.normal_jacobian;
    s.normal_jacobian = [nj](const Vec& u) { return Mat(-nj(u)); };
  }
  s.name += "-flipped";
  return s;
}

}  // namespace semihelix
