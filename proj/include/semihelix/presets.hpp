#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "semihelix/immersion.hpp"

namespace semihelix {

/// Flat k-dimensional patch (u1..uk, 0) in R^{k+1} over [-1,1]^k,
/// normal along the last coordinate axis.
inline OrientedSurface make_plane(int k) {
  if (k < 1) throw ValidationError("make_plane: k must be >= 1");
  OrientedSurface s;
  s.name = "plane";
  s.immersion.domain_dim = k;
  s.immersion.ambient_dim = k + 1;
  s.immersion.domain = Box(Vec::Constant(k, -1.0), Vec::Constant(k, 1.0));
  s.immersion.eval = [k](const Vec& u) {
    Vec y = Vec::Zero(k + 1);
    y.head(k) = u;
    return y;
  };
  s.immersion.jac = [k](const Vec&) {
    Mat j = Mat::Zero(k + 1, k);
    j.topRows(k).setIdentity();
    return j;
  };
  s.normal = [k](const Vec&) { return Vec(Vec::Unit(k + 1, k)); };
  s.normal_jacobian = [k](const Vec&) { return Mat(Mat::Zero(k + 1, k)); };
  return s;
}

/// Circle of radius rho in R^2, outward unit normal.
inline OrientedSurface make_circle(double rho) {
  if (!(rho > 0)) throw ValidationError("make_circle: radius must be positive");
  OrientedSurface s;
  s.name = "circle";
  s.immersion.domain_dim = 1;
  s.immersion.ambient_dim = 2;
  s.immersion.domain = Box(Vec::Zero(1), Vec::Constant(1, 2 * kPi));
  s.immersion.eval = [rho](const Vec& u) {
    Vec y(2);
    y << rho * std::cos(u(0)), rho * std::sin(u(0));
    return y;
  };
  s.immersion.jac = [rho](const Vec& u) {
    Mat j(2, 1);
    j << -rho * std::sin(u(0)), rho * std::cos(u(0));
    return j;
  };
  s.normal = [](const Vec& u) {
    Vec n(2);
    n << std::cos(u(0)), std::sin(u(0));
    return n;
  };
  s.normal_jacobian = [](const Vec& u) {
    Mat j(2, 1);
    j << -std::sin(u(0)), std::cos(u(0));
    return j;
  };
  return s;
}

/// Sphere patch of radius rho in R^3 (poles excluded), outward normal.
inline OrientedSurface make_sphere(double rho) {
  if (!(rho > 0)) throw ValidationError("make_sphere: radius must be positive");
  OrientedSurface s;
  s.name = "sphere";
  s.immersion.domain_dim = 2;
  s.immersion.ambient_dim = 3;
  Vec lo(2), hi(2);
  lo << 0.0, -1.2;
  hi << 2 * kPi, 1.2;
  s.immersion.domain = Box(lo, hi);
  s.immersion.eval = [rho](const Vec& u) {
    Vec y(3);
    y << rho * std::cos(u(0)) * std::cos(u(1)), rho * std::sin(u(0)) * std::cos(u(1)),
        rho * std::sin(u(1));
    return y;
  };
  s.immersion.jac = [rho](const Vec& u) {
    Mat j(3, 2);
    j << -rho * std::sin(u(0)) * std::cos(u(1)), -rho * std::cos(u(0)) * std::sin(u(1)),
        rho * std::cos(u(0)) * std::cos(u(1)), -rho * std::sin(u(0)) * std::sin(u(1)), 0.0,
        rho * std::cos(u(1));
    return j;
  };
  s.normal = [](const Vec& u) {
    Vec n(3);
    n << std::cos(u(0)) * std::cos(u(1)), std::sin(u(0)) * std::cos(u(1)), std::sin(u(1));
    return n;
  };
  s.normal_jacobian = [](const Vec& u) {
    Mat j(3, 2);
    j << -std::sin(u(0)) * std::cos(u(1)), -std::cos(u(0)) * std::sin(u(1)),
        std::cos(u(0)) * std::cos(u(1)), -std::sin(u(0)) * std::sin(u(1)), 0.0, std::cos(u(1));
    return j;
  };
  return s;
}

/// Cylinder of radius rho about the z axis in R^3, outward normal.
inline OrientedSurface make_cylinder(double rho) {
  if (!(rho > 0)) throw ValidationError("make_cylinder: radius must be positive");
  OrientedSurface s;
  s.name = "cylinder";
  s.immersion.domain_dim = 2;
  s.immersion.ambient_dim = 3;
  Vec lo(2), hi(2);
  lo << 0.0, -1.0;
  hi << 2 * kPi, 1.0;
  s.immersion.domain = Box(lo, hi);
  s.immersion.eval = [rho](const Vec& u) {
    Vec y(3);
    y << rho * std::cos(u(0)), rho * std::sin(u(0)), u(1);
    return y;
  };
  s.immersion.jac = [rho](const Vec& u) {
    Mat j(3, 2);
    j << -rho * std::sin(u(0)), 0.0, rho * std::cos(u(0)), 0.0, 0.0, 1.0;
    return j;
  };
  s.normal = [](const Vec& u) {
    Vec n(3);
    n << std::cos(u(0)), std::sin(u(0)), 0.0;
    return n;
  };
  s.normal_jacobian = [](const Vec& u) {
    Mat j(3, 2);
    j << -std::sin(u(0)), 0.0, std::cos(u(0)), 0.0, 0.0, 0.0;
    return j;
  };
  return s;
}

/// Torus with major radius big_r and tube radius rho in R^3, outward normal.
inline OrientedSurface make_torus(double big_r, double rho) {
  if (!(big_r > rho) || !(rho > 0)) {
    throw ValidationError("make_torus: need big_r > rho > 0");
  }
  OrientedSurface s;
  s.name = "torus";
  s.immersion.domain_dim = 2;
  s.immersion.ambient_dim = 3;
  s.immersion.domain = Box(Vec::Zero(2), Vec::Constant(2, 2 * kPi));
  s.immersion.eval = [big_r, rho](const Vec& u) {
    const double w = big_r + rho * std::cos(u(1));
    Vec y(3);
    y << w * std::cos(u(0)), w * std::sin(u(0)), rho * std::sin(u(1));
    return y;
  };
  s.immersion.jac = [big_r, rho](const Vec& u) {
    const double w = big_r + rho * std::cos(u(1));
    Mat j(3, 2);
    j << -w * std::sin(u(0)), -rho * std::sin(u(1)) * std::cos(u(0)), w * std::cos(u(0)),
        -rho * std::sin(u(1)) * std::sin(u(0)), 0.0, rho * std::cos(u(1));
    return j;
  };
  s.normal = [](const Vec& u) {
    Vec n(3);
    n << std::cos(u(1)) * std::cos(u(0)), std::cos(u(1)) * std::sin(u(0)), std::sin(u(1));
    return n;
  };
  s.normal_jacobian = [](const Vec& u) {
    Mat j(3, 2);
    j << -std::cos(u(1)) * std::sin(u(0)), -std::sin(u(1)) * std::cos(u(0)),
        std::cos(u(1)) * std::cos(u(0)), -std::sin(u(1)) * std::sin(u(0)), 0.0, std::cos(u(1));
    return j;
  };
  return s;
}

/// Graph surface z = amplitude * sin(x) * sin(y) in R^3, upward normal.
inline OrientedSurface make_graph(double amplitude) {
  OrientedSurface s;
  s.name = "graph";
  s.immersion.domain_dim = 2;
  s.immersion.ambient_dim = 3;
  s.immersion.domain = Box(Vec::Constant(2, -1.5), Vec::Constant(2, 1.5));
  const double a = amplitude;
  s.immersion.eval = [a](const Vec& u) {
    Vec y(3);
    y << u(0), u(1), a * std::sin(u(0)) * std::sin(u(1));
    return y;
  };
  s.immersion.jac = [a](const Vec& u) {
    Mat j(3, 2);
    j << 1.0, 0.0, 0.0, 1.0, a * std::cos(u(0)) * std::sin(u(1)),
        a * std::sin(u(0)) * std::cos(u(1));
    return j;
  };
  auto raw_normal = [a](const Vec& u) {
    Vec g(3);
    g << -a * std::cos(u(0)) * std::sin(u(1)), -a * std::sin(u(0)) * std::cos(u(1)), 1.0;
    return g;
  };
  s.normal = [raw_normal](const Vec& u) {
    const Vec g = raw_normal(u);
    return Vec(g / g.norm());
  };
  s.normal_jacobian = [a, raw_normal](const Vec& u) {
    const Vec g = raw_normal(u);
    const double gn = g.norm();
    const Vec eta = g / gn;
    Mat dg(3, 2);
    dg << a * std::sin(u(0)) * std::sin(u(1)), -a * std::cos(u(0)) * std::cos(u(1)),
        -a * std::cos(u(0)) * std::cos(u(1)), a * std::sin(u(0)) * std::sin(u(1)), 0.0, 0.0;
    const Mat proj = Mat::Identity(3, 3) - eta * eta.transpose();
    return Mat(proj * dg / gn);
  };
  return s;
}

/// Catalog dispatch used by the CLI. `domain_dim_hint` sizes the plane preset;
/// the other presets carry intrinsic dimensions.
inline OrientedSurface make_preset(const std::string& name, const std::vector<double>& params,
                                   int domain_dim_hint) {
  auto want = [&](size_t n_params) {
    if (params.size() != n_params) {
      std::ostringstream msg;
      msg << "preset '" << name << "' expects " << n_params << " parameter(s), got "
          << params.size();
      throw ValidationError(msg.str());
    }
  };
  if (name == "plane") {
    want(0);
    return make_plane(domain_dim_hint);
  }
  if (name == "circle") {
    want(1);
    return make_circle(params[0]);
  }
  if (name == "sphere") {
    want(1);
    return make_sphere(params[0]);
  }
  if (name == "cylinder") {
    want(1);
    return make_cylinder(params[0]);
  }
  if (name == "torus") {
    want(2);
    return make_torus(params[0], params[1]);
  }
  if (name == "graph") {
    want(1);
    return make_graph(params[0]);
  }
  throw ValidationError("unknown preset '" + name + "'");
}

}  // namespace semihelix
