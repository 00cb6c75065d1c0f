#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "semihelix/construct.hpp"
#include "semihelix/curves.hpp"
#include "semihelix/direction_fit.hpp"
#include "semihelix/reconstruct.hpp"

namespace semihelix {

/// Reproducible float formatting; all text outputs use %.17g.
inline std::string fmt_g17(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace detail

/// Minimal deterministic JSON writer; numbers go through fmt_g17.
class JsonWriter {
 public:
  JsonWriter& begin_object() { return token("{", true); }
  JsonWriter& end_object() { return close("}"); }
  JsonWriter& begin_array() { return token("[", true); }
  JsonWriter& end_array() { return close("]"); }

  JsonWriter& key(const std::string& name) {
    separate();
    out_ << '"' << escaped(name) << "\":";
    just_keyed_ = true;
    return *this;
  }

  JsonWriter& value(double v) { return raw(fmt_g17(v)); }
  JsonWriter& value(int v) { return raw(std::to_string(v)); }
  JsonWriter& value(size_t v) { return raw(std::to_string(v)); }
  JsonWriter& value(bool v) { return raw(v ? "true" : "false"); }
  JsonWriter& value(const std::string& v) { return raw('"' + escaped(v) + '"'); }
  JsonWriter& value(const char* v) { return value(std::string(v)); }

  JsonWriter& value(const Vec& v) {
    begin_array();
    for (int i = 0; i < v.size(); ++i) value(v(i));
    return end_array();
  }

  std::string str() const { return out_.str(); }

 private:
  static std::string escaped(const std::string& s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
      }
    }
    return out;
  }

  void separate() {
    if (!just_opened_ && !just_keyed_) out_ << ',';
    just_opened_ = false;
  }

  JsonWriter& token(const char* t, bool opens) {
    separate();
    out_ << t;
    just_opened_ = opens;
    just_keyed_ = false;
    return *this;
  }

  JsonWriter& close(const char* t) {
    out_ << t;
    just_opened_ = false;
    just_keyed_ = false;
    return *this;
  }

  JsonWriter& raw(const std::string& text) {
    separate();
    out_ << text;
    just_keyed_ = false;
    return *this;
  }

  std::ostringstream out_;
  bool just_opened_ = true;
  bool just_keyed_ = false;
};

/// Surface sample CSV: parameter columns (last one named theta for swept
/// charts), then ambient coordinates.
inline void write_surface_csv(const std::string& path, const ParamImmersion& m,
                              const SampleGrid& grid, bool theta_axis_last) {
  std::ostringstream out;
  for (int a = 0; a < m.domain_dim; ++a) {
    if (theta_axis_last && a == m.domain_dim - 1) {
      out << "theta,";
    } else {
      out << "u" << a + 1 << ",";
    }
  }
  for (int i = 0; i < m.ambient_dim; ++i) out << "x" << i + 1 << (i + 1 < m.ambient_dim ? "," : "");
  out << "\n";
  for (size_t f = 0; f < grid.size(); ++f) {
    const Vec u = grid.node(f);
    const Vec y = evaluate(m, u);
    for (int a = 0; a < m.domain_dim; ++a) out << fmt_g17(u(a)) << ",";
    for (int i = 0; i < m.ambient_dim; ++i) out << fmt_g17(y(i)) << (i + 1 < m.ambient_dim ? "," : "");
    out << "\n";
  }
  detail::write_file(path, out.str());
}

/// Triangulated grid export for ambient dimension 3 (v/f records).
inline void write_obj(const std::string& path, const ParamImmersion& m, const SampleGrid& grid) {
  if (m.ambient_dim != 3) throw ValidationError("write_obj: only ambient dimension 3");
  if (grid.axes() != 2) throw ValidationError("write_obj: needs a 2-axis grid");
  std::ostringstream out;
  for (size_t f = 0; f < grid.size(); ++f) {
    const Vec y = evaluate(m, grid.node(f));
    out << "v " << fmt_g17(y(0)) << " " << fmt_g17(y(1)) << " " << fmt_g17(y(2)) << "\n";
  }
  const int nu = grid.counts[0], nv = grid.counts[1];
  auto vid = [nv](int i, int j) { return i * nv + j + 1; };  // OBJ is 1-based
  for (int i = 0; i + 1 < nu; ++i) {
    for (int j = 0; j + 1 < nv; ++j) {
      out << "f " << vid(i, j) << " " << vid(i + 1, j) << " " << vid(i + 1, j + 1) << "\n";
      out << "f " << vid(i, j) << " " << vid(i + 1, j + 1) << " " << vid(i, j + 1) << "\n";
    }
  }
  detail::write_file(path, out.str());
}

/// Curve CSV: t, ambient coordinates, angle.
inline void write_curve_csv(const std::string& path, const IntegralCurve& curve) {
  std::ostringstream out;
  const int n = curve.points.empty() ? 0 : static_cast<int>(curve.points.front().size());
  out << "t,";
  for (int i = 0; i < n; ++i) out << "x" << i + 1 << ",";
  out << "theta\n";
  for (size_t i = 0; i < curve.t.size(); ++i) {
    out << fmt_g17(curve.t[i]) << ",";
    for (int c = 0; c < n; ++c) out << fmt_g17(curve.points[i](c)) << ",";
    out << fmt_g17(curve.theta[i]) << "\n";
  }
  detail::write_file(path, out.str());
}

inline void write_verification_json(const std::string& path, const VerificationReport& report,
                                    const AngleWindow& window) {
  JsonWriter j;
  j.begin_object();
  j.key("type").value("verification_report");
  j.key("pass").value(report.pass);
  j.key("window").begin_object();
  j.key("theta0").value(window.theta0);
  j.key("epsilon").value(window.epsilon);
  j.end_object();
  j.key("theta_min").value(report.theta_min);
  j.key("theta_max").value(report.theta_max);
  j.key("worst_violation").value(report.worst_violation);
  if (!std::isnan(report.max_angle_error_vs_param)) {
    j.key("max_angle_error_vs_param").value(report.max_angle_error_vs_param);
  }
  j.key("min_jacobian_singular_value").value(report.min_jacobian_sv);
  j.key("orientation_flipped").value(report.orientation_flipped);
  j.key("orientation_conflict").value(report.orientation_conflict);
  j.key("rank_deficient_nodes").begin_array();
  for (size_t node : report.rank_deficient_nodes) j.value(node);
  j.end_array();
  j.end_object();
  detail::write_file(path, j.str() + "\n");
}

inline void write_trace_json(const std::string& path, const CircleFit& fit, const ThetaLine& line,
                             double closed_form_max_deviation, bool exited_domain) {
  JsonWriter j;
  j.begin_object();
  j.key("type").value("trace_report");
  j.key("circle_fit").begin_object();
  j.key("center").value(fit.center);
  j.key("radius").value(fit.radius);
  j.key("plane_basis").begin_array();
  j.value(Vec(fit.plane_basis.col(0)));
  j.value(Vec(fit.plane_basis.col(1)));
  j.end_array();
  j.key("rms_planarity").value(fit.rms_planarity);
  j.key("rms_radial").value(fit.rms_radial);
  j.end_object();
  j.key("theta_line").begin_object();
  j.key("slope").value(line.slope);
  j.key("intercept").value(line.intercept);
  j.key("max_residual").value(line.max_residual);
  j.end_object();
  j.key("closed_form_max_deviation").value(closed_form_max_deviation);
  j.key("exited_domain").value(exited_domain);
  j.end_object();
  detail::write_file(path, j.str() + "\n");
}

inline void write_reconstruction_json(const std::string& path,
                                      const ReconstructionReport& report) {
  JsonWriter j;
  j.begin_object();
  j.key("type").value("reconstruction_report");
  j.key("pass").value(report.pass);
  j.key("p").value(report.p);
  j.key("theta_p").value(report.theta_p);
  j.key("q").value(report.q);
  j.key("r_hat").value(report.r_hat);
  j.key("decomposition_residual").value(report.decomposition_residual);
  j.key("max_neighborhood_residual").value(report.max_neighborhood_residual);
  j.key("zero_angle_height_spread").value(report.zero_angle_height_spread);
  j.key("neighborhood").begin_array();
  for (const auto& entry : report.neighborhood) {
    j.begin_object();
    j.key("u").value(entry.u);
    j.key("status").value(entry.status);
    if (entry.status == "ok") {
      j.key("y").value(entry.y);
      j.key("y_prime").value(entry.y_prime);
      j.key("eta").value(entry.eta);
      j.key("theta_y").value(entry.theta_y);
      j.key("residual").value(entry.residual);
      j.key("extended").value(entry.extended);
    }
    j.end_object();
  }
  j.end_array();
  j.end_object();
  detail::write_file(path, j.str() + "\n");
}

inline void write_direction_fit_json(const std::string& path, const DirectionFit& fit) {
  JsonWriter j;
  j.begin_object();
  j.key("type").value("direction_fit");
  j.key("d").value(fit.d.vec());
  j.key("theta0").value(fit.theta0);
  j.key("spread").value(fit.spread);
  j.key("ambiguous").value(fit.ambiguous);
  j.end_object();
  detail::write_file(path, j.str() + "\n");
}

/// Oriented cloud CSV: 2n numeric columns per row (point then normal), with
/// an optional header line.
inline OrientedPointCloud read_cloud_csv(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open cloud file '" + path + "'");
  OrientedPointCloud cloud;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string item;
    bool numeric = true;
    while (std::getline(ss, item, ',')) {
      try {
        values.push_back(std::stod(item));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (line_no == 1) continue;  // header
      throw ParseError("cloud file line " + std::to_string(line_no) + ": non-numeric value");
    }
    if (static_cast<int>(values.size()) != 2 * n) {
      throw ParseError("cloud file line " + std::to_string(line_no) + ": expected " +
                       std::to_string(2 * n) + " columns");
    }
    Vec p(n), nrm(n);
    for (int i = 0; i < n; ++i) p(i) = values[i];
    for (int i = 0; i < n; ++i) nrm(i) = values[n + i];
    cloud.points.push_back(p);
    cloud.normals.push_back(nrm);
  }
  cloud.validate();
  return cloud;
}

inline void write_cloud_csv(const std::string& path, const OrientedPointCloud& cloud) {
  std::ostringstream out;
  const int n = cloud.points.empty() ? 0 : static_cast<int>(cloud.points.front().size());
  for (int i = 0; i < n; ++i) out << "x" << i + 1 << ",";
  for (int i = 0; i < n; ++i) out << "nx" << i + 1 << (i + 1 < n ? "," : "");
  out << "\n";
  for (size_t row = 0; row < cloud.points.size(); ++row) {
    for (int i = 0; i < n; ++i) out << fmt_g17(cloud.points[row](i)) << ",";
    for (int i = 0; i < n; ++i) {
      out << fmt_g17(cloud.normals[row](i)) << (i + 1 < n ? "," : "");
    }
    out << "\n";
  }
  detail::write_file(path, out.str());
}

}  // namespace semihelix
