#pragma once

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "semihelix/config.hpp"
#include "semihelix/io.hpp"

namespace semihelix {

namespace detail {

inline std::vector<int> default_grid(int axes, bool fine) {
  if (axes == 1) return {fine ? 256 : 128};
  if (axes == 2) return fine ? std::vector<int>{128, 65} : std::vector<int>{64, 33};
  return fine ? std::vector<int>{32, 32, 17} : std::vector<int>{24, 24, 9};
}

inline SampleGrid command_grid(const RunConfig& cfg, const ParamImmersion& m, bool fine) {
  std::vector<int> counts = cfg.grid;
  if (counts.empty()) counts = default_grid(m.domain_dim, fine);
  if (static_cast<int>(counts.size()) != m.domain_dim) {
    throw ValidationError("grid: expected " + std::to_string(m.domain_dim) + " axis counts");
  }
  return SampleGrid(m.domain, counts);
}

inline std::string out_path(const RunConfig& cfg, const std::string& file) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / file).string();
}

/// Surface under study: the swept construction in base mode, the preset
/// chart itself in surface mode.
inline ParamImmersion command_surface(const RunConfig& cfg) {
  if (cfg.has_base()) return build_product_surface(make_spec(cfg));
  return make_surface(cfg).immersion;
}

}  // namespace detail

inline int cmd_build(const RunConfig& cfg) {
  const SemiHelixSpec spec = make_spec(cfg);
  const ParamImmersion m = build_product_surface(spec);
  const SampleGrid grid = detail::command_grid(cfg, m, false);
  write_surface_csv(detail::out_path(cfg, "build.csv"), m, grid, true);
  if (cfg.n == 3) {
    write_obj(detail::out_path(cfg, "build.obj"), m, grid);
  } else {
    std::cerr << "note: OBJ export available only for n = 3; wrote CSV only\n";
  }
  return 0;
}

inline int cmd_verify(const RunConfig& cfg) {
  const Direction d(cfg.d, 1e-9);
  const AngleWindow window = cfg.window();
  const ParamImmersion m = detail::command_surface(cfg);
  const SampleGrid grid = detail::command_grid(cfg, m, true);
  std::function<double(const Vec&)> theta_ref;
  if (cfg.has_base()) {
    const int theta_axis = m.domain_dim - 1;
    theta_ref = [theta_axis](const Vec& u) { return u(theta_axis); };
  }
  const VerificationReport report = verify_semihelix(m, d, window, grid, theta_ref);
  write_verification_json(detail::out_path(cfg, "verify.json"), report, window);
  return report.pass ? 0 : 1;
}

inline int cmd_trace(const RunConfig& cfg, std::vector<double> start, double span, double step) {
  const Direction d(cfg.d, 1e-9);
  const ParamImmersion m = detail::command_surface(cfg);
  Vec u0;
  if (start.empty()) {
    u0 = m.domain.center();
  } else {
    if (static_cast<int>(start.size()) != m.domain_dim) {
      throw ValidationError("trace: start point needs " + std::to_string(m.domain_dim) +
                            " coordinates");
    }
    u0 = Vec(static_cast<Eigen::Index>(start.size()));
    for (size_t i = 0; i < start.size(); ++i) u0(static_cast<Eigen::Index>(i)) = start[i];
  }

  const IntegralCurve curve = trace_integral_curve(m, d, u0, span, step);
  write_curve_csv(detail::out_path(cfg, "trace.csv"), curve);

  try {
    const CircleFit fit = fit_circle(curve.points);
    const ThetaLine line = theta_linearity(curve);
    const Vec v0 = t_theta_field(m, d, u0).vec();
    const ClosedFormArc arc = arc_from_circle_fit(fit, curve.points.front(), v0);
    const double deviation = max_deviation_from_arc(curve, arc);
    write_trace_json(detail::out_path(cfg, "trace_fit.json"), fit, line, deviation,
                     curve.exited_domain);
  } catch (const DegenerateGeometry& e) {
    JsonWriter j;
    j.begin_object();
    j.key("type").value("trace_report");
    j.key("degenerate").value(true);
    j.key("reason").value(e.what());
    j.key("exited_domain").value(curve.exited_domain);
    j.end_object();
    detail::write_file(detail::out_path(cfg, "trace_fit.json"), j.str() + "\n");
  }
  return 0;
}

inline int cmd_reconstruct(const RunConfig& cfg, std::vector<double> start) {
  const Direction d(cfg.d, 1e-9);
  const ParamImmersion m = detail::command_surface(cfg);
  Vec u0;
  if (start.empty()) {
    u0 = m.domain.center();
  } else {
    if (static_cast<int>(start.size()) != m.domain_dim) {
      throw ValidationError("reconstruct: start point needs " + std::to_string(m.domain_dim) +
                            " coordinates");
    }
    u0 = Vec(static_cast<Eigen::Index>(start.size()));
    for (size_t i = 0; i < start.size(); ++i) u0(static_cast<Eigen::Index>(i)) = start[i];
  }
  ReconstructOptions opts;
  if (!cfg.grid.empty()) opts.counts = cfg.grid;
  const ReconstructionReport report = reconstruct_local(m, d, u0, opts);
  write_reconstruction_json(detail::out_path(cfg, "reconstruct.json"), report);
  return report.pass ? 0 : 1;
}

inline int cmd_fit_direction(const RunConfig& cfg, const std::string& cloud_path) {
  const OrientedPointCloud cloud = read_cloud_csv(cloud_path, cfg.n);
  const DirectionFit fit = fit_direction(cloud);
  write_direction_fit_json(detail::out_path(cfg, "direction_fit.json"), fit);
  return 0;
}

}  // namespace semihelix
