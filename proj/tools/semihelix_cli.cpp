// Command-line front end: builds swept hypersurfaces from preset bases,
// certifies the bounded-angle property, traces fiber circles, reconstructs
// the local product structure, and fits the axis direction of point clouds.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "semihelix/commands.hpp"

namespace {

semihelix::RunConfig load_config(const std::string& path, const std::string& out_override,
                                 const std::vector<int>& grid_override) {
  std::ifstream in(path);
  if (!in) throw semihelix::Error("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  semihelix::RunConfig cfg = semihelix::parse_config(text.str());
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (!grid_override.empty()) cfg.grid = grid_override;
  return cfg;
}

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semi-helix hypersurface construction, certification and reconstruction"};
  app.require_subcommand(1);

  std::string config_path, out_dir, start_text, cloud_path;
  std::vector<int> grid;
  double span = 1.0, step = 1e-3;
  unsigned long long seed = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run config file (key = value lines)")->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--grid", grid, "per-axis sample counts (overrides config)")->delimiter(',');
    cmd->add_option("--seed", seed, "seed recorded for randomized tooling");
  };

  CLI::App* build = app.add_subcommand("build", "sample the swept surface to CSV/OBJ");
  add_common(build);

  CLI::App* verify = app.add_subcommand("verify", "certify the bounded-angle property");
  add_common(verify);

  CLI::App* trace = app.add_subcommand("trace", "trace a fiber curve and fit its circle");
  add_common(trace);
  trace->add_option("--start", start_text, "start parameter point, comma separated");
  trace->add_option("--span", span, "trace length");
  trace->add_option("--step", step, "integration step");

  CLI::App* reconstruct = app.add_subcommand("reconstruct", "recover the local product structure");
  add_common(reconstruct);
  reconstruct->add_option("--start", start_text, "parameter point of p, comma separated");

  CLI::App* fit = app.add_subcommand("fit-direction", "fit the axis of an oriented point cloud");
  add_common(fit);
  fit->add_option("--cloud", cloud_path, "oriented point cloud CSV (2n columns)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const semihelix::RunConfig cfg = load_config(config_path, out_dir, grid);
    if (build->parsed()) return semihelix::cmd_build(cfg);
    if (verify->parsed()) return semihelix::cmd_verify(cfg);
    if (trace->parsed()) return semihelix::cmd_trace(cfg, parse_point(start_text), span, step);
    if (reconstruct->parsed()) return semihelix::cmd_reconstruct(cfg, parse_point(start_text));
    if (fit->parsed()) return semihelix::cmd_fit_direction(cfg, cloud_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
