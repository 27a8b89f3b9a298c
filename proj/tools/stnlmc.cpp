#include "stnlmc/experiment.hpp"
#include "stnlmc/io.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <iostream>

using namespace stnlmc;

namespace {

struct Common {
  std::string preset, config, layers, pou, out;
  double theta = -1, scale = 1.0;
  int threads = 0, refine = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--preset", c.preset, "Embedded experiment (exp1, exp2, manufactured, oracle, decay)");
  app->add_option("--config", c.config, "INI-style experiment configuration file");
  app->add_option("--layers", c.layers, "Layer list, e.g. 1:5 or 4/2");
  app->add_option("--theta", c.theta, "Theta of the reference scheme, in [0.5, 1]");
  app->add_option("--pou", c.pou, "Partition of unity: bilinear | multiscale");
  app->add_option("--threads", c.threads, "Worker threads");
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--scale", c.scale, "Shrink fine refinement ratios by this factor");
  app->add_option("--refine", c.refine, "Refinement count of the manufactured study");
}

ExperimentConfig resolve(const Common& c) {
  if (!c.preset.empty() && !c.config.empty()) throw ConfigError("--preset and --config are mutually exclusive");
  ExperimentConfig cfg = !c.config.empty() ? load_config(c.config) : preset(c.preset.empty() ? "exp1" : c.preset);
  if (!c.layers.empty()) cfg.layers = parse_layers(c.layers);
  if (c.theta >= 0) cfg.theta = c.theta;
  if (!c.pou.empty()) {
    if (c.pou == "bilinear") cfg.pou = PouMode::Bilinear;
    else if (c.pou == "multiscale") cfg.pou = PouMode::Multiscale;
    else throw ConfigError("unknown --pou '" + c.pou + "'");
  }
  if (c.threads > 0) cfg.threads = c.threads;
  if (!c.out.empty()) cfg.outDir = c.out;
  if (c.refine > 0) cfg.refinements = c.refine;
  if (c.scale != 1.0) cfg.apply_scale(c.scale);
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time NLMC multiscale solver"};
  app.require_subcommand(1);
  Common runOpt, printOpt, snapOpt;
  auto* run = app.add_subcommand("run", "Run an experiment and write CSV/VTK artifacts");
  add_common(run, runOpt);
  auto* print = app.add_subcommand("print-config", "Print the resolved configuration");
  add_common(print, printOpt);
  auto* snap = app.add_subcommand("snapshot", "Solve one layer setting and write a VTK slice");
  add_common(snap, snapOpt);
  double time = 0.0;
  std::string file = "snapshot.vtk", which = "ms";
  snap->add_option("--time", time, "Time of the slice")->required();
  snap->add_option("--file", file, "Output VTK path");
  snap->add_option("--field", which, "ms | reference")->check(CLI::IsMember({"ms", "reference"}));
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*print) {
      std::cout << dump_config(resolve(printOpt));
      return 0;
    }
    if (*run) return stnlmc::run(resolve(runOpt));
    if (*snap) {
      const ExperimentConfig cfg = resolve(snapOpt);
      auto prob = make_problem(cfg);
      if (which == "reference") {
        const auto ref = solve_reference(prob->grid, *prob->kappa, prob->f, cfg.theta);
        snapshot(BlockField::from_nodal(ref.u), time, file, "u_ref");
        return 0;
      }
      const AuxiliaryBasis aux(prob->ctx, cfg.threads);
      const auto b = coarse_rhs(aux, prob->f);
      const LocalizedOptions opt{cfg.layers.front().x, cfg.layers.front().t, cfg.threads};
      const auto U = solve_coarse(assemble_coarse_localized(aux, b, opt));
      snapshot(downscale_localized(aux, U, opt), time, file, "u_ms");
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
