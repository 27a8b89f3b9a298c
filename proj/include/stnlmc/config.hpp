#pragma once

#include "stnlmc/medium.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stnlmc {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct LayerPair {
  int x = 1, t = 1;
};

struct ExperimentConfig {
  std::string preset = "custom";
  std::string study = "table";  // table | manufactured | oracle | decay

  int coarseX = 8, coarseY = 8, coarseT = 10;
  int refineX = 8, refineY = 8, refineT = 10;
  Rect domain;
  double T = 1.0;

  double matrixValue = 1.0;
  std::vector<Channel> channels;

  std::string source = "xyt";  // xyt | zero | manufactured

  PouMode pou = PouMode::Bilinear;
  PouFreeze pouFreeze = PouFreeze::FineInterval;
  double theta = 0.5;
  std::vector<LayerPair> layers{{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}};
  bool fullH1 = false;
  int threads = 1;

  int refinements = 3;                       // manufactured study
  std::vector<BlockId> decayBlocks;          // decay study, (slab, cell)

  std::string outDir = "results";
  std::vector<double> snapshots;
  bool timings = true;

  PermeabilityField field() const { return PermeabilityField(matrixValue, channels); }
  void validate() const;
  // Shrinks the refinement ratios by factor f (coarse grid unchanged).
  void apply_scale(double f);
};

ExperimentConfig parse_config(const std::string& text, const std::string& sourceName = "config");
ExperimentConfig load_config(const std::string& path);
std::string dump_config(const ExperimentConfig& cfg);

std::vector<std::string> preset_names();
std::string preset_text(const std::string& name);
ExperimentConfig preset(const std::string& name);

// "a:b" -> (a,a) ... (b,b); "x/t" -> one pair; items separated by whitespace or commas.
std::vector<LayerPair> parse_layers(const std::string& s);

}  // namespace stnlmc
