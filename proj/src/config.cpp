#include "stnlmc/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace stnlmc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::string tok;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!tok.empty()) out.push_back(tok), tok.clear();
    } else {
      tok += c;
    }
  }
  if (!tok.empty()) out.push_back(tok);
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  // Prefer the shortest representation that round-trips.
  for (int p = 1; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return s;
}

struct Ctx {
  std::string src;
  int line;
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(src + ":" + std::to_string(line) + ": " + msg);
  }
  double num(const std::string& s) const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size() || !std::isfinite(v)) fail("not a finite number: '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("not a number: '" + s + "'");
    }
  }
  int integer(const std::string& s) const {
    const double v = num(s);
    if (v != std::floor(v)) fail("not an integer: '" + s + "'");
    return static_cast<int>(v);
  }
  std::vector<double> nums(const std::string& s, std::size_t count) const {
    const auto toks = split_ws(s);
    if (count && toks.size() != count) fail("expected " + std::to_string(count) + " values, got " + std::to_string(toks.size()));
    std::vector<double> out;
    for (const auto& t : toks) out.push_back(num(t));
    return out;
  }
  bool boolean(const std::string& s) const {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    fail("not a boolean: '" + s + "'");
  }
};

}  // namespace

std::vector<LayerPair> parse_layers(const std::string& s) {
  std::vector<LayerPair> out;
  for (const auto& tok : split_ws(s)) {
    const auto colon = tok.find(':'), slash = tok.find('/');
    try {
      if (colon != std::string::npos) {
        const int a = std::stoi(tok.substr(0, colon)), b = std::stoi(tok.substr(colon + 1));
        if (a < 0 || b < a) throw ConfigError("invalid layer range '" + tok + "'");
        for (int l = a; l <= b; ++l) out.push_back({l, l});
      } else if (slash != std::string::npos) {
        out.push_back({std::stoi(tok.substr(0, slash)), std::stoi(tok.substr(slash + 1))});
      } else {
        const int l = std::stoi(tok);
        out.push_back({l, l});
      }
    } catch (const std::logic_error&) {
      throw ConfigError("invalid layer specification '" + tok + "'");
    }
  }
  for (const auto& p : out)
    if (p.x < 0 || p.t < 0) throw ConfigError("negative layer count in '" + s + "'");
  if (out.empty()) throw ConfigError("empty layer specification");
  return out;
}

void ExperimentConfig::validate() const {
  auto req = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("invalid configuration: " + msg);
  };
  req(coarseX >= 1 && coarseY >= 1 && coarseT >= 1, "coarse counts must be >= 1");
  req(refineX >= 1 && refineY >= 1 && refineT >= 1, "refinement ratios must be >= 1");
  req(domain.x1 > domain.x0 && domain.y1 > domain.y0, "domain must have positive extent");
  req(T > 0, "T must be positive");
  req(matrixValue > 0, "matrix value must be positive");
  for (const auto& c : channels) {
    req(c.value > 0, "channel " + c.name + " value must be positive");
    req(!c.boxes.empty(), "channel " + c.name + " has no boxes");
  }
  req(theta >= 0.5 && theta <= 1.0, "theta must lie in [0.5, 1]");
  req(!layers.empty(), "layer list is empty");
  req(threads >= 1, "threads must be >= 1");
  req(study == "table" || study == "manufactured" || study == "oracle" || study == "decay", "unknown study '" + study + "'");
  req(source == "xyt" || source == "zero" || source == "manufactured", "unknown source '" + source + "'");
  req(refinements >= 2 || study != "manufactured", "manufactured study needs at least 2 refinements");
  for (const auto& b : decayBlocks)
    req(b.n >= 0 && b.n < coarseT && b.i >= 0 && b.i < coarseX * coarseY, "decay block outside the grid");
  for (double t : snapshots) req(t >= 0 && t <= T, "snapshot time outside [0, T]");
}

void ExperimentConfig::apply_scale(double f) {
  if (!(f > 0)) throw ConfigError("scale must be positive");
  auto sc = [f](int r) { return std::max(1, static_cast<int>(std::lround(r * f))); };
  refineX = sc(refineX);
  refineY = sc(refineY);
  refineT = sc(refineT);
}

ExperimentConfig parse_config(const std::string& text, const std::string& sourceName) {
  ExperimentConfig cfg;
  cfg.channels.clear();
  std::istringstream in(text);
  std::string raw, section;
  Ctx c{sourceName, 0};
  std::map<std::string, int> seen;
  std::map<std::string, std::size_t> channelIndex;
  std::vector<std::pair<int, std::string>> pendingBoxes;
  std::vector<std::pair<int, std::array<int, 3>>> pendingBlocks;
  while (std::getline(in, raw)) {
    ++c.line;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') c.fail("malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      static const std::vector<std::string> known{"study", "grid", "medium", "source", "method", "output"};
      if (std::find(known.begin(), known.end(), section) == known.end()) c.fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) c.fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (section.empty()) c.fail("key '" + key + "' outside any section");
    const std::string full = section + "." + key;
    const bool repeatable = full == "medium.channel" || full == "medium.box" || full == "study.block";
    if (!repeatable && seen[full]++) c.fail("duplicate key '" + key + "' in section [" + section + "]");

    if (full == "study.kind") cfg.study = val;
    else if (full == "study.preset") cfg.preset = val;
    else if (full == "study.refinements") cfg.refinements = c.integer(val);
    else if (full == "study.block") {
      const auto v = c.nums(val, 3);
      for (double x : v)
        if (x != std::floor(x) || x < 0) c.fail("block needs non-negative integers 'slab cx cy'");
      pendingBlocks.push_back({c.line, {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])}});
    } else if (full == "grid.coarse") {
      c.nums(val, 3);
      cfg.coarseX = c.integer(split_ws(val)[0]);
      cfg.coarseY = c.integer(split_ws(val)[1]);
      cfg.coarseT = c.integer(split_ws(val)[2]);
    } else if (full == "grid.refine") {
      c.nums(val, 3);
      cfg.refineX = c.integer(split_ws(val)[0]);
      cfg.refineY = c.integer(split_ws(val)[1]);
      cfg.refineT = c.integer(split_ws(val)[2]);
    } else if (full == "grid.domain") {
      const auto v = c.nums(val, 4);
      cfg.domain = {v[0], v[1], v[2], v[3]};
    } else if (full == "grid.T") cfg.T = c.num(val);
    else if (full == "medium.matrix") cfg.matrixValue = c.num(val);
    else if (full == "medium.channel") {
      const auto toks = split_ws(val);
      if (toks.size() != 2) c.fail("expected 'channel = NAME VALUE'");
      if (channelIndex.count(toks[0])) c.fail("channel '" + toks[0] + "' defined twice");
      channelIndex[toks[0]] = cfg.channels.size();
      cfg.channels.push_back({toks[0], {}, c.num(toks[1])});
    } else if (full == "medium.box") pendingBoxes.emplace_back(c.line, val);
    else if (full == "source.f") cfg.source = val;
    else if (full == "method.pou") {
      if (val == "bilinear") cfg.pou = PouMode::Bilinear;
      else if (val == "multiscale") cfg.pou = PouMode::Multiscale;
      else c.fail("unknown pou mode '" + val + "'");
    } else if (full == "method.pou_freeze") {
      if (val == "interval") cfg.pouFreeze = PouFreeze::FineInterval;
      else if (val == "slab") cfg.pouFreeze = PouFreeze::CoarseSlab;
      else c.fail("unknown pou_freeze '" + val + "'");
    } else if (full == "method.theta") cfg.theta = c.num(val);
    else if (full == "method.layers") {
      try {
        cfg.layers = parse_layers(val);
      } catch (const ConfigError& e) {
        c.fail(e.what());
      }
    } else if (full == "method.h1k") {
      if (val == "seminorm") cfg.fullH1 = false;
      else if (val == "full") cfg.fullH1 = true;
      else c.fail("h1k must be 'seminorm' or 'full'");
    } else if (full == "method.threads") cfg.threads = c.integer(val);
    else if (full == "output.dir") cfg.outDir = val;
    else if (full == "output.snapshots") cfg.snapshots = c.nums(val, 0);
    else if (full == "output.timings") cfg.timings = c.boolean(val);
    else c.fail("unknown key '" + key + "' in section [" + section + "]");
  }
  for (const auto& [line, val] : pendingBoxes) {
    Ctx bc{sourceName, line};
    const auto toks = split_ws(val);
    if (toks.size() != 7) bc.fail("expected 'box = NAME x_lo x_hi y_lo y_hi t_lo t_hi'");
    const auto it = channelIndex.find(toks[0]);
    if (it == channelIndex.end()) bc.fail("box refers to unknown channel '" + toks[0] + "'");
    Box b{bc.num(toks[1]), bc.num(toks[2]), bc.num(toks[3]), bc.num(toks[4]), bc.num(toks[5]), bc.num(toks[6])};
    if (!(b.x1 > b.x0 && b.y1 > b.y0 && b.t1 > b.t0)) bc.fail("box with non-positive extent");
    cfg.channels[it->second].boxes.push_back(b);
  }
  for (const auto& [line, v] : pendingBlocks) {
    if (v[1] >= cfg.coarseX || v[2] >= cfg.coarseY || v[0] >= cfg.coarseT)
      Ctx{sourceName, line}.fail("block outside the coarse grid");
    cfg.decayBlocks.push_back({v[0], v[2] * cfg.coarseX + v[1]});
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string dump_config(const ExperimentConfig& cfg) {
  std::ostringstream o;
  o << "[study]\nkind = " << cfg.study << "\npreset = " << cfg.preset << "\n";
  if (cfg.study == "manufactured") o << "refinements = " << cfg.refinements << "\n";
  for (const auto& b : cfg.decayBlocks)
    o << "block = " << b.n << " " << b.i % cfg.coarseX << " " << b.i / cfg.coarseX << "\n";
  o << "\n[grid]\ncoarse = " << cfg.coarseX << " " << cfg.coarseY << " " << cfg.coarseT << "\n";
  o << "refine = " << cfg.refineX << " " << cfg.refineY << " " << cfg.refineT << "\n";
  o << "domain = " << fmt_double(cfg.domain.x0) << " " << fmt_double(cfg.domain.x1) << " "
    << fmt_double(cfg.domain.y0) << " " << fmt_double(cfg.domain.y1) << "\n";
  o << "T = " << fmt_double(cfg.T) << "\n\n[medium]\nmatrix = " << fmt_double(cfg.matrixValue) << "\n";
  for (const auto& ch : cfg.channels) o << "channel = " << ch.name << " " << fmt_double(ch.value) << "\n";
  for (const auto& ch : cfg.channels)
    for (const auto& b : ch.boxes)
      o << "box = " << ch.name << " " << fmt_double(b.x0) << " " << fmt_double(b.x1) << " " << fmt_double(b.y0) << " "
        << fmt_double(b.y1) << " " << fmt_double(b.t0) << " " << fmt_double(b.t1) << "\n";
  o << "\n[source]\nf = " << cfg.source << "\n\n[method]\npou = "
    << (cfg.pou == PouMode::Bilinear ? "bilinear" : "multiscale") << "\n";
  o << "pou_freeze = " << (cfg.pouFreeze == PouFreeze::FineInterval ? "interval" : "slab") << "\n";
  o << "theta = " << fmt_double(cfg.theta) << "\nlayers =";
  for (const auto& l : cfg.layers) o << " " << l.x << "/" << l.t;
  o << "\nh1k = " << (cfg.fullH1 ? "full" : "seminorm") << "\nthreads = " << cfg.threads << "\n\n[output]\ndir = "
    << cfg.outDir << "\n";
  if (!cfg.snapshots.empty()) {
    o << "snapshots =";
    for (double t : cfg.snapshots) o << " " << fmt_double(t);
    o << "\n";
  }
  o << "timings = " << (cfg.timings ? "true" : "false") << "\n";
  return o.str();
}

std::vector<std::string> preset_names() { return {"exp1", "exp2", "manufactured", "oracle", "decay"}; }

namespace {

const char* kExp1Medium =
    "[medium]\n"
    "matrix = 1\n"
    "channel = S1 1000\n"
    "channel = S2 1000\n"
    "box = S1 0.375 0.6094 0.5 0.5156 0 0.5\n"
    "box = S2 0.3906 0.625 0.5 0.5156 0.5 1\n";

std::string exp2_medium() {
  std::ostringstream o;
  o << "[medium]\nmatrix = 1\nchannel = S1 1000\nchannel = S2 1000\nchannel = S3 1000\nchannel = S4 1000\n";
  auto box = [&](const char* name, double x0, double x1, double y0, double y1, double t0, double t1) {
    o << "box = " << name << " " << fmt_double(x0) << " " << fmt_double(x1) << " " << fmt_double(y0) << " "
      << fmt_double(y1) << " " << fmt_double(t0) << " " << fmt_double(t1) << "\n";
  };
  auto r = [](double v) { return std::round(v * 1e6) / 1e6; };
  for (int k = 1; k <= 25; ++k) box("S1", r(0.09 + 0.01 * k), r(0.11 + 0.01 * k), 0.30, 0.70, r(0.04 * (k - 1)), r(0.04 * k));
  for (int k = 1; k <= 20; ++k) box("S2", r(0.39 + 0.01 * k), r(0.79 + 0.01 * k), 0.15, 0.17, r(0.05 * (k - 1)), r(0.05 * k));
  for (int k = 1; k <= 25; ++k)
    box("S3", r(0.29 + 0.01 * k), r(0.44 + 0.01 * k), r(0.19 + 0.01 * k), r(0.21 + 0.01 * k), r(0.04 * (k - 1)), r(0.04 * k));
  for (int k = 1; k <= 10; ++k)
    box("S4", r(0.59 + 0.01 * k), r(0.94 + 0.01 * k), r(0.63 + 0.01 * k), r(0.65 + 0.01 * k), r(0.1 * (k - 1)), r(0.1 * k));
  return o.str();
}

}  // namespace

std::string preset_text(const std::string& name) {
  if (name == "exp1")
    return std::string("[study]\nkind = table\npreset = exp1\n\n[grid]\ncoarse = 8 8 10\nrefine = 8 8 10\n"
                       "domain = 0 1 0 1\nT = 1\n\n") +
           kExp1Medium +
           "\n[source]\nf = xyt\n\n[method]\npou = bilinear\ntheta = 0.5\nlayers = 1:5\nh1k = seminorm\n\n"
           "[output]\ndir = results\nsnapshots = 0.25 0.5 0.75 1\n";
  if (name == "exp2")
    return "[study]\nkind = table\npreset = exp2\n\n[grid]\ncoarse = 10 10 10\nrefine = 10 10 10\n"
           "domain = 0 1 0 1\nT = 1\n\n" +
           exp2_medium() +
           "\n[source]\nf = xyt\n\n[method]\npou = bilinear\ntheta = 0.5\nlayers = 1:5\nh1k = seminorm\n\n"
           "[output]\ndir = results\nsnapshots = 0.25 0.5 0.75 1\n";
  if (name == "manufactured")
    return "[study]\nkind = manufactured\npreset = manufactured\nrefinements = 3\n\n[grid]\ncoarse = 1 1 1\n"
           "refine = 8 8 8\ndomain = 0 1 0 1\nT = 1\n\n[medium]\nmatrix = 1\n\n[source]\nf = manufactured\n\n"
           "[method]\ntheta = 0.5\n\n[output]\ndir = results\n";
  if (name == "oracle")
    return std::string("[study]\nkind = oracle\npreset = oracle\n\n[grid]\ncoarse = 16 16 10\nrefine = 4 4 2\n"
                       "domain = 0 1 0 1\nT = 1\n\n") +
           kExp1Medium + "\n[source]\nf = xyt\n\n[method]\npou = bilinear\ntheta = 0.5\nlayers = 16/10\n\n"
                         "[output]\ndir = results\n";
  if (name == "decay")
    return std::string("[study]\nkind = decay\npreset = decay\nblock = 6 2 2\nblock = 6 3 3\nblock = 6 4 4\n"
                       "block = 6 5 5\nblock = 6 3 5\n\n[grid]\ncoarse = 8 8 10\nrefine = 8 8 10\n"
                       "domain = 0 1 0 1\nT = 1\n\n") +
           kExp1Medium + "\n[source]\nf = xyt\n\n[method]\npou = bilinear\nlayers = 4/4\n\n[output]\ndir = results\n";
  throw ConfigError("unknown preset '" + name + "'");
}

ExperimentConfig preset(const std::string& name) { return parse_config(preset_text(name), "preset:" + name); }

}  // namespace stnlmc
