#pragma once

// Command-line front end: trace, critical, figure, spectrum, replay.
//
// Exit codes: 0 success, 1 unexpected runtime failure, 2 invalid input,
// 3 critical proximity (trace topology undefined), 4 no eigenvalue converged.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "toboggan/toboggan.hpp"

namespace toboggan::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutDirEnv = "TOBOGGAN_OUT_DIR";

enum ExitCode : int {
  kOk = 0,
  kRuntimeFailure = 1,
  kInvalidInput = 2,
  kCriticalProximity = 3,
  kNoConvergence = 4,
};

/// Parses a shift given as a literal or as `crit(M,j)` optionally followed by
/// `+delta` or `-delta`; j counts critical shifts of kappa = 2M+1 in
/// ascending order.
inline double parse_epsilon(const std::string& text) {
  static const std::regex expr(R"(^\s*crit\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*(?:([+-])\s*([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?))?\s*$)");
  std::smatch m;
  if (std::regex_match(text, m, expr)) {
    const double base = critical_by_ordinal(std::stoi(m[1].str()), std::stoi(m[2].str())).epsilon;
    if (!m[3].matched) return base;
    const double delta = std::stod(m[4].str());
    return m[3].str() == "+" ? base + delta : base - delta;
  }
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidArgument, "cannot parse epsilon '" + text + "'");
  }
  if (used != text.size()) throw Error(ErrorKind::InvalidArgument, "cannot parse epsilon '" + text + "'");
  return value;
}

/// Seeds as a comma-separated list; each entry is `re` or `re:im`.
inline std::vector<ComplexValue> parse_seeds(const std::string& text) {
  std::vector<ComplexValue> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      const auto colon = item.find(':');
      std::size_t used = 0;
      if (colon == std::string::npos) {
        out.emplace_back(std::stod(item, &used), 0.0);
        if (used != item.size()) throw std::invalid_argument(item);
      } else {
        const std::string re = item.substr(0, colon), im = item.substr(colon + 1);
        std::size_t used_im = 0;
        out.emplace_back(std::stod(re, &used), std::stod(im, &used_im));
        if (used != re.size() || used_im != im.size()) throw std::invalid_argument(item);
      }
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "cannot parse seed '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "no seeds given");
  return out;
}

struct FigurePreset {
  int id;
  int kappa;
  std::string epsilon;      // literal or crit() expression
  std::string descriptor;   // expected classification
  std::vector<std::pair<int, int>> critical_refs;  // (M, ordinal) pairs mentioned
};

inline const std::vector<FigurePreset>& figure_presets() {
  static const std::vector<FigurePreset> presets = {
      {1, 3, "0.25", "LR", {}},
      {2, 3, "crit(1,1)-0.0005", "LR", {{1, 1}}},
      {3, 3, "crit(1,1)-0.0001", "LR", {{1, 1}}},
      {4, 3, "crit(1,1)+0.0001", "RL", {{1, 1}}},
      {5, 3, "0.4", "RL", {}},
      {6, 5, "crit(2,1)-0.0005", "LLRR", {{2, 1}}},
      {7, 5, "crit(2,1)+0.0005", "RRLL", {{2, 1}}},
      {8, 5, "crit(2,2)-0.005", "RRLL", {{2, 2}}},
      {9, 5, "crit(2,2)+0.005", "RLRL", {{2, 2}}},
  };
  return presets;
}

namespace detail {

namespace fs = std::filesystem;
using nlohmann::json;

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline fs::path default_out_dir() {
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return ".";
}

inline fs::path resolve(const std::string& out_dir, const std::string& out, const std::string& fallback) {
  const fs::path dir = out_dir.empty() ? default_out_dir() : fs::path(out_dir);
  const fs::path name = out.empty() ? fs::path(fallback) : fs::path(out);
  const fs::path path = name.is_absolute() ? name : dir / name;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  return path;
}

inline fs::path manifest_path_for(const fs::path& output) {
  fs::path p = output;
  p.replace_extension(".manifest.json");
  return p;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidArgument, "cannot open " + path.string() + " for writing");
  f << text;
}

inline json versions() {
  return {{"toboggan", kVersion}, {"manifest_schema", 1}};
}

inline void write_manifest(const fs::path& path, const std::string& command, const json& params,
                           const std::vector<fs::path>& outputs, const std::optional<std::string>& descriptor,
                           const json& extra = json::object()) {
  json m;
  m["command"] = command;
  m["params"] = params;
  json outs = json::array();
  for (const auto& o : outputs) outs.push_back(o.filename().string());  // relative to the manifest
  m["outputs"] = outs;
  m["versions"] = versions();
  if (descriptor) m["descriptor"] = *descriptor;
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  write_text(path, m.dump(2) + "\n");
}

inline std::string contour_json(const Contour& c, const std::string& descriptor) {
  json j;
  j["kappa"] = c.map().kappa();
  j["epsilon"] = c.line().epsilon();
  j["descriptor"] = descriptor;
  json s = json::array(), rz = json::array(), iz = json::array(), rx = json::array(), ix = json::array(),
       sheet = json::array();
  for (const auto& p : c.samples()) {
    s.push_back(p.s);
    rz.push_back(p.z.real());
    iz.push_back(p.z.imag());
    rx.push_back(p.x.real());
    ix.push_back(p.x.imag());
    sheet.push_back(p.sheet);
  }
  j["samples"] = {{"s", s}, {"re_z", rz}, {"im_z", iz}, {"re_x", rx}, {"im_x", ix}, {"sheet", sheet}};
  return j.dump() + "\n";
}

inline std::string contour_text(const Contour& c, const std::string& format, const std::string& descriptor) {
  if (format == "json") return contour_json(c, descriptor);
  std::ostringstream os;
  write_contour_csv(os, c);
  return os.str();
}

inline std::string try_classify(const Contour& c, std::ostream& err) {
  try {
    return classify_contour(c).to_string();
  } catch (const Error& e) {
    err << "warning: contour not classified: " << e.what() << "\n";
    return "?";
  }
}

struct TraceOptions {
  int kappa = 0;
  std::string epsilon;
  double s_range = 8.0;
  double base_step = SamplingPolicy{}.base_step;
  double max_jump = SamplingPolicy{}.max_jump;
  int max_depth = SamplingPolicy{}.max_depth;
  double guard = SamplingPolicy{}.critical_guard;
  std::string format = "csv";
  std::string out;
  std::string out_dir;
};

inline void add_sampling_options(CLI::App* cmd, TraceOptions& o) {
  cmd->add_option("--s-range", o.s_range, "Half range of s; traces s in [-R, R]")->capture_default_str();
  cmd->add_option("--base-step", o.base_step, "Base sampling step in s")->capture_default_str();
  cmd->add_option("--max-jump", o.max_jump, "Relative continuity bound")->capture_default_str();
  cmd->add_option("--max-depth", o.max_depth, "Maximum refinement depth")->capture_default_str();
  cmd->add_option("--guard", o.guard, "Critical-proximity guard in epsilon")->capture_default_str();
  cmd->add_option("--format", o.format, "Contour file format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--out-dir", o.out_dir, std::string("Output directory (default $") + kOutDirEnv + " or .)");
}

inline SamplingPolicy policy_of(const TraceOptions& o) {
  SamplingPolicy p;
  p.base_step = o.base_step;
  p.max_jump = o.max_jump;
  p.max_depth = o.max_depth;
  p.critical_guard = o.guard;
  return p;
}

inline json sampling_params(const TraceOptions& o) {
  return {{"s-range", fmt17(o.s_range)},   {"base-step", fmt17(o.base_step)}, {"max-jump", fmt17(o.max_jump)},
          {"max-depth", std::to_string(o.max_depth)}, {"guard", fmt17(o.guard)},   {"format", o.format}};
}

inline int run_trace(const TraceOptions& o, std::ostream& out, std::ostream& err) {
  if (!(o.s_range > 2.0)) throw Error(ErrorKind::InvalidArgument, "--s-range must exceed 2");
  const double eps = parse_epsilon(o.epsilon);
  const auto map = RectificationMap::from_kappa(o.kappa);
  const BaseLine line(eps);
  const auto contour = trace_contour(map, line, -o.s_range, o.s_range, policy_of(o));
  const std::string descriptor = try_classify(contour, err);
  const auto nearest = nearest_critical(o.kappa, eps);

  const auto path = resolve(o.out_dir, o.out, "contour." + o.format);
  write_text(path, contour_text(contour, o.format, descriptor));
  json params = sampling_params(o);
  params["kappa"] = std::to_string(o.kappa);
  params["epsilon"] = o.epsilon;
  params["out"] = path.filename().string();
  write_manifest(manifest_path_for(path), "trace", params, {path}, descriptor,
                 {{"epsilon_value", eps}, {"nearest_critical_distance", nearest.distance}});

  out << "kappa: " << o.kappa << "\n";
  out << "epsilon: " << fmt17(eps) << "\n";
  out << "descriptor: " << descriptor << "\n";
  out << "nearest_critical_distance: " << (std::isinf(nearest.distance) ? std::string("inf") : fmt17(nearest.distance))
      << "\n";
  out << "samples: " << contour.size() << "\n";
  out << "output: " << path.string() << "\n";
  return kOk;
}

struct CriticalOptions {
  int M = 0;
  std::string out;
  std::string out_dir;
};

inline int run_critical(const CriticalOptions& o, std::ostream& out) {
  if (o.M < 1 || o.M > 64) throw Error(ErrorKind::InvalidArgument, "--M must lie in 1..64");
  const auto rows = critical_table(o.M);
  std::ostringstream csv;
  write_critical_csv(csv, rows);
  const auto path = resolve(o.out_dir, o.out, "critical_M" + std::to_string(o.M) + ".csv");
  write_text(path, csv.str());
  write_manifest(manifest_path_for(path), "critical", {{"M", std::to_string(o.M)}, {"out", path.filename().string()}},
                 {path}, std::nullopt);
  out << csv.str();
  out << "output: " << path.string() << "\n";
  return kOk;
}

struct FigureOptions {
  int id = 0;
  TraceOptions trace;
};

inline int run_figure(const FigureOptions& o, std::ostream& out, std::ostream& err) {
  const auto& presets = figure_presets();
  auto it = std::find_if(presets.begin(), presets.end(), [&](const FigurePreset& p) { return p.id == o.id; });
  if (it == presets.end()) throw Error(ErrorKind::InvalidArgument, "figure id must lie in 1..9");
  const double eps = parse_epsilon(it->epsilon);
  const auto contour =
      trace_contour(RectificationMap::from_kappa(it->kappa), BaseLine(eps), -o.trace.s_range, o.trace.s_range,
                    policy_of(o.trace));
  const std::string descriptor = try_classify(contour, err);

  const std::string stem = "figure" + std::to_string(o.id);
  const auto path = resolve(o.trace.out_dir, o.trace.out, stem + "." + o.trace.format);
  write_text(path, contour_text(contour, o.trace.format, descriptor));

  json refs = json::array();
  for (auto [M, j] : it->critical_refs) {
    const auto c = critical_by_ordinal(M, j);
    refs.push_back({{"M", M}, {"ordinal", j}, {"m", c.m}, {"epsilon", c.epsilon}});
  }
  json params = sampling_params(o.trace);
  params["id"] = std::to_string(o.id);
  params["out"] = path.filename().string();
  write_manifest(manifest_path_for(path), "figure", params, {path}, descriptor,
                 {{"kappa", it->kappa},
                  {"epsilon_expression", it->epsilon},
                  {"epsilon", eps},
                  {"expected_descriptor", it->descriptor},
                  {"critical_values", refs}});

  out << "figure: " << o.id << "\n";
  out << "kappa: " << it->kappa << "\n";
  out << "epsilon: " << fmt17(eps) << "\n";
  out << "descriptor: " << descriptor << "\n";
  out << "expected_descriptor: " << it->descriptor << "\n";
  out << "output: " << path.string() << "\n";
  return kOk;
}

struct SpectrumOptions {
  int kappa = 1;
  std::string epsilon = "0.25";
  std::string family;
  double coupling = 0.0;
  std::string seeds;
  double radius = 0.0;  // 0 selects the family default
  double s_max = 0.0;   // 0 derives it from the radius
  std::string representation = "tobogganic";
  ShootingConfig shooting;
  std::string out;
  std::string out_dir;
};

inline int run_spectrum(const SpectrumOptions& o, std::ostream& out) {
  PotentialSpec spec;
  spec.family = o.family == "ho" ? PotentialFamily::HarmonicPlusPoles : PotentialFamily::CubicPlusPoles;
  if (!(o.coupling >= 0.0) || !std::isfinite(o.coupling)) {
    throw Error(ErrorKind::InvalidArgument, "--coupling must be finite and >= 0");
  }
  spec.coupling = o.coupling;
  const auto seeds = parse_seeds(o.seeds);
  const double eps = parse_epsilon(o.epsilon);
  const auto map = RectificationMap::from_kappa(o.kappa);
  const BaseLine line(eps);
  const double radius = o.radius > 0.0 ? o.radius : (o.family == "ho" ? 8.0 : 6.0);
  const double half = o.s_max > 0.0 ? o.s_max : half_range_for_radius(map, line, radius);
  const auto contour = trace_contour(map, line, -half, half);
  const auto rep = o.representation == "rectified" ? Representation::Rectified : Representation::Tobogganic;

  ShootingConfig cfg = o.shooting;
  cfg.s_max = half;
  const auto results = find_eigenvalues(contour, rep, spec, cfg, seeds);

  std::ostringstream csv;
  write_spectrum_csv(csv, results);
  const auto path = resolve(o.out_dir, o.out, "spectrum.csv");
  write_text(path, csv.str());

  json params = {{"kappa", std::to_string(o.kappa)},
                 {"epsilon", o.epsilon},
                 {"family", o.family},
                 {"coupling", fmt17(o.coupling)},
                 {"seeds", o.seeds},
                 {"radius", fmt17(o.radius)},
                 {"s-max", fmt17(o.s_max)},
                 {"representation", o.representation},
                 {"step", fmt17(o.shooting.step)},
                 {"match-point", fmt17(o.shooting.match_point)},
                 {"tol-energy", fmt17(o.shooting.tol_energy)},
                 {"max-iter", std::to_string(o.shooting.max_iter)},
                 {"local-tol", fmt17(o.shooting.local_tol)},
                 {"residual-tol", fmt17(o.shooting.residual_tol)},
                 {"out", path.filename().string()}};
  json resolved = {{"epsilon", eps}, {"radius", radius}, {"s_max", half}, {"bc_mode", "wkb_decay"},
                   {"units", "hbar^2/2m = 1"}};
  write_manifest(manifest_path_for(path), "spectrum", params, {path}, std::nullopt, {{"resolved", resolved}});

  std::size_t converged = 0;
  for (const auto& r : results) {
    converged += r.converged ? 1 : 0;
    out << "E = " << fmt17(r.energy.real()) << (r.energy.imag() < 0 ? " - " : " + ")
        << fmt17(std::abs(r.energy.imag())) << "i  residual " << fmt17(r.residual) << "  iterations "
        << r.iterations << (r.converged ? "" : "  NOT CONVERGED: " + r.note) << "\n";
  }
  out << "output: " << path.string() << "\n";
  return converged > 0 ? kOk : kNoConvergence;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

namespace detail {

inline int replay(const std::string& manifest_path, const std::string& out_dir, std::ostream& out,
                  std::ostream& err) {
  std::ifstream f(manifest_path);
  if (!f) throw Error(ErrorKind::InvalidArgument, "cannot read manifest " + manifest_path);
  json m;
  try {
    m = json::parse(f);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed manifest: ") + e.what());
  }
  if (!m.contains("command") || !m.contains("params")) {
    throw Error(ErrorKind::InvalidArgument, "manifest lacks command or params");
  }
  std::vector<std::string> args{m["command"].get<std::string>()};
  for (auto it = m["params"].begin(); it != m["params"].end(); ++it) {
    if (it.key() == "id") {
      args.insert(args.begin() + 1, it.value().get<std::string>());
      continue;
    }
    args.push_back("--" + it.key());
    args.push_back(it.value().get<std::string>());
  }
  const std::string dir = out_dir.empty() ? fs::path(manifest_path).parent_path().string() : out_dir;
  args.push_back("--out-dir");
  args.push_back(dir.empty() ? "." : dir);
  return run(args, out, err);
}

}  // namespace detail

/// Runs one command; `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rectified PT-symmetric quantum toboggans with two branch points", "toboggan"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  detail::TraceOptions trace;
  auto* trace_cmd = app.add_subcommand("trace", "Trace and classify a rectified contour");
  trace_cmd->add_option("--kappa", trace.kappa, "Odd winding exponent kappa = 2M+1")->required();
  trace_cmd->add_option("--epsilon", trace.epsilon, "Shift: literal or crit(M,j)+-delta")->required();
  trace_cmd->add_option("--out", trace.out, "Contour file (default contour.<format>)");
  detail::add_sampling_options(trace_cmd, trace);

  detail::CriticalOptions critical;
  auto* critical_cmd = app.add_subcommand("critical", "Critical shifts for kappa = 2M+1");
  critical_cmd->add_option("--M", critical.M, "M in 1..64")->required();
  critical_cmd->add_option("--out", critical.out, "Table file (default critical_M<M>.csv)");
  critical_cmd->add_option("--out-dir", critical.out_dir, "Output directory");

  detail::FigureOptions figure;
  auto* figure_cmd = app.add_subcommand("figure", "Regenerate one of the nine preset contours");
  figure_cmd->add_option("id", figure.id, "Figure id 1..9")->required();
  figure_cmd->add_option("--out", figure.trace.out, "Contour file (default figure<id>.<format>)");
  detail::add_sampling_options(figure_cmd, figure.trace);

  detail::SpectrumOptions spectrum;
  auto* spectrum_cmd = app.add_subcommand("spectrum", "Eigenvalues by complex shooting");
  spectrum_cmd->add_option("--kappa", spectrum.kappa, "Odd winding exponent")->capture_default_str();
  spectrum_cmd->add_option("--epsilon", spectrum.epsilon, "Shift: literal or crit(M,j)+-delta")
      ->capture_default_str();
  spectrum_cmd->add_option("--family", spectrum.family, "Potential family")
      ->required()
      ->check(CLI::IsMember({"ho", "ico"}));
  spectrum_cmd->add_option("--coupling", spectrum.coupling, "F (ho) or G (ico)")->capture_default_str();
  spectrum_cmd->add_option("--seeds", spectrum.seeds, "Comma-separated seeds, re or re:im")->required();
  spectrum_cmd->add_option("--radius", spectrum.radius, "Target |x| at the contour ends (0: 8 for ho, 6 for ico)");
  spectrum_cmd->add_option("--s-max", spectrum.s_max, "Explicit half range in s (0: from --radius)");
  spectrum_cmd->add_option("--representation", spectrum.representation, "Integration route")
      ->check(CLI::IsMember({"tobogganic", "rectified"}))
      ->capture_default_str();
  spectrum_cmd->add_option("--step", spectrum.shooting.step, "Largest integration step")->capture_default_str();
  spectrum_cmd->add_option("--match-point", spectrum.shooting.match_point, "Matching pseudocoordinate")
      ->capture_default_str();
  spectrum_cmd->add_option("--tol-energy", spectrum.shooting.tol_energy, "Secant stopping tolerance")
      ->capture_default_str();
  spectrum_cmd->add_option("--max-iter", spectrum.shooting.max_iter, "Secant iteration cap")->capture_default_str();
  spectrum_cmd->add_option("--local-tol", spectrum.shooting.local_tol, "Local RK4 tolerance (<= 0: fixed step)")
      ->capture_default_str();
  spectrum_cmd->add_option("--residual-tol", spectrum.shooting.residual_tol, "Convergence residual threshold")
      ->capture_default_str();
  spectrum_cmd->add_option("--out", spectrum.out, "Spectrum file (default spectrum.csv)");
  spectrum_cmd->add_option("--out-dir", spectrum.out_dir, "Output directory");

  std::string manifest;
  std::string replay_dir;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a command from its manifest");
  replay_cmd->add_option("manifest", manifest, "Manifest JSON written by a previous run")->required();
  replay_cmd->add_option("--out-dir", replay_dir, "Output directory (default: the manifest's directory)");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }

  try {
    if (trace_cmd->parsed()) return detail::run_trace(trace, out, err);
    if (critical_cmd->parsed()) return detail::run_critical(critical, out);
    if (figure_cmd->parsed()) return detail::run_figure(figure, out, err);
    if (spectrum_cmd->parsed()) return detail::run_spectrum(spectrum, out);
    if (replay_cmd->parsed()) return detail::replay(manifest, replay_dir, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::InvalidArgument: return kInvalidInput;
      case ErrorKind::CriticalProximity: return kCriticalProximity;
      default: return kRuntimeFailure;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kInvalidInput;
}

}  // namespace toboggan::cli
