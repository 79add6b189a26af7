#pragma once

// Command-line front end. Kept in a header so tests can drive run() in-process.

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "equivoq/equivoq.hpp"
#include "json.hpp"

namespace equivoq::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kInfeasible = 3,
  kGapViolation = 4,
  kResource = 5,
};

inline constexpr double kGapAlarm = -1e-9;

inline std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, r.ptr);
}

inline SecrecyConfig load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open instance file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError("instance '" + path + "': " + e.what());
  }
  return doc.get<SecrecyConfig>();
}

inline SweepOutputs parse_outputs(const std::string& which) {
  if (which == "all") return {};
  SweepOutputs o{false, false, false};
  std::stringstream ss(which);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "source") o.source = true;
    else if (item == "reconstruction") o.reconstruction = true;
    else if (item == "joint") o.joint = true;
    else throw ArgumentError("unknown output '" + item + "'");
  }
  if (!o.source && !o.reconstruction && !o.joint) throw ArgumentError("no outputs selected");
  return o;
}

inline std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto* end = item.data() + item.size();
    const auto r = std::from_chars(item.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end)
      throw ArgumentError("sweep value '" + item + "' is not a number");
    values.push_back(v);
  }
  return values;
}

struct Settings {
  std::string instance;
  std::string out;
  std::size_t points = 11;
  std::string which = "all";
  std::size_t n = 1;
  std::string mode = "past-source";
  std::string variant = "pi1";
  std::size_t restarts = 64;
  std::size_t aux_card = 0;
  double grid_step = 0.1;
  std::uint64_t seed = 0;
  double tol = 1e-9;
  bool dump_codes = false;
  bool no_filter = false;
  std::string axis;
  std::string values;

  SearchOptions search() const {
    SearchOptions o;
    o.restarts = restarts;
    o.aux_cardinality = aux_card;
    o.grid_seed_step = grid_step;
    o.seed = seed;
    o.tol = tol;
    return o;
  }
};

// Writes `text` to --out, or to `out` when no path was given.
inline void emit(const Settings& s, const std::string& text, std::ostream& out) {
  if (s.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(s.out, std::ios::binary);
  if (!f) throw ArgumentError("cannot write '" + s.out + "'");
  f << text;
}

inline nlohmann::json metadata(const std::string& command, const Settings& s) {
  nlohmann::json m{{"command", command}, {"instance", s.instance}, {"seed", s.seed}, {"tol", s.tol}};
  return m;
}

inline int cmd_rd_curve(const Settings& s, std::ostream& out, std::ostream& err) {
  const SecrecyConfig cfg = load_instance(s.instance);
  const auto curve = rd_curve(cfg.source, cfg.distortion, s.points, s.tol);
  std::string csv = "distortion,rate,slope\n";
  for (const auto& p : curve)
    csv += format_number(p.distortion) + "," + format_number(p.rate) + "," +
           format_number(p.slope) + "\n";
  emit(s, csv, out);
  auto meta = metadata("rd-curve", s);
  meta["points"] = s.points;
  err << meta.dump() << "\n";
  return kOk;
}

inline int cmd_equivocation(const Settings& s, std::ostream& out, std::ostream&) {
  const SecrecyConfig cfg = load_instance(s.instance);
  const SweepOutputs which = parse_outputs(s.which);
  const SearchOptions opts = s.search();
  nlohmann::json doc;
  doc["metadata"] = metadata("equivocation", s);
  doc["metadata"]["which"] = s.which;
  doc["metadata"]["search"] = opts;
  doc["instance"] = cfg;
  nlohmann::json results = nlohmann::json::object();
  if (which.source) results["source"] = source_equivocation(cfg);
  if (which.reconstruction) results["reconstruction"] = reconstruction_equivocation(cfg, opts);
  if (which.joint) results["joint"] = joint_equivocation(cfg, opts);
  doc["results"] = results;
  emit(s, doc.dump(2) + "\n", out);
  return kOk;
}

inline int cmd_sweep(const Settings& s, std::ostream& out, std::ostream& err) {
  const SecrecyConfig cfg = load_instance(s.instance);
  const SweepAxis axis = parse_sweep_axis(s.axis);
  const auto values = parse_values(s.values);
  const SweepOutputs which = parse_outputs(s.which);
  const SearchOptions opts = s.search();
  const auto res = equivocation_sweep(cfg, axis, values, which, opts);

  std::string csv = "axis_value";
  if (which.source) csv += ",source_eq";
  if (which.reconstruction) csv += ",reconstruction_eq";
  if (which.joint) csv += ",joint_eq";
  csv += "\n";
  for (const auto& row : res.rows) {
    csv += format_number(row.axis_value);
    if (row.source) csv += "," + format_number(*row.source);
    if (row.reconstruction) csv += "," + format_number(*row.reconstruction);
    if (row.joint) csv += "," + format_number(*row.joint);
    csv += "\n";
  }
  emit(s, csv, out);
  auto meta = metadata("sweep", s);
  meta["axis"] = s.axis;
  meta["values"] = values;
  meta["which"] = s.which;
  meta["search"] = opts;
  meta["warnings"] = res.warnings;
  err << meta.dump() << "\n";
  for (const auto& w : res.warnings) err << "warning: " << w << "\n";
  return kOk;
}

inline int cmd_oracle_check(const Settings& s, std::ostream& out, std::ostream& err) {
  const SecrecyConfig cfg = load_instance(s.instance);
  const auto report = operational_value(s.n, cfg, parse_mode(s.mode), parse_variant(s.variant),
                                        !s.no_filter, s.search());
  nlohmann::json doc;
  doc["metadata"] = metadata("oracle-check", s);
  doc["metadata"]["distortion_filter"] = !s.no_filter;
  doc["metadata"]["search"] = s.search();
  doc["report"] = report;
  emit(s, doc.dump(2) + "\n", out);
  if (s.dump_codes) {
    const std::string codes = nlohmann::json(report.best_code).dump(2) + "\n";
    if (s.out.empty()) {
      err << codes;
    } else {
      std::ofstream f(s.out + ".codes.json", std::ios::binary);
      if (!f) throw ArgumentError("cannot write '" + s.out + ".codes.json'");
      f << codes;
    }
  }
  if (report.gap < kGapAlarm) {
    err << "error: operational value exceeds the characterization by " << -report.gap << "\n";
    return kGapViolation;
  }
  return kOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal equivocation of cipher systems under distortion constraints", "equivoq"};
  app.require_subcommand(1);
  Settings s;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--instance", s.instance, "Instance JSON file")->required();
    sub->add_option("--out", s.out, "Output path (stdout if absent)");
    sub->add_option("--seed", s.seed, "Random seed")->capture_default_str();
    sub->add_option("--tol", s.tol, "Convergence tolerance")->capture_default_str();
  };
  auto search = [&](CLI::App* sub) {
    sub->add_option("--restarts", s.restarts, "Ascent restarts")->capture_default_str();
    sub->add_option("--aux-card", s.aux_card, "Auxiliary cardinality (0 = |X||Y|+2)")
        ->capture_default_str();
    sub->add_option("--grid-step", s.grid_step, "Coarse grid step for the seed (0 disables)")
        ->capture_default_str();
  };

  auto* rd = app.add_subcommand("rd-curve", "Sample R(D) as CSV");
  common(rd);
  rd->add_option("--points", s.points, "Number of points")->capture_default_str();

  auto* eq = app.add_subcommand("equivocation", "Optimal equivocation values as JSON");
  common(eq);
  search(eq);
  eq->add_option("--which", s.which, "source|reconstruction|joint|all")->capture_default_str();

  auto* sw = app.add_subcommand("sweep", "Equivocation along one parameter as CSV");
  common(sw);
  search(sw);
  sw->add_option("--axis", s.axis, "key_rate|distortion_limit|rate")->required();
  sw->add_option("--values", s.values, "Comma-separated axis values")->required();
  sw->add_option("--which", s.which, "Comma-separated outputs or all")->capture_default_str();

  auto* oc = app.add_subcommand("oracle-check", "Brute-force operational value vs characterization");
  common(oc);
  search(oc);
  oc->add_option("--n", s.n, "Blocklength")->capture_default_str();
  oc->add_option("--mode", s.mode, "past-source|past-reconstruction|past-both")
      ->capture_default_str();
  oc->add_option("--variant", s.variant, "pi1|pi2|pi3")->capture_default_str();
  oc->add_flag("--dump-codes", s.dump_codes, "Write the best code tables as JSON");
  oc->add_flag("--no-distortion-filter", s.no_filter, "Ignore the distortion constraint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*rd) return cmd_rd_curve(s, out, err);
    if (*eq) return cmd_equivocation(s, out, err);
    if (*sw) return cmd_sweep(s, out, err);
    return cmd_oracle_check(s, out, err);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const ResourceError& e) {
    err << "resource limit: " << e.what() << "\n";
    return kResource;
  }
}

}  // namespace equivoq::cli
