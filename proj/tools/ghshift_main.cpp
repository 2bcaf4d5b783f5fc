// Command-line front end for the three-level slab scattering library.
// Talks to the shared library exclusively through its C interface.
//
// Subcommands: sweep, oracle1d, oracle2d, presets.
// Exit codes: 0 success, 2 configuration or usage error, 3 numeric failure.
// Angles are degrees at this boundary, radians inside the library.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ghshift.h"
#include "json.hpp"

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

struct RunConfig {
  ghs_params slab{};
  double k0 = 0.8;
  ghs_complex incident[3] = {{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  std::string incident_name = "state1";  // empty when given as an explicit vector
  double theta_min_deg = 0.0;
  double theta_max_deg = 89.9;
  std::size_t steps = 1000;
  std::string out_path;  // empty writes to stdout
  std::string format = "csv";
};

int exit_code_for(ghs_status s) {
  switch (s) {
    case GHS_OK:
      return 0;
    case GHS_ERR_INVALID_ARGUMENT:
    case GHS_ERR_GRID_INVALID:
    case GHS_ERR_PACKET_CLIPPED:
    case GHS_ERR_UNKNOWN_PRESET:
      return 2;
    default:
      return 3;
  }
}

int report_failure(ghs_status s, const std::string& context) {
  std::cerr << "error (" << ghs_status_name(s) << ") in " << context << ": " << ghs_last_error()
            << "\n";
  return exit_code_for(s);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// CSV cell: empty marks an undefined value.
std::string csv_field(double v) { return std::isnan(v) ? std::string() : fmt17(v); }

RunConfig config_from_preset(const ghs_preset_info& info) {
  RunConfig c;
  c.slab = info.params;
  c.k0 = info.k0;
  for (int i = 0; i < 3; ++i) c.incident[i] = info.incident[i];
  c.incident_name = info.name == std::string("fig4") ? "super12" : "state1";
  return c;
}

ordered_json incident_to_json(const RunConfig& c) {
  if (!c.incident_name.empty()) return c.incident_name;
  ordered_json arr = ordered_json::array();
  for (int i = 0; i < 3; ++i) arr.push_back({c.incident[i].re, c.incident[i].im});
  return arr;
}

ordered_json config_to_json(const RunConfig& c) {
  ordered_json j;
  j["slab"] = {{"omega1", c.slab.omega1},     {"omega2", c.slab.omega2},
               {"delta0", c.slab.delta0},     {"gamma", c.slab.gamma},
               {"slab_length", c.slab.slab_length}, {"k_l1", c.slab.k_l1},
               {"k_l2", c.slab.k_l2}};
  j["k0"] = c.k0;
  j["incident_state"] = incident_to_json(c);
  j["sweep"] = {{"theta_min_deg", c.theta_min_deg},
                {"theta_max_deg", c.theta_max_deg},
                {"steps", c.steps}};
  j["output"] = {{"path", c.out_path}, {"format", c.format}};
  return j;
}

bool parse_incident(const ordered_json& node, RunConfig& c, std::vector<std::string>& errors,
                    std::vector<std::string>& notices) {
  if (node.is_string()) {
    const std::string name = node.get<std::string>();
    ghs_complex v[3];
    if (ghs_named_state(name.c_str(), v) != GHS_OK) {
      errors.push_back("incident_state: unknown name \"" + name +
                       "\" (expected state1, state2, super12, or a 3-vector)");
      return false;
    }
    for (int i = 0; i < 3; ++i) c.incident[i] = v[i];
    c.incident_name = name;
    return true;
  }
  if (node.is_array() && node.size() == 3) {
    double norm2 = 0.0;
    ghs_complex v[3];
    for (int i = 0; i < 3; ++i) {
      const auto& e = node[i];
      if (e.is_number()) {
        v[i] = {e.get<double>(), 0.0};
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        v[i] = {e[0].get<double>(), e[1].get<double>()};
      } else {
        errors.push_back("incident_state: component " + std::to_string(i + 1) +
                         " must be a number or an [re, im] pair");
        return false;
      }
      norm2 += v[i].re * v[i].re + v[i].im * v[i].im;
    }
    if (!(norm2 > 0.0)) {
      errors.push_back("incident_state: amplitude vector is zero");
      return false;
    }
    if (std::abs(norm2 - 1.0) > 1e-12) {
      notices.push_back("incident_state normalized from squared magnitude " + fmt17(norm2));
      const double s = 1.0 / std::sqrt(norm2);
      for (auto& e : v) {
        e.re *= s;
        e.im *= s;
      }
    }
    for (int i = 0; i < 3; ++i) c.incident[i] = v[i];
    c.incident_name.clear();
    return true;
  }
  errors.push_back("incident_state must be a known name or a 3-element vector");
  return false;
}

void expect_keys(const ordered_json& obj, const std::vector<std::string>& allowed,
                 const std::string& where, std::vector<std::string>& errors) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed) ok = ok || k == it.key();
    if (!ok) errors.push_back(where + ": unknown key \"" + it.key() + "\"");
  }
}

bool read_number(const ordered_json& obj, const std::string& key, double& out,
                 const std::string& where, std::vector<std::string>& errors) {
  if (!obj.contains(key)) return false;
  if (!obj[key].is_number()) {
    errors.push_back(where + "." + key + " must be a number");
    return false;
  }
  out = obj[key].get<double>();
  return true;
}

// Full-config validation: every violation is collected, nothing fails fast.
// Returns true and fills `out` only when the error list stays empty.
bool validate_config(const std::string& text, RunConfig& out, std::vector<std::string>& errors,
                     std::vector<std::string>& notices) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    errors.push_back(std::string("config is not valid JSON: ") + e.what());
    return false;
  }
  if (!j.is_object()) {
    errors.push_back("config root must be a JSON object");
    return false;
  }
  RunConfig c;
  expect_keys(j, {"slab", "k0", "incident_state", "sweep", "output"}, "config", errors);

  if (j.contains("slab")) {
    const auto& s = j["slab"];
    if (!s.is_object()) {
      errors.push_back("slab must be an object");
    } else {
      expect_keys(s, {"omega1", "omega2", "delta0", "gamma", "slab_length", "k_l1", "k_l2"},
                  "slab", errors);
      read_number(s, "omega1", c.slab.omega1, "slab", errors);
      read_number(s, "omega2", c.slab.omega2, "slab", errors);
      read_number(s, "delta0", c.slab.delta0, "slab", errors);
      read_number(s, "gamma", c.slab.gamma, "slab", errors);
      read_number(s, "slab_length", c.slab.slab_length, "slab", errors);
      read_number(s, "k_l1", c.slab.k_l1, "slab", errors);
      read_number(s, "k_l2", c.slab.k_l2, "slab", errors);
    }
  }
  read_number(j, "k0", c.k0, "config", errors);
  if (j.contains("incident_state")) parse_incident(j["incident_state"], c, errors, notices);
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    if (!s.is_object()) {
      errors.push_back("sweep must be an object");
    } else {
      expect_keys(s, {"theta_min_deg", "theta_max_deg", "steps"}, "sweep", errors);
      read_number(s, "theta_min_deg", c.theta_min_deg, "sweep", errors);
      read_number(s, "theta_max_deg", c.theta_max_deg, "sweep", errors);
      if (s.contains("steps")) {
        if (!s["steps"].is_number_unsigned())
          errors.push_back("sweep.steps must be a non-negative integer");
        else
          c.steps = s["steps"].get<std::size_t>();
      }
    }
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    if (!o.is_object()) {
      errors.push_back("output must be an object");
    } else {
      expect_keys(o, {"path", "format"}, "output", errors);
      if (o.contains("path")) {
        if (!o["path"].is_string())
          errors.push_back("output.path must be a string");
        else
          c.out_path = o["path"].get<std::string>();
      }
      if (o.contains("format")) {
        if (!o["format"].is_string())
          errors.push_back("output.format must be a string");
        else
          c.format = o["format"].get<std::string>();
      }
    }
  }

  if (!(c.k0 > 0.0)) errors.push_back("k0 must be positive");
  if (c.slab.gamma < 0.0) errors.push_back("slab.gamma must be non-negative");
  if (c.slab.slab_length < 0.0) errors.push_back("slab.slab_length must be non-negative");
  if (c.theta_min_deg < 0.0 || c.theta_max_deg > 89.9)
    errors.push_back("sweep angles must lie within [0, 89.9] degrees");
  if (!(c.theta_min_deg < c.theta_max_deg))
    errors.push_back("sweep.theta_min_deg must be below sweep.theta_max_deg");
  if (c.steps < 2) errors.push_back("sweep.steps must be at least 2");
  if (c.format != "csv" && c.format != "jsonl")
    errors.push_back("output.format must be \"csv\" or \"jsonl\"");

  if (!errors.empty()) return false;
  out = c;
  return true;
}

int print_errors(const std::vector<std::string>& errors) {
  std::cerr << "configuration rejected:\n";
  for (const auto& e : errors) std::cerr << "  - " << e << "\n";
  return 2;
}

void print_notices(const std::vector<std::string>& notices) {
  for (const auto& n : notices) std::cerr << "note: " << n << "\n";
}

// Common parameter-source options for all compute subcommands.
struct SourceOpts {
  std::string preset;
  std::string config_path;
  std::string state;
};

void add_source_opts(CLI::App* cmd, SourceOpts& src) {
  auto* p = cmd->add_option("--preset", src.preset, "named parameter preset (see `presets`)");
  auto* c = cmd->add_option("--config", src.config_path, "JSON configuration file");
  p->excludes(c);
  c->excludes(p);
  cmd->add_option("--state", src.state, "incident internal state: state1, state2, super12");
}

// Builds the RunConfig from --preset or --config; returns 0 on success, else
// the process exit code.
int resolve_source(const SourceOpts& src, RunConfig& cfg) {
  if (src.preset.empty() && src.config_path.empty()) {
    std::cerr << "configuration rejected:\n  - one of --preset or --config is required\n";
    return 2;
  }
  if (!src.preset.empty()) {
    ghs_preset_info info;
    const ghs_status s = ghs_preset_find(src.preset.c_str(), &info);
    if (s != GHS_OK) return report_failure(s, "preset lookup");
    cfg = config_from_preset(info);
  } else {
    std::ifstream in(src.config_path);
    if (!in) {
      std::cerr << "error: cannot read config file: " << src.config_path << "\n";
      return 2;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    std::vector<std::string> errors, notices;
    if (!validate_config(ss.str(), cfg, errors, notices)) return print_errors(errors);
    print_notices(notices);
  }
  if (!src.state.empty()) {
    ghs_complex v[3];
    const ghs_status s = ghs_named_state(src.state.c_str(), v);
    if (s != GHS_OK) return report_failure(s, "incident state lookup");
    for (int i = 0; i < 3; ++i) cfg.incident[i] = v[i];
    cfg.incident_name = src.state;
  }
  return 0;
}

// Output sink: file when a path is set, stdout otherwise.
struct Sink {
  std::ofstream file;
  std::ostream* os = nullptr;
  int open(const std::string& path) {
    if (path.empty() || path == "-") {
      os = &std::cout;
      return 0;
    }
    file.open(path, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot open output file for writing: " << path << "\n";
      return 2;
    }
    os = &file;
    return 0;
  }
};

const char* kCsvHeader =
    "theta_deg,prob_R1,prob_R2,prob_R3,prob_T1,prob_T2,prob_T3,"
    "D_r1,D_r2,D_t1,D_t2,D_t1_excess,D_t2_excess,flux_total";

void write_sweep_csv(std::ostream& os, const std::vector<ghs_sweep_row>& rows, double L) {
  os << kCsvHeader << "\n";
  for (const auto& r : rows) {
    const double deg = r.theta / kDegToRad;
    const double tl = std::tan(r.theta) * L;
    os << fmt17(deg);
    for (int c = 0; c < 3; ++c) os << ',' << csv_field(r.prob_R[c]);
    for (int c = 0; c < 3; ++c) os << ',' << csv_field(r.prob_T[c]);
    os << ',' << csv_field(r.D_r[0]) << ',' << csv_field(r.D_r[1]);
    os << ',' << csv_field(r.D_t[0]) << ',' << csv_field(r.D_t[1]);
    os << ',' << csv_field(r.D_t[0] - tl) << ',' << csv_field(r.D_t[1] - tl);
    os << ',' << csv_field(r.total_flux) << "\n";
  }
}

void write_sweep_jsonl(std::ostream& os, const std::vector<ghs_sweep_row>& rows, double L) {
  for (const auto& r : rows) {
    const double tl = std::tan(r.theta) * L;
    ordered_json j;
    j["theta_deg"] = r.theta / kDegToRad;
    for (int c = 0; c < 3; ++c) j["prob_R" + std::to_string(c + 1)] = r.prob_R[c];
    for (int c = 0; c < 3; ++c) j["prob_T" + std::to_string(c + 1)] = r.prob_T[c];
    for (int c = 0; c < 3; ++c) j["D_r" + std::to_string(c + 1)] = r.D_r[c];
    for (int c = 0; c < 3; ++c) j["D_t" + std::to_string(c + 1)] = r.D_t[c];
    for (int c = 0; c < 3; ++c) j["D_t" + std::to_string(c + 1) + "_excess"] = r.D_t[c] - tl;
    j["flux_total"] = r.total_flux;
    os << j.dump() << "\n";
  }
}

int cmd_sweep(const SourceOpts& src, const RunConfig& overrides, bool has_steps, bool has_min,
              bool has_max, bool has_out, bool has_format) {
  RunConfig cfg;
  if (const int rc = resolve_source(src, cfg)) return rc;
  if (has_steps) cfg.steps = overrides.steps;
  if (has_min) cfg.theta_min_deg = overrides.theta_min_deg;
  if (has_max) cfg.theta_max_deg = overrides.theta_max_deg;
  if (has_out) cfg.out_path = overrides.out_path;
  if (has_format) cfg.format = overrides.format;

  std::vector<std::string> errors;
  if (cfg.theta_min_deg < 0.0 || cfg.theta_max_deg > 89.9)
    errors.push_back("sweep angles must lie within [0, 89.9] degrees");
  if (!(cfg.theta_min_deg < cfg.theta_max_deg))
    errors.push_back("--theta-min must be below --theta-max");
  if (cfg.steps < 2) errors.push_back("--steps must be at least 2");
  if (cfg.format != "csv" && cfg.format != "jsonl")
    errors.push_back("--format must be csv or jsonl");
  if (!errors.empty()) return print_errors(errors);

  std::vector<double> thetas(cfg.steps);
  for (std::size_t i = 0; i < cfg.steps; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(cfg.steps - 1);
    thetas[i] = (cfg.theta_min_deg + f * (cfg.theta_max_deg - cfg.theta_min_deg)) * kDegToRad;
  }

  ghs_sweep* sweep = nullptr;
  const ghs_status s =
      ghs_sweep_run(&cfg.slab, cfg.k0, thetas.data(), thetas.size(), cfg.incident, 0, &sweep);
  if (s != GHS_OK) return report_failure(s, "sweep");
  std::unique_ptr<ghs_sweep, void (*)(ghs_sweep*)> guard(sweep, ghs_sweep_free);

  std::vector<ghs_sweep_row> rows(ghs_sweep_size(sweep));
  for (std::size_t i = 0; i < rows.size(); ++i) ghs_sweep_get(sweep, i, &rows[i]);

  Sink sink;
  if (const int rc = sink.open(cfg.out_path)) return rc;
  if (cfg.format == "csv")
    write_sweep_csv(*sink.os, rows, cfg.slab.slab_length);
  else
    write_sweep_jsonl(*sink.os, rows, cfg.slab.slab_length);
  sink.os->flush();
  if (sink.os->fail()) {
    std::cerr << "error: write failed: " << (cfg.out_path.empty() ? "<stdout>" : cfg.out_path)
              << "\n";
    return 3;
  }
  return 0;
}

struct OracleOpts {
  double theta_deg = 0.0;
  double packet_width = 30.0;
  std::size_t grid_nx = 0, grid_ny = 0;
  double dt = 0.0;
  std::size_t steps = 0;
  std::string out_path;
  std::string snapshot_path;
  std::size_t snapshot_stride = 50;
  double forced_absorber = 0.0;
};

ordered_json grid_to_json(const ghs_grid& g) {
  return ordered_json{{"nx", g.nx},       {"ny", g.ny},           {"x_min", g.x_min},
                      {"y_min", g.y_min}, {"dx", g.dx},           {"dy", g.dy},
                      {"dt", g.dt},       {"n_steps", g.n_steps}, {"absorber_width", g.absorber_width}};
}

ordered_json triple(const double v[3]) { return ordered_json{v[0], v[1], v[2]}; }

// Replicates the library's override arithmetic so the echoed grid matches
// the one the run will use.
void apply_grid_overrides(ghs_grid& g, const OracleOpts& opt) {
  const double span_x = static_cast<double>(g.nx) * g.dx;
  const double span_y = static_cast<double>(g.ny) * g.dy;
  const double t_final = static_cast<double>(g.n_steps) * g.dt;
  if (opt.grid_nx) {
    g.nx = opt.grid_nx;
    g.dx = span_x / static_cast<double>(g.nx);
  }
  if (opt.grid_ny && g.ny > 1) {
    g.ny = opt.grid_ny;
    g.dy = span_y / static_cast<double>(g.ny);
  }
  if (opt.dt > 0.0) {
    g.dt = opt.dt;
    g.n_steps = static_cast<std::size_t>(std::ceil(t_final / g.dt));
  }
  if (opt.steps) g.n_steps = opt.steps;
  if (opt.forced_absorber > 0.0) g.absorber_width = opt.forced_absorber;
}

int cmd_oracle(bool two_d, const SourceOpts& src, const OracleOpts& opt) {
  RunConfig cfg;
  if (const int rc = resolve_source(src, cfg)) return rc;
  if (!(opt.theta_deg >= 0.0 && opt.theta_deg <= 89.9)) {
    std::cerr << "configuration rejected:\n  - --theta must lie within [0, 89.9] degrees\n";
    return 2;
  }

  ghs_packet packet;
  packet.width = opt.packet_width;
  packet.center_x = 0.0;  // automatic placement
  packet.center_y = 0.0;
  packet.k0 = cfg.k0;
  packet.theta = opt.theta_deg * kDegToRad;
  for (int i = 0; i < 3; ++i) packet.internal[i] = cfg.incident[i];

  ghs_oracle_overrides ov{};
  ov.dt = opt.dt;
  ov.nx = opt.grid_nx;
  ov.ny = opt.grid_ny;
  ov.n_steps = opt.steps;
  ov.absorber_width = opt.forced_absorber;
  ov.force_absorber_width = opt.forced_absorber > 0.0 ? 1 : 0;
  ov.snapshot_path = opt.snapshot_path.empty() ? nullptr : opt.snapshot_path.c_str();
  ov.snapshot_stride = opt.snapshot_stride;

  // Preview the grid the run will use so metadata and warnings can be echoed.
  ghs_grid grid;
  ghs_status s = two_d ? ghs_auto_grid_2d(&cfg.slab, &packet, &grid)
                       : ghs_auto_grid_1d(&cfg.slab, &packet, &grid);
  if (s != GHS_OK) return report_failure(s, "grid sizing");
  apply_grid_overrides(grid, opt);

  std::vector<char> warn_buf(8192);
  s = ghs_validate_grid(&cfg.slab, &packet, &grid, ov.force_absorber_width, warn_buf.data(),
                        warn_buf.size());
  if (s != GHS_OK) return report_failure(s, "grid validation");
  std::vector<std::string> warnings;
  {
    std::stringstream ws(warn_buf.data());
    std::string line;
    while (std::getline(ws, line))
      if (!line.empty()) warnings.push_back(line);
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  ghs_oracle_report* report = nullptr;
  const double ky_fixed = packet.k0 * std::sin(packet.theta);
  s = two_d ? ghs_oracle2d_run(&cfg.slab, &packet, &grid, &ov, &report)
            : ghs_oracle1d_run(&cfg.slab, &packet, ky_fixed, &ov, &report);
  if (s != GHS_OK) return report_failure(s, two_d ? "2D propagation" : "1D propagation");
  std::unique_ptr<ghs_oracle_report, void (*)(ghs_oracle_report*)> guard(report,
                                                                         ghs_oracle_report_free);

  ghs_oracle_summary sum;
  ghs_report_summary(report, &sum);

  ordered_json j;
  j["command"] = two_d ? "oracle2d" : "oracle1d";
  j["version"] = ghs_version();
  j["params"] = {{"omega1", cfg.slab.omega1},     {"omega2", cfg.slab.omega2},
                 {"delta0", cfg.slab.delta0},     {"gamma", cfg.slab.gamma},
                 {"slab_length", cfg.slab.slab_length}, {"k_l1", cfg.slab.k_l1},
                 {"k_l2", cfg.slab.k_l2}};
  j["k0"] = cfg.k0;
  j["theta_deg"] = opt.theta_deg;
  {
    ordered_json pk;
    pk["width"] = packet.width;
    pk["center"] = {packet.center_x, packet.center_y};
    ordered_json arr = ordered_json::array();
    for (int i = 0; i < 3; ++i) arr.push_back({packet.internal[i].re, packet.internal[i].im});
    pk["internal"] = arr;
    j["packet"] = pk;
  }
  if (!two_d) j["ky_fixed"] = ky_fixed;
  j["grid"] = grid_to_json(sum.grid);
  j["warnings"] = warnings;

  ordered_json rep;
  rep["prob_R"] = triple(sum.prob_R);
  rep["prob_T"] = triple(sum.prob_T);
  rep["interior"] = triple(sum.interior);
  if (two_d) {
    rep["D_r"] = triple(sum.D_r);
    rep["D_t"] = triple(sum.D_t);
    rep["D_t_excess"] = triple(sum.D_t_excess);
    ordered_json regions;
    const char* region_names[3] = {"reflected", "interior", "transmitted"};
    for (int rgn = 0; rgn < 3; ++rgn) {
      ordered_json per_state = ordered_json::array();
      for (int c = 0; c < 3; ++c) {
        ghs_region_info info;
        ghs_report_region(report, c, static_cast<ghs_region_id>(rgn), &info);
        ordered_json e;
        e["norm"] = info.norm;
        e["centroid"] = {info.centroid_x, info.centroid_y};
        e["defined"] = info.defined != 0;
        e["split"] = info.split != 0;
        std::size_t n_lobes = 0;
        ghs_report_lobe_count(report, c, static_cast<ghs_region_id>(rgn), &n_lobes);
        ordered_json lobes = ordered_json::array();
        for (std::size_t li = 0; li < n_lobes; ++li) {
          ghs_lobe lobe;
          ghs_report_lobe(report, c, static_cast<ghs_region_id>(rgn), li, &lobe);
          lobes.push_back({{"norm", lobe.norm}, {"y", lobe.y}, {"shift", lobe.shift}});
        }
        e["lobes"] = lobes;
        per_state.push_back(e);
      }
      regions[region_names[rgn]] = per_state;
    }
    rep["regions"] = regions;
  }
  rep["absorbed"] = triple(sum.absorbed);
  rep["decayed"] = sum.decayed;
  rep["t_final"] = sum.t_final;
  j["report"] = rep;

  Sink sink;
  if (const int rc = sink.open(opt.out_path)) return rc;
  *sink.os << j.dump() << "\n";
  sink.os->flush();
  if (sink.os->fail()) {
    std::cerr << "error: write failed: " << (opt.out_path.empty() ? "<stdout>" : opt.out_path)
              << "\n";
    return 3;
  }
  return 0;
}

int cmd_presets(const std::string& json_name) {
  if (!json_name.empty()) {
    ghs_preset_info info;
    const ghs_status s = ghs_preset_find(json_name.c_str(), &info);
    if (s != GHS_OK) return report_failure(s, "preset lookup");
    std::cout << config_to_json(config_from_preset(info)).dump(2) << "\n";
    return 0;
  }
  const std::size_t n = ghs_preset_count();
  for (std::size_t i = 0; i < n; ++i) {
    ghs_preset_info info;
    ghs_preset_get(i, &info);
    std::printf("%-8s L=%-6g gamma=%-5g omega1=%-5g omega2=%-5g delta0=%-6g k0=%-5g kL=%g  %s\n",
                info.name, info.params.slab_length, info.params.gamma, info.params.omega1,
                info.params.omega2, info.params.delta0, info.k0, info.params.k_l1, info.summary);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-level matter-wave slab scattering: sweeps, lateral shifts, wavepacket checks"};
  app.require_subcommand(1);

  // sweep
  SourceOpts sweep_src;
  RunConfig sweep_over;
  auto* sweep_cmd = app.add_subcommand("sweep", "angular sweep of probabilities and lateral shifts");
  add_source_opts(sweep_cmd, sweep_src);
  auto* o_steps = sweep_cmd->add_option("--steps", sweep_over.steps, "number of sweep angles");
  auto* o_min = sweep_cmd->add_option("--theta-min", sweep_over.theta_min_deg, "first angle, degrees");
  auto* o_max = sweep_cmd->add_option("--theta-max", sweep_over.theta_max_deg, "last angle, degrees");
  auto* o_out = sweep_cmd->add_option("--out", sweep_over.out_path, "output path (default stdout)");
  auto* o_fmt = sweep_cmd->add_option("--format", sweep_over.format, "csv or jsonl");

  // oracle1d / oracle2d
  SourceOpts o1_src, o2_src;
  OracleOpts o1_opt, o2_opt;
  auto* o1_cmd = app.add_subcommand("oracle1d", "split-step wavepacket check, angle-reduced 1D frame");
  auto* o2_cmd = app.add_subcommand("oracle2d", "split-step wavepacket check, full 2D lab frame");
  auto add_oracle_opts = [](CLI::App* cmd, SourceOpts& src, OracleOpts& opt, bool two_d) {
    add_source_opts(cmd, src);
    cmd->add_option("--theta", opt.theta_deg, "incidence angle, degrees")->required();
    cmd->add_option("--packet-width", opt.packet_width, "initial packet width W");
    cmd->add_option("--grid-nx", opt.grid_nx, "override x point count (power of two)");
    if (two_d) cmd->add_option("--grid-ny", opt.grid_ny, "override y point count (power of two)");
    cmd->add_option("--dt", opt.dt, "override time step");
    cmd->add_option("--steps", opt.steps, "override step count");
    cmd->add_option("--out", opt.out_path, "report path (default stdout)");
    if (two_d) {
      cmd->add_option("--snapshot", opt.snapshot_path, "binary snapshot dump path");
      cmd->add_option("--snapshot-stride", opt.snapshot_stride, "steps between snapshot frames");
    }
    cmd->add_option("--force-absorber-width", opt.forced_absorber,
                    "set the absorber width, accepting sub-minimal values");
  };
  add_oracle_opts(o1_cmd, o1_src, o1_opt, false);
  add_oracle_opts(o2_cmd, o2_src, o2_opt, true);

  // presets
  std::string presets_json;
  auto* presets_cmd = app.add_subcommand("presets", "list bundled parameter presets");
  presets_cmd->add_option("--json", presets_json, "emit the named preset as a config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (sweep_cmd->parsed())
      return cmd_sweep(sweep_src, sweep_over, o_steps->count() > 0, o_min->count() > 0,
                       o_max->count() > 0, o_out->count() > 0, o_fmt->count() > 0);
    if (o1_cmd->parsed()) return cmd_oracle(false, o1_src, o1_opt);
    if (o2_cmd->parsed()) return cmd_oracle(true, o2_src, o2_opt);
    if (presets_cmd->parsed()) return cmd_presets(presets_json);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
