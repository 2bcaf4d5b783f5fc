#include "ghshift.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "ghshift/model.hpp"
#include "ghshift/oracle.hpp"
#include "ghshift/presets.hpp"
#include "ghshift/scattering.hpp"
#include "ghshift/shifts.hpp"
#include "ghshift/types.hpp"

using namespace ghshift;

namespace {

thread_local std::string t_last_error;

ghs_status map_errc(Errc e) {
  switch (e) {
    case Errc::ok: return GHS_OK;
    case Errc::invalid_argument: return GHS_ERR_INVALID_ARGUMENT;
    case Errc::degenerate_coupling: return GHS_ERR_DEGENERATE_COUPLING;
    case Errc::singular_system: return GHS_ERR_SINGULAR_SYSTEM;
    case Errc::non_convergence: return GHS_ERR_NON_CONVERGENCE;
    case Errc::undefined_phase: return GHS_ERR_UNDEFINED_PHASE;
    case Errc::overflow_risk: return GHS_ERR_OVERFLOW_RISK;
    case Errc::grid_invalid: return GHS_ERR_GRID_INVALID;
    case Errc::packet_clipped: return GHS_ERR_PACKET_CLIPPED;
    case Errc::absorber_leak: return GHS_ERR_ABSORBER_LEAK;
    case Errc::empty_region: return GHS_ERR_EMPTY_REGION;
    case Errc::io_error: return GHS_ERR_IO;
    case Errc::unknown_preset: return GHS_ERR_UNKNOWN_PRESET;
  }
  return GHS_ERR_INTERNAL;
}

template <class F>
ghs_status guarded(F&& f) {
  try {
    f();
    t_last_error.clear();
    return GHS_OK;
  } catch (const Error& e) {
    t_last_error = e.what();
    return map_errc(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return GHS_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown failure";
    return GHS_ERR_INTERNAL;
  }
}

ghs_status fail_arg(const char* msg) {
  t_last_error = msg;
  return GHS_ERR_INVALID_ARGUMENT;
}

SlabParams to_params(const ghs_params& p) {
  return {p.omega1, p.omega2, p.delta0, p.gamma, p.slab_length, p.k_l1, p.k_l2};
}

cplx to_cplx(const ghs_complex& c) { return {c.re, c.im}; }
ghs_complex from_cplx(const cplx& c) { return {c.real(), c.imag()}; }

Vec3 to_vec3(const ghs_complex in[3]) { return {to_cplx(in[0]), to_cplx(in[1]), to_cplx(in[2])}; }

IncidentWave to_wave(const ghs_incident& w) { return {w.k0, w.theta, to_vec3(w.in)}; }

void fill_result(const ScatteringResult& r, ghs_scatter_result& out) {
  for (int i = 0; i < 3; ++i) {
    out.R[i] = from_cplx(r.R[i]);
    out.T[i] = from_cplx(r.T[i]);
    out.interior_a[i] = from_cplx(r.interior_a[i]);
    out.interior_b[i] = from_cplx(r.interior_b[i]);
    out.k[i] = from_cplx(r.k[i]);
    out.p[i] = from_cplx(r.p[i]);
    out.prob_R[i] = r.prob_R[i];
    out.prob_T[i] = r.prob_T[i];
  }
  out.total_flux = r.total_flux;
}

PacketSpec to_packet(const ghs_packet& k) {
  PacketSpec s;
  s.width = k.width;
  s.center = {k.center_x, k.center_y};
  s.k0 = k.k0;
  s.theta = k.theta;
  s.internal = to_vec3(k.internal);
  return s;
}

GridSpec to_grid(const ghs_grid& g) {
  GridSpec s;
  s.nx = g.nx;
  s.ny = g.ny;
  s.x_min = g.x_min;
  s.y_min = g.y_min;
  s.dx = g.dx;
  s.dy = g.dy;
  s.dt = g.dt;
  s.n_steps = g.n_steps;
  s.absorber_width = g.absorber_width;
  return s;
}

ghs_grid from_grid(const GridSpec& s) {
  return {s.nx, s.ny, s.x_min, s.y_min, s.dx, s.dy, s.dt, s.n_steps, s.absorber_width};
}

OracleOverrides to_overrides(const ghs_oracle_overrides* ov) {
  OracleOverrides o;
  if (!ov) return o;
  o.dt = ov->dt;
  o.nx = ov->nx;
  o.ny = ov->ny;
  o.n_steps = ov->n_steps;
  o.absorber_width = ov->absorber_width;
  o.force_absorber_width = ov->force_absorber_width != 0;
  if (ov->snapshot_path) o.snapshot_path = ov->snapshot_path;
  if (ov->snapshot_stride) o.snapshot_stride = ov->snapshot_stride;
  return o;
}

FdOptions to_fd(double fd_step, int five_point) {
  FdOptions fd;
  if (fd_step > 0.0) fd.step = fd_step;
  fd.five_point = five_point != 0;
  return fd;
}

}  // namespace

struct ghs_sweep {
  std::vector<ShiftRow> rows;
};

struct ghs_oracle_report {
  bool two_d = false;
  Oracle1dReport r1;
  CentroidReport r2;
};

namespace {

const RegionStat* pick_region(const ghs_oracle_report* r, int channel, ghs_region_id region) {
  if (!r || !r->two_d || channel < 0 || channel > 2) return nullptr;
  switch (region) {
    case GHS_REGION_REFLECTED: return &r->r2.reflected[channel];
    case GHS_REGION_INTERIOR: return &r->r2.interior[channel];
    case GHS_REGION_TRANSMITTED: return &r->r2.transmitted[channel];
  }
  return nullptr;
}

void fill_preset(const Preset& p, ghs_preset_info& out) {
  out.name = p.name.c_str();
  out.summary = p.summary.c_str();
  out.params = {p.params.omega1, p.params.omega2, p.params.delta0, p.params.gamma,
                p.params.slab_length, p.params.k_l1, p.params.k_l2};
  out.k0 = p.k0;
  for (int i = 0; i < 3; ++i) out.incident[i] = from_cplx(p.incident[i]);
}

}  // namespace

extern "C" {

const char* ghs_version(void) { return "1.0.0"; }

const char* ghs_last_error(void) { return t_last_error.c_str(); }

const char* ghs_status_name(ghs_status s) {
  switch (s) {
    case GHS_OK: return "ok";
    case GHS_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case GHS_ERR_DEGENERATE_COUPLING: return "degenerate_coupling";
    case GHS_ERR_SINGULAR_SYSTEM: return "singular_system";
    case GHS_ERR_NON_CONVERGENCE: return "non_convergence";
    case GHS_ERR_UNDEFINED_PHASE: return "undefined_phase";
    case GHS_ERR_OVERFLOW_RISK: return "overflow_risk";
    case GHS_ERR_GRID_INVALID: return "grid_invalid";
    case GHS_ERR_PACKET_CLIPPED: return "packet_clipped";
    case GHS_ERR_ABSORBER_LEAK: return "absorber_leak";
    case GHS_ERR_EMPTY_REGION: return "empty_region";
    case GHS_ERR_IO: return "io_error";
    case GHS_ERR_UNKNOWN_PRESET: return "unknown_preset";
    case GHS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

ghs_status ghs_solve_scattering(const ghs_params* p, const ghs_incident* w,
                                ghs_scatter_result* out) {
  if (!p || !w || !out) return fail_arg("null argument");
  return guarded([&] { fill_result(solve_scattering(to_params(*p), to_wave(*w)), *out); });
}

ghs_status ghs_closed_form(const ghs_params* p, const ghs_incident* w,
                           ghs_scatter_result* out) {
  if (!p || !w || !out) return fail_arg("null argument");
  return guarded([&] { fill_result(closed_form_TR(to_params(*p), to_wave(*w)), *out); });
}

ghs_status ghs_solve_scattering_k(const ghs_params* p, double kx, double ky,
                                  const ghs_complex in[3], ghs_scatter_result* out) {
  if (!p || !in || !out) return fail_arg("null argument");
  return guarded([&] { fill_result(solve_scattering_k(to_params(*p), kx, ky, to_vec3(in)), *out); });
}

ghs_status ghs_closed_form_k(const ghs_params* p, double kx, double ky,
                             const ghs_complex in[3], ghs_scatter_result* out) {
  if (!p || !in || !out) return fail_arg("null argument");
  return guarded([&] { fill_result(closed_form_TR_k(to_params(*p), kx, ky, to_vec3(in)), *out); });
}

ghs_status ghs_effective_detuning(const ghs_params* p, double ky,
                                  ghs_complex* delta, double* two_photon_residual) {
  if (!p || !delta) return fail_arg("null argument");
  return guarded([&] {
    const auto d = effective_detunings(to_params(*p), ky);
    *delta = from_cplx(d.delta);
    if (two_photon_residual) *two_photon_residual = d.two_photon_residual;
  });
}

ghs_status ghs_dressed_overlaps(const ghs_params* p, double ky, double out[3]) {
  if (!p || !out) return fail_arg("null argument");
  return guarded([&] {
    const SlabParams sp = to_params(*p);
    const auto o = dressed_overlap_diagnostics(sp, effective_detunings(sp, ky).delta);
    std::copy(o.begin(), o.end(), out);
  });
}

ghs_status ghs_critical_angle(const ghs_params* p, double k0, int* has_angle,
                              double* theta_c) {
  if (!p || !has_angle || !theta_c) return fail_arg("null argument");
  return guarded([&] {
    const auto tc = critical_angle(to_params(*p), k0);
    *has_angle = tc.has_value() ? 1 : 0;
    *theta_c = tc.value_or(std::numeric_limits<double>::quiet_NaN());
  });
}

ghs_status ghs_lateral_shift(const ghs_params* p, const ghs_incident* w, int channel,
                             ghs_wave_kind kind, ghs_shift_method method,
                             double fd_step, int five_point, double* shift) {
  if (!p || !w || !shift) return fail_arg("null argument");
  if (channel < 0 || channel > 2) return fail_arg("channel must be 0..2");
  return guarded([&] {
    const WaveKind k = kind == GHS_REFLECTED ? WaveKind::reflected : WaveKind::transmitted;
    const FdOptions fd = to_fd(fd_step, five_point);
    *shift = method == GHS_METHOD_THETA
                 ? lateral_shift_theta(to_params(*p), to_wave(*w), channel, k, fd)
                 : lateral_shift_kspace(to_params(*p), to_wave(*w), channel, k, fd);
  });
}

ghs_status ghs_sweep_run(const ghs_params* p, double k0, const double* thetas,
                         size_t n, const ghs_complex in[3], int threads,
                         ghs_sweep** out) {
  if (!p || !thetas || !in || !out) return fail_arg("null argument");
  *out = nullptr;
  return guarded([&] {
    SweepOptions opt;
    opt.threads = threads;
    auto s = std::make_unique<ghs_sweep>();
    s->rows = sweep(to_params(*p), k0, std::vector<double>(thetas, thetas + n), to_vec3(in), opt);
    *out = s.release();
  });
}

size_t ghs_sweep_size(const ghs_sweep* s) { return s ? s->rows.size() : 0; }

ghs_status ghs_sweep_get(const ghs_sweep* s, size_t i, ghs_sweep_row* row) {
  if (!s || !row) return fail_arg("null argument");
  if (i >= s->rows.size()) return fail_arg("sweep row index out of range");
  const ShiftRow& r = s->rows[i];
  row->theta = r.theta;
  for (int c = 0; c < 3; ++c) {
    row->prob_R[c] = r.prob_R[c];
    row->prob_T[c] = r.prob_T[c];
    row->D_r[c] = r.D_r[c];
    row->D_t[c] = r.D_t[c];
  }
  row->total_flux = r.total_flux;
  return GHS_OK;
}

void ghs_sweep_free(ghs_sweep* s) { delete s; }

ghs_status ghs_auto_grid_1d(const ghs_params* p, const ghs_packet* k, ghs_grid* out) {
  if (!p || !k || !out) return fail_arg("null argument");
  return guarded([&] { *out = from_grid(auto_grid_1d(to_params(*p), to_packet(*k))); });
}

ghs_status ghs_auto_grid_2d(const ghs_params* p, const ghs_packet* k, ghs_grid* out) {
  if (!p || !k || !out) return fail_arg("null argument");
  return guarded([&] { *out = from_grid(auto_grid_2d(to_params(*p), to_packet(*k))); });
}

ghs_status ghs_validate_grid(const ghs_params* p, const ghs_packet* k,
                             const ghs_grid* g, int force_absorber,
                             char* warnings, size_t warnings_len) {
  if (!p || !k || !g) return fail_arg("null argument");
  if (warnings && warnings_len) warnings[0] = '\0';
  return guarded([&] {
    const auto warns = validate_grid(to_grid(*g), to_params(*p), to_packet(*k), force_absorber != 0);
    if (warnings && warnings_len) {
      std::string joined;
      for (const auto& w : warns) {
        if (!joined.empty()) joined += '\n';
        joined += w;
      }
      std::strncpy(warnings, joined.c_str(), warnings_len - 1);
      warnings[warnings_len - 1] = '\0';
    }
  });
}

ghs_status ghs_oracle1d_run(const ghs_params* p, const ghs_packet* k, double ky_fixed,
                            const ghs_oracle_overrides* ov, ghs_oracle_report** out) {
  if (!p || !k || !out) return fail_arg("null argument");
  *out = nullptr;
  return guarded([&] {
    auto rep = std::make_unique<ghs_oracle_report>();
    rep->two_d = false;
    rep->r1 = propagate_1d(to_params(*p), to_packet(*k), ky_fixed, to_overrides(ov));
    *out = rep.release();
  });
}

ghs_status ghs_oracle2d_run(const ghs_params* p, const ghs_packet* k,
                            const ghs_grid* grid, const ghs_oracle_overrides* ov,
                            ghs_oracle_report** out) {
  if (!p || !k || !out) return fail_arg("null argument");
  *out = nullptr;
  return guarded([&] {
    const SlabParams sp = to_params(*p);
    const PacketSpec ps = to_packet(*k);
    OracleOverrides o = to_overrides(ov);
    GridSpec g = grid ? to_grid(*grid) : auto_grid_2d(sp, ps);
    if (!grid) {
      // Apply size overrides to the automatic grid the same way the core does.
      const double span_x = static_cast<double>(g.nx) * g.dx;
      const double span_y = static_cast<double>(g.ny) * g.dy;
      const double t_final = static_cast<double>(g.n_steps) * g.dt;
      if (o.nx) { g.nx = o.nx; g.dx = span_x / static_cast<double>(g.nx); }
      if (o.ny) { g.ny = o.ny; g.dy = span_y / static_cast<double>(g.ny); }
      if (o.dt > 0.0) { g.dt = o.dt; g.n_steps = static_cast<std::size_t>(std::ceil(t_final / g.dt)); }
      if (o.n_steps) g.n_steps = o.n_steps;
      if (o.absorber_width > 0.0) g.absorber_width = o.absorber_width;
    }
    auto rep = std::make_unique<ghs_oracle_report>();
    rep->two_d = true;
    rep->r2 = propagate_2d(sp, ps, g, o);
    *out = rep.release();
  });
}

ghs_status ghs_report_summary(const ghs_oracle_report* r, ghs_oracle_summary* out) {
  if (!r || !out) return fail_arg("null argument");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out->is_2d = r->two_d ? 1 : 0;
  if (r->two_d) {
    for (int c = 0; c < 3; ++c) {
      out->prob_R[c] = r->r2.prob_R[c];
      out->prob_T[c] = r->r2.prob_T[c];
      out->interior[c] = r->r2.interior[c].norm;
      out->D_r[c] = r->r2.D_r[c];
      out->D_t[c] = r->r2.D_t[c];
      out->D_t_excess[c] = r->r2.D_t_excess[c];
      out->absorbed[c] = r->r2.absorbed[c];
    }
    out->decayed = r->r2.decayed;
    out->t_final = r->r2.t_final;
    out->grid = from_grid(r->r2.grid);
  } else {
    for (int c = 0; c < 3; ++c) {
      out->prob_R[c] = r->r1.prob_R[c];
      out->prob_T[c] = r->r1.prob_T[c];
      out->interior[c] = r->r1.interior[c];
      out->D_r[c] = out->D_t[c] = out->D_t_excess[c] = nan;
      out->absorbed[c] = r->r1.absorbed[c];
    }
    out->decayed = r->r1.decayed;
    out->t_final = r->r1.t_final;
    out->grid = from_grid(r->r1.grid);
  }
  return GHS_OK;
}

ghs_status ghs_report_region(const ghs_oracle_report* r, int channel, ghs_region_id region,
                             ghs_region_info* out) {
  const RegionStat* st = pick_region(r, channel, region);
  if (!st || !out) return fail_arg("region data needs a 2D report and channel 0..2");
  out->norm = st->norm;
  out->centroid_x = st->centroid[0];
  out->centroid_y = st->centroid[1];
  out->defined = st->defined ? 1 : 0;
  out->split = st->split ? 1 : 0;
  return GHS_OK;
}

ghs_status ghs_report_lobe_count(const ghs_oracle_report* r, int channel,
                                 ghs_region_id region, size_t* count) {
  const RegionStat* st = pick_region(r, channel, region);
  if (!st || !count) return fail_arg("lobe data needs a 2D report and channel 0..2");
  *count = st->lobes.size();
  return GHS_OK;
}

ghs_status ghs_report_lobe(const ghs_oracle_report* r, int channel, ghs_region_id region,
                           size_t index, ghs_lobe* out) {
  const RegionStat* st = pick_region(r, channel, region);
  if (!st || !out) return fail_arg("lobe data needs a 2D report and channel 0..2");
  if (index >= st->lobes.size()) return fail_arg("lobe index out of range");
  out->norm = st->lobes[index].norm;
  out->y = st->lobes[index].y;
  out->shift = st->lobes[index].shift;
  return GHS_OK;
}

void ghs_oracle_report_free(ghs_oracle_report* r) { delete r; }

size_t ghs_preset_count(void) { return presets().size(); }

ghs_status ghs_preset_get(size_t index, ghs_preset_info* out) {
  if (!out) return fail_arg("null argument");
  if (index >= presets().size()) return fail_arg("preset index out of range");
  fill_preset(presets()[index], *out);
  return GHS_OK;
}

ghs_status ghs_preset_find(const char* name, ghs_preset_info* out) {
  if (!name || !out) return fail_arg("null argument");
  return guarded([&] { fill_preset(preset_by_name(name), *out); });
}

ghs_status ghs_named_state(const char* name, ghs_complex out[3]) {
  if (!name || !out) return fail_arg("null argument");
  return guarded([&] {
    const Vec3 v = named_incident_state(name);
    for (int i = 0; i < 3; ++i) out[i] = from_cplx(v[i]);
  });
}

} /* extern "C" */
