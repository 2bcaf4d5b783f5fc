#ifndef GHSHIFT_H
#define GHSHIFT_H

/*
 * C interface to the three-level slab scattering library.
 *
 * Conventions:
 *   - hbar = m = 1 throughout; angles in radians; channel indices 0..2.
 *   - Every function returns a ghs_status; GHS_OK means the outputs are
 *     valid.  On failure ghs_last_error() returns a thread-local message.
 *   - Fixed-size results are written through caller-provided structs.
 *     Variable-size results (sweeps, wavepacket reports) live behind opaque
 *     handles with explicit _free functions.
 *   - Lateral shifts may be NaN where a scattering amplitude is too small
 *     to carry a phase; NaN is the in-band gap marker, not an error.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ghs_status {
  GHS_OK = 0,
  GHS_ERR_INVALID_ARGUMENT = 1,
  GHS_ERR_DEGENERATE_COUPLING = 2,
  GHS_ERR_SINGULAR_SYSTEM = 3,
  GHS_ERR_NON_CONVERGENCE = 4,
  GHS_ERR_UNDEFINED_PHASE = 5,
  GHS_ERR_OVERFLOW_RISK = 6,
  GHS_ERR_GRID_INVALID = 7,
  GHS_ERR_PACKET_CLIPPED = 8,
  GHS_ERR_ABSORBER_LEAK = 9,
  GHS_ERR_EMPTY_REGION = 10,
  GHS_ERR_IO = 11,
  GHS_ERR_UNKNOWN_PRESET = 12,
  GHS_ERR_INTERNAL = 99
} ghs_status;

typedef struct ghs_complex {
  double re, im;
} ghs_complex;

/* Slab and beam parameters. */
typedef struct ghs_params {
  double omega1;      /* coupling strength, beam 1 */
  double omega2;      /* coupling strength, beam 2 */
  double delta0;      /* bare one-photon detuning */
  double gamma;       /* excited-state decay rate, >= 0 */
  double slab_length; /* slab thickness L */
  double k_l1;        /* beam-1 wavevector along y */
  double k_l2;        /* beam-2 wavevector along y */
} ghs_params;

typedef struct ghs_incident {
  double k0;             /* incident wavevector magnitude */
  double theta;          /* incidence angle from the slab normal, radians */
  ghs_complex in[3];     /* internal-state amplitudes (normalized internally) */
} ghs_incident;

typedef struct ghs_scatter_result {
  ghs_complex R[3], T[3];          /* reflection / transmission amplitudes */
  ghs_complex interior_a[3];       /* interior mode amplitude referenced to x = L */
  ghs_complex interior_b[3];       /* interior mode amplitude referenced to x = 0 */
  ghs_complex k[3];                /* exterior channel wavevectors along x */
  ghs_complex p[3];                /* interior exponents */
  double prob_R[3], prob_T[3];     /* flux-normalized probabilities */
  double total_flux;               /* sum of all probabilities; 1 when gamma = 0 */
} ghs_scatter_result;

const char* ghs_version(void);
const char* ghs_status_name(ghs_status s);
/* Message of the most recent failure on this thread; empty string if none. */
const char* ghs_last_error(void);

/* ---- stationary scattering ---------------------------------------- */

/* Dense 12x12 boundary-matching solve. */
ghs_status ghs_solve_scattering(const ghs_params* p, const ghs_incident* w,
                                ghs_scatter_result* out);
/* Closed-form route through the dressed-state factorization. */
ghs_status ghs_closed_form(const ghs_params* p, const ghs_incident* w,
                           ghs_scatter_result* out);
/* Same solvers parameterized by (kx, ky) directly. */
ghs_status ghs_solve_scattering_k(const ghs_params* p, double kx, double ky,
                                  const ghs_complex in[3], ghs_scatter_result* out);
ghs_status ghs_closed_form_k(const ghs_params* p, double kx, double ky,
                             const ghs_complex in[3], ghs_scatter_result* out);

/* Effective one-photon detuning at transverse wavevector ky. */
ghs_status ghs_effective_detuning(const ghs_params* p, double ky,
                                  ghs_complex* delta, double* two_photon_residual);
/* Dressed-basis overlap diagnostics of the three incident channels. */
ghs_status ghs_dressed_overlaps(const ghs_params* p, double ky, double out[3]);
/* Total-reflection threshold angle; *has_angle = 0 when none exists. */
ghs_status ghs_critical_angle(const ghs_params* p, double k0, int* has_angle,
                              double* theta_c);

/* ---- lateral shifts ------------------------------------------------ */

typedef enum ghs_wave_kind { GHS_REFLECTED = 0, GHS_TRANSMITTED = 1 } ghs_wave_kind;
typedef enum ghs_shift_method { GHS_METHOD_THETA = 0, GHS_METHOD_KSPACE = 1 } ghs_shift_method;

/* Stationary-phase lateral shift of one channel.  fd_step <= 0 selects the
 * default stencil step; five_point != 0 selects the five-point stencil. */
ghs_status ghs_lateral_shift(const ghs_params* p, const ghs_incident* w, int channel,
                             ghs_wave_kind kind, ghs_shift_method method,
                             double fd_step, int five_point, double* shift);

typedef struct ghs_sweep_row {
  double theta;                  /* radians */
  double prob_R[3], prob_T[3];
  double D_r[3], D_t[3];         /* NaN marks an undefined phase */
  double total_flux;
} ghs_sweep_row;

typedef struct ghs_sweep ghs_sweep; /* opaque */

/* Angular sweep over strictly increasing thetas.  threads = 0 picks an
 * automatic worker count; results are identical for any worker count. */
ghs_status ghs_sweep_run(const ghs_params* p, double k0, const double* thetas,
                         size_t n, const ghs_complex in[3], int threads,
                         ghs_sweep** out);
size_t ghs_sweep_size(const ghs_sweep* s);
ghs_status ghs_sweep_get(const ghs_sweep* s, size_t i, ghs_sweep_row* row);
void ghs_sweep_free(ghs_sweep* s);

/* ---- time-dependent wavepacket oracle ------------------------------ */

typedef struct ghs_packet {
  double width;                /* initial spatial standard deviation */
  double center_x, center_y;   /* launch centroid; x = 0 requests auto placement */
  double k0, theta;
  ghs_complex internal[3];
} ghs_packet;

typedef struct ghs_grid {
  size_t nx, ny;               /* powers of two; ny = 1 selects 1D */
  double x_min, y_min;
  double dx, dy;
  double dt;
  size_t n_steps;
  double absorber_width;
} ghs_grid;

typedef struct ghs_oracle_overrides {
  double dt;                   /* <= 0 keeps the automatic value */
  size_t nx, ny, n_steps;      /* 0 keeps the automatic value */
  double absorber_width;       /* <= 0 keeps the automatic value */
  int force_absorber_width;    /* accept a sub-minimal absorber */
  const char* snapshot_path;   /* NULL disables; 2D only */
  size_t snapshot_stride;      /* steps between frames; 0 keeps the default */
} ghs_oracle_overrides;

typedef struct ghs_lobe {
  double norm;
  double y;      /* lobe y-centroid */
  double shift;  /* back-propagated face-intercept shift */
} ghs_lobe;

typedef struct ghs_region_info {
  double norm;
  double centroid_x, centroid_y;
  int defined;  /* norm above the centroid floor */
  int split;    /* bimodal y-marginal */
} ghs_region_info;

typedef enum ghs_region_id {
  GHS_REGION_REFLECTED = 0,
  GHS_REGION_INTERIOR = 1,
  GHS_REGION_TRANSMITTED = 2
} ghs_region_id;

typedef struct ghs_oracle_summary {
  int is_2d;
  double prob_R[3], prob_T[3], interior[3];
  double D_r[3], D_t[3], D_t_excess[3]; /* NaN in 1D or for empty regions */
  double absorbed[3];
  double decayed;
  double t_final;
  ghs_grid grid;
} ghs_oracle_summary;

typedef struct ghs_oracle_report ghs_oracle_report; /* opaque */

/* Automatic grid sizing for a packet/slab combination. */
ghs_status ghs_auto_grid_1d(const ghs_params* p, const ghs_packet* k, ghs_grid* out);
ghs_status ghs_auto_grid_2d(const ghs_params* p, const ghs_packet* k, ghs_grid* out);

/* Grid validation; hard violations fail with GHS_ERR_GRID_INVALID, soft
 * ones are joined with newlines into warnings (always NUL-terminated). */
ghs_status ghs_validate_grid(const ghs_params* p, const ghs_packet* k,
                             const ghs_grid* g, int force_absorber,
                             char* warnings, size_t warnings_len);

/* Split-step propagation in the angle-reduced 1D frame at fixed ky. */
ghs_status ghs_oracle1d_run(const ghs_params* p, const ghs_packet* k, double ky_fixed,
                            const ghs_oracle_overrides* ov, ghs_oracle_report** out);
/* Split-step propagation on the full 2D lab-frame grid.  grid = NULL sizes
 * automatically. */
ghs_status ghs_oracle2d_run(const ghs_params* p, const ghs_packet* k,
                            const ghs_grid* grid, const ghs_oracle_overrides* ov,
                            ghs_oracle_report** out);

ghs_status ghs_report_summary(const ghs_oracle_report* r, ghs_oracle_summary* out);
ghs_status ghs_report_region(const ghs_oracle_report* r, int channel, ghs_region_id region,
                             ghs_region_info* out);
ghs_status ghs_report_lobe_count(const ghs_oracle_report* r, int channel,
                                 ghs_region_id region, size_t* count);
ghs_status ghs_report_lobe(const ghs_oracle_report* r, int channel, ghs_region_id region,
                           size_t index, ghs_lobe* out);
void ghs_oracle_report_free(ghs_oracle_report* r);

/* ---- presets -------------------------------------------------------- */

typedef struct ghs_preset_info {
  const char* name;     /* static storage, do not free */
  const char* summary;  /* static storage, do not free */
  ghs_params params;
  double k0;
  ghs_complex incident[3];
} ghs_preset_info;

size_t ghs_preset_count(void);
ghs_status ghs_preset_get(size_t index, ghs_preset_info* out);
ghs_status ghs_preset_find(const char* name, ghs_preset_info* out);
/* Named incident states: "state1", "state2", "super12". */
ghs_status ghs_named_state(const char* name, ghs_complex out[3]);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GHSHIFT_H */
