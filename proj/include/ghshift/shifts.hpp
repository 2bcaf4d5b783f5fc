#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "ghshift/scattering.hpp"
#include "ghshift/types.hpp"

// Lateral beam shifts from scattering phase derivatives.
//
// Phase convention: the transmitted phase is referenced to the exit face,
//   phi_t = arg(T_j) + kx0 L,     phi_r = arg(R_j),
// which makes the two routes below analytically identical:
//   theta form:    D = -(1 / (k0 cos theta)) dphi/dtheta      at fixed k0
//   k-space form:  D_t = (ky0/kx0) (L + dphi/dkx) - dphi/dky  with phi = arg T_j
//                  D_r = (ky0/kx0) dphi/dkx       - dphi/dky  with phi = arg R_j
// Both are computed by central finite differences (default step 1e-5 rad for
// the theta form; the k-space form uses step * k0 per component), with phases
// unwrapped between stencil points only.  D_t includes the geometric offset
// tan(theta) L of a free-flying beam; subtract it to isolate the slab part.

namespace ghshift {

enum class WaveKind { reflected, transmitted };

struct FdOptions {
  double step = 1e-5;      // radians; k-space derivatives use step * k0
  bool five_point = false; // 5-point stencil instead of 3-point central
};

// Per-angle sweep record.  Quiet NaN marks entries whose phase was undefined
// at some stencil point (|coefficient| <= 1e-14) or whose solve failed.
struct ShiftRow {
  double theta = 0.0;  // radians
  std::array<double, 3> D_r{}, D_t{};
  std::array<double, 3> prob_R{}, prob_T{};
  double total_flux = 0.0;
};

struct SweepOptions {
  FdOptions fd{};
  int threads = 0;  // 0: honor GHSHIFT_THREADS, else hardware concurrency
};

// D = -(1/(k0 cos theta)) dphi/dtheta along the energy shell.
// Requires theta in [0, pi/2 - 1e-3]; throws Errc::undefined_phase when the
// coefficient magnitude drops below 1e-14 at any stencil point.
double lateral_shift_theta(const SlabParams& p, const IncidentWave& w, int channel, WaveKind kind,
                           const FdOptions& fd = {});

// D_t / D_r from the fixed-component wavevector derivatives (kx varied at
// fixed ky and vice versa; ky re-enters the effective detuning).
double lateral_shift_kspace(const SlabParams& p, const IncidentWave& w, int channel, WaveKind kind,
                            const FdOptions& fd = {});

// Log-magnitude gradient (d ln|c|/dkx, d ln|c|/dky) of the chosen coefficient;
// packet-validity diagnostic (narrow-momentum assumption holds when
// |lambda|/W << 1).  Same undefined-phase threshold as above.
std::array<double, 2> amplitude_gradient(const SlabParams& p, const IncidentWave& w, int channel,
                                         WaveKind kind, const FdOptions& fd = {});

// One ShiftRow per grid angle (radians; strictly increasing, within
// [0, pi/2)).  Rows are computed independently (theta-form stencils, shared
// across channels) and ordered by grid index regardless of thread count.
// Per-point failures become NaN gaps, never exceptions.
std::vector<ShiftRow> sweep(const SlabParams& p, double k0, const std::vector<double>& theta_grid,
                            const Vec3& in, const SweepOptions& opt = {});

}  // namespace ghshift
