#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

// Common types for the coupled-slab scattering library.
//
// Conventions used throughout (hbar = m = 1):
//   * The slab occupies 0 <= x <= L; both coupling beams are on inside it
//     and off outside.  The beams run along y.
//   * Internal states are indexed 0,1,2 for the two ground states and the
//     decaying excited state.  State 2 (the excited one) feels the complex
//     detuning everywhere, inside and outside the slab.
//   * A plane wave arrives with total wavevector k0 at angle theta from the
//     slab normal (the x axis), so kx = k0 cos(theta), ky = k0 sin(theta).

namespace ghshift {

using cplx = std::complex<double>;
using Vec3 = std::array<cplx, 3>;

enum class Errc {
  ok = 0,
  invalid_argument,
  degenerate_coupling,
  singular_system,
  non_convergence,
  undefined_phase,
  overflow_risk,
  grid_invalid,
  packet_clipped,
  absorber_leak,
  empty_region,
  io_error,
  unknown_preset,
};

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

private:
  Errc code_;
};

// Static physical parameters of one slab configuration.
struct SlabParams {
  double omega1 = 0.0;       // coupling strength, beam 1 (ground 1 <-> excited)
  double omega2 = 0.0;       // coupling strength, beam 2 (ground 2 <-> excited)
  double delta0 = 0.0;       // bare one-photon detuning
  double gamma = 0.0;        // excited-state decay rate, >= 0
  double slab_length = 0.0;  // L
  double k_l1 = 0.0;         // beam-1 wavevector along y
  double k_l2 = 0.0;         // beam-2 wavevector along y
};

// Incident plane wave. |in| is expected normalized to 1.
struct IncidentWave {
  double k0 = 0.0;
  double theta = 0.0;  // radians, 0 <= theta < pi/2
  Vec3 in{};

  double kx() const { return k0 * std::cos(theta); }
  double ky() const { return k0 * std::sin(theta); }
};

inline double norm2(const Vec3& v) {
  return std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]);
}

}  // namespace ghshift
