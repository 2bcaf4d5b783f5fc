#pragma once

#include "ghshift/model.hpp"
#include "ghshift/types.hpp"

// Stationary scattering of a three-channel plane wave off the slab.
//
// Exterior ansatz per bare channel j (k1 = k2 = kx, k3 = sqrt(kx^2 + 2D)):
//   x <= 0:  In_j e^{i k_j x} + R_j e^{-i k_j x}
//   x >= L:  T_j e^{i k_j x}
// Interior, in the dressed basis with exponents p_j = sqrt(2 V_j - kx^2)
// (branch Re p >= 0, then Im p >= 0):
//   U [ a_j e^{p_j (x - L)} + b_j e^{-p_j x} ]
// The a/b coefficients are referenced to the slab faces so that every stored
// exponential has magnitude <= 1; this keeps the direct solve well scaled for
// arbitrarily opaque slabs.
//
// Flux accounting weights each channel by Re(k_j), with the transmitted
// amplitude taken at the exit face.  T_3 is a coefficient referenced to
// x = 0, so for a deeply closed channel it is exponentially large while the
// actual evanescent tail T_3 e^{i k_3 x} stays small; the face value
// T_3 e^{i k_3 L} is the bounded quantity that enters prob_T.  A truly
// closed channel (k_3 imaginary, no decay) carries exactly zero flux.

namespace ghshift {

struct ScatteringResult {
  Vec3 R{};           // reflected amplitudes
  Vec3 T{};           // transmitted coefficients of e^{+i k_j x}
  Vec3 interior_a{};  // dressed growing-exponential coefficients, face x = L
  Vec3 interior_b{};  // dressed decaying-exponential coefficients, face x = 0
  Vec3 k{};           // channel wavevectors
  Vec3 p{};           // interior exponents, dressed order (+, 0, -)
  std::array<double, 3> prob_R{};  // Re(k_j) |R_j|^2 / incident flux
  std::array<double, 3> prob_T{};  // Re(k_j) |T_j e^{i k_j L}|^2 / incident flux
  double total_flux = 0.0;
};

// Channel wavevectors for normal component kx: {kx, kx, sqrt(kx^2 + 2 delta)},
// the third on the Im >= 0 branch (tie-break Re >= 0).
Vec3 channel_wavevectors(double kx, cplx delta);

// Direct route: assembles the four 3-vector matching conditions (value and
// slope at both faces) into one 12x12 complex system in the face-referenced
// basis above and solves it by partial-pivot elimination.  No opacity limit.
ScatteringResult solve_scattering(const SlabParams& p, const IncidentWave& w);

// Same, parameterized by the wavevector components directly (ky feeds the
// effective detuning; kx is the normal component).  Used by the k-space
// shift derivatives.
ScatteringResult solve_scattering_k(const SlabParams& p, double kx, double ky, const Vec3& in);

// Transfer-matrix route: combining the value and slope conditions at each
// face eliminates R and T analytically, leaving
//   (KU + UP) W^-1 a + (KU - UP) b      = 2 i K In
//   (KU - UP)      a + (KU + UP) W^-1 b = 0
// for the face-referenced interior coefficients, with W = diag(e^{p_j L});
// then T_face = U (a + W^-1 b) and R = U (W^-1 a + b) - In.  Only the
// decaying exponentials W^-1 are ever formed, so the open channels survive
// in floating point at high opacity where the textbook F-matrix assembly
// (which mixes W and W^-1 in one sum) loses them to rounding.  T_face is
// the wavefunction value at x = L, converted to the same e^{+i k_j x}
// coefficient convention as the direct route.  Preconditions:
// max Re(p_j) L <= 50 (else Errc::overflow_risk; the stored coefficient of
// a deeply closed channel grows like e^{Re p L} and must stay comfortably
// representable) and |p_j| bounded away from zero (else
// Errc::singular_system; at a band edge the two interior exponentials
// degenerate and the transfer form loses rank).
ScatteringResult closed_form_TR(const SlabParams& p, const IncidentWave& w);
ScatteringResult closed_form_TR_k(const SlabParams& p, double kx, double ky, const Vec3& in);

}  // namespace ghshift
