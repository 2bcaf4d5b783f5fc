#pragma once

#include <optional>

#include "ghshift/linalg.hpp"
#include "ghshift/types.hpp"

// Reduced slab model at fixed transverse wavevector ky.
//
// After separating the beam-phase factors the interior is governed by a
// constant complex-symmetric 3x3 potential matrix
//
//        V = -(1/2) [ 0    0    Om1 ]
//                   [ 0    0    Om2 ]
//                   [ Om1  Om2  2D  ]
//
// where D = delta0 - (2 kL1 ky + kL1^2)/2 + i gamma/2 is the effective
// one-photon detuning.  The corresponding two-photon term is held at zero by
// construction (the bare two-photon detuning is retuned per angle); its raw
// recoil residual is exposed only as a diagnostic.  Outside the slab the
// couplings vanish but the excited state keeps the -D diagonal entry.
//
// Eigenvalues: V0 = 0 (dark combination of the ground states) and
// Vpm = -(D -+ Dtilde)/2 with Dtilde = sqrt(D^2 + Om1^2 + Om2^2).  Far blue
// detuned the ground channels see the shallow barrier V+; far red detuned
// they ride the shallow well V-.

namespace ghshift {

struct EffectiveDetunings {
  cplx delta;                 // effective one-photon detuning D (complex)
  double two_photon_residual; // raw recoil residual ky^2/2 - (kL1+kL2+ky)^2/2
};

// Columns of U are unnormalized eigenvectors ordered (+, 0, -); scattering
// results are invariant under column rescaling, and this form has no
// removable singularities at Om1 -> 0.
struct DressedDecomposition {
  Vec3 values;  // (V+, V0, V-)
  Mat3 U;
  Mat3 U_inv;
  cplx delta_tilde;  // sqrt(D^2 + Om1^2 + Om2^2), principal branch
};

EffectiveDetunings effective_detunings(const SlabParams& p, double ky);

// Interior potential matrix for a given effective detuning.
Mat3 potential_matrix(const SlabParams& p, cplx delta);

// Throws Errc::degenerate_coupling when Om1^2 + Om2^2 vanishes (the matrix is
// already diagonal; callers special-case that).
DressedDecomposition dressed_decomposition(const SlabParams& p, cplx delta);

// Self-consistent angle where the normal kinetic energy equals the shallow
// barrier height: cos(theta_c) = sqrt(2 Re V+) / k0, with V+ evaluated at
// ky = k0 sin(theta_c).  Fixed-point iteration, tolerance 1e-12 rad; nullopt
// when 2 Re V+ >= k0^2 or Re V+ <= 0; throws Errc::non_convergence after 100
// iterations.
std::optional<double> critical_angle(const SlabParams& p, double k0);

// How closely the bare states match the far-detuned dressed combinations:
//   [0] |<1| (Om1|+> + Om2|0>) / sqrt(Om1^2+Om2^2)|^2
//   [1] |<2| (Om2|+> - Om1|0>) / sqrt(Om1^2+Om2^2)|^2
//   [2] |<3|->|^2
// with |+->, |0> normalized.  Near 1 far blue detuned, visibly below 1 on
// resonance.
std::array<double, 3> dressed_overlap_diagnostics(const SlabParams& p, cplx delta);

}  // namespace ghshift
