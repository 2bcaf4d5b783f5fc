#include "ghshift/model.hpp"

#include <cmath>

namespace ghshift {

EffectiveDetunings effective_detunings(const SlabParams& p, double ky) {
  EffectiveDetunings out;
  out.delta = cplx(p.delta0 - (2.0 * p.k_l1 * ky + p.k_l1 * p.k_l1) / 2.0, p.gamma / 2.0);
  const double shifted = p.k_l1 + p.k_l2 + ky;
  out.two_photon_residual = ky * ky / 2.0 - shifted * shifted / 2.0;
  return out;
}

Mat3 potential_matrix(const SlabParams& p, cplx delta) {
  Mat3 v;
  v(0, 2) = v(2, 0) = -0.5 * p.omega1;
  v(1, 2) = v(2, 1) = -0.5 * p.omega2;
  v(2, 2) = -delta;
  return v;
}

DressedDecomposition dressed_decomposition(const SlabParams& p, cplx delta) {
  const double om_sq = p.omega1 * p.omega1 + p.omega2 * p.omega2;
  if (om_sq < 1e-24)
    throw Error(Errc::degenerate_coupling, "dressed decomposition: both couplings vanish");

  DressedDecomposition d;
  d.delta_tilde = std::sqrt(delta * delta + om_sq);
  d.values = {-(delta - d.delta_tilde) / 2.0, 0.0, -(delta + d.delta_tilde) / 2.0};

  // columns (+, 0, -)
  d.U(0, 0) = p.omega1;
  d.U(1, 0) = p.omega2;
  d.U(2, 0) = delta - d.delta_tilde;
  d.U(0, 1) = p.omega2;
  d.U(1, 1) = -p.omega1;
  d.U(2, 1) = 0.0;
  d.U(0, 2) = p.omega1;
  d.U(1, 2) = p.omega2;
  d.U(2, 2) = delta + d.delta_tilde;
  d.U_inv = invert3(d.U);
  return d;
}

std::optional<double> critical_angle(const SlabParams& p, double k0) {
  if (k0 <= 0.0) throw Error(Errc::invalid_argument, "critical angle: k0 must be positive");
  double theta = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    const auto det = effective_detunings(p, k0 * std::sin(theta));
    const auto dressed = dressed_decomposition(p, det.delta);
    const double barrier = 2.0 * dressed.values[0].real();
    if (barrier <= 0.0 || barrier >= k0 * k0) return std::nullopt;
    const double next = std::acos(std::sqrt(barrier) / k0);
    if (std::abs(next - theta) < 1e-12) return next;
    theta = next;
  }
  throw Error(Errc::non_convergence, "critical angle: no fixed point after 100 iterations");
}

std::array<double, 3> dressed_overlap_diagnostics(const SlabParams& p, cplx delta) {
  const double om_sq = p.omega1 * p.omega1 + p.omega2 * p.omega2;
  if (om_sq < 1e-24)
    throw Error(Errc::degenerate_coupling, "overlap diagnostics: both couplings vanish");
  const cplx dt = std::sqrt(delta * delta + om_sq);
  const cplx n_plus = std::sqrt(om_sq + (delta - dt) * (delta - dt));
  const cplx n_minus = std::sqrt(om_sq + (delta + dt) * (delta + dt));
  const double n_zero = std::sqrt(om_sq);

  const double o1 = p.omega1 * p.omega1;
  const double o2 = p.omega2 * p.omega2;
  std::array<double, 3> out{};
  out[0] = std::norm((o1 / n_plus + o2 / n_zero) / n_zero);
  out[1] = std::norm((o2 / n_plus + o1 / n_zero) / n_zero);
  out[2] = std::norm((delta + dt) / n_minus);
  return out;
}

}  // namespace ghshift
