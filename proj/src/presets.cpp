#include "ghshift/presets.hpp"

#include <cmath>

namespace ghshift {

namespace {

std::vector<Preset> build() {
  std::vector<Preset> v;
  const double is2 = 1.0 / std::sqrt(2.0);

  Preset fig2;
  fig2.name = "fig2";
  fig2.summary = "asymmetric couplings, far-detuned slab, ground state 1 incident";
  fig2.params = {2.5, 3.5, 100.0, 0.1, 30.0, 0.1, 0.1};
  fig2.k0 = 0.8;
  fig2.incident = {cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)};
  v.push_back(fig2);

  Preset fig3 = fig2;
  fig3.name = "fig3";
  fig3.summary = "symmetric couplings, far-detuned slab, ground state 1 incident";
  fig3.params.omega1 = 3.5;
  fig3.params.omega2 = 3.5;
  v.push_back(fig3);

  Preset fig4 = fig3;
  fig4.name = "fig4";
  fig4.summary = "symmetric couplings, equal ground-state superposition incident";
  fig4.incident = {cplx(is2, 0.0), cplx(is2, 0.0), cplx(0.0, 0.0)};
  v.push_back(fig4);

  Preset fig5;
  fig5.name = "fig5";
  fig5.summary = "thin slab at negative detuning, ground state 1 incident";
  fig5.params = {2.0, 2.0, -25.0, 0.1, 4.0, 0.1, 0.1};
  fig5.k0 = 0.8;
  fig5.incident = {cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)};
  v.push_back(fig5);

  return v;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build();
  return all;
}

const Preset& preset_by_name(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw Error(Errc::unknown_preset, "unknown preset: " + name);
}

Vec3 named_incident_state(const std::string& name) {
  const double is2 = 1.0 / std::sqrt(2.0);
  if (name == "state1") return {cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)};
  if (name == "state2") return {cplx(0.0, 0.0), cplx(1.0, 0.0), cplx(0.0, 0.0)};
  if (name == "super12") return {cplx(is2, 0.0), cplx(is2, 0.0), cplx(0.0, 0.0)};
  throw Error(Errc::unknown_preset, "unknown incident state: " + name);
}

}  // namespace ghshift
