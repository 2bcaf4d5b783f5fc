#pragma once

// Bundled parameter sets reproducing the standard slab configurations used
// throughout the tests and the command-line tool, plus the named internal
// incident states.

#include <string>
#include <vector>

#include "ghshift/types.hpp"

namespace ghshift {

struct Preset {
  std::string name;
  std::string summary;
  SlabParams params;
  double k0 = 0.8;
  Vec3 incident{cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)};
};

// All bundled presets, stable order.
const std::vector<Preset>& presets();

// Lookup by name; throws Errc::unknown_preset.
const Preset& preset_by_name(const std::string& name);

// Named incident states: "state1", "state2", "super12" (equal-weight
// superposition of the two ground states).  Throws Errc::unknown_preset.
Vec3 named_incident_state(const std::string& name);

}  // namespace ghshift
