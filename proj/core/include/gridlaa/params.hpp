#pragma once

#include <string_view>
#include <vector>

#include "gridlaa/case.hpp"
#include "gridlaa/types.hpp"

namespace gridlaa {

/// Per-machine and per-load dynamic data, aligned with the canonical bus
/// order of the GridCase it was loaded against. Frequencies are stored in Hz;
/// the dynamic model works in per-unit frequency deviation, so the safety
/// threshold seen by analyses is omega_max_hz / omega_nom_hz.
struct DynamicParams {
    VectorX inertia;       // N_G, p.u. s^2 (must be > 0)
    VectorX gen_damping;   // N_G, p.u. (must be > 0)
    VectorX kp;            // N_G, proportional governor gain (>= 0)
    VectorX ki;            // N_G, integral governor gain (>= 0)
    VectorX load_damping;  // N_L, p.u. (must be > 0)
    double omega_nom_hz = 50.0;
    double omega_max_hz = 2.0;

    double omega_max_pu() const { return omega_max_hz / omega_nom_hz; }
};

/// Parses the line-oriented parameter format:
///
///     # comment
///     omega_nom = 50
///     omega_max = 2
///     inertia = 10          # global defaults ...
///     gen_damping = 1
///     load_damping = 1
///     kp = 1
///     ki = 5
///     vulnerable_fraction = 1.0
///
///     [bus 33]              # ... overridden per bus
///     gen_damping = 2
///
/// Generator keys (inertia, gen_damping, kp, ki) apply to generator buses,
/// load keys (load_damping, vulnerable_fraction) to load buses; addressing a
/// bus with a key of the wrong kind is an error, as is leaving any bus
/// without a value (no global default and no override). vulnerable_fraction
/// overrides are applied to grid.loads in place.
DynamicParams load_dynamic_params(std::string_view text, GridCase& grid);

/// Validates ranges only (used after programmatic construction).
void validate_params(const DynamicParams& params, const GridCase& grid);

}  // namespace gridlaa
