#pragma once

#include <limits>
#include <vector>

#include "gridlaa/case.hpp"
#include "gridlaa/eigen_core.hpp"
#include "gridlaa/params.hpp"
#include "gridlaa/sensitivity.hpp"
#include "gridlaa/simplex.hpp"
#include "gridlaa/types.hpp"

namespace gridlaa {

/// Minimum-cost protected-load plan. The residual vulnerable pool
/// p^LV - P^LP is what an attacker can still reach after hardening; the gain
/// budget equality ties it to the worst admissible feedback gains.
struct DefensePlan {
    std::vector<int> victims;  // load positions covered by the plan
    VectorX protected_load;    // P^LP per victim
    VectorX residual;          // p^LV - P^LP per victim
    double objective = 0.0;    // sum of protected load
    double margin_dlaa = 0.0;
    double margin_slaa = 0.0;
    int escalations = 0;
    // certificate: linearized dominant eigenvalue at the plan's gains, worst
    // true dominant over the verification eigensolves, worst simulated
    // generator-frequency peak under the residual step
    double predicted_dominant_re = std::numeric_limits<double>::quiet_NaN();
    double verified_dominant_re = std::numeric_limits<double>::quiet_NaN();
    double verified_peak = std::numeric_limits<double>::quiet_NaN();
    std::vector<GainTarget> targets;  // gain columns of the LP
    VectorX gain_values;              // LP gain choice per target
    LpSolution lp;                    // final solve, carries the duality certificate
};

/// Signed influence peaks f_{i,n}(t*) for every generator-frequency row n and
/// load i; rows index generators, columns loads.
MatrixX influence_peaks(const EigenSolution& sol, double horizon = 60.0);

/// Hardens victims against destabilizing feedback: minimizes total protected
/// load subject to every linearized eigenvalue staying below -margin when the
/// residual budget is spent on the gains. The plan is verified by true
/// eigensolves at the LP's gains and at 16 random budget splits; on failure
/// the margin doubles and the LP re-solves, up to 8 escalations.
DefensePlan defend_dlaa(const EigenSolution& sol, const std::vector<int>& victims,
                        const std::vector<Sensor>& sensors, const VectorX& vulnerable,
                        double omega_max_pu, double margin = 1e-3);

/// Hardens against static steps: keeps the worst modal-peak excursion of every
/// generator-frequency row within omega_max when all victims step by their
/// residual load. Verified by direct simulation of the residual step.
DefensePlan defend_slaa(const GridCase& grid, const DynamicParams& params,
                        const EigenSolution& sol, const MatrixX& peaks,
                        const std::vector<int>& victims, const VectorX& vulnerable,
                        double omega_max_pu, double margin = 0.0);

/// Union of both constraint sets over shared protected-load variables.
DefensePlan defend_combined(const GridCase& grid, const DynamicParams& params,
                            const EigenSolution& sol, const std::vector<int>& victims,
                            const std::vector<Sensor>& sensors, const MatrixX& peaks,
                            const VectorX& vulnerable, double omega_max_pu,
                            double margin_dlaa = 1e-3, double margin_slaa = 0.0);

}  // namespace gridlaa
