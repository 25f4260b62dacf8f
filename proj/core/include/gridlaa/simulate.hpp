#pragma once

#include <array>
#include <limits>
#include <vector>

#include "gridlaa/case.hpp"
#include "gridlaa/model.hpp"
#include "gridlaa/params.hpp"
#include "gridlaa/types.hpp"

namespace gridlaa {

struct Trajectory {
    VectorX t;
    MatrixX states;  // dim x T; column layout [delta; theta; omega; phi]
    int n_gen = 0;
    int n_load = 0;
    bool truncated = false;  // divergence guard cut the run short
    // event log, stamped by detect_instability
    bool unstable = false;
    double onset = std::numeric_limits<double>::quiet_NaN();
    double first_limit_crossing = std::numeric_limits<double>::quiet_NaN();

    int n() const { return n_gen + n_load; }
    int dim() const { return 2 * n(); }
};

// Integrates the descriptor system by eliminating the algebraic load rows:
// load frequencies solve (D^L - K^LL) phi = f_L + K^LG w - [G u]_L each step,
// generators integrate the swing rows, phi is reconstructed for output.
// Trajectories are driven by model.forcing; pass the deviation forcing
// [0; -eps] to study responses about the pre-attack operating point.
Trajectory integrate_linear(const SecondOrderModel& model, const VectorX& z0, double horizon,
                            double dt_out, double rtol = 1e-9, double atol = 1e-12);

struct NonlinearOptions {
    bool include_step = false;       // carry the static step into the load rows
    bool include_load_gain = false;  // carry the K^LL feedback block
    bool operator==(const NonlinearOptions&) const = default;
};

// Sine-coupled swing model: generator buses keep second-order dynamics, load
// buses stay first-order with the K^LG frequency feedback; branch flows use
// sin of angle differences.  Reduces to the linear model for small angles.
struct NonlinearModel {
    std::vector<std::array<double, 3>> edges;  // {bus a, bus b, weight 1/x}
    VectorX inertia, gen_damping, kp, ki;      // generator rows
    VectorX load_damping;                      // load rows
    MatrixX gain_gen;                          // K^LG
    MatrixX gain_load;                         // K^LL, applied only when enabled
    VectorX demand;                            // pre-attack load p^LS
    VectorX step;                              // static alteration eps
    NonlinearOptions opts;
    int n_gen = 0;
    int n_load = 0;

    int n() const { return n_gen + n_load; }
};

NonlinearModel build_nonlinear(const GridCase& grid, const DynamicParams& params,
                               const AttackSpec& attack, const NonlinearOptions& opts = {});

// Flat start (angles and frequencies zero) with the demand applied at t=0.
Trajectory integrate_nonlinear(const NonlinearModel& nl, const VectorX& z0, double horizon,
                               double dt_out, double rtol = 1e-9, double atol = 1e-12);

struct InstabilityReport {
    bool unstable = false;
    double onset = std::numeric_limits<double>::quiet_NaN();
    double first_limit_crossing = std::numeric_limits<double>::quiet_NaN();
};

// Flags a run whose generator frequencies exceed 10x the safety limit or whose
// 10 s |omega| envelope has a fitted exponential growth rate above 1e-3 1/s
// (least squares on the log envelope after a 30 s settling skip). Stamps the
// trajectory's event-log fields and returns the report.
InstabilityReport detect_instability(Trajectory& traj, double omega_max_pu);

// Smallest gain at (victim, sensor) that destabilizes the true system, by
// bisection to relative width 1e-3.  Linear mode classifies by the dominant
// eigenvalue of the attacked pencil; nonlinear mode by simulated detection.
double bisect_true_gain(const GridCase& grid, const DynamicParams& params, int victim,
                        const Sensor& sensor, double lo, double hi, bool nonlinear,
                        const NonlinearOptions& opts = {});

struct StepSearch {
    double step = 0.0;
    bool reachable = false;
    double unit_peak = 0.0;  // simulated peak per unit step
};

// Smallest static step at the victim whose simulated peak |omega| on output
// row n reaches omega_max, by bisection to relative width 1e-3.
StepSearch bisect_min_step(const GridCase& grid, const DynamicParams& params, int victim,
                           int row, double omega_max_pu, double horizon = 30.0);

}  // namespace gridlaa
