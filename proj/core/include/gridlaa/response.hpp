#pragma once

#include <vector>

#include "gridlaa/eigen_core.hpp"
#include "gridlaa/sensitivity.hpp"
#include "gridlaa/types.hpp"

namespace gridlaa {

// (exp(lam*t) - 1) / lam; series branch near lam*t = 0 covers integrator modes
Complex phi1(Complex lam, double t);

// Closed-form step response of the descriptor system under constant forcing
// [f0; 0] from initial state z0.  Modal coefficients follow
//   a_j(t)    = phi1(lam_j, t) * (y_j^T f0) + exp(lam_j t) * (y_j^T A z0)
//   adot_j(t) = exp(lam_j t) * (y_j^T f0) + lam_j exp(lam_j t) * (y_j^T A z0)
// and the assembled state uses a_j for the angle block and adot_j for the
// frequency block so the algebraic load rows carry their t=0+ jump.
struct StepResponse {
    VectorXc lambda;
    VectorXc force_weight;  // y_j^T f0 per mode
    VectorXc init_weight;   // y_j^T A z0 per mode
    MatrixXc right;         // mode shapes, 2N x n_f
    int n_gen = 0;
    int n_load = 0;
    VectorX t_grid;
    MatrixX states;          // 2N x |t_grid|, columns are [delta; theta; omega; phi]
    double imag_residue = 0.0;  // max |Im| discarded while assembling

    int n() const { return n_gen + n_load; }
    int dim() const { return 2 * n(); }
    int n_modes() const { return static_cast<int>(lambda.size()); }

    // state at an arbitrary time, same convention as the grid columns
    VectorX state_at(double t) const;
};

StepResponse step_response(const EigenSolution& sol, const VectorX& f0, const VectorX& z0,
                           const VectorX& t_grid);

// Per-unit frequency response at one output row n to a unit static load step
// at load position i:
//   f(t)     = sum_j phi1(lam_j, t) * k_ji * z_j[N+n],   k_ji = -y_j[N_G+i]
//   df/dt(t) = sum_j exp(lam_j t) * k_ji * z_j[N+n]
// The peak is the largest |f| over the horizon: every derivative root is
// refined by bisection and competes with the horizon endpoint. On generator
// rows f equals the frequency deviation itself; on load rows it measures the
// deviation past the algebraic t=0+ jump.
struct InfluenceFunction {
    int load = -1;  // load position i
    int row = -1;   // output row n into the frequency block
    VectorXc lambda;
    VectorXc weight;  // k_ji * z_j[N+n] per mode
    double peak_time = 0.0;
    double peak_value = 0.0;  // signed f(peak_time)
    bool monotone = false;    // no derivative root inside the horizon
    bool degenerate = false;  // zero forcing column

    double value(double t) const;
    double derivative(double t) const;
    double steady_state() const;
};

InfluenceFunction influence(const EigenSolution& sol, int load, int row,
                            double horizon = 60.0);

// Minimum static load change driving the output row to the safety limit.
struct MinUnsafeStep {
    double step = 0.0;            // omega_max / |peak|
    bool reachable = false;       // peak magnitude > 0
    bool within_vulnerable = false;
};

MinUnsafeStep min_unsafe_step(const InfluenceFunction& influ, double omega_max,
                              double vulnerable);

// Derivative of the assembled step-response trajectory with respect to the
// gain at (victim, sensor), chain-ruled through lam_j, y_j, z_j.  Columns
// align with t_grid; rows with the state layout.
MatrixX step_response_sensitivity(const EigenSolution& sol, const GainTarget& target,
                                  const VectorX& f0, const VectorX& z0,
                                  const VectorX& t_grid);

}  // namespace gridlaa
