#pragma once

#include <vector>

#include "gridlaa/case.hpp"
#include "gridlaa/params.hpp"
#include "gridlaa/types.hpp"

namespace gridlaa {

/// DC susceptance matrix in the canonical bus order and its generator/load
/// partition. `full` is the weighted graph Laplacian of the in-service
/// network: full(i,j) = -sum(1/x) over parallel branches i-j, diagonal =
/// negative row sum, so row sums vanish and the matrix is PSD.
struct SusceptanceBlocks {
    MatrixX full;  // N x N
    MatrixX gg;    // N_G x N_G
    MatrixX gl;    // N_G x N_L
    MatrixX lg;    // N_L x N_G
    MatrixX ll;    // N_L x N_L
};

SusceptanceBlocks build_susceptance(const GridCase& grid);

/// Where a feedback gain senses its frequency signal.
struct Sensor {
    BusKind kind = BusKind::generator;
    int position = 0;  // index within the generator block or the load block

    bool operator==(const Sensor&) const = default;
};

/// A load-altering attack: victim load buses, sensed buses, feedback gains,
/// and a static load-alteration step. Gains are zero outside
/// victims x sensors. Steps and vulnerable pools are in p.u. power; gains map
/// p.u. frequency deviation to p.u. power.
struct AttackSpec {
    std::vector<int> victims;   // load positions, ascending
    std::vector<Sensor> sensors;
    MatrixX gain_gen;   // N_L x N_G, K^LG
    MatrixX gain_load;  // N_L x N_L, K^LL
    VectorX step;       // N_L, static load change (deviation from demand)
    VectorX vulnerable; // N_L, attacker-reachable pool p^LV
    /// Waives the gain budget and step bounds for sweeps that deliberately
    /// exceed what the vulnerable pool allows; reported in CLI artifacts.
    bool exploration = false;
};

/// A no-gain, no-step attack sized for the case (vulnerable pool from the
/// load records).
AttackSpec passive_attack(const GridCase& grid);

/// Checks support, budget and step bounds. Budget per victim v:
/// sum_s K_{v,s} * omega_max_pu <= (p^LV_v - eps_v) / 2, skipped under
/// exploration. Steps must stay within [-demand, p^LV].
void validate_attack(const AttackSpec& attack, const GridCase& grid,
                     const DynamicParams& params);

/// Second-order descriptor form  M u'' + C u' + G u = f0  in u = [delta;
/// theta]. The mass matrix is diag(inertia, 0); the damping matrix couples
/// the attack gains into the load rows; the stiffness matrix is the
/// susceptance Laplacian plus the integral governor gains.
struct SecondOrderModel {
    MatrixX mass;       // N x N
    MatrixX damping;    // N x N
    MatrixX stiffness;  // N x N
    VectorX forcing;    // N, deviation forcing f0 = [0; -step]
    int n_gen = 0;
    int n_load = 0;

    int n() const { return n_gen + n_load; }
};

SecondOrderModel assemble_model(const GridCase& grid, const DynamicParams& params,
                                const AttackSpec& attack);

/// First-order companion (Duncan) pencil A z' + B z = [f0; 0] over
/// z = [u; u']. A = [[C, M], [M, 0]] is singular by construction: the load
/// rows of M vanish, so the trailing N_L rows and columns of both A and B are
/// identically zero. eigensolve() deflates exactly that block.
struct StatePencil {
    MatrixX a;  // 2N x 2N
    MatrixX b;  // 2N x 2N
    int n_gen = 0;
    int n_load = 0;

    int n() const { return n_gen + n_load; }
    int dim() const { return 2 * n(); }
};

StatePencil to_pencil(const SecondOrderModel& model);

/// Perturbation of A w.r.t. one feedback gain K_{v,s}: a single entry in the
/// damping block, -1 at (load row of v, column of s). Returned as the sparse
/// coordinate (row, col) in full state dimensions; B does not depend on the
/// gains.
struct GainPerturbation {
    int row = 0;   // n_gen + v
    int col = 0;   // sensor column within the first N states
    double value = -1.0;
};

GainPerturbation gain_perturbation(const StatePencil& pencil, int victim,
                                   const Sensor& sensor);

}  // namespace gridlaa
