#pragma once

#include <optional>
#include <vector>

#include "gridlaa/eigen_core.hpp"
#include "gridlaa/model.hpp"
#include "gridlaa/types.hpp"

namespace gridlaa {

/// One feedback-gain coordinate K_{v,s}: victim load position v, sensed bus s.
struct GainTarget {
    int victim = 0;
    Sensor sensor;

    bool operator==(const GainTarget&) const = default;
};

/// d(lambda_j)/dK_{v,s} at the solved operating point:
///   -lambda_j * y_j^T E_{v,s} z_j
/// with E_{v,s} the single-entry damping-block perturbation (-1 at the victim
/// load row, sensor column). O(1) per mode once the solution is in hand.
Complex eigvalue_sensitivity(const EigenSolution& sol, int mode, const GainTarget& target);

/// All modes at once, ordered like sol.lambda.
VectorXc spectrum_sensitivity(const EigenSolution& sol, const GainTarget& target);

/// First-order eigenvector derivatives in the modal expansion
/// dz_j = sum_l a_jl z_l, dy_j = sum_l b_jl y_l with
///   a_jl = -y_l^T [lambda_j dA] z_j / (lambda_j - lambda_l)   (l != j)
///   b_jl = -y_j^T [lambda_j dA] z_l / (lambda_j - lambda_l)
///   a_jj = b_jj = -1/2 y_j^T dA z_j
/// (dB = 0 for gain perturbations). The diagonal fixes the gauge implied by
/// d(y^T A z) = 0 split evenly; the load-frequency rows are re-embedded via
/// the differentiated companion identity d(lambda u_theta).
struct VectorSensitivity {
    Complex dlambda;
    VectorXc dright;
    VectorXc dleft;
};

VectorSensitivity eigvector_sensitivity(const EigenSolution& sol, int mode,
                                        const GainTarget& target);

/// First-order spectrum under a multi-point gain assignment: nu_i = lambda_i
/// + sum over (target, gain) of d(lambda_i)/dK * K. Linear superposition of
/// single-point sensitivities, all evaluated at the zero-gain base point.
VectorXc predict_spectrum(const EigenSolution& sol,
                          const std::vector<std::pair<GainTarget, double>>& gains);

/// Smallest single-point gain predicted to move some eigenvalue into the
/// right half plane: min over modes with Re d(lambda)/dK > 0 of
/// -Re(lambda_j) / Re(dlambda_j/dK). Modes already unstable make the answer
/// zero; when no mode has a destabilizing derivative the target is reported
/// not destabilizable.
struct CriticalGain {
    bool destabilizable = false;
    double gain = 0.0;
    int mode = -1;  // argmin mode index
};

CriticalGain min_destabilizing_gain(const EigenSolution& sol, const GainTarget& target);

/// Ranked (victim, sensor) pairs by predicted critical gain, ascending.
/// Non-destabilizable pairs sort last. Ties break by lower victim bus id,
/// then generator sensors before load sensors, then lower sensor bus id.
struct RankedTarget {
    GainTarget target;
    CriticalGain critical;
};

std::vector<RankedTarget> least_effort_ranking(const EigenSolution& sol,
                                               const std::vector<int>& victims,
                                               const std::vector<Sensor>& sensors,
                                               const GridCase& grid);

/// Stability region in gain space, one strict inequality per finite mode:
///   Re(lambda_i) + sum_c Re(dlambda_i/dK_c) k_c < 0.
/// Rows follow sol.lambda order; columns follow the target list.
struct StabilityPolyhedron {
    MatrixX rows;             // n_f x n_targets, Re dlambda/dK
    VectorX rhs;              // n_f, -Re lambda
    std::vector<GainTarget> columns;
};

StabilityPolyhedron build_polyhedron(const EigenSolution& sol,
                                     const std::vector<GainTarget>& targets);

}  // namespace gridlaa
