#include "gridlaa/sensitivity.hpp"

#include <algorithm>
#include <cmath>

#include "gridlaa/errors.hpp"

namespace gridlaa {

namespace {

constexpr double kClusterGap = 1e-7;

// y^T E z for the single-entry perturbation E = value at (row, col); both
// indices live in the first N states, so re-embedding plays no role here.
Complex perturbation_product(const GainPerturbation& e, const VectorXc& y, const VectorXc& z) {
    return e.value * y[e.row] * z[e.col];
}

}  // namespace

Complex eigvalue_sensitivity(const EigenSolution& sol, int mode, const GainTarget& target) {
    if (mode < 0 || mode >= sol.n_finite()) throw ValidationError("mode index out of range");
    GainPerturbation e = gain_perturbation(sol.pencil, target.victim, target.sensor);
    const Complex lam = sol.lambda[mode];
    // dlambda = -lambda * y^T E z with E embedded in the damping block of A
    return -lam * perturbation_product(e, sol.left.col(mode), sol.right.col(mode));
}

VectorXc spectrum_sensitivity(const EigenSolution& sol, const GainTarget& target) {
    VectorXc out(sol.n_finite());
    for (int j = 0; j < sol.n_finite(); ++j) out[j] = eigvalue_sensitivity(sol, j, target);
    return out;
}

VectorSensitivity eigvector_sensitivity(const EigenSolution& sol, int mode,
                                        const GainTarget& target) {
    if (mode < 0 || mode >= sol.n_finite()) throw ValidationError("mode index out of range");
    const int nf = sol.n_finite();
    const int n = sol.n();
    const int ng = sol.n_gen;
    const int nl = sol.n_load;
    GainPerturbation e = gain_perturbation(sol.pencil, target.victim, target.sensor);

    const Complex lam = sol.lambda[mode];
    const VectorXc zj = sol.right.col(mode);
    const VectorXc yj = sol.left.col(mode);

    VectorSensitivity out;
    out.dlambda = -lam * perturbation_product(e, yj, zj);
    out.dright = VectorXc::Zero(sol.dim());
    out.dleft = VectorXc::Zero(sol.dim());

    // dA in the perturbation direction scales with lambda_j in both sums and
    // dB vanishes, so each coefficient is a scaled single-entry product.
    for (int l = 0; l < nf; ++l) {
        if (l == mode) continue;
        const Complex gap = lam - sol.lambda[l];
        if (std::abs(gap) < kClusterGap)
            throw NumericalError("eigenvector sensitivity undefined near a clustered spectrum");
        const Complex a_jl =
            -lam * perturbation_product(e, sol.left.col(l), zj) / gap;
        const Complex b_jl =
            -lam * perturbation_product(e, yj, sol.right.col(l)) / gap;
        out.dright += a_jl * sol.right.col(l);
        out.dleft += b_jl * sol.left.col(l);
    }
    // a_jj = b_jj = -1/2 y^T dA z keeps d(y^T A z) = 0 with an even split
    const Complex a_jj = -0.5 * perturbation_product(e, yj, zj);
    out.dright += a_jj * zj;
    out.dleft += a_jj * yj;

    // load-frequency rows follow the differentiated companion identity
    // d(lambda u_theta) = dlambda u_theta + lambda du_theta
    for (int i = 0; i < nl; ++i) {
        out.dright[n + ng + i] = out.dlambda * zj[ng + i] + lam * out.dright[ng + i];
        out.dleft[n + ng + i] = out.dlambda * yj[ng + i] + lam * out.dleft[ng + i];
    }
    return out;
}

VectorXc predict_spectrum(const EigenSolution& sol,
                          const std::vector<std::pair<GainTarget, double>>& gains) {
    VectorXc nu = sol.lambda;
    for (const auto& [target, value] : gains) {
        for (int j = 0; j < sol.n_finite(); ++j)
            nu[j] += eigvalue_sensitivity(sol, j, target) * value;
    }
    return nu;
}

CriticalGain min_destabilizing_gain(const EigenSolution& sol, const GainTarget& target) {
    CriticalGain best;
    for (int j = 0; j < sol.n_finite(); ++j) {
        const double slope = eigvalue_sensitivity(sol, j, target).real();
        if (slope <= 0.0) continue;
        const double k = std::max(0.0, -sol.lambda[j].real()) / slope;
        if (!best.destabilizable || k < best.gain) {
            best.destabilizable = true;
            best.gain = k;
            best.mode = j;
        }
    }
    return best;
}

std::vector<RankedTarget> least_effort_ranking(const EigenSolution& sol,
                                               const std::vector<int>& victims,
                                               const std::vector<Sensor>& sensors,
                                               const GridCase& grid) {
    std::vector<RankedTarget> out;
    for (int v : victims)
        for (const Sensor& s : sensors) {
            RankedTarget r;
            r.target = GainTarget{v, s};
            r.critical = min_destabilizing_gain(sol, r.target);
            out.push_back(r);
        }

    auto sensor_bus = [&](const Sensor& s) {
        return s.kind == BusKind::generator ? grid.buses[s.position].id
                                            : grid.loads[s.position].bus;
    };
    std::sort(out.begin(), out.end(), [&](const RankedTarget& a, const RankedTarget& b) {
        if (a.critical.destabilizable != b.critical.destabilizable)
            return a.critical.destabilizable;  // destabilizable pairs first
        if (a.critical.destabilizable && a.critical.gain != b.critical.gain)
            return a.critical.gain < b.critical.gain;
        int va = grid.loads[a.target.victim].bus;
        int vb = grid.loads[b.target.victim].bus;
        if (va != vb) return va < vb;
        if (a.target.sensor.kind != b.target.sensor.kind)
            return a.target.sensor.kind == BusKind::generator;
        return sensor_bus(a.target.sensor) < sensor_bus(b.target.sensor);
    });
    return out;
}

StabilityPolyhedron build_polyhedron(const EigenSolution& sol,
                                     const std::vector<GainTarget>& targets) {
    StabilityPolyhedron poly;
    poly.columns = targets;
    poly.rows.resize(sol.n_finite(), static_cast<Eigen::Index>(targets.size()));
    poly.rhs.resize(sol.n_finite());
    for (int j = 0; j < sol.n_finite(); ++j) {
        poly.rhs[j] = -sol.lambda[j].real();
        for (size_t c = 0; c < targets.size(); ++c)
            poly.rows(j, static_cast<Eigen::Index>(c)) =
                eigvalue_sensitivity(sol, j, targets[c]).real();
    }
    return poly;
}

}  // namespace gridlaa
