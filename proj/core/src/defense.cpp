#include "gridlaa/defense.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "gridlaa/errors.hpp"
#include "gridlaa/model.hpp"
#include "gridlaa/response.hpp"
#include "gridlaa/simulate.hpp"

namespace gridlaa {

namespace {

constexpr int kMaxEscalations = 8;
constexpr int kRandomSplits = 16;
constexpr unsigned kSplitSeed = 12345;
constexpr double kPeakSlack = 1e-4;

struct Problem {
    const EigenSolution* sol = nullptr;
    std::vector<int> victims;
    VectorX vulnerable;
    double omega_max = 0.0;
    // DLAA side
    bool dlaa = false;
    std::vector<GainTarget> targets;
    MatrixX eig_rows;  // Re dlambda, n_f x n_targets
    VectorX re_lambda;
    // SLAA side
    bool slaa = false;
    MatrixX peaks;  // n_gen x n_load, signed
    const GridCase* grid = nullptr;
    const DynamicParams* params = nullptr;
};

LpSolution solve_plan_lp(const Problem& pb, double margin_d, double margin_s, VectorX& p_out,
                         VectorX& k_out) {
    const int nv = static_cast<int>(pb.victims.size());
    const int nt = static_cast<int>(pb.targets.size());
    const int nx = nv + nt;

    LinearProgram lp;
    lp.c = VectorX::Zero(nx);
    lp.c.head(nv).setOnes();
    lp.lower = VectorX::Zero(nx);
    lp.upper = VectorX::Constant(nx, std::numeric_limits<double>::infinity());
    lp.upper.head(nv) = pb.vulnerable;

    if (pb.dlaa) {
        lp.a_eq = MatrixX::Zero(nv, nx);
        lp.b_eq = VectorX::Zero(nv);
        for (int v = 0; v < nv; ++v) {
            lp.a_eq(v, v) = 0.5;
            for (int c = 0; c < nt; ++c)
                if (pb.targets[c].victim == pb.victims[v]) lp.a_eq(v, nv + c) = pb.omega_max;
            lp.b_eq[v] = 0.5 * pb.vulnerable[v];
        }
    }

    const int n_eig = pb.dlaa ? static_cast<int>(pb.re_lambda.size()) : 0;
    const int n_peak = pb.slaa ? static_cast<int>(pb.peaks.rows()) : 0;
    const int m_ub = n_eig + 2 * n_peak;
    lp.a_ub = MatrixX::Zero(m_ub, nx);
    lp.b_ub = VectorX::Zero(m_ub);
    for (int i = 0; i < n_eig; ++i) {
        for (int c = 0; c < nt; ++c) lp.a_ub(i, nv + c) = pb.eig_rows(i, c);
        lp.b_ub[i] = -margin_d - pb.re_lambda[i];
    }
    for (int r = 0; r < n_peak; ++r) {
        double full = 0.0;
        for (int v = 0; v < nv; ++v) full += pb.peaks(r, pb.victims[v]) * pb.vulnerable[v];
        for (int v = 0; v < nv; ++v) {
            lp.a_ub(n_eig + 2 * r, v) = -pb.peaks(r, pb.victims[v]);
            lp.a_ub(n_eig + 2 * r + 1, v) = pb.peaks(r, pb.victims[v]);
        }
        lp.b_ub[n_eig + 2 * r] = pb.omega_max - margin_s - full;
        lp.b_ub[n_eig + 2 * r + 1] = pb.omega_max - margin_s + full;
    }

    LpSolution sol = solve_lp(lp);
    if (sol.status == LpStatus::optimal) {
        p_out = sol.x.head(nv);
        k_out = sol.x.tail(nt);
    }
    return sol;
}

double attacked_dominant_re(const EigenSolution& base, const std::vector<GainTarget>& targets,
                            const VectorX& gains) {
    StatePencil pencil = base.pencil;
    for (size_t c = 0; c < targets.size(); ++c) {
        const GainPerturbation e =
            gain_perturbation(pencil, targets[c].victim, targets[c].sensor);
        pencil.a(e.row, e.col) += e.value * gains[static_cast<Eigen::Index>(c)];
    }
    const EigenSolution sol = eigensolve(pencil);
    return sol.lambda[0].real();
}

std::string binding_rows_message(const Problem& pb, double margin_d) {
    std::ostringstream os;
    os << "defense LP infeasible";
    if (pb.dlaa) {
        os << "; least-damped eigenvalue rows:";
        int shown = 0;
        for (Eigen::Index i = 0; i < pb.re_lambda.size() && shown < 3; ++i) {
            if (pb.re_lambda[i] > -margin_d - 1e-12) {
                os << " Re=" << pb.re_lambda[i];
                ++shown;
            }
        }
        if (shown == 0) os << " none at the current margin";
    }
    return os.str();
}

DefensePlan run_defense(Problem pb, double margin_d, double margin_s) {
    const int nv = static_cast<int>(pb.victims.size());
    DefensePlan plan;
    plan.victims = pb.victims;
    plan.targets = pb.targets;

    std::mt19937 rng(kSplitSeed);
    for (int attempt = 0; attempt <= kMaxEscalations; ++attempt) {
        VectorX p, k;
        LpSolution lp = solve_plan_lp(pb, margin_d, margin_s, p, k);
        if (lp.status == LpStatus::unbounded)
            throw NumericalError("defense LP unbounded");
        if (lp.status == LpStatus::infeasible)
            throw DefenseInfeasible(binding_rows_message(pb, margin_d));

        plan.protected_load = p;
        plan.residual = (pb.vulnerable - p).cwiseMax(0.0);
        plan.objective = lp.objective;
        plan.margin_dlaa = margin_d;
        plan.margin_slaa = margin_s;
        plan.escalations = attempt;
        plan.gain_values = k;
        plan.lp = lp;

        bool dlaa_ok = true, slaa_ok = true;
        if (pb.dlaa) {
            plan.predicted_dominant_re =
                (pb.re_lambda + pb.eig_rows * k).maxCoeff();
            double worst = attacked_dominant_re(*pb.sol, pb.targets, k);
            // adversarial splits of each victim's residual budget
            rng.seed(kSplitSeed);
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            for (int s = 0; s < kRandomSplits; ++s) {
                VectorX split = VectorX::Zero(k.size());
                for (int v = 0; v < nv; ++v) {
                    const double mass = plan.residual[v] / (2.0 * pb.omega_max);
                    std::vector<int> cols;
                    for (size_t c = 0; c < pb.targets.size(); ++c)
                        if (pb.targets[c].victim == pb.victims[v])
                            cols.push_back(static_cast<int>(c));
                    VectorX u(cols.size());
                    for (Eigen::Index q = 0; q < u.size(); ++q) u[q] = uni(rng);
                    const double total = u.sum();
                    if (total <= 0.0 || cols.empty()) continue;
                    for (size_t q = 0; q < cols.size(); ++q)
                        split[cols[q]] = mass * u[static_cast<Eigen::Index>(q)] / total;
                }
                worst = std::max(worst, attacked_dominant_re(*pb.sol, pb.targets, split));
            }
            plan.verified_dominant_re = worst;
            dlaa_ok = worst < 0.0;
        }
        if (pb.slaa) {
            SecondOrderModel model =
                assemble_model(*pb.grid, *pb.params, passive_attack(*pb.grid));
            model.forcing = VectorX::Zero(model.n());
            for (int v = 0; v < nv; ++v)
                model.forcing[model.n_gen + pb.victims[v]] = -plan.residual[v];
            const Trajectory traj = integrate_linear(model, VectorX(), 60.0, 1e-3);
            plan.verified_peak =
                traj.states.middleRows(model.n(), model.n_gen).cwiseAbs().maxCoeff();
            slaa_ok = plan.verified_peak <= pb.omega_max + kPeakSlack;
        }
        if (dlaa_ok && slaa_ok) return plan;

        if (!dlaa_ok) margin_d *= 2.0;
        if (!slaa_ok) margin_s = margin_s > 0.0 ? 2.0 * margin_s : 1e-3 * pb.omega_max;
    }
    throw DefenseInfeasible("defense verification still failing after margin escalation");
}

Problem make_problem(const EigenSolution& sol, const std::vector<int>& victims,
                     const VectorX& vulnerable, double omega_max) {
    if (static_cast<Eigen::Index>(victims.size()) != vulnerable.size())
        throw ValidationError("one vulnerable pool entry per victim required");
    for (int v : victims)
        if (v < 0 || v >= sol.n_load) throw ValidationError("victim position out of range");
    for (size_t i = 1; i < victims.size(); ++i)
        if (victims[i] <= victims[i - 1])
            throw ValidationError("victims must be ascending and unique");
    if (!(omega_max > 0.0)) throw ValidationError("safety limit must be positive");
    Problem pb;
    pb.sol = &sol;
    pb.victims = victims;
    pb.vulnerable = vulnerable;
    pb.omega_max = omega_max;
    return pb;
}

void add_dlaa(Problem& pb, const std::vector<Sensor>& sensors) {
    pb.dlaa = true;
    for (int v : pb.victims)
        for (const Sensor& s : sensors) pb.targets.push_back(GainTarget{v, s});
    const StabilityPolyhedron poly = build_polyhedron(*pb.sol, pb.targets);
    pb.eig_rows = poly.rows;
    pb.re_lambda = -poly.rhs;
}

void add_slaa(Problem& pb, const GridCase& grid, const DynamicParams& params,
              const MatrixX& peaks) {
    if (peaks.rows() != pb.sol->n_gen || peaks.cols() != pb.sol->n_load)
        throw ValidationError("peak table shape must be generators x loads");
    pb.slaa = true;
    pb.peaks = peaks;
    pb.grid = &grid;
    pb.params = &params;
}

}  // namespace

MatrixX influence_peaks(const EigenSolution& sol, double horizon) {
    MatrixX peaks = MatrixX::Zero(sol.n_gen, sol.n_load);
    for (int i = 0; i < sol.n_load; ++i)
        for (int n = 0; n < sol.n_gen; ++n) {
            const InfluenceFunction f = influence(sol, i, n, horizon);
            peaks(n, i) = f.degenerate ? 0.0 : f.peak_value;
        }
    return peaks;
}

DefensePlan defend_dlaa(const EigenSolution& sol, const std::vector<int>& victims,
                        const std::vector<Sensor>& sensors, const VectorX& vulnerable,
                        double omega_max_pu, double margin) {
    Problem pb = make_problem(sol, victims, vulnerable, omega_max_pu);
    add_dlaa(pb, sensors);
    return run_defense(std::move(pb), margin, 0.0);
}

DefensePlan defend_slaa(const GridCase& grid, const DynamicParams& params,
                        const EigenSolution& sol, const MatrixX& peaks,
                        const std::vector<int>& victims, const VectorX& vulnerable,
                        double omega_max_pu, double margin) {
    Problem pb = make_problem(sol, victims, vulnerable, omega_max_pu);
    add_slaa(pb, grid, params, peaks);
    return run_defense(std::move(pb), 0.0, margin);
}

DefensePlan defend_combined(const GridCase& grid, const DynamicParams& params,
                            const EigenSolution& sol, const std::vector<int>& victims,
                            const std::vector<Sensor>& sensors, const MatrixX& peaks,
                            const VectorX& vulnerable, double omega_max_pu,
                            double margin_dlaa, double margin_slaa) {
    Problem pb = make_problem(sol, victims, vulnerable, omega_max_pu);
    add_dlaa(pb, sensors);
    add_slaa(pb, grid, params, peaks);
    return run_defense(std::move(pb), margin_dlaa, margin_slaa);
}

}  // namespace gridlaa
