#include "gridlaa/simulate.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "gridlaa/eigen_core.hpp"
#include "gridlaa/errors.hpp"
#include "gridlaa/ode.hpp"

namespace gridlaa {

namespace {

constexpr double kDivergenceCap = 1e6;
constexpr double kEnvelopeWindow = 10.0;
constexpr double kEnvelopeSettle = 30.0;  // flat-start transient dies out first
constexpr size_t kEnvelopeFitMin = 4;
constexpr double kGrowthRateMin = 1e-3;
constexpr double kBisectRelWidth = 1e-3;
constexpr double kStabilityHorizon = 300.0;

Trajectory pack_trajectory(const OdeResult& ode, int n_gen, int n_load,
                           const std::function<void(const VectorX&, VectorX&)>& expand) {
    Trajectory traj;
    traj.n_gen = n_gen;
    traj.n_load = n_load;
    const int dim = traj.dim();
    const auto cols = static_cast<Eigen::Index>(ode.t.size());
    traj.t.resize(cols);
    traj.states.resize(dim, cols);
    VectorX full(dim);
    for (Eigen::Index k = 0; k < cols; ++k) {
        traj.t[k] = ode.t[static_cast<size_t>(k)];
        expand(ode.x[static_cast<size_t>(k)], full);
        traj.states.col(k) = full;
    }
    traj.truncated = ode.stopped;
    return traj;
}

bool diverged(const VectorX& x) {
    return !x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceCap;
}

}  // namespace

Trajectory integrate_linear(const SecondOrderModel& model, const VectorX& z0, double horizon,
                            double dt_out, double rtol, double atol) {
    const int ng = model.n_gen;
    const int nl = model.n_load;
    const int nn = model.n();
    if (z0.size() != 2 * nn && z0.size() != 0)
        throw ValidationError("initial state length must be twice the state count");

    const VectorX m_inv = model.mass.diagonal().head(ng).cwiseInverse();
    const MatrixX dll = model.damping.block(ng, ng, nl, nl);  // D^L - K^LL
    const MatrixX k_lg = -model.damping.block(ng, 0, nl, ng); // K^LG
    const MatrixX c_gg = model.damping.topLeftCorner(ng, ng);
    Eigen::PartialPivLU<MatrixX> dll_lu(dll);
    {
        const VectorX probe = dll_lu.solve(VectorX::Ones(nl));
        if (!probe.allFinite()) throw NumericalError("load damping block is singular");
    }

    // reduced state [delta; theta; omega]
    VectorX x0 = VectorX::Zero(nn + ng);
    if (z0.size() != 0) {
        x0.head(nn) = z0.head(nn);
        x0.tail(ng) = z0.segment(nn, ng);
    }

    VectorX gu(nn), phi(nl);
    auto rhs = [&](double, const VectorX& x, VectorX& dxdt) {
        const auto u = x.head(nn);
        const auto omega = x.tail(ng);
        gu.noalias() = model.stiffness * u;
        phi = dll_lu.solve(model.forcing.tail(nl) + k_lg * omega - gu.tail(nl));
        dxdt.resize(nn + ng);
        dxdt.head(ng) = omega;
        dxdt.segment(ng, nl) = phi;
        dxdt.tail(ng) =
            m_inv.cwiseProduct(model.forcing.head(ng) - c_gg * omega - gu.head(ng));
    };
    auto stop = [&](double, const VectorX& x) { return diverged(x); };

    OdeResult ode = integrate_rk45(rhs, x0, 0.0, horizon, dt_out, rtol, atol, stop);

    auto expand = [&](const VectorX& x, VectorX& full) {
        const auto u = x.head(nn);
        const auto omega = x.tail(ng);
        gu.noalias() = model.stiffness * u;
        phi = dll_lu.solve(model.forcing.tail(nl) + k_lg * omega - gu.tail(nl));
        full.head(nn) = u;
        full.segment(nn, ng) = omega;
        full.tail(nl) = phi;
    };
    return pack_trajectory(ode, ng, nl, expand);
}

NonlinearModel build_nonlinear(const GridCase& grid, const DynamicParams& params,
                               const AttackSpec& attack, const NonlinearOptions& opts) {
    validate_attack(attack, grid, params);
    NonlinearModel nl;
    nl.n_gen = grid.n_gen();
    nl.n_load = grid.n_load();
    for (const BranchRecord& br : grid.branches) {
        if (!br.in_service) continue;
        nl.edges.push_back({static_cast<double>(grid.index_of(br.from)),
                            static_cast<double>(grid.index_of(br.to)), 1.0 / br.reactance});
    }
    nl.inertia = params.inertia;
    nl.gen_damping = params.gen_damping;
    nl.kp = params.kp;
    nl.ki = params.ki;
    nl.load_damping = params.load_damping;
    nl.gain_gen = attack.gain_gen;
    nl.gain_load = attack.gain_load;
    nl.demand.resize(nl.n_load);
    for (int i = 0; i < nl.n_load; ++i) nl.demand[i] = grid.loads[i].demand_pu;
    nl.step = attack.step;
    nl.opts = opts;
    return nl;
}

Trajectory integrate_nonlinear(const NonlinearModel& nl, const VectorX& z0, double horizon,
                               double dt_out, double rtol, double atol) {
    const int ng = nl.n_gen;
    const int nload = nl.n_load;
    const int nn = nl.n();
    if (z0.size() != 2 * nn && z0.size() != 0)
        throw ValidationError("initial state length must be twice the state count");

    VectorX p = nl.demand;
    if (nl.opts.include_step) p += nl.step;

    Eigen::PartialPivLU<MatrixX> dll_lu;
    if (nl.opts.include_load_gain) {
        MatrixX dll = MatrixX(nl.load_damping.asDiagonal()) - nl.gain_load;
        dll_lu.compute(dll);
        if (!dll_lu.solve(VectorX::Ones(nload)).allFinite())
            throw NumericalError("load damping block is singular");
    }

    VectorX x0 = VectorX::Zero(nn + ng);
    if (z0.size() != 0) {
        x0.head(nn) = z0.head(nn);
        x0.tail(ng) = z0.segment(nn, ng);
    }

    VectorX flow(nn), load_rhs(nload);
    auto rhs = [&](double, const VectorX& x, VectorX& dxdt) {
        const auto omega = x.tail(ng);
        flow.setZero();
        for (const auto& e : nl.edges) {
            const int a = static_cast<int>(e[0]);
            const int b = static_cast<int>(e[1]);
            const double s = e[2] * std::sin(x[a] - x[b]);
            flow[a] += s;
            flow[b] -= s;
        }
        load_rhs = -p + nl.gain_gen * omega - flow.tail(nload);
        dxdt.resize(nn + ng);
        dxdt.head(ng) = omega;
        if (nl.opts.include_load_gain)
            dxdt.segment(ng, nload) = dll_lu.solve(load_rhs);
        else
            dxdt.segment(ng, nload) = load_rhs.cwiseQuotient(nl.load_damping);
        dxdt.tail(ng) = (-(nl.gen_damping + nl.kp).cwiseProduct(omega) -
                         nl.ki.cwiseProduct(x.head(ng)) - flow.head(ng))
                            .cwiseQuotient(nl.inertia);
    };
    auto stop = [&](double, const VectorX& x) { return diverged(x); };

    OdeResult ode = integrate_rk45(rhs, x0, 0.0, horizon, dt_out, rtol, atol, stop);

    auto expand = [&](const VectorX& x, VectorX& full) {
        VectorX dxdt;
        rhs(0.0, x, dxdt);
        full.head(nn) = x.head(nn);
        full.segment(nn, ng) = x.tail(ng);
        full.tail(nload) = dxdt.segment(ng, nload);  // phi = theta-dot
    };
    return pack_trajectory(ode, ng, nload, expand);
}

InstabilityReport detect_instability(Trajectory& traj, double omega_max_pu) {
    InstabilityReport rep;
    const int nn = traj.n();
    const int ng = traj.n_gen;
    const auto cols = traj.t.size();
    if (cols == 0) return rep;

    const auto omega_rows = traj.states.middleRows(nn, ng);
    const double cap = 10.0 * omega_max_pu;
    for (Eigen::Index k = 0; k < cols; ++k) {
        const double peak = omega_rows.col(k).cwiseAbs().maxCoeff();
        if (std::isnan(rep.first_limit_crossing) && peak > omega_max_pu)
            rep.first_limit_crossing = traj.t[k];
        if (peak > cap) {
            rep.unstable = true;
            rep.onset = traj.t[k];
            break;
        }
    }

    if (!rep.unstable && traj.truncated) {
        rep.unstable = true;
        rep.onset = traj.t[cols - 1];
    }

    if (!rep.unstable && cols >= 2) {
        const double dt = traj.t[1] - traj.t[0];
        const auto window = static_cast<Eigen::Index>(std::lround(kEnvelopeWindow / dt));
        if (window > 0) {
            std::vector<double> env;
            for (Eigen::Index start = 0; start + window <= cols; start += window) {
                double peak = 0.0;
                for (Eigen::Index k = start; k < start + window; ++k)
                    peak = std::max(peak, omega_rows.col(k).cwiseAbs().maxCoeff());
                env.push_back(peak);
            }
            // skip the settling windows, then least-squares fit of the log envelope;
            // a window with a near-zero peak means the system is quiet, not growing
            const auto skip = static_cast<size_t>(kEnvelopeSettle / kEnvelopeWindow);
            if (env.size() >= skip + kEnvelopeFitMin) {
                double sx = 0, sy = 0, sxx = 0, sxy = 0;
                size_t n = 0;
                bool degenerate = false;
                for (size_t w = skip; w < env.size(); ++w) {
                    if (env[w] < 1e-14) {
                        degenerate = true;
                        break;
                    }
                    const double x = kEnvelopeWindow * (static_cast<double>(w) + 0.5);
                    const double y = std::log(env[w]);
                    sx += x;
                    sy += y;
                    sxx += x * x;
                    sxy += x * y;
                    ++n;
                }
                if (!degenerate && n >= kEnvelopeFitMin) {
                    const double denom = static_cast<double>(n) * sxx - sx * sx;
                    const double rate = (static_cast<double>(n) * sxy - sx * sy) / denom;
                    if (rate > kGrowthRateMin) {
                        rep.unstable = true;
                        rep.onset = traj.t[0] + kEnvelopeSettle;
                    }
                }
            }
        }
    }

    traj.unstable = rep.unstable;
    traj.onset = rep.onset;
    traj.first_limit_crossing = rep.first_limit_crossing;
    return rep;
}

namespace {

AttackSpec single_gain_attack(const GridCase& grid, int victim, const Sensor& sensor,
                              double gain) {
    AttackSpec attack = passive_attack(grid);
    attack.victims = {victim};
    attack.sensors = {sensor};
    if (sensor.kind == BusKind::generator)
        attack.gain_gen(victim, sensor.position) = gain;
    else
        attack.gain_load(victim, sensor.position) = gain;
    attack.exploration = true;  // oracle probes may exceed the budget
    return attack;
}

bool linear_unstable(const GridCase& grid, const DynamicParams& params, int victim,
                     const Sensor& sensor, double gain) {
    const AttackSpec attack = single_gain_attack(grid, victim, sensor, gain);
    const SecondOrderModel model = assemble_model(grid, params, attack);
    const EigenSolution sol = eigensolve(to_pencil(model));
    return sol.lambda[0].real() > 0.0;
}

bool nonlinear_unstable(const GridCase& grid, const DynamicParams& params, int victim,
                        const Sensor& sensor, double gain, const NonlinearOptions& opts,
                        double omega_max_pu) {
    const AttackSpec attack = single_gain_attack(grid, victim, sensor, gain);
    const NonlinearModel nl = build_nonlinear(grid, params, attack, opts);
    Trajectory traj = integrate_nonlinear(nl, VectorX(), kStabilityHorizon, 1e-2);
    return detect_instability(traj, omega_max_pu).unstable;
}

}  // namespace

double bisect_true_gain(const GridCase& grid, const DynamicParams& params, int victim,
                        const Sensor& sensor, double lo, double hi, bool nonlinear,
                        const NonlinearOptions& opts) {
    if (!(lo >= 0.0) || !(hi > lo)) throw ValidationError("gain bracket must satisfy 0 <= lo < hi");
    const double omega_max = params.omega_max_pu();
    auto unstable = [&](double k) {
        return nonlinear ? nonlinear_unstable(grid, params, victim, sensor, k, opts, omega_max)
                         : linear_unstable(grid, params, victim, sensor, k);
    };
    if (unstable(lo)) throw ValidationError("gain bracket lower end is already unstable");
    if (!unstable(hi)) throw ValidationError("gain bracket upper end is still stable");
    while (hi - lo > kBisectRelWidth * hi) {
        const double mid = 0.5 * (lo + hi);
        (unstable(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

// grid peak with three-point parabolic refinement around the argmax
double peak_abs_row(const Trajectory& traj, int state_row) {
    const auto row = traj.states.row(state_row);
    Eigen::Index best = 0;
    double peak = 0.0;
    for (Eigen::Index k = 0; k < traj.t.size(); ++k) {
        const double v = std::abs(row[k]);
        if (v > peak) {
            peak = v;
            best = k;
        }
    }
    if (best > 0 && best + 1 < traj.t.size()) {
        const double ym = std::abs(row[best - 1]), y0 = peak, yp = std::abs(row[best + 1]);
        const double denom = ym - 2.0 * y0 + yp;
        if (denom < -1e-300) {
            const double delta = 0.5 * (ym - yp) / denom;
            peak = y0 - 0.25 * (ym - yp) * delta;
        }
    }
    return peak;
}

}  // namespace

StepSearch bisect_min_step(const GridCase& grid, const DynamicParams& params, int victim,
                           int row, double omega_max_pu, double horizon) {
    StepSearch out;
    const SecondOrderModel base = assemble_model(grid, params, passive_attack(grid));
    const int nn = base.n();
    if (row < 0 || row >= nn) throw ValidationError("output row out of range");
    if (victim < 0 || victim >= base.n_load) throw ValidationError("victim position out of range");

    auto peak_for = [&](double eps) {
        SecondOrderModel model = base;
        model.forcing = VectorX::Zero(nn);
        model.forcing[base.n_gen + victim] = -eps;  // deviation forcing
        const Trajectory traj = integrate_linear(model, VectorX(), horizon, 1e-3);
        return peak_abs_row(traj, nn + row);
    };

    out.unit_peak = peak_for(1.0);
    if (out.unit_peak < 1e-12) return out;  // no influence: unreachable
    out.reachable = true;

    double lo = 0.5 * omega_max_pu / out.unit_peak;
    double hi = 2.0 * omega_max_pu / out.unit_peak;
    auto unsafe = [&](double eps) { return peak_for(eps) >= omega_max_pu; };
    for (int i = 0; i < 8 && unsafe(lo); ++i) lo *= 0.5;
    for (int i = 0; i < 8 && !unsafe(hi); ++i) hi *= 2.0;
    if (unsafe(lo) || !unsafe(hi)) throw NumericalError("minimum-step bracket did not straddle");
    while (hi - lo > kBisectRelWidth * hi) {
        const double mid = 0.5 * (lo + hi);
        (unsafe(mid) ? hi : lo) = mid;
    }
    out.step = 0.5 * (lo + hi);
    return out;
}

}  // namespace gridlaa
