#include "gridlaa/response.hpp"

#include <cmath>
#include <complex>

#include "gridlaa/errors.hpp"
#include "gridlaa/model.hpp"

namespace gridlaa {

namespace {

constexpr double kSeriesCutoff = 1e-5;
constexpr double kScanStep = 1e-3;
constexpr double kDerivTol = 1e-10;
constexpr int kMaxBisect = 200;

// d/dlam [(exp(lam t) - 1)/lam], with the matching series branch
Complex phi1_dlam(Complex lam, double t) {
    const Complex w = lam * t;
    if (std::abs(w) < kSeriesCutoff) {
        const double t2 = t * t;
        return t2 * (0.5 + w * (1.0 / 3.0 + w * (0.125 + w / 30.0)));
    }
    const Complex ex = std::exp(w);
    return t * ex / lam - (ex - 1.0) / (lam * lam);
}

}  // namespace

Complex phi1(Complex lam, double t) {
    const Complex w = lam * t;
    if (std::abs(w) < kSeriesCutoff)
        return t * (1.0 + w * (0.5 + w * (1.0 / 6.0 + w / 24.0)));
    return (std::exp(w) - 1.0) / lam;
}

VectorX StepResponse::state_at(double t) const {
    const int nn = n();
    VectorXc u = VectorXc::Zero(nn);
    VectorXc udot = VectorXc::Zero(nn);
    for (int j = 0; j < n_modes(); ++j) {
        const Complex lam = lambda[j];
        const Complex ex = std::exp(lam * t);
        const Complex a = phi1(lam, t) * force_weight[j] + ex * init_weight[j];
        const Complex adot = ex * force_weight[j] + lam * ex * init_weight[j];
        u += a * right.col(j).head(nn);
        udot += adot * right.col(j).head(nn);
    }
    VectorX out(2 * nn);
    out.head(nn) = u.real();
    out.tail(nn) = udot.real();
    return out;
}

StepResponse step_response(const EigenSolution& sol, const VectorX& f0, const VectorX& z0,
                           const VectorX& t_grid) {
    const int nn = sol.n();
    if (f0.size() != nn) throw ValidationError("forcing vector length must match state count");
    if (z0.size() != 2 * nn && z0.size() != 0)
        throw ValidationError("initial state length must be twice the state count");
    for (Eigen::Index k = 0; k + 1 < t_grid.size(); ++k)
        if (!(t_grid[k] < t_grid[k + 1])) throw ValidationError("time grid must be increasing");
    if (t_grid.size() > 0 && t_grid[0] < 0.0)
        throw ValidationError("time grid must be nonnegative");

    StepResponse r;
    r.lambda = sol.lambda;
    r.right = sol.right;
    r.n_gen = sol.n_gen;
    r.n_load = sol.n_load;
    r.t_grid = t_grid;

    const int nf = sol.n_finite();
    r.force_weight.resize(nf);
    r.init_weight.resize(nf);
    const VectorXc f0c = f0.cast<Complex>();
    for (int j = 0; j < nf; ++j)
        r.force_weight[j] = (sol.left.col(j).head(nn).array() * f0c.array()).sum();
    if (z0.size() == 0 || z0.isZero(0.0)) {
        r.init_weight.setZero();
    } else {
        const MatrixXc a_c = sol.pencil.a.cast<Complex>();
        const VectorXc az0 = a_c * z0.cast<Complex>();
        for (int j = 0; j < nf; ++j)
            r.init_weight[j] = (sol.left.col(j).array() * az0.array()).sum();
    }

    r.states.resize(2 * nn, t_grid.size());
    for (Eigen::Index k = 0; k < t_grid.size(); ++k) {
        const double t = t_grid[k];
        VectorXc u = VectorXc::Zero(nn);
        VectorXc udot = VectorXc::Zero(nn);
        for (int j = 0; j < nf; ++j) {
            const Complex lam = r.lambda[j];
            const Complex ex = std::exp(lam * t);
            const Complex a = phi1(lam, t) * r.force_weight[j] + ex * r.init_weight[j];
            const Complex adot = ex * r.force_weight[j] + lam * ex * r.init_weight[j];
            u += a * r.right.col(j).head(nn);
            udot += adot * r.right.col(j).head(nn);
        }
        const double resid = std::max(u.imag().cwiseAbs().maxCoeff(),
                                      udot.imag().cwiseAbs().maxCoeff());
        r.imag_residue = std::max(r.imag_residue, resid);
        r.states.col(k).head(nn) = u.real();
        r.states.col(k).tail(nn) = udot.real();
    }
    return r;
}

double InfluenceFunction::value(double t) const {
    Complex s = 0.0;
    for (Eigen::Index j = 0; j < lambda.size(); ++j) s += phi1(lambda[j], t) * weight[j];
    return s.real();
}

double InfluenceFunction::derivative(double t) const {
    Complex s = 0.0;
    for (Eigen::Index j = 0; j < lambda.size(); ++j)
        s += std::exp(lambda[j] * t) * weight[j];
    return s.real();
}

double InfluenceFunction::steady_state() const {
    Complex s = 0.0;
    for (Eigen::Index j = 0; j < lambda.size(); ++j) s += -weight[j] / lambda[j];
    return s.real();
}

InfluenceFunction influence(const EigenSolution& sol, int load, int row, double horizon) {
    const int nn = sol.n();
    if (load < 0 || load >= sol.n_load) throw ValidationError("load position out of range");
    if (row < 0 || row >= nn) throw ValidationError("output row out of range");

    InfluenceFunction f;
    f.load = load;
    f.row = row;
    const int nf = sol.n_finite();
    f.lambda = sol.lambda;
    f.weight.resize(nf);
    double scale = 0.0;
    for (int j = 0; j < nf; ++j) {
        const Complex k_ji = -sol.left(sol.n_gen + load, j);
        f.weight[j] = k_ji * sol.right(nn + row, j);
        scale = std::max(scale, std::abs(f.weight[j]));
    }
    if (scale < 1e-14) {
        f.degenerate = true;
        return f;
    }

    // scan every sign change of the derivative; a later swing can exceed the
    // first one, so all stationary points compete with the horizon endpoint.
    // The t=0 root on generator rows is skipped by starting one step in.
    std::vector<Complex> phase(nf), ratio(nf);
    for (int j = 0; j < nf; ++j) {
        ratio[j] = std::exp(f.lambda[j] * kScanStep);
        phase[j] = f.weight[j] * ratio[j];
    }
    auto sum_phase = [&]() {
        Complex s = 0.0;
        for (int j = 0; j < nf; ++j) s += phase[j];
        return s.real();
    };
    auto refine_root = [&](double lo, double hi) {
        double dlo = f.derivative(lo);
        for (int it = 0; it < kMaxBisect; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double dm = f.derivative(mid);
            if (std::abs(dm) < kDerivTol || hi - lo < 1e-15) return mid;
            if (dlo * dm <= 0.0) {
                hi = mid;
            } else {
                lo = mid;
                dlo = dm;
            }
        }
        return 0.5 * (lo + hi);
    };

    f.monotone = true;
    f.peak_time = horizon;
    f.peak_value = f.value(horizon);
    double prev_t = kScanStep;
    double prev_d = sum_phase();
    const long steps = std::lround(horizon / kScanStep);
    for (long k = 2; k <= steps; ++k) {
        for (int j = 0; j < nf; ++j) phase[j] *= ratio[j];
        const double t = static_cast<double>(k) * kScanStep;
        const double d = sum_phase();
        if (prev_d == 0.0 || prev_d * d < 0.0) {
            f.monotone = false;
            const double root = refine_root(prev_t, t);
            const double v = f.value(root);
            if (std::abs(v) > std::abs(f.peak_value)) {
                f.peak_time = root;
                f.peak_value = v;
            }
        }
        prev_t = t;
        prev_d = d;
    }
    return f;
}

MinUnsafeStep min_unsafe_step(const InfluenceFunction& influ, double omega_max,
                              double vulnerable) {
    MinUnsafeStep m;
    const double peak = std::abs(influ.peak_value);
    if (influ.degenerate || peak < 1e-15) return m;
    m.reachable = true;
    m.step = omega_max / peak;
    m.within_vulnerable = m.step <= vulnerable + 1e-12;
    return m;
}

MatrixX step_response_sensitivity(const EigenSolution& sol, const GainTarget& target,
                                  const VectorX& f0, const VectorX& z0,
                                  const VectorX& t_grid) {
    const int nn = sol.n();
    const int nf = sol.n_finite();
    if (f0.size() != nn) throw ValidationError("forcing vector length must match state count");

    const VectorXc f0c = f0.cast<Complex>();
    const bool has_init = z0.size() != 0 && !z0.isZero(0.0);
    MatrixXc a_c;
    VectorXc az0;
    if (has_init) {
        a_c = sol.pencil.a.cast<Complex>();
        az0 = a_c * z0.cast<Complex>();
    }
    const GainPerturbation e = gain_perturbation(sol.pencil, target.victim, target.sensor);

    // per-mode baseline weights and their parametric derivatives
    VectorXc fw(nf), iw(nf), dfw(nf), diw(nf), dlam(nf);
    MatrixXc dz(2 * nn, nf);
    for (int j = 0; j < nf; ++j) {
        fw[j] = (sol.left.col(j).head(nn).array() * f0c.array()).sum();
        iw[j] = has_init ? Complex((sol.left.col(j).array() * az0.array()).sum()) : Complex(0.0);
        VectorSensitivity vs = eigvector_sensitivity(sol, j, target);
        dlam[j] = vs.dlambda;
        dz.col(j) = vs.dright;
        dfw[j] = (vs.dleft.head(nn).array() * f0c.array()).sum();
        diw[j] = 0.0;
        if (has_init) {
            diw[j] = (vs.dleft.array() * az0.array()).sum();
            // d(y^T A z0) also carries y^T dA z0 through the gain entry
            diw[j] += e.value * sol.left(e.row, j) * Complex(z0[e.col]);
        }
    }

    MatrixX out(2 * nn, t_grid.size());
    for (Eigen::Index k = 0; k < t_grid.size(); ++k) {
        const double t = t_grid[k];
        VectorXc du = VectorXc::Zero(nn);
        VectorXc dudot = VectorXc::Zero(nn);
        for (int j = 0; j < nf; ++j) {
            const Complex lam = sol.lambda[j];
            const Complex ex = std::exp(lam * t);
            const Complex ph = phi1(lam, t);
            const Complex a = ph * fw[j] + ex * iw[j];
            const Complex adot = ex * fw[j] + lam * ex * iw[j];
            const Complex da = dlam[j] * phi1_dlam(lam, t) * fw[j] + ph * dfw[j] +
                               dlam[j] * t * ex * iw[j] + ex * diw[j];
            const Complex dadot = dlam[j] * t * ex * fw[j] + ex * dfw[j] +
                                  dlam[j] * (ex + lam * t * ex) * iw[j] + lam * ex * diw[j];
            du += da * sol.right.col(j).head(nn) + a * dz.col(j).head(nn);
            dudot += dadot * sol.right.col(j).head(nn) + adot * dz.col(j).head(nn);
        }
        out.col(k).head(nn) = du.real();
        out.col(k).tail(nn) = dudot.real();
    }
    return out;
}

}  // namespace gridlaa
