#include "gridlaa/ode.hpp"

#include <algorithm>
#include <cmath>

#include "gridlaa/errors.hpp"

namespace gridlaa {

namespace {

// Dormand-Prince tableau
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
constexpr double e1 = 35.0 / 384.0 - 5179.0 / 57600.0, e3 = 500.0 / 1113.0 - 7571.0 / 16695.0,
                 e4 = 125.0 / 192.0 - 393.0 / 640.0, e5 = -2187.0 / 6784.0 + 92097.0 / 339200.0,
                 e6 = 11.0 / 84.0 - 187.0 / 2100.0, e7 = -1.0 / 40.0;

}  // namespace

OdeResult integrate_rk45(const OdeFn& f, const VectorX& x0, double t0, double t1,
                         double dt_out, double rtol, double atol, const OdeStop& stop) {
    if (!(dt_out > 0.0) || !(t1 > t0)) throw ValidationError("integration window must advance");
    const Eigen::Index dim = x0.size();
    OdeResult out;
    out.t.push_back(t0);
    out.x.push_back(x0);
    if (stop && stop(t0, x0)) {
        out.stopped = true;
        return out;
    }

    VectorX x = x0;
    VectorX k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
    VectorX xs(dim), xnew(dim), err(dim);
    f(t0, x, k1);
    double h = dt_out / 8.0;
    const double h_min = 1e-13 * (t1 - t0);

    // full grid steps plus a short tail when the window is not a multiple
    const double span = t1 - t0;
    const long n_full = static_cast<long>(std::floor(span / dt_out + 1e-9));
    const bool tail = span - static_cast<double>(n_full) * dt_out > 1e-9 * dt_out;
    const long n_out = n_full + (tail ? 1 : 0);
    double t = t0;
    for (long k = 1; k <= n_out; ++k) {
        const double t_target = k <= n_full ? t0 + static_cast<double>(k) * dt_out : t1;
        while (t < t_target - 1e-12 * dt_out) {
            h = std::min(h, t_target - t);
            if (h < h_min) throw NumericalError("integrator step size collapsed");

            xs = x + h * (a21 * k1);
            f(t + h / 5.0, xs, k2);
            xs = x + h * (a31 * k1 + a32 * k2);
            f(t + 3.0 * h / 10.0, xs, k3);
            xs = x + h * (a41 * k1 + a42 * k2 + a43 * k3);
            f(t + 4.0 * h / 5.0, xs, k4);
            xs = x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            f(t + 8.0 * h / 9.0, xs, k5);
            xs = x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            f(t + h, xs, k6);
            xnew = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            f(t + h, xnew, k7);
            err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            double nrm = 0.0;
            for (Eigen::Index i = 0; i < dim; ++i) {
                const double sc = atol + rtol * std::max(std::abs(x[i]), std::abs(xnew[i]));
                const double q = err[i] / sc;
                nrm += q * q;
            }
            nrm = std::sqrt(nrm / std::max<double>(dim, 1));
            if (!std::isfinite(nrm)) {
                h *= 0.25;
                continue;
            }
            if (nrm <= 1.0) {
                t += h;
                x.swap(xnew);
                k1.swap(k7);  // first-same-as-last
                const double grow = nrm > 0.0 ? 0.9 * std::pow(nrm, -0.2) : 5.0;
                h *= std::clamp(grow, 0.2, 5.0);
            } else {
                h *= std::clamp(0.9 * std::pow(nrm, -0.2), 0.1, 0.9);
            }
        }
        t = t_target;
        out.t.push_back(t);
        out.x.push_back(x);
        if (stop && stop(t, x)) {
            out.stopped = true;
            return out;
        }
    }
    return out;
}

OdeResult integrate_rk4(const OdeFn& f, const VectorX& x0, double t0, double t1, double dt) {
    if (!(dt > 0.0) || !(t1 > t0)) throw ValidationError("integration window must advance");
    const Eigen::Index dim = x0.size();
    OdeResult out;
    out.t.push_back(t0);
    out.x.push_back(x0);

    VectorX x = x0;
    VectorX k1(dim), k2(dim), k3(dim), k4(dim), xs(dim);
    const double span = t1 - t0;
    const long n_full = static_cast<long>(std::floor(span / dt + 1e-9));
    const bool tail = span - static_cast<double>(n_full) * dt > 1e-9 * dt;
    const long n = n_full + (tail ? 1 : 0);
    for (long k = 1; k <= n; ++k) {
        const double t = t0 + static_cast<double>(k - 1) * dt;
        const double t_next = k <= n_full ? t0 + static_cast<double>(k) * dt : t1;
        const double hk = t_next - t;
        f(t, x, k1);
        xs = x + 0.5 * hk * k1;
        f(t + 0.5 * hk, xs, k2);
        xs = x + 0.5 * hk * k2;
        f(t + 0.5 * hk, xs, k3);
        xs = x + hk * k3;
        f(t + hk, xs, k4);
        x += (hk / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.t.push_back(t_next);
        out.x.push_back(x);
    }
    return out;
}

}  // namespace gridlaa
