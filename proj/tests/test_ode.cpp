#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gridlaa/errors.hpp"
#include "gridlaa/ode.hpp"

using namespace gridlaa;

namespace {

// x' = -x + sin t from x(0) = 1:
// x(t) = (sin t - cos t)/2 + (3/2) e^-t
double forced_decay(double t) {
    return 0.5 * (std::sin(t) - std::cos(t)) + 1.5 * std::exp(-t);
}

const OdeFn kForcedDecay = [](double t, const VectorX& x, VectorX& dxdt) {
    dxdt[0] = -x[0] + std::sin(t);
};

// circular oscillator preserves the radius exactly
const OdeFn kCircle = [](double, const VectorX& x, VectorX& dxdt) {
    dxdt[0] = -x[1];
    dxdt[1] = x[0];
};

}  // namespace

TEST_CASE("adaptive integrator tracks a forced linear solution to tolerance") {
    VectorX x0 = VectorX::Ones(1);
    OdeResult r = integrate_rk45(kForcedDecay, x0, 0.0, 12.0, 0.25);
    REQUIRE(r.t.size() == 49);
    REQUIRE_FALSE(r.stopped);
    for (size_t k = 0; k < r.t.size(); ++k) {
        // grid landing is exact, not merely close
        CHECK(r.t[k] == 0.25 * static_cast<double>(k));
        CHECK(std::abs(r.x[k][0] - forced_decay(r.t[k])) <= 1e-8);
    }
}

TEST_CASE("adaptive integrator conserves the oscillator radius at tight tolerance") {
    VectorX x0(2);
    x0 << 1.0, 0.0;
    OdeResult r = integrate_rk45(kCircle, x0, 0.0, 20.0 * M_PI, 0.5, 1e-11, 1e-13);
    // the horizon is not a grid multiple; the tail segment must end there
    REQUIRE(r.t.back() == 20.0 * M_PI);
    const VectorX& last = r.x.back();
    CHECK(std::abs(std::hypot(last[0], last[1]) - 1.0) <= 1e-8);
    // ten full revolutions return to the start
    CHECK(std::abs(last[0] - 1.0) <= 1e-7);
    CHECK(std::abs(last[1]) <= 1e-7);
}

TEST_CASE("fixed-step integrator converges at fourth order") {
    VectorX x0 = VectorX::Ones(1);
    auto err_at = [&](double dt) {
        OdeResult r = integrate_rk4(kForcedDecay, x0, 0.0, 4.0, dt);
        return std::abs(r.x.back()[0] - forced_decay(4.0));
    };
    const double e1 = err_at(0.1);
    const double e2 = err_at(0.05);
    CHECK(e1 / e2 > 10.0);  // halving dt buys ~16x
    CHECK(e1 / e2 < 30.0);
    CHECK(e2 <= 1e-6);
}

TEST_CASE("stop predicate truncates the trajectory at the triggering sample") {
    VectorX x0 = VectorX::Ones(1);
    OdeStop stop = [](double, const VectorX& x) { return x[0] < 0.5; };
    OdeResult r = integrate_rk45(kForcedDecay, x0, 0.0, 12.0, 0.1, 1e-9, 1e-12, stop);
    REQUIRE(r.stopped);
    CHECK(r.x.back()[0] < 0.5);
    // every earlier sample was still above the threshold
    for (size_t k = 0; k + 1 < r.x.size(); ++k) CHECK(r.x[k][0] >= 0.5);
    CHECK(r.t.back() < 12.0);
}

TEST_CASE("finite-time blowup collapses the step and throws") {
    const OdeFn blowup = [](double, const VectorX& x, VectorX& dxdt) {
        dxdt[0] = x[0] * x[0];
    };
    VectorX x0 = VectorX::Ones(1);
    // x' = x^2 from 1 diverges at t = 1; the controller cannot pass it
    CHECK_THROWS_AS((void)integrate_rk45(blowup, x0, 0.0, 2.0, 0.1), NumericalError);
}
