#pragma once

#include <functional>
#include <vector>

#include "gridlaa/types.hpp"

namespace gridlaa {

using OdeFn = std::function<void(double t, const VectorX& x, VectorX& dxdt)>;
using OdeStop = std::function<bool(double t, const VectorX& x)>;

struct OdeResult {
    std::vector<double> t;
    std::vector<VectorX> x;
    bool stopped = false;  // the stop predicate fired; result truncated there
};

// Dormand-Prince 5(4) with embedded error control; lands exactly on the
// output grid t0, t0+dt_out, ... and finishes with a shorter segment at t1
// when the window is not a multiple.  Throws NumericalError on step collapse.
OdeResult integrate_rk45(const OdeFn& f, const VectorX& x0, double t0, double t1,
                         double dt_out, double rtol = 1e-9, double atol = 1e-12,
                         const OdeStop& stop = nullptr);

// classical fixed-step fourth-order Runge-Kutta fallback
OdeResult integrate_rk4(const OdeFn& f, const VectorX& x0, double t0, double t1, double dt);

}  // namespace gridlaa
