#pragma once

// Shared fixtures: shipped cases with their default profiles, plus a two-bus
// system small enough to check against hand algebra, and solver shortcuts
// used across the suites.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridlaa/case.hpp"
#include "gridlaa/eigen_core.hpp"
#include "gridlaa/model.hpp"
#include "gridlaa/params.hpp"
#include "gridlaa/sensitivity.hpp"

namespace testutil {

inline std::string data_path(const std::string& name) {
    return std::string(GRIDLAA_DATA_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct CaseFixture {
    gridlaa::GridCase grid;
    gridlaa::DynamicParams params;
};

inline CaseFixture load_fixture(const std::string& stem) {
    CaseFixture fx;
    fx.grid = gridlaa::parse_case(read_file(data_path(stem + ".m")), stem).grid;
    fx.params = gridlaa::load_dynamic_params(read_file(data_path(stem + ".params")),
                                             fx.grid);
    return fx;
}

inline const CaseFixture& case6() {
    static CaseFixture fx = load_fixture("case6ww");
    return fx;
}

inline const CaseFixture& case14() {
    static CaseFixture fx = load_fixture("case14");
    return fx;
}

inline const CaseFixture& case39() {
    static CaseFixture fx = load_fixture("case39");
    return fx;
}

inline constexpr const char* kTwoBusCase = R"(function mpc = case2
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	345	1	1.1	0.9;
	2	1	100	0	0	0	1	1	0	345	1	1.1	0.9;
];
mpc.gen = [
	1	100	0	300	-300	1	100	1	300	0;
];
mpc.branch = [
	1	2	0	0.05	0	250	250	250	0	0	1	-360	360;
];
)";

inline constexpr const char* kTwoBusParams = R"(omega_nom = 50
omega_max = 2
inertia = 10
gen_damping = 1.5
kp = 3
ki = 10
load_damping = 1
vulnerable_fraction = 1.0
)";

inline CaseFixture two_bus() {
    CaseFixture fx;
    fx.grid = gridlaa::parse_case(kTwoBusCase, "case2").grid;
    fx.params = gridlaa::load_dynamic_params(kTwoBusParams, fx.grid);
    return fx;
}



inline gridlaa::EigenSolution solve_passive(const CaseFixture& fx) {
    using namespace gridlaa;
    return eigensolve(to_pencil(assemble_model(fx.grid, fx.params, passive_attack(fx.grid))));
}

inline gridlaa::EigenSolution solve_with_gain(const CaseFixture& fx,
                                              const gridlaa::GainTarget& t, double k) {
    using namespace gridlaa;
    AttackSpec atk = passive_attack(fx.grid);
    atk.victims = {t.victim};
    atk.sensors = {t.sensor};
    atk.exploration = true;  // sweeps probe gains past the budget on purpose
    if (t.sensor.kind == BusKind::generator)
        atk.gain_gen(t.victim, t.sensor.position) = k;
    else
        atk.gain_load(t.victim, t.sensor.position) = k;
    return eigensolve(to_pencil(assemble_model(fx.grid, fx.params, atk)));
}

inline int match_mode(const gridlaa::EigenSolution& sol, gridlaa::Complex ref) {
    int best = 0;
    double dist = std::abs(sol.lambda[0] - ref);
    for (int j = 1; j < sol.n_finite(); ++j) {
        const double d = std::abs(sol.lambda[j] - ref);
        if (d < dist) {
            dist = d;
            best = j;
        }
    }
    return best;
}

inline std::vector<gridlaa::Sensor> all_sensors(const gridlaa::GridCase& grid) {
    using namespace gridlaa;
    std::vector<Sensor> out;
    for (int g = 0; g < grid.n_gen(); ++g) out.push_back({BusKind::generator, g});
    for (int l = 0; l < grid.n_load(); ++l) out.push_back({BusKind::load, l});
    return out;
}

// hand-built modal data for exercising selection logic without a solver run;
// vectors carry the companion split [u; lam u] derived from the given uppers
inline gridlaa::EigenSolution synthetic_solution(int ng, int nl,
                                                 const std::vector<gridlaa::Complex>& lams,
                                                 const std::vector<gridlaa::VectorXc>& uppers_y,
                                                 const std::vector<gridlaa::VectorXc>& uppers_z) {
    using namespace gridlaa;
    const int n = ng + nl;
    const int nf = static_cast<int>(lams.size());
    EigenSolution sol;
    sol.n_gen = ng;
    sol.n_load = nl;
    sol.pencil.n_gen = ng;
    sol.pencil.n_load = nl;
    sol.lambda.resize(nf);
    sol.right.resize(2 * n, nf);
    sol.left.resize(2 * n, nf);
    for (int j = 0; j < nf; ++j) {
        sol.lambda[j] = lams[j];
        sol.right.col(j).head(n) = uppers_z[j];
        sol.right.col(j).tail(n) = lams[j] * uppers_z[j];
        sol.left.col(j).head(n) = uppers_y[j];
        sol.left.col(j).tail(n) = lams[j] * uppers_y[j];
    }
    return sol;
}

}  // namespace testutil
