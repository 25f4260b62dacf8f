#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/LU>

#include "gridlaa/simplex.hpp"
#include "support.hpp"

using namespace gridlaa;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

LinearProgram make_lp(int n) {
    LinearProgram lp;
    lp.c = VectorX::Zero(n);
    lp.lower = VectorX::Zero(n);
    lp.upper = VectorX::Constant(n, kInf);
    return lp;
}

void add_ub(LinearProgram& lp, const std::vector<double>& row, double rhs) {
    const int n = lp.n_vars();
    const int m = static_cast<int>(lp.b_ub.size());
    MatrixX a(m + 1, n);
    if (m > 0) a.topRows(m) = lp.a_ub;
    for (int j = 0; j < n; ++j) a(m, j) = row[static_cast<size_t>(j)];
    VectorX b(m + 1);
    if (m > 0) b.head(m) = lp.b_ub;
    b[m] = rhs;
    lp.a_ub = a;
    lp.b_ub = b;
}

void add_eq(LinearProgram& lp, const std::vector<double>& row, double rhs) {
    const int n = lp.n_vars();
    const int m = static_cast<int>(lp.b_eq.size());
    MatrixX a(m + 1, n);
    if (m > 0) a.topRows(m) = lp.a_eq;
    for (int j = 0; j < n; ++j) a(m, j) = row[static_cast<size_t>(j)];
    VectorX b(m + 1);
    if (m > 0) b.head(m) = lp.b_eq;
    b[m] = rhs;
    lp.a_eq = a;
    lp.b_eq = b;
}

// brute-force optimum: enumerate candidate active sets (all equalities plus
// enough inequality/bound rows), solve each square system, keep the best
// feasible point
double enumerate_optimum(const LinearProgram& lp, bool& found) {
    const int n = lp.n_vars();
    const int m_eq = static_cast<int>(lp.b_eq.size());
    const int m_ub = static_cast<int>(lp.b_ub.size());

    struct Plane {
        VectorX a;
        double b;
    };
    std::vector<Plane> planes;
    for (int r = 0; r < m_ub; ++r) planes.push_back({lp.a_ub.row(r).transpose(), lp.b_ub[r]});
    for (int i = 0; i < n; ++i) {
        VectorX e = VectorX::Zero(n);
        e[i] = 1.0;
        if (std::isfinite(lp.lower[i])) planes.push_back({e, lp.lower[i]});
        if (std::isfinite(lp.upper[i])) planes.push_back({e, lp.upper[i]});
    }

    const int need = n - m_eq;
    const int np = static_cast<int>(planes.size());
    std::vector<int> pick(static_cast<size_t>(need));
    double best = kInf;
    found = false;

    auto try_active = [&]() {
        MatrixX a(n, n);
        VectorX b(n);
        for (int r = 0; r < m_eq; ++r) {
            a.row(r) = lp.a_eq.row(r);
            b[r] = lp.b_eq[r];
        }
        for (int k = 0; k < need; ++k) {
            a.row(m_eq + k) = planes[static_cast<size_t>(pick[static_cast<size_t>(k)])]
                                  .a.transpose();
            b[m_eq + k] = planes[static_cast<size_t>(pick[static_cast<size_t>(k)])].b;
        }
        Eigen::FullPivLU<MatrixX> lu(a);
        if (!lu.isInvertible()) return;
        VectorX x = lu.solve(b);
        for (int i = 0; i < n; ++i)
            if (x[i] < lp.lower[i] - 1e-9 || x[i] > lp.upper[i] + 1e-9) return;
        for (int r = 0; r < m_ub; ++r)
            if (lp.a_ub.row(r).dot(x) > lp.b_ub[r] + 1e-9) return;
        for (int r = 0; r < m_eq; ++r)
            if (std::abs(lp.a_eq.row(r).dot(x) - lp.b_eq[r]) > 1e-9) return;
        found = true;
        best = std::min(best, lp.c.dot(x));
    };

    // odometer over combinations of size `need` from `np` planes
    if (need == 0) {
        try_active();
        return best;
    }
    for (int k = 0; k < need; ++k) pick[static_cast<size_t>(k)] = k;
    while (true) {
        try_active();
        int k = need - 1;
        while (k >= 0 && pick[static_cast<size_t>(k)] == np - need + k) --k;
        if (k < 0) break;
        ++pick[static_cast<size_t>(k)];
        for (int q = k + 1; q < need; ++q)
            pick[static_cast<size_t>(q)] = pick[static_cast<size_t>(q - 1)] + 1;
    }
    return best;
}

}  // namespace

TEST_CASE("two-variable polytope lands on the tight vertex") {
    LinearProgram lp = make_lp(2);
    lp.c << -1.0, -1.0;
    add_ub(lp, {1.0, 2.0}, 4.0);
    add_ub(lp, {3.0, 1.0}, 6.0);
    LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::optimal);
    CHECK(sol.x[0] == doctest::Approx(1.6).epsilon(1e-10));
    CHECK(sol.x[1] == doctest::Approx(1.2).epsilon(1e-10));
    CHECK(sol.objective == doctest::Approx(-2.8).epsilon(1e-10));
    CHECK(sol.duality_gap < 1e-7);
    CHECK(sol.dual_infeasibility < 1e-7);
    // both rows bind, so the duals price them and reproduce the objective
    CHECK(sol.dual_ub[0] <= 0.0);
    CHECK(sol.dual_ub[1] <= 0.0);
    CHECK(sol.dual_ub.dot(lp.b_ub) == doctest::Approx(sol.objective).epsilon(1e-10));
}

TEST_CASE("equality with a box picks the cheapest split") {
    LinearProgram lp = make_lp(3);
    lp.c << 1.0, 2.0, 3.0;
    lp.upper = VectorX::Constant(3, 0.6);
    add_eq(lp, {1.0, 1.0, 1.0}, 1.0);
    LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::optimal);
    CHECK(sol.x[0] == doctest::Approx(0.6).epsilon(1e-10));
    CHECK(sol.x[1] == doctest::Approx(0.4).epsilon(1e-10));
    CHECK(sol.x[2] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(sol.objective == doctest::Approx(1.4).epsilon(1e-10));
    CHECK(sol.duality_gap < 1e-7);
}

TEST_CASE("shifted, free, and upper-bounded variables resolve correctly") {
    {
        LinearProgram lp = make_lp(1);
        lp.c << 1.0;
        lp.lower << -3.0;
        LpSolution sol = solve_lp(lp);
        REQUIRE(sol.status == LpStatus::optimal);
        CHECK(sol.x[0] == doctest::Approx(-3.0).epsilon(1e-12));
    }
    {
        LinearProgram lp = make_lp(2);
        lp.c << 1.0, 0.0;
        lp.lower << -kInf, 0.0;
        lp.upper << kInf, 5.0;
        add_eq(lp, {1.0, 1.0}, 2.0);
        LpSolution sol = solve_lp(lp);
        REQUIRE(sol.status == LpStatus::optimal);
        CHECK(sol.x[0] == doctest::Approx(-3.0).epsilon(1e-10));
        CHECK(sol.x[1] == doctest::Approx(5.0).epsilon(1e-10));
    }
    {
        LinearProgram lp = make_lp(1);
        lp.c << -1.0;
        lp.lower << 2.0;
        lp.upper << 5.0;
        add_ub(lp, {1.0}, 4.0);
        LpSolution sol = solve_lp(lp);
        REQUIRE(sol.status == LpStatus::optimal);
        CHECK(sol.x[0] == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(sol.dual_ub[0] == doctest::Approx(-1.0).epsilon(1e-10));
    }
}

TEST_CASE("infeasible and unbounded problems are classified") {
    {
        LinearProgram lp = make_lp(2);
        add_eq(lp, {1.0, 1.0}, 1.0);
        add_eq(lp, {1.0, 1.0}, 2.0);
        CHECK(solve_lp(lp).status == LpStatus::infeasible);
    }
    {
        LinearProgram lp = make_lp(1);
        lp.c << -1.0;
        CHECK(solve_lp(lp).status == LpStatus::unbounded);
    }
    {
        LinearProgram lp = make_lp(1);
        lp.lower << 1.0;
        lp.upper << 0.5;  // empty box
        CHECK(solve_lp(lp).status == LpStatus::infeasible);
    }
    {
        LinearProgram lp = make_lp(1);
        add_ub(lp, {1.0}, -1.0);  // x <= -1 against x >= 0
        CHECK(solve_lp(lp).status == LpStatus::infeasible);
    }
    {
        LinearProgram lp = make_lp(2);
        lp.a_eq = MatrixX::Ones(1, 1);  // shape mismatch
        lp.b_eq = VectorX::Ones(1);
        CHECK_THROWS_AS((void)solve_lp(lp), ValidationError);
    }
}

TEST_CASE("degenerate pivoting terminates on the classic cycling example") {
    // Dantzig pricing cycles forever here; Bland's rule must terminate at
    // x = (1/25, 0, 1, 0) with objective -1/20
    LinearProgram lp = make_lp(4);
    lp.c << -0.75, 150.0, -0.02, 6.0;
    add_ub(lp, {0.25, -60.0, -1.0 / 25.0, 9.0}, 0.0);
    add_ub(lp, {0.5, -90.0, -1.0 / 50.0, 3.0}, 0.0);
    add_ub(lp, {0.0, 0.0, 1.0, 0.0}, 1.0);
    LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::optimal);
    CHECK(sol.objective == doctest::Approx(-0.05).epsilon(1e-10));
    CHECK(sol.x[0] == doctest::Approx(0.04).epsilon(1e-9));
    CHECK(sol.x[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(sol.x[2] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sol.x[3] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(sol.duality_gap < 1e-7);
}

TEST_CASE("random boxed instances agree with vertex enumeration") {
    std::mt19937 rng(424242);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> rhs(0.2, 1.5);
    std::uniform_int_distribution<int> nvars(2, 4);
    std::uniform_int_distribution<int> nrows(2, 5);
    std::uniform_real_distribution<double> boxw(0.5, 3.0);

    for (int trial = 0; trial < 25; ++trial) {
        const int n = nvars(rng);
        const int m = nrows(rng);
        LinearProgram lp = make_lp(n);
        for (int i = 0; i < n; ++i) {
            lp.c[i] = coef(rng);
            lp.upper[i] = boxw(rng);
        }
        for (int r = 0; r < m; ++r) {
            std::vector<double> row(static_cast<size_t>(n));
            for (double& v : row) v = coef(rng);
            add_ub(lp, row, rhs(rng));  // the origin stays feasible
        }
        if (trial % 3 == 0) {
            // pin one equality through a point inside the box
            VectorX x0(n);
            for (int i = 0; i < n; ++i)
                x0[i] = 0.25 * lp.upper[i];
            std::vector<double> row(static_cast<size_t>(n));
            for (double& v : row) v = coef(rng);
            double dot = 0.0;
            for (int i = 0; i < n; ++i) dot += row[static_cast<size_t>(i)] * x0[i];
            add_eq(lp, row, dot);
        }

        bool found = false;
        const double brute = enumerate_optimum(lp, found);
        LpSolution sol = solve_lp(lp);
        if (!found) {
            CHECK(sol.status != LpStatus::optimal);
            continue;
        }
        REQUIRE(sol.status == LpStatus::optimal);
        CHECK(sol.objective == doctest::Approx(brute).epsilon(1e-8));
        CHECK(sol.duality_gap < 1e-7);
        CHECK(sol.dual_infeasibility < 1e-7);
        for (int i = 0; i < n; ++i) {
            CHECK(sol.x[i] >= lp.lower[i] - 1e-9);
            CHECK(sol.x[i] <= lp.upper[i] + 1e-9);
        }
        for (int r = 0; r < lp.b_ub.size(); ++r)
            CHECK(lp.a_ub.row(r).dot(sol.x) <= lp.b_ub[r] + 1e-8);
        for (int r = 0; r < lp.b_eq.size(); ++r)
            CHECK(std::abs(lp.a_eq.row(r).dot(sol.x) - lp.b_eq[r]) <= 1e-8);

        // bit-for-bit determinism on a repeat solve
        LpSolution again = solve_lp(lp);
        REQUIRE(again.status == LpStatus::optimal);
        CHECK(again.iterations == sol.iterations);
        for (int i = 0; i < n; ++i) CHECK(again.x[i] == sol.x[i]);
    }
}
