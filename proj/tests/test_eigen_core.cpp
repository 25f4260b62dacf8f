#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <random>
#include <vector>

#include "gridlaa/eigen_core.hpp"
#include "gridlaa/errors.hpp"
#include "gridlaa/model.hpp"
#include "support.hpp"

using namespace gridlaa;

namespace {

SecondOrderModel scalar_model(double m, double c, double g) {
    SecondOrderModel out;
    out.mass = MatrixX::Constant(1, 1, m);
    out.damping = MatrixX::Constant(1, 1, c);
    out.stiffness = MatrixX::Constant(1, 1, g);
    out.forcing = VectorX::Zero(1);
    out.n_gen = 1;
    out.n_load = 0;
    return out;
}

EigenSolution solve_case(const testutil::CaseFixture& fx, const AttackSpec& atk) {
    return eigensolve(to_pencil(assemble_model(fx.grid, fx.params, atk)));
}

EigenSolution solve_case(const testutil::CaseFixture& fx) {
    return solve_case(fx, passive_attack(fx.grid));
}

// independent spectrum: eliminate the algebraic load rows into an ordinary
// eigenproblem over [delta; theta; omega]
VectorXc elimination_spectrum(const testutil::CaseFixture& fx, const AttackSpec& atk) {
    SecondOrderModel m = assemble_model(fx.grid, fx.params, atk);
    const int ng = m.n_gen, nl = m.n_load, n = ng + nl;
    MatrixX dinv = m.damping.bottomRightCorner(nl, nl).inverse();
    MatrixX klg = -m.damping.bottomLeftCorner(nl, ng);
    MatrixX minv = m.mass.topLeftCorner(ng, ng).inverse();

    MatrixX r = MatrixX::Zero(n + ng, n + ng);
    r.block(0, n, ng, ng).setIdentity();
    r.block(ng, 0, nl, n) = -dinv * m.stiffness.bottomRows(nl);
    r.block(ng, n, nl, ng) = dinv * klg;
    r.block(n, 0, ng, n) = -minv * m.stiffness.topRows(ng);
    r.block(n, n, ng, ng) = -minv * m.damping.topLeftCorner(ng, ng);
    return Eigen::EigenSolver<MatrixX>(r, false).eigenvalues();
}

double spectrum_mismatch(const VectorXc& a, const VectorXc& b) {
    REQUIRE(a.size() == b.size());
    std::vector<bool> used(b.size(), false);
    double worst = 0.0;
    for (int i = 0; i < a.size(); ++i) {
        double best = 1e300;
        int arg = -1;
        for (int j = 0; j < b.size(); ++j) {
            if (used[j]) continue;
            double d = std::abs(a[i] - b[j]);
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        used[arg] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

TEST_CASE("scalar oscillator yields its characteristic roots") {
    EigenSolution sol = eigensolve(to_pencil(scalar_model(1, 2, 5)));
    REQUIRE(sol.n_finite() == 2);
    // sorted by decreasing real part, ties by increasing imaginary part
    CHECK(sol.lambda[0].real() == doctest::Approx(-1.0));
    CHECK(sol.lambda[0].imag() == doctest::Approx(-2.0));
    CHECK(sol.lambda[1].real() == doctest::Approx(-1.0));
    CHECK(sol.lambda[1].imag() == doctest::Approx(2.0));
}

TEST_CASE("decoupled blocks give the union of per-block roots") {
    SecondOrderModel m;
    m.mass = VectorX::Ones(2).asDiagonal();
    m.damping = Eigen::Vector2d(2, 4).asDiagonal();
    m.stiffness = Eigen::Vector2d(5, 8).asDiagonal();
    m.forcing = VectorX::Zero(2);
    m.n_gen = 2;
    m.n_load = 0;
    EigenSolution sol = eigensolve(to_pencil(m));
    REQUIRE(sol.n_finite() == 4);
    VectorXc expect(4);
    expect << Complex(-1, -2), Complex(-1, 2), Complex(-2, -2), Complex(-2, 2);
    for (int j = 0; j < 4; ++j) {
        CHECK(sol.lambda[j].real() == doctest::Approx(expect[j].real()));
        CHECK(sol.lambda[j].imag() == doctest::Approx(expect[j].imag()));
    }
}

TEST_CASE("a repeated spectrum is rejected instead of silently repaired") {
    SecondOrderModel m;
    m.mass = VectorX::Ones(2).asDiagonal();
    m.damping = Eigen::Vector2d(2, 2).asDiagonal();
    m.stiffness = Eigen::Vector2d(5, 5).asDiagonal();
    m.forcing = VectorX::Zero(2);
    m.n_gen = 2;
    m.n_load = 0;
    CHECK_THROWS_AS(eigensolve(to_pencil(m)), NumericalError);
}

TEST_CASE("two-bus spectrum matches the frozen reference values") {
    EigenSolution sol = solve_case(testutil::two_bus());
    REQUIRE(sol.n_finite() == 3);
    CHECK(sol.lambda[0].real() == doctest::Approx(-0.276288149).epsilon(1e-7));
    CHECK(sol.lambda[0].imag() == doctest::Approx(-0.963753139).epsilon(1e-7));
    CHECK(sol.lambda[1].real() == doctest::Approx(-0.276288149).epsilon(1e-7));
    CHECK(sol.lambda[1].imag() == doctest::Approx(0.963753139).epsilon(1e-7));
    CHECK(sol.lambda[2].real() == doctest::Approx(-19.897423701).epsilon(1e-7));
    CHECK(std::abs(sol.lambda[2].imag()) < 1e-12);
}

TEST_CASE("solution satisfies the pencil and normalization residuals") {
    for (const auto* fx :
         {&testutil::case6(), &testutil::case14(), &testutil::case39()}) {
        EigenSolution sol = solve_case(*fx);
        const MatrixX& a = sol.pencil.a;
        const MatrixX& b = sol.pencil.b;
        const double scale = a.norm() + b.norm();

        CHECK(sol.n_finite() == 2 * fx->grid.n_gen() + fx->grid.n_load());
        CHECK(sol.ortho_residual <= 1e-8);

        MatrixXc gram = sol.left.transpose() * a.cast<Complex>() * sol.right;
        gram.diagonal().array() -= 1.0;
        CHECK(gram.cwiseAbs().maxCoeff() <= 1e-8);

        for (int j = 0; j < sol.n_finite(); ++j) {
            VectorXc z = sol.right.col(j);
            VectorXc y = sol.left.col(j);
            MatrixXc pen = sol.lambda[j] * a.cast<Complex>() + b.cast<Complex>();
            CHECK((pen * z).norm() <= 1e-8 * scale * z.norm());
            CHECK((y.transpose() * pen).norm() <= 1e-8 * scale * y.norm());

            // companion structure z = [u; lambda u], y = [b; lambda b]
            const int n = sol.n();
            CHECK((z.tail(n) - sol.lambda[j] * z.head(n)).norm() <=
                  1e-8 * z.norm());
            CHECK((y.tail(n) - sol.lambda[j] * y.head(n)).norm() <=
                  1e-8 * y.norm());
        }
    }
}

TEST_CASE("modes are sorted and closed under conjugation") {
    EigenSolution sol = solve_case(testutil::case14());
    for (int j = 1; j < sol.n_finite(); ++j) {
        const Complex prev = sol.lambda[j - 1];
        const Complex cur = sol.lambda[j];
        CHECK((prev.real() > cur.real() ||
               (prev.real() == doctest::Approx(cur.real()).epsilon(1e-12) &&
                prev.imag() <= cur.imag())));
    }
    for (int j = 0; j < sol.n_finite(); ++j) {
        if (std::abs(sol.lambda[j].imag()) < 1e-12) continue;
        bool found = false;
        for (int k = 0; k < sol.n_finite(); ++k) {
            if (std::abs(sol.lambda[k] - std::conj(sol.lambda[j])) < 1e-9) {
                CHECK((sol.right.col(k) - sol.right.col(j).conjugate()).norm() <=
                      1e-8 * sol.right.col(j).norm());
                found = true;
                break;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("eigenvector phase is pinned and the solve is reproducible") {
    EigenSolution a = solve_case(testutil::case6());
    EigenSolution b = solve_case(testutil::case6());
    CHECK((a.lambda - b.lambda).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.right - b.right).cwiseAbs().maxCoeff() == 0.0);
    for (int j = 0; j < a.n_finite(); ++j) {
        Eigen::Index arg;
        a.right.col(j).cwiseAbs().maxCoeff(&arg);
        const Complex top = a.right(arg, j);
        CHECK(top.real() > 0.0);
        CHECK(std::abs(top.imag()) <= 1e-10 * std::abs(top));
    }
}

TEST_CASE("spectrum matches the algebraic-elimination oracle") {
    for (const auto* fx :
         {&testutil::case6(), &testutil::case14(), &testutil::case39()}) {
        EigenSolution sol = solve_case(*fx);
        VectorXc oracle = elimination_spectrum(*fx, passive_attack(fx->grid));
        CHECK(spectrum_mismatch(sol.lambda, oracle) < 1e-6);
    }
}

TEST_CASE("elimination oracle also agrees under feedback gains") {
    testutil::CaseFixture fx = testutil::case39();
    AttackSpec atk = passive_attack(fx.grid);
    atk.victims = {fx.grid.load_position(19)};
    atk.sensors = {Sensor{BusKind::generator, fx.grid.gen_position(33)}};
    atk.exploration = true;
    atk.gain_gen(fx.grid.load_position(19), fx.grid.gen_position(33)) = 10.0;
    EigenSolution sol = solve_case(fx, atk);
    CHECK(spectrum_mismatch(sol.lambda, elimination_spectrum(fx, atk)) < 1e-6);
}

TEST_CASE("relabeling bus ids leaves the spectrum unchanged") {
    // swap external ids 4 and 6; same network, different canonical order
    GridCase orig = testutil::case6().grid;
    GridCase relabeled = orig;
    auto swap_id = [](int id) { return id == 4 ? 6 : id == 6 ? 4 : id; };
    for (auto& b : relabeled.buses) b.id = swap_id(b.id);
    for (auto& l : relabeled.loads) l.bus = swap_id(l.bus);
    for (auto& br : relabeled.branches) {
        br.from = swap_id(br.from);
        br.to = swap_id(br.to);
    }
    GridCase canonical = parse_case(serialize_case(relabeled)).grid;
    CHECK(canonical.buses[3].id == 4);

    DynamicParams params = load_dynamic_params(
        testutil::read_file(testutil::data_path("case6ww.params")), canonical);
    EigenSolution a = solve_case(testutil::case6());
    EigenSolution b = eigensolve(
        to_pencil(assemble_model(canonical, params, passive_attack(canonical))));
    CHECK(spectrum_mismatch(a.lambda, b.lambda) < 1e-10);
}

TEST_CASE("transfer map reproduces static gain and direct solves") {
    SUBCASE("zero forcing maps to zero") {
        EigenSolution sol = solve_case(testutil::two_bus());
        VectorXc out = transfer_apply(sol, Complex(0.5, 0.5),
                                      VectorXc::Zero(sol.dim()));
        CHECK(out.norm() == 0.0);
    }
    SUBCASE("scalar static gain is the stiffness inverse") {
        EigenSolution sol = eigensolve(to_pencil(scalar_model(1, 2, 5)));
        VectorXc p(2);
        p << 1.0, 0.0;
        VectorXc out = transfer_apply(sol, Complex(0, 0), p);
        CHECK(std::abs(out[0] - 0.2) < 1e-9);
        CHECK(std::abs(out[1]) < 1e-9);
    }
    SUBCASE("matches the deflated direct solve across cases") {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        for (const auto* fx :
             {&testutil::case6(), &testutil::case14(), &testutil::case39()}) {
            EigenSolution sol = solve_case(*fx);
            const int n = sol.n();
            const int m = n + sol.n_gen;
            for (int trial = 0; trial < 10; ++trial) {
                Complex s(unit(rng) * 2.0 - 0.5, unit(rng) * 4.0);
                if ((sol.lambda.array() - s).abs().minCoeff() < 1e-2) continue;
                VectorXc p = VectorXc::Zero(sol.dim());
                for (int i = 0; i < n; ++i) p[i] = unit(rng);

                VectorXc got = transfer_apply(sol, s, p);
                MatrixXc reduced = (s * sol.pencil.a + sol.pencil.b)
                                       .topLeftCorner(m, m)
                                       .cast<Complex>();
                VectorXc x = reduced.lu().solve(p.head(m));
                CHECK((got.head(m) - x).norm() <= 1e-6 * x.norm());
                // algebraic rows carry the modal completeness correction:
                // x_phi = s x_theta - [A_r^{-1} p]_theta
                VectorXc ainv_p = sol.pencil.a.topLeftCorner(m, m)
                                      .cast<Complex>()
                                      .lu()
                                      .solve(p.head(m));
                const int nl = n - sol.n_gen;
                VectorXc phi_expect = s * got.segment(sol.n_gen, nl) -
                                      ainv_p.segment(sol.n_gen, nl);
                CHECK((got.tail(nl) - phi_expect).norm() <= 1e-6 * got.norm());
            }
        }
    }
    SUBCASE("real frequency and forcing give a real response") {
        EigenSolution sol = solve_case(testutil::case6());
        VectorXc p = VectorXc::Zero(sol.dim());
        p.head(sol.n()).setOnes();
        VectorXc out = transfer_apply(sol, Complex(0.25, 0), p);
        CHECK(out.imag().cwiseAbs().maxCoeff() < 1e-9 * out.norm());
    }
    SUBCASE("a pole is rejected") {
        EigenSolution sol = solve_case(testutil::two_bus());
        VectorXc p = VectorXc::Zero(sol.dim());
        p[0] = 1.0;
        CHECK_THROWS_AS(transfer_apply(sol, sol.lambda[0], p), NumericalError);
    }
}
