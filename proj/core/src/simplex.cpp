#include "gridlaa/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/LU>

#include "gridlaa/errors.hpp"

namespace gridlaa {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-8;
const double kInf = std::numeric_limits<double>::infinity();

struct Tableau {
    MatrixX a;   // rows x columns, artificials last
    VectorX b;   // kept >= 0
    std::vector<int> basis;
    std::vector<int> row_id;     // original row index per surviving row
    std::vector<double> row_sign;  // +-1 applied to reach b >= 0
};

enum class IterStatus { optimal, unbounded };

Eigen::PartialPivLU<MatrixX> factor_basis(const Tableau& t) {
    const int m = static_cast<int>(t.basis.size());
    MatrixX bmat(m, m);
    for (int i = 0; i < m; ++i) bmat.col(i) = t.a.col(t.basis[i]);
    return Eigen::PartialPivLU<MatrixX>(bmat);
}

// simplex sweep from the current basis; Bland's rule on both choices
IterStatus iterate(Tableau& t, const VectorX& cost, int entering_limit, int& iterations) {
    const int m = static_cast<int>(t.basis.size());
    const long max_iter = 10000 + 200L * (m + entering_limit);
    for (long it = 0;; ++it) {
        if (it > max_iter) throw NumericalError("simplex iteration limit exceeded");
        ++iterations;

        VectorX xb, y;
        Eigen::PartialPivLU<MatrixX> lu;
        if (m > 0) {
            lu = factor_basis(t);
            xb = lu.solve(t.b);
            VectorX cb(m);
            for (int i = 0; i < m; ++i) cb[i] = cost[t.basis[i]];
            y = lu.transpose().solve(cb);
        }

        std::vector<char> in_basis(t.a.cols(), 0);
        for (int bi : t.basis) in_basis[bi] = 1;

        int entering = -1;
        for (int j = 0; j < entering_limit; ++j) {
            if (in_basis[j]) continue;
            const double dj = cost[j] - (m > 0 ? y.dot(t.a.col(j)) : 0.0);
            if (dj < -kPivotTol) {
                entering = j;
                break;  // Bland: smallest index wins
            }
        }
        if (entering < 0) return IterStatus::optimal;
        if (m == 0) return IterStatus::unbounded;

        const VectorX w = lu.solve(t.a.col(entering));
        int leave = -1;
        double best = 0.0;
        for (int i = 0; i < m; ++i) {
            if (w[i] <= kPivotTol) continue;
            const double ratio = std::max(xb[i], 0.0) / w[i];
            if (leave < 0 || ratio < best - 1e-12 ||
                (std::abs(ratio - best) <= 1e-12 && t.basis[i] < t.basis[leave])) {
                leave = i;
                best = ratio;
            }
        }
        if (leave < 0) return IterStatus::unbounded;
        t.basis[leave] = entering;
    }
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
    const int n = lp.n_vars();
    const int m_eq = static_cast<int>(lp.b_eq.size());
    const int m_ub = static_cast<int>(lp.b_ub.size());
    if (m_eq > 0 && (lp.a_eq.rows() != m_eq || lp.a_eq.cols() != n))
        throw ValidationError("equality block shape mismatch");
    if (m_ub > 0 && (lp.a_ub.rows() != m_ub || lp.a_ub.cols() != n))
        throw ValidationError("inequality block shape mismatch");

    VectorX lower = lp.lower.size() ? lp.lower : VectorX::Zero(n);
    VectorX upper = lp.upper.size() ? lp.upper : VectorX::Constant(n, kInf);
    if (lower.size() != n || upper.size() != n)
        throw ValidationError("bound vector length mismatch");
    for (int i = 0; i < n; ++i)
        if (lower[i] > upper[i]) return LpSolution{};  // empty box

    // standard-form columns: x = shift + sign * x_int with x_int >= 0;
    // doubly-unbounded variables split into a positive and a negative half
    struct Col {
        int var;
        double shift;
        double sign;
        bool bounded;
        double range;
    };
    std::vector<Col> cols;
    for (int i = 0; i < n; ++i) {
        if (std::isfinite(lower[i])) {
            const bool bd = std::isfinite(upper[i]);
            cols.push_back({i, lower[i], 1.0, bd, bd ? upper[i] - lower[i] : 0.0});
        } else if (std::isfinite(upper[i])) {
            cols.push_back({i, upper[i], -1.0, false, 0.0});
        } else {
            cols.push_back({i, 0.0, 1.0, false, 0.0});
            cols.push_back({i, 0.0, -1.0, false, 0.0});
        }
    }
    const int n_struct = static_cast<int>(cols.size());

    int n_bound = 0;
    for (const Col& c : cols) n_bound += c.bounded ? 1 : 0;
    const int m = m_eq + m_ub + n_bound;
    const int n_slack = m_ub + n_bound;
    const int n_real = n_struct + n_slack;
    const int n_cols = n_real + m;

    Tableau t;
    t.a = MatrixX::Zero(m, n_cols);
    t.b = VectorX::Zero(m);
    VectorX cost = VectorX::Zero(n_cols);

    auto ext_row = [&](int r, int var) {
        return r < m_eq ? lp.a_eq(r, var) : lp.a_ub(r - m_eq, var);
    };
    for (int k = 0; k < n_struct; ++k) {
        const Col& c = cols[k];
        cost[k] = lp.c[c.var] * c.sign;
        for (int r = 0; r < m_eq + m_ub; ++r) t.a(r, k) = ext_row(r, c.var) * c.sign;
    }
    for (int r = 0; r < m_eq; ++r) t.b[r] = lp.b_eq[r];
    for (int r = 0; r < m_ub; ++r) t.b[m_eq + r] = lp.b_ub[r];
    // split halves carry zero shift, so each variable's shift lands once
    for (const Col& c : cols) {
        if (c.shift == 0.0) continue;
        for (int r = 0; r < m_eq + m_ub; ++r) t.b[r] -= ext_row(r, c.var) * c.shift;
    }
    {
        int brow = m_eq + m_ub;
        int bcol = n_struct + m_ub;
        for (int k = 0; k < n_struct; ++k) {
            if (!cols[k].bounded) continue;
            t.a(brow, k) = 1.0;
            t.a(brow, bcol) = 1.0;
            t.b[brow] = cols[k].range;
            ++brow;
            ++bcol;
        }
    }
    for (int r = 0; r < m_ub; ++r) t.a(m_eq + r, n_struct + r) = 1.0;

    t.row_id.resize(m);
    t.row_sign.assign(m, 1.0);
    for (int r = 0; r < m; ++r) {
        t.row_id[r] = r;
        if (t.b[r] < 0.0) {
            t.a.row(r) *= -1.0;
            t.b[r] = -t.b[r];
            t.row_sign[r] = -1.0;
        }
        t.a(r, n_real + r) = 1.0;  // artificial
    }
    t.basis.resize(m);
    for (int r = 0; r < m; ++r) t.basis[r] = n_real + r;

    LpSolution sol;

    VectorX phase1 = VectorX::Zero(n_cols);
    phase1.tail(m).setOnes();
    if (iterate(t, phase1, n_cols, sol.iterations) == IterStatus::unbounded)
        throw NumericalError("phase-1 subproblem unbounded");

    if (m > 0) {
        Eigen::PartialPivLU<MatrixX> lu = factor_basis(t);
        VectorX xb = lu.solve(t.b);
        double infeas = 0.0;
        for (size_t i = 0; i < t.basis.size(); ++i)
            if (t.basis[i] >= n_real) infeas += std::max(xb[static_cast<int>(i)], 0.0);
        if (infeas > kFeasTol) {
            sol.status = LpStatus::infeasible;
            return sol;
        }

        // drive zero-level artificials out of the basis; rows with no real
        // pivot are redundant and get dropped
        std::vector<int> drop;
        for (int i = 0; i < static_cast<int>(t.basis.size()); ++i) {
            if (t.basis[i] < n_real) continue;
            const MatrixX binv = lu.inverse();
            std::vector<char> in_basis(n_cols, 0);
            for (int bi : t.basis) in_basis[bi] = 1;
            int pivot = -1;
            for (int j = 0; j < n_real && pivot < 0; ++j) {
                if (in_basis[j]) continue;
                if (std::abs((binv.row(i) * t.a.col(j))(0, 0)) > kPivotTol) pivot = j;
            }
            if (pivot >= 0) {
                t.basis[i] = pivot;
                lu = factor_basis(t);
            } else {
                drop.push_back(i);
            }
        }
        if (!drop.empty()) {
            std::vector<int> keep;
            for (int r = 0; r < static_cast<int>(t.basis.size()); ++r)
                if (std::find(drop.begin(), drop.end(), r) == drop.end()) keep.push_back(r);
            MatrixX a2(keep.size(), n_cols);
            VectorX b2(keep.size());
            std::vector<int> basis2, row_id2;
            std::vector<double> row_sign2;
            for (size_t q = 0; q < keep.size(); ++q) {
                a2.row(static_cast<Eigen::Index>(q)) = t.a.row(keep[q]);
                b2[static_cast<Eigen::Index>(q)] = t.b[keep[q]];
                basis2.push_back(t.basis[keep[q]]);
                row_id2.push_back(t.row_id[keep[q]]);
                row_sign2.push_back(t.row_sign[keep[q]]);
            }
            t.a = std::move(a2);
            t.b = std::move(b2);
            t.basis = std::move(basis2);
            t.row_id = std::move(row_id2);
            t.row_sign = std::move(row_sign2);
        }
    }

    if (iterate(t, cost, n_real, sol.iterations) == IterStatus::unbounded) {
        sol.status = LpStatus::unbounded;
        return sol;
    }

    const int m2 = static_cast<int>(t.basis.size());
    VectorX x_int = VectorX::Zero(n_cols);
    VectorX y_int = VectorX::Zero(m2);
    if (m2 > 0) {
        Eigen::PartialPivLU<MatrixX> lu = factor_basis(t);
        const VectorX xb = lu.solve(t.b);
        for (int i = 0; i < m2; ++i) x_int[t.basis[i]] = std::max(xb[i], 0.0);
        VectorX cb(m2);
        for (int i = 0; i < m2; ++i) cb[i] = cost[t.basis[i]];
        y_int = lu.transpose().solve(cb);
    }

    sol.status = LpStatus::optimal;
    sol.x = VectorX::Zero(n);
    for (int k = 0; k < n_struct; ++k)
        sol.x[cols[k].var] += cols[k].shift + cols[k].sign * x_int[k];
    sol.objective = n > 0 ? lp.c.dot(sol.x) : 0.0;

    sol.dual_eq = VectorX::Zero(m_eq);
    sol.dual_ub = VectorX::Zero(m_ub);
    for (int r = 0; r < m2; ++r) {
        const int orig = t.row_id[r];
        const double y = t.row_sign[r] * y_int[r];
        if (orig < m_eq)
            sol.dual_eq[orig] = y;
        else if (orig < m_eq + m_ub)
            sol.dual_ub[orig - m_eq] = y;
    }

    double primal_int = 0.0;
    for (int j = 0; j < n_cols; ++j) primal_int += cost[j] * x_int[j];
    double dual_obj = 0.0;
    for (int r = 0; r < m2; ++r) dual_obj += y_int[r] * t.b[r];
    sol.duality_gap = std::abs(primal_int - dual_obj);

    double worst = 0.0;
    {
        std::vector<char> in_basis(n_cols, 0);
        for (int bi : t.basis) in_basis[bi] = 1;
        for (int j = 0; j < n_real; ++j) {
            if (in_basis[j]) continue;
            const double dj = cost[j] - (m2 > 0 ? y_int.dot(t.a.col(j)) : 0.0);
            worst = std::max(worst, -dj);
        }
    }
    sol.dual_infeasibility = worst;
    return sol;
}

}  // namespace gridlaa
