#pragma once

#include "gridlaa/types.hpp"

namespace gridlaa {

// min c^T x  subject to  a_eq x = b_eq,  a_ub x <= b_ub,  lower <= x <= upper.
// Bounds may be +-infinity; empty constraint blocks are allowed.
struct LinearProgram {
    VectorX c;
    MatrixX a_eq;
    VectorX b_eq;
    MatrixX a_ub;
    VectorX b_ub;
    VectorX lower;
    VectorX upper;

    int n_vars() const { return static_cast<int>(c.size()); }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    VectorX x;
    double objective = 0.0;
    VectorX dual_eq;  // multipliers for equality rows
    VectorX dual_ub;  // multipliers for inequality rows, <= 0 at optimality
    // |primal - dual objective| in the internal standard form; certifies optimality
    double duality_gap = 0.0;
    // worst violation of nonnegative reduced costs at the final basis
    double dual_infeasibility = 0.0;
    int iterations = 0;
};

// Dense two-phase revised simplex with Bland's rule (anti-cycling, deterministic).
LpSolution solve_lp(const LinearProgram& lp);

}  // namespace gridlaa
