#include "gridlaa/eigen_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "gridlaa/errors.hpp"

// Fortran LAPACK entry point; lapacke's C99-complex header is avoided on
// purpose since only the real driver is needed. Trailing size_t arguments are
// the hidden character lengths of the two job flags.
extern "C" void dggev_(const char* jobvl, const char* jobvr, const int* n, double* a,
                       const int* lda, double* b, const int* ldb, double* alphar,
                       double* alphai, double* beta, double* vl, const int* ldvl, double* vr,
                       const int* ldvr, double* work, const int* lwork, int* info,
                       size_t jobvl_len, size_t jobvr_len);

namespace gridlaa {

namespace {

constexpr double kInfiniteCutoff = 1e-10;   // |beta| threshold relative to ||A||
constexpr double kClusterGap = 1e-7;        // minimum pairwise eigenvalue distance
constexpr double kStructureTol = 1e-12;     // null-block verification

struct RawMode {
    Complex lambda;
    VectorXc right;  // deflated coordinates
    VectorXc left;
};

// transpose inner product without conjugation, y^T x
Complex tdot(const VectorXc& y, const VectorXc& x) {
    return (y.array() * x.array()).sum();
}

// Deflated row/column set: the first N (u block) plus the generator rows of
// the u' block. The remaining load-frequency rows/columns of both matrices
// are identically zero for a zero-load-mass descriptor.
std::vector<int> deflated_indices(const StatePencil& p) {
    std::vector<int> keep(p.n() + p.n_gen);
    std::iota(keep.begin(), keep.end(), 0);
    return keep;
}

void check_null_structure(const StatePencil& p) {
    const int n = p.n();
    const int start = n + p.n_gen;
    double scale = std::max(1.0, std::max(p.a.norm(), p.b.norm()));
    double worst = 0.0;
    for (int r = start; r < 2 * n; ++r) {
        worst = std::max(worst, p.a.row(r).cwiseAbs().maxCoeff());
        worst = std::max(worst, p.b.row(r).cwiseAbs().maxCoeff());
        worst = std::max(worst, p.a.col(r).cwiseAbs().maxCoeff());
        worst = std::max(worst, p.b.col(r).cwiseAbs().maxCoeff());
    }
    if (worst > kStructureTol * scale)
        throw NumericalError(
            "pencil lacks the null load-frequency block expected of a "
            "zero-load-mass descriptor");
}

}  // namespace

EigenSolution eigensolve(const StatePencil& pencil) {
    const int n = pencil.n();
    const int ng = pencil.n_gen;
    const int nl = pencil.n_load;
    const int dim = 2 * n;
    if (pencil.a.rows() != dim || pencil.a.cols() != dim || pencil.b.rows() != dim ||
        pencil.b.cols() != dim)
        throw ValidationError("pencil matrices do not match the declared dimensions");
    check_null_structure(pencil);

    const std::vector<int> keep = deflated_indices(pencil);
    const int m = static_cast<int>(keep.size());

    // standard form (-B) x = lambda A x
    MatrixX lhs(m, m), rhs(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
            lhs(r, c) = -pencil.b(keep[r], keep[c]);
            rhs(r, c) = pencil.a(keep[r], keep[c]);
        }
    const double norm_a = rhs.norm();

    std::vector<double> alphar(m), alphai(m), beta(m);
    MatrixX vl(m, m), vr(m, m);
    int info = 0;
    int lwork = -1;
    double work_query = 0;
    dggev_("V", "V", &m, lhs.data(), &m, rhs.data(), &m, alphar.data(), alphai.data(),
           beta.data(), vl.data(), &m, vr.data(), &m, &work_query, &lwork, &info, 1, 1);
    lwork = static_cast<int>(work_query);
    std::vector<double> work(static_cast<size_t>(lwork));
    dggev_("V", "V", &m, lhs.data(), &m, rhs.data(), &m, alphar.data(), alphai.data(),
           beta.data(), vl.data(), &m, vr.data(), &m, work.data(), &lwork, &info, 1, 1);
    if (info != 0)
        throw NumericalError("QZ iteration failed (dggev info=" + std::to_string(info) + ")");

    const double cutoff = kInfiniteCutoff * std::max(norm_a, 1e-300);
    std::vector<RawMode> modes;
    int j = 0;
    while (j < m) {
        const double bj = beta[j];
        const Complex alpha(alphar[j], alphai[j]);
        const bool pair = alphai[j] != 0.0;
        if (std::abs(bj) <= cutoff) {
            if (std::abs(alpha) <= cutoff)
                throw NumericalError("singular pencil: alpha and beta both vanish in QZ output");
            j += pair ? 2 : 1;  // infinite eigenvalue(s), discarded
            continue;
        }
        if (!pair) {
            RawMode mode;
            mode.lambda = Complex(alphar[j] / bj, 0.0);
            mode.right = vr.col(j).cast<Complex>();
            mode.left = vl.col(j).cast<Complex>();
            modes.push_back(std::move(mode));
            j += 1;
        } else {
            // conjugate pair stored as consecutive real/imag columns
            VectorXc v = vr.col(j).cast<Complex>() + Complex(0, 1) * vr.col(j + 1).cast<Complex>();
            VectorXc w = vl.col(j).cast<Complex>() + Complex(0, 1) * vl.col(j + 1).cast<Complex>();
            Complex lam = alpha / bj;
            RawMode up;  // Im > 0 member
            up.lambda = lam;
            up.right = v;
            up.left = w.conjugate();  // dggev's left vectors satisfy u^H A = lambda u^H B
            RawMode down;
            down.lambda = std::conj(lam);
            down.right = v.conjugate();
            down.left = w;
            modes.push_back(std::move(up));
            modes.push_back(std::move(down));
            j += 2;
        }
    }

    std::sort(modes.begin(), modes.end(), [](const RawMode& a, const RawMode& b) {
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
        return a.lambda.imag() < b.lambda.imag();
    });

    const int nf = static_cast<int>(modes.size());
    for (int p = 0; p < nf; ++p)
        for (int q = p + 1; q < nf; ++q)
            if (std::abs(modes[p].lambda - modes[q].lambda) < kClusterGap) {
                std::ostringstream os;
                os << "clustered spectrum: eigenvalues " << modes[p].lambda << " and "
                   << modes[q].lambda << " are closer than " << kClusterGap;
                throw NumericalError(os.str());
            }

    EigenSolution sol;
    sol.n_gen = ng;
    sol.n_load = nl;
    sol.pencil = pencil;
    sol.lambda.resize(nf);
    sol.right.resize(dim, nf);
    sol.left.resize(dim, nf);

    const MatrixXc a_c = pencil.a.cast<Complex>();

    for (int k = 0; k < nf; ++k) {
        const Complex lam = modes[k].lambda;
        // re-embed into the full state via z = [u; lambda u], y = [b; lambda b]
        VectorXc z = VectorXc::Zero(dim);
        VectorXc y = VectorXc::Zero(dim);
        for (int r = 0; r < m; ++r) {
            z[keep[r]] = modes[k].right[r];
            y[keep[r]] = modes[k].left[r];
        }
        for (int i = 0; i < nl; ++i) {
            z[n + ng + i] = lam * z[ng + i];
            y[n + ng + i] = lam * y[ng + i];
        }

        z /= z.norm();
        int peak = 0;
        double best = -1.0;
        for (int i = 0; i < dim; ++i) {
            double a = std::abs(z[i]);
            if (a > best) {
                best = a;
                peak = i;
            }
        }
        z *= std::abs(z[peak]) / z[peak];  // largest component real positive

        Complex pairing = tdot(y, a_c * z);
        if (std::abs(pairing) < 1e-12)
            throw NumericalError("left/right eigenvector pairing degenerate (defective pencil?)");
        y /= pairing;

        sol.lambda[k] = lam;
        sol.right.col(k) = z;
        sol.left.col(k) = y;
    }

    // bi-orthonormality certificate over the retained modes
    MatrixXc gram = sol.left.transpose() * (a_c * sol.right);
    gram -= MatrixXc::Identity(nf, nf);
    sol.ortho_residual = nf > 0 ? gram.cwiseAbs().maxCoeff() : 0.0;
    return sol;
}

VectorXc transfer_apply(const EigenSolution& sol, Complex s, const VectorXc& p) {
    if (p.size() != sol.dim())
        throw ValidationError("forcing vector does not match the state dimension");
    VectorXc out = VectorXc::Zero(sol.dim());
    for (int k = 0; k < sol.n_finite(); ++k) {
        Complex gap = s - sol.lambda[k];
        if (std::abs(gap) < 1e-9)
            throw NumericalError("evaluation point coincides with an eigenvalue");
        Complex weight = tdot(sol.left.col(k), p);
        out += (weight / gap) * sol.right.col(k);
    }
    return out;
}

}  // namespace gridlaa
