#include "homog/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <unsupported/Eigen/IterativeSolvers>

#include <cmath>
#include <sstream>

namespace homog {

namespace {

// Pins node 0 to zero by clearing its row and column; keeps symmetry and removes the constant null space.
SpMat pin_first(const SpMat& A) {
    SpMat P = A;
    for (Index r = 0; r < P.outerSize(); ++r)
        for (SpMat::InnerIterator it(P, r); it; ++it)
            if (r == 0 || it.col() == 0) it.valueRef() = (r == 0 && it.col() == 0) ? 1.0 : 0.0;
    if (P.coeff(0, 0) != 1.0) P.coeffRef(0, 0) = 1.0;
    P.prune(0.0);
    return P;
}

// Adapts a callable approximate inverse to Eigen's preconditioner concept.
class FunctionPreconditioner {
public:
    using StorageIndex = typename SpMat::StorageIndex;
    enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

    FunctionPreconditioner() = default;
    template <typename M>
    explicit FunctionPreconditioner(const M&) {}
    template <typename M>
    FunctionPreconditioner& analyzePattern(const M&) { return *this; }
    template <typename M>
    FunctionPreconditioner& factorize(const M&) { return *this; }
    template <typename M>
    FunctionPreconditioner& compute(const M&) { return *this; }
    template <typename R>
    Vec solve(const Eigen::MatrixBase<R>& b) const { return fn(Vec(b)); }
    Eigen::ComputationInfo info() { return Eigen::Success; }

    std::function<Vec(const Vec&)> fn;
};

template <typename Solver>
Vec run(Solver& s, const SpMat& A, const Vec& b, const Vec& x0, double tol, long cap, long& iters) {
    s.setTolerance(tol);
    s.setMaxIterations(cap);
    s.compute(A);
    Vec x = s.solveWithGuess(b, x0);
    iters += s.iterations();
    return x;
}

}  // namespace

Vec solve_sparse(const SparseSystem& sys, double tol, const Vec* guess, SolveStats* stats) {
    const Index n = sys.A.rows();
    if (sys.A.cols() != n || sys.b.size() != n) throw std::invalid_argument("solve_sparse: dimension mismatch");
    const double bnorm = sys.b.norm();
    if (bnorm == 0.0) {
        if (stats) *stats = {};
        return Vec::Zero(n);
    }
    SpMat A = sys.A;
    Vec b = sys.b;
    if (sys.zero_mean) {
        const double total = b.sum(), scale = b.cwiseAbs().sum();
        if (std::abs(total) > 1e-10 * scale) {
            std::ostringstream os;
            os << "solve_sparse: inconsistent right-hand side for a singular system (sum " << total << ")";
            throw SolveError(os.str(), std::abs(total) / scale, 0);
        }
        if (sys.precond) {
            // Krylov iterates stay in the zero-mean subspace when the preconditioner does
            b.array() -= b.mean();
        } else {
            A = pin_first(sys.A);
            b(0) = 0.0;
        }
    }
    std::function<Vec(const Vec&)> precond = sys.precond;
    if (precond && sys.zero_mean)
        precond = [inner = sys.precond](const Vec& r) {
            Vec z = inner(r);
            z.array() -= z.mean();
            return z;
        };

    Vec x = guess ? *guess : Vec::Zero(n);
    if (sys.zero_mean) x.array() -= sys.precond ? x.mean() : x(0);
    const long cap = std::max<long>(2000, 4 * long(std::sqrt(double(n))) * 50);
    long iters = 0;
    auto true_residual = [&](const Vec& v) {
        Vec y = v;
        if (sys.zero_mean) y.array() -= y.mean();
        return (sys.b - sys.A * y).norm() / bnorm;
    };

    double res = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        const double inner = 0.25 * tol;
        if (precond) {
            if (attempt < 2) {
                Eigen::BiCGSTAB<SpMat, FunctionPreconditioner> bi;
                bi.preconditioner().fn = precond;
                x = run(bi, A, b, x, inner, cap, iters);
            } else {
                Eigen::GMRES<SpMat, FunctionPreconditioner> gm;
                gm.preconditioner().fn = precond;
                gm.set_restart(60);
                x = run(gm, A, b, x, inner, 4 * cap, iters);
            }
        } else if (sys.symmetric) {
            Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
            x = run(cg, A, b, x, inner, cap, iters);
        } else if (attempt < 2) {
            Eigen::BiCGSTAB<SpMat, Eigen::DiagonalPreconditioner<double>> bi;
            x = run(bi, A, b, x, inner, cap, iters);
        } else {
            Eigen::GMRES<SpMat, Eigen::DiagonalPreconditioner<double>> gm;
            gm.set_restart(60);
            x = run(gm, A, b, x, inner, 4 * cap, iters);
        }
        if (!x.allFinite()) x = Vec::Zero(n);
        res = true_residual(x);
        if (res <= tol) break;
    }
    if (sys.zero_mean) x.array() -= x.mean();
    if (stats) *stats = {res, iters};
    if (!(res <= tol)) {
        std::ostringstream os;
        os << "solve_sparse: no convergence after " << iters << " iterations (relative residual " << res << ")";
        throw SolveError(os.str(), res, iters);
    }
    return x;
}

}  // namespace homog
