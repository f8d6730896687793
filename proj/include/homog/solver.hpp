#pragma once

#include "homog/stencil.hpp"

#include <functional>
#include <stdexcept>
#include <string>

namespace homog {

struct SparseSystem {
    SpMat A;
    Vec b;
    bool symmetric = false;
    // Operator has the constants as (left and right) null space; the solution is returned with mean 0.
    bool zero_mean = false;
    // Optional approximate inverse used instead of the diagonal preconditioner.
    std::function<Vec(const Vec&)> precond;
};

struct SolveError : std::runtime_error {
    double residual;
    long iterations;
    SolveError(const std::string& what, double r, long it) : std::runtime_error(what), residual(r), iterations(it) {}
};

struct SolveStats {
    double residual = 0.0;
    long iterations = 0;
};

// Jacobi-preconditioned CG for symmetric systems, BiCGSTAB (GMRES fallback) otherwise. The returned
// field satisfies ||b - A x|| <= tol ||b||, checked on the true residual; SolveError otherwise.
Vec solve_sparse(const SparseSystem& sys, double tol, const Vec* guess = nullptr, SolveStats* stats = nullptr);

inline double mean(const Vec& v) { return v.size() ? v.mean() : 0.0; }

}  // namespace homog
