// Restarted GMRES for the nonsymmetric linear systems arising from the
// eliminated fourth-order substep operators. The operator and optional
// preconditioner are passed as callables on ScalarFields.
#pragma once

#include <functional>

#include "dbpf/grid_field.hpp"

namespace dbpf {

using LinearMap = std::function<void(const ScalarField& in, ScalarField& out)>;

struct KrylovResult {
    ScalarField x;
    int iterations = 0;
    double residual = 0.0;  // final relative residual ||b - A x|| / ||b||
    bool converged = false;
};

struct KrylovOptions {
    double tol = 1e-10;  // relative residual target
    int maxit = 400;
    int restart = 30;
};

// Solves apply(x) = rhs. `precond`, when given, approximates A^{-1} (right
// preconditioning, so the reported residual is the true one). `x0` seeds the
// iteration; rhs of zero norm returns the zero field immediately.
KrylovResult solve_linear(const LinearMap& apply, const ScalarField& rhs,
                          const KrylovOptions& opt, const LinearMap* precond = nullptr,
                          const ScalarField* x0 = nullptr);

}  // namespace dbpf
