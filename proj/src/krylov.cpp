#include "dbpf/krylov.hpp"

#include <cmath>
#include <vector>

namespace dbpf {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

double nrm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

KrylovResult solve_linear(const LinearMap& apply, const ScalarField& rhs,
                          const KrylovOptions& opt, const LinearMap* precond,
                          const ScalarField* x0) {
    const Grid2D& g = *rhs.grid;
    const std::size_t n = rhs.size();
    const int m = opt.restart;

    KrylovResult res;
    res.x = x0 ? *x0 : ScalarField(g, 0.0);

    const double bnorm = nrm2(rhs.v);
    if (bnorm == 0.0) {
        res.x = ScalarField(g, 0.0);
        res.converged = true;
        return res;
    }

    ScalarField t1(g), t2(g);
    std::vector<ScalarField> V;
    V.reserve(m + 1);
    for (int k = 0; k <= m; ++k) V.emplace_back(g);
    std::vector<double> H((m + 1) * m, 0.0);  // column-major H[i + (m+1)*j]
    std::vector<double> cs(m), sn(m), beta_vec(m + 1);

    auto Hat = [&](int i, int j) -> double& { return H[i + (m + 1) * j]; };

    int total_it = 0;
    double rel = 1.0;

    while (total_it < opt.maxit) {
        // r = b - A x
        apply(res.x, t1);
        for (std::size_t k = 0; k < n; ++k) V[0].v[k] = rhs.v[k] - t1.v[k];
        double beta = nrm2(V[0].v);
        rel = beta / bnorm;
        if (rel <= opt.tol) {
            res.converged = true;
            break;
        }
        for (std::size_t k = 0; k < n; ++k) V[0].v[k] /= beta;
        std::fill(beta_vec.begin(), beta_vec.end(), 0.0);
        beta_vec[0] = beta;

        int j = 0;
        for (; j < m && total_it < opt.maxit; ++j, ++total_it) {
            // w = A M^{-1} v_j
            if (precond) {
                (*precond)(V[j], t2);
                apply(t2, t1);
            } else {
                apply(V[j], t1);
            }
            // modified Gram-Schmidt
            for (int i = 0; i <= j; ++i) {
                const double hij = dot(t1.v, V[i].v);
                Hat(i, j) = hij;
                for (std::size_t k = 0; k < n; ++k) t1.v[k] -= hij * V[i].v[k];
            }
            const double hj1 = nrm2(t1.v);
            Hat(j + 1, j) = hj1;
            if (hj1 > 0.0)
                for (std::size_t k = 0; k < n; ++k) V[j + 1].v[k] = t1.v[k] / hj1;

            // apply accumulated Givens rotations to the new column
            for (int i = 0; i < j; ++i) {
                const double a = Hat(i, j), b = Hat(i + 1, j);
                Hat(i, j) = cs[i] * a + sn[i] * b;
                Hat(i + 1, j) = -sn[i] * a + cs[i] * b;
            }
            const double a = Hat(j, j), b = Hat(j + 1, j);
            const double r = std::hypot(a, b);
            if (r == 0.0) {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = a / r;
                sn[j] = b / r;
            }
            Hat(j, j) = r;
            Hat(j + 1, j) = 0.0;
            beta_vec[j + 1] = -sn[j] * beta_vec[j];
            beta_vec[j] = cs[j] * beta_vec[j];

            rel = std::abs(beta_vec[j + 1]) / bnorm;
            if (rel <= opt.tol || hj1 == 0.0) {
                ++j;
                ++total_it;
                break;
            }
        }

        // back-substitute y and update x += M^{-1} (V y)
        std::vector<double> y(j, 0.0);
        for (int i = j - 1; i >= 0; --i) {
            double s = beta_vec[i];
            for (int k = i + 1; k < j; ++k) s -= Hat(i, k) * y[k];
            y[i] = s / Hat(i, i);
        }
        for (std::size_t k = 0; k < n; ++k) t1.v[k] = 0.0;
        for (int i = 0; i < j; ++i)
            for (std::size_t k = 0; k < n; ++k) t1.v[k] += y[i] * V[i].v[k];
        if (precond) {
            (*precond)(t1, t2);
            for (std::size_t k = 0; k < n; ++k) res.x.v[k] += t2.v[k];
        } else {
            for (std::size_t k = 0; k < n; ++k) res.x.v[k] += t1.v[k];
        }

        if (rel <= opt.tol) {
            // confirm with a true-residual check on the next loop pass
            apply(res.x, t1);
            double rr = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double d = rhs.v[k] - t1.v[k];
                rr += d * d;
            }
            rel = std::sqrt(rr) / bnorm;
            if (rel <= opt.tol) {
                res.converged = true;
                break;
            }
        }
    }

    res.iterations = total_it;
    res.residual = rel;
    return res;
}

}  // namespace dbpf
