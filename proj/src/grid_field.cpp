#include "dbpf/grid_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dbpf {

Grid2D::Grid2D(int nx_, int ny_, double lx_, double ly_)
    : nx(nx_), ny(ny_), lx(lx_), ly(ly_) {
    if (nx < 3 || ny < 3) throw std::invalid_argument("Grid2D: need nx, ny >= 3");
    if (lx <= 0.0 || ly <= 0.0) throw std::invalid_argument("Grid2D: need lx, ly > 0");
    hx = lx / (nx - 1);
    hy = ly / (ny - 1);
}

bool ScalarField::all_finite() const {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

namespace {
int g_threads = 1;

void check_same_grid(const ScalarField& a, const ScalarField& b, const char* op) {
    if (!a.grid || !b.grid || !a.grid->same_layout(*b.grid))
        throw std::invalid_argument(std::string(op) + ": fields live on different grids");
}
}  // namespace

void set_threads(int k) {
    g_threads = std::max(1, k);
#ifdef _OPENMP
    omp_set_num_threads(g_threads);
#endif
}
int threads() { return g_threads; }

// Shared flux kernel. With unit==true the face coefficient is skipped, which
// is a bitwise no-op relative to multiplying by mean(1,1)=1, so
// laplacian(u) == div_coeff_grad(ones, u) exactly.
static void flux_divergence(const ScalarField* c, const ScalarField& u, ScalarField& out,
                            bool unit) {
    const Grid2D& g = *u.grid;
    const int nx = g.nx, ny = g.ny;
    const double ihx2 = 1.0 / (g.hx * g.hx);
    const double ihy2 = 1.0 / (g.hy * g.hy);
    const double* uv = u.v.data();
    const double* cv = unit ? nullptr : c->v.data();
    double* ov = out.v.data();

#pragma omp parallel for schedule(static) if (g_threads > 1)
    for (int j = 0; j < ny; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * nx;
        // x-direction: flux F_{i+1/2} = mean(c_i,c_{i+1}) * (u_{i+1}-u_i)
        // (the 1/hx^2 applied once), boundary control volumes take 2*F/h.
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = row + i;
            double fr = 0.0, fl = 0.0;
            if (i + 1 < nx) {
                fr = uv[k + 1] - uv[k];
                if (!unit) fr *= 0.5 * (cv[k] + cv[k + 1]);
            }
            if (i > 0) {
                fl = uv[k] - uv[k - 1];
                if (!unit) fl *= 0.5 * (cv[k - 1] + cv[k]);
            }
            double d;
            if (i == 0) d = 2.0 * fr;
            else if (i == nx - 1) d = -2.0 * fl;
            else d = fr - fl;
            ov[k] = d * ihx2;
        }
        // y-direction added in a second sweep below (kept separate so each
        // row write is independent and the loop parallelizes cleanly).
    }

#pragma omp parallel for schedule(static) if (g_threads > 1)
    for (int j = 0; j < ny; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * nx;
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = row + i;
            double fu = 0.0, fd = 0.0;
            if (j + 1 < ny) {
                fu = uv[k + nx] - uv[k];
                if (!unit) fu *= 0.5 * (cv[k] + cv[k + nx]);
            }
            if (j > 0) {
                fd = uv[k] - uv[k - nx];
                if (!unit) fd *= 0.5 * (cv[k - nx] + cv[k]);
            }
            double d;
            if (j == 0) d = 2.0 * fu;
            else if (j == ny - 1) d = -2.0 * fd;
            else d = fu - fd;
            ov[k] += d * ihy2;
        }
    }
}

ScalarField laplacian(const ScalarField& u) {
    ScalarField out(*u.grid);
    flux_divergence(nullptr, u, out, true);
    return out;
}

void div_unit_grad(const ScalarField& u, ScalarField& out) {
    flux_divergence(nullptr, u, out, true);
}

void div_coeff_grad(const ScalarField& c, const ScalarField& u, ScalarField& out) {
    check_same_grid(c, u, "div_coeff_grad");
    flux_divergence(&c, u, out, false);
}

ScalarField div_coeff_grad(const ScalarField& c, const ScalarField& u) {
    ScalarField out(*u.grid);
    div_coeff_grad(c, u, out);
    return out;
}

ScalarField grad_sq(const ScalarField& u) {
    const Grid2D& g = *u.grid;
    const int nx = g.nx, ny = g.ny;
    ScalarField out(g);
    const double i2hx = 1.0 / (2.0 * g.hx);
    const double i2hy = 1.0 / (2.0 * g.hy);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            // mirror ghosts: the centered difference at the wall is zero
            double ux = 0.0, uy = 0.0;
            if (i > 0 && i + 1 < nx) ux = (u(i + 1, j) - u(i - 1, j)) * i2hx;
            if (j > 0 && j + 1 < ny) uy = (u(i, j + 1) - u(i, j - 1)) * i2hy;
            out(i, j) = ux * ux + uy * uy;
        }
    }
    return out;
}

ScalarField grad_sq_energy(const ScalarField& u) {
    const Grid2D& g = *u.grid;
    const int nx = g.nx, ny = g.ny;
    ScalarField out(g, 0.0);
    const double ihx2 = 1.0 / (g.hx * g.hx);
    const double ihy2 = 1.0 / (g.hy * g.hy);
    // Each face's squared difference splits half to each endpoint; boundary
    // nodes carry half trapezoid weight, so their single face counts full.
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            double gx = 0.0, gy = 0.0;
            if (i + 1 < nx) {
                const double d = u(i + 1, j) - u(i, j);
                gx += d * d;
            }
            if (i > 0) {
                const double d = u(i, j) - u(i - 1, j);
                gx += d * d;
            }
            // interior: half of each face; wall: the single face over half weight
            if (i > 0 && i + 1 < nx) gx *= 0.5;
            if (j + 1 < ny) {
                const double d = u(i, j + 1) - u(i, j);
                gy += d * d;
            }
            if (j > 0) {
                const double d = u(i, j) - u(i, j - 1);
                gy += d * d;
            }
            if (j > 0 && j + 1 < ny) gy *= 0.5;
            out(i, j) = gx * ihx2 + gy * ihy2;
        }
    }
    return out;
}

static inline double wx_weight(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

double integrate(const ScalarField& u) {
    const Grid2D& g = *u.grid;
    double sum = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        const double wy = wx_weight(j, g.ny);
        double row = 0.0;
        for (int i = 0; i < g.nx; ++i) row += wx_weight(i, g.nx) * u(i, j);
        sum += wy * row;
    }
    return sum * g.hx * g.hy;
}

double inner(const ScalarField& u, const ScalarField& v) {
    check_same_grid(u, v, "inner");
    const Grid2D& g = *u.grid;
    double sum = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        const double wy = wx_weight(j, g.ny);
        double row = 0.0;
        for (int i = 0; i < g.nx; ++i) row += wx_weight(i, g.nx) * u(i, j) * v(i, j);
        sum += wy * row;
    }
    return sum * g.hx * g.hy;
}

double norm(const ScalarField& u, Norm kind) {
    if (kind == Norm::linf) return max_abs(u);
    return std::sqrt(inner(u, u));
}

ScalarField coarsen_compare(const ScalarField& u_fine, const ScalarField& u_coarse) {
    const Grid2D& gf = *u_fine.grid;
    const Grid2D& gc = *u_coarse.grid;
    if (gf.nx - 1 != 2 * (gc.nx - 1) || gf.ny - 1 != 2 * (gc.ny - 1) ||
        gf.lx != gc.lx || gf.ly != gc.ly)
        throw std::invalid_argument("coarsen_compare: grids are not nested (nx_f-1 must be 2*(nx_c-1))");
    ScalarField out(gc);
    for (int j = 0; j < gc.ny; ++j)
        for (int i = 0; i < gc.nx; ++i)
            out(i, j) = u_fine(2 * i, 2 * j) - u_coarse(i, j);
    return out;
}

ScalarField map_field(const ScalarField& u, double (*f)(double)) {
    ScalarField out(*u.grid);
    for (std::size_t k = 0; k < u.size(); ++k) out.v[k] = f(u.v[k]);
    return out;
}

void axpy(double a, const ScalarField& x, ScalarField& y) {
    for (std::size_t k = 0; k < y.size(); ++k) y.v[k] += a * x.v[k];
}

double max_abs(const ScalarField& u) {
    double m = 0.0;
    for (double x : u.v) m = std::max(m, std::abs(x));
    return m;
}

double min_value(const ScalarField& u) {
    double m = u.v.empty() ? 0.0 : u.v[0];
    for (double x : u.v) m = std::min(m, x);
    return m;
}

double max_value(const ScalarField& u) {
    double m = u.v.empty() ? 0.0 : u.v[0];
    for (double x : u.v) m = std::max(m, x);
    return m;
}

double mean_value(const ScalarField& u) {
    return integrate(u) / (u.grid->lx * u.grid->ly);
}

}  // namespace dbpf
