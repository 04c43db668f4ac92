// Uniform 2-D node-centered grid, scalar fields, and the discrete operators
// (homogeneous Neumann via mirror ghosts) used by the phase-field solver.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dbpf {

// Node-centered grid on [0,lx] x [0,ly] including boundary nodes.
// Node (i,j) sits at (i*hx, j*hy) with hx = lx/(nx-1), hy = ly/(ny-1).
struct Grid2D {
    int nx = 0, ny = 0;
    double lx = 1.0, ly = 1.0;
    double hx = 0.0, hy = 0.0;

    Grid2D() = default;
    Grid2D(int nx_, int ny_, double lx_ = 1.0, double ly_ = 1.0);

    double x(int i) const { return i * hx; }
    double y(int j) const { return j * hy; }
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    bool same_layout(const Grid2D& o) const {
        return nx == o.nx && ny == o.ny && lx == o.lx && ly == o.ly;
    }
};

// Scalar samples on a Grid2D, row-major (j slow, i fast). The grid is
// referenced, not owned; grids must outlive their fields.
struct ScalarField {
    const Grid2D* grid = nullptr;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid2D& g, double fill = 0.0)
        : grid(&g), v(g.size(), fill) {}

    double& operator()(int i, int j) { return v[static_cast<std::size_t>(j) * grid->nx + i]; }
    double operator()(int i, int j) const { return v[static_cast<std::size_t>(j) * grid->nx + i]; }
    std::size_t size() const { return v.size(); }

    template <class Fn>
    void fill_from(Fn&& f) {
        for (int j = 0; j < grid->ny; ++j)
            for (int i = 0; i < grid->nx; ++i)
                (*this)(i, j) = f(grid->x(i), grid->y(j));
    }
    bool all_finite() const;
};

enum class Norm { l2, linf };

// Worker-thread count for the row-parallel stencil kernels. Reductions stay
// sequential so results are bitwise identical for any thread count.
void set_threads(int k);
int threads();

// 5-point Laplacian with mirror ghosts (d_n u = 0 to second order).
ScalarField laplacian(const ScalarField& u);

// Conservative flux form of div(c grad u); face coefficients are arithmetic
// means of adjacent node values, zero normal flux at the boundary.
ScalarField div_coeff_grad(const ScalarField& c, const ScalarField& u);
void div_coeff_grad(const ScalarField& c, const ScalarField& u, ScalarField& out);
// Unit-coefficient path, bitwise identical to div_coeff_grad(1, u).
void div_unit_grad(const ScalarField& u, ScalarField& out);

// |grad u|^2 by central differences, mirror ghosts at the boundary.
ScalarField grad_sq(const ScalarField& u);

// Face-squared-difference form of |grad u|^2 distributed back to nodes.
// Satisfies integrate(c * grad_sq_energy(u)) == -<div_coeff_grad(c,u), u>
// exactly for every c, which is what the discrete energy law needs.
ScalarField grad_sq_energy(const ScalarField& u);

// Trapezoidal quadrature (boundary weight 1/2, corners 1/4).
double integrate(const ScalarField& u);
// integrate(u*v) without forming the product field.
double inner(const ScalarField& u, const ScalarField& v);

double norm(const ScalarField& u, Norm kind);

// Injection difference on nested grids: (u_fine at coincident nodes) - u_coarse,
// returned on the coarse grid. Requires nx_f-1 == 2*(nx_c-1) per axis.
ScalarField coarsen_compare(const ScalarField& u_fine, const ScalarField& u_coarse);

// Nodewise helpers shared across modules.
ScalarField map_field(const ScalarField& u, double (*f)(double));
void axpy(double a, const ScalarField& x, ScalarField& y);  // y += a*x
double max_abs(const ScalarField& u);
double min_value(const ScalarField& u);
double max_value(const ScalarField& u);
double mean_value(const ScalarField& u);  // trapezoid mean: integrate(u)/(lx*ly)

}  // namespace dbpf
