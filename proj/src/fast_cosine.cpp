#include "dbpf/fast_cosine.hpp"

#include <cmath>
#include <stdexcept>

#include <fftw3.h>

namespace dbpf {

CosineSolver::CosineSolver(const Grid2D& g) : grid_(&g) {
    const int nx = g.nx, ny = g.ny;
    lam_x_.resize(nx);
    lam_y_.resize(ny);
    for (int i = 0; i < nx; ++i)
        lam_x_[i] = 2.0 * (std::cos(M_PI * i / (nx - 1)) - 1.0) / (g.hx * g.hx);
    for (int j = 0; j < ny; ++j)
        lam_y_[j] = 2.0 * (std::cos(M_PI * j / (ny - 1)) - 1.0) / (g.hy * g.hy);
    buf_.resize(g.size());
    // FFTW_ESTIMATE keeps plan selection deterministic across runs.
    plan_ = fftw_plan_r2r_2d(ny, nx, buf_.data(), buf_.data(), FFTW_REDFT00, FFTW_REDFT00,
                             FFTW_ESTIMATE);
    if (!plan_) throw std::runtime_error("CosineSolver: fftw plan creation failed");
    norm_ = 4.0 * (nx - 1) * (ny - 1);
}

CosineSolver::~CosineSolver() {
    if (plan_) fftw_destroy_plan(plan_);
}

void CosineSolver::solve(double a, double b, double c, const ScalarField& rhs,
                         ScalarField& out) {
    const int nx = grid_->nx, ny = grid_->ny;
    buf_ = rhs.v;
    fftw_execute_r2r(plan_, buf_.data(), buf_.data());
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double lam = lam_x_[i] + lam_y_[j];
            const double sym = a + lam * (b + c * lam);
            buf_[static_cast<std::size_t>(j) * nx + i] /= sym * norm_;
        }
    }
    fftw_execute_r2r(plan_, buf_.data(), buf_.data());
    out.v = buf_;
}

}  // namespace dbpf
