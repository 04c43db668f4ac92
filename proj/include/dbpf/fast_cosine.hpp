// Fast solver for constant-coefficient operators a*I + b*Lap + c*Lap^2 under
// homogeneous Neumann conditions, diagonalized by the DCT-I (FFTW REDFT00).
// The mirror-ghost Laplacian of grid_field has exactly the cosine modes
// cos(pi k i/(n-1)) as eigenvectors, so the solve is spectral-exact.
#pragma once

#include <vector>

#include "dbpf/grid_field.hpp"

struct fftw_plan_s;

namespace dbpf {

class CosineSolver {
  public:
    explicit CosineSolver(const Grid2D& g);
    ~CosineSolver();
    CosineSolver(const CosineSolver&) = delete;
    CosineSolver& operator=(const CosineSolver&) = delete;

    // Solves (a + b*Lap + c*Lap^2) out = rhs. Requires the symbol
    // a + b*lam + c*lam^2 to be nonzero for every eigenvalue lam <= 0.
    void solve(double a, double b, double c, const ScalarField& rhs, ScalarField& out);

    const Grid2D& grid() const { return *grid_; }

  private:
    const Grid2D* grid_;
    std::vector<double> lam_x_, lam_y_;  // 1-D mirror-Laplacian eigenvalues
    std::vector<double> buf_;
    fftw_plan_s* plan_ = nullptr;  // REDFT00 x REDFT00, in-place on buf_
    double norm_;                  // 4*(nx-1)*(ny-1)
};

}  // namespace dbpf
