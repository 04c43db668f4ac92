// Surface-tension interpolation functions gamma_i^N: explicit ternary
// formulas, the general recursive construction from boundary restrictions,
// and the numerical certifier for the four consistency conditions.
#pragma once

#include <memory>
#include <string>
#include <vector>

namespace dbpf {

inline constexpr double kGammaScale = 1.0606601717798212866;  // 3/(2*sqrt(2))

// Hermite-style blending weights of the recursive construction: a(1) = 1,
// a(-1) = 0, a'(+-1) = 0. Derivatives are kept factored so they vanish
// exactly (bitwise) at +-1; the algebraic-consistency fixed points rely on it.
inline double blend_a(double x) {
    const double t = 0.5 * (1.0 + x);
    return t * t * (2.0 - x);
}
inline double blend_a_prime(double x) { return 0.75 * (1.0 - x * x); }
inline double blend_a_second(double x) { return -1.5 * x; }
inline double blend_aN(double x) {
    const double t = 0.5 * (1.0 - x);
    return t * t * (2.0 + x);
}
inline double blend_aN_prime(double x) { return -0.75 * (1.0 - x * x); }
inline double blend_aN_second(double x) { return 1.5 * x; }
inline double quartic_bump(double x) {
    const double t = 1.0 - x * x;
    return t * t;
}
inline double quartic_bump_prime(double x) { return -4.0 * x * (1.0 - x * x); }
inline double quartic_bump_second(double x) { return 12.0 * x * x - 4.0; }

// Pairwise tensions sigma_{ik}, 1 <= i < k <= N, stored upper-triangular.
// Phase indices are 1-based throughout this module, matching the N-phase
// labeling (phase N has no field of its own).
struct SurfaceTensions {
    int n_phases = 0;
    std::vector<double> upper;  // row-major upper triangle

    SurfaceTensions() = default;
    SurfaceTensions(int n, std::vector<double> upper_triangle);
    // Paper tuple order for the ternary case: (sigma23, sigma12, sigma13).
    static SurfaceTensions ternary(double s23, double s12, double s13);

    double sigma(int i, int k) const;      // symmetric; i == k is an error
    std::vector<double> row(int i) const;  // (sigma_{i,i+1}, ..., sigma_{i,N})
    // Tension set of the (N-1)-phase model with phase `drop` removed.
    SurfaceTensions without_phase(int drop) const;
};

// One gamma_i^N, evaluable with its full gradient. Children are the boundary
// restrictions h_j^i (lower-N gammas), shared across the recursion.
class GammaComponent {
  public:
    GammaComponent(int n, int i, std::vector<double> row);

    // phi has length n-1; grad (nullable) receives d gamma / d phi_k.
    double eval(const double* phi, double* grad) const;

    int n() const { return n_; }
    int index() const { return i_; }
    double lambda() const { return lambda_; }
    void set_lambda(double l) { lambda_ = l; }
    void set_child(int j, std::shared_ptr<const GammaComponent> c);

  private:
    int n_ = 2, i_ = 1;
    std::vector<double> row_;
    double lambda_ = 0.0;
    double const_val_ = 0.0;                                   // n == 2
    std::vector<std::shared_ptr<const GammaComponent>> h_;     // h_[j], j=1..n
};

struct GammaBuildOptions {
    bool force_alpha = false;  // accept alpha <= 3 (for certifier demos)
    bool escalate_lambda = true;
    double sample_tol = 1e-6;
    int seed = 20240501;
};

// The N-1 interpolation functions of one N-phase model. Evaluators clamp
// every argument to [-1-delta, 1+delta] (delta = 0.1) so derivatives are
// globally Lipschitz; immutable after construction and safe to share.
struct GammaSet {
    int n_phases = 0;
    double alpha = 0.0;
    double clamp_delta = 0.1;
    std::vector<std::shared_ptr<const GammaComponent>> comps;  // comps[i-1]
    std::vector<double> lipschitz_consts;                      // max |gamma_i''|, sampled

    double clamp(double z) const;
    double value(int i, const double* phi) const;
    // Returns the value; grad receives all n_phases-1 partials.
    double value_grad(int i, const double* phi, double* grad) const;
    double derivative(int i, int j, const double* phi) const;
    // Central difference of the derivative evaluator (check-only accuracy).
    double second_derivative(int i, int j, const double* phi, double step = 1e-4) const;
    double lipschitz(int i) const { return lipschitz_consts[i - 1]; }
};

struct ValueDeriv {
    double value = 0.0;
    double deriv = 0.0;
};

// Explicit ternary formulas; alpha > 3 is required by the Lambda constraint.
ValueDeriv gamma1_ternary(double phi2, const SurfaceTensions& s, double alpha);
ValueDeriv gamma2_ternary(double psi, const SurfaceTensions& s, double alpha);

GammaSet build_gamma_n(const SurfaceTensions& s, double alpha,
                       const GammaBuildOptions& opts = {});

struct ConsistencyCheck {
    bool pass = true;
    bool non_strict = false;  // degenerate strictness (e.g. sigma12 == sigma13)
    double worst = 0.0;
    std::string detail;
};

struct ConsistencyReport {
    ConsistencyCheck mechanic, energetic, algebraic, dynamic;
    bool all_pass() const {
        return mechanic.pass && energetic.pass && algebraic.pass && dynamic.pass;
    }
    std::string summary() const;
};

ConsistencyReport verify_consistency(const GammaSet& g, const SurfaceTensions& s,
                                     double tol = 1e-10, int samples = 200,
                                     int seed = 977);

}  // namespace dbpf
