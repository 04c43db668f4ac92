// The MOS time integrator: linear modified Crank-Nicolson substeps composed
// Strang-style, per-step energy/mass reporting, the stability-condition
// check, and the experiment time loop.
#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "dbpf/fast_cosine.hpp"
#include "dbpf/krylov.hpp"
#include "dbpf/model.hpp"

namespace dbpf {

struct SchemeParams {
    double tau = 0.01;
    double A1 = 100.0, A2 = 100.0, B1 = 100.0, B2 = 100.0;
    double solver_tol = 1e-10;
    int solver_maxit = 400;

    void validate() const;
};

struct SubstepReport {
    int field = 0;  // 1-based phase-field index
    int iterations = 0;
    double residual = 0.0;
    double mass_before = 0.0, mass_after = 0.0;  // trapezoid means
};

struct StepReport {
    double energy_before = 0.0, energy_after = 0.0;
    std::vector<double> mass_before, mass_after;
    std::vector<SubstepReport> substeps;
};

class SolverFailure : public std::runtime_error {
  public:
    SolverFailure(int field, int iterations, double residual);
    int field;
    int iterations;
    double residual;
};

enum class StabKind { f, gamma1_prime, gamma2_prime };

// T[f](u_old, u_new; A, tau) = f(u_old) + (f'(u_old)/2 + A tau)(u_new - u_old).
ScalarField stabilized_term(StabKind kind, const ScalarField& u_old, const ScalarField& u_new,
                            double A, double tau, const ModelParams& p);

// Univariate view of one ternary gamma (cubic blend + quartic bump), sampled
// off the recursive GammaSet once so the inner loops stay cheap and the
// second derivative is analytic.
struct UniGamma {
    double ca = 0.0, cn = 0.0, lam = 0.0, clamp_lim = 1.1;
    static UniGamma from(const GammaSet& gs, int i);
    double value(double x) const;
    double deriv(double x) const;
    double second(double x) const;
};

// One-grid stepper: owns the cosine-transform preconditioner and scratch
// fields. Not reentrant on one state; independent steppers may run
// concurrently.
class MosStepper {
  public:
    MosStepper(const Grid2D& g, const ModelParams& p, const SchemeParams& sp);

    // Solves the (i-th field, theta_tau) linear substep with every other
    // field frozen at its current value; updates st in place.
    SubstepReport substep(PhaseState& st, int field_index, double theta_tau);

    // Strang composition S_{n-1}(tau/2)...S_2(tau/2) S_1(tau) S_2(tau/2)...
    // S_{n-1}(tau/2); advances st.time by tau. w0_hint, when given, is the
    // already-known energy of the incoming state.
    StepReport step(PhaseState& st, const double* w0_hint = nullptr);

    const ModelParams& params() const { return *p_; }
    const SchemeParams& scheme() const { return sp_; }

  private:
    const Grid2D* g_;
    const ModelParams* p_;
    SchemeParams sp_;
    CosineSolver dct_;
    bool ternary_fast_ = false;
    std::vector<UniGamma> uni_;  // per gamma index (ternary only)
    ScalarField t1_, t2_;

    void assemble_and_solve(PhaseState& st, int fi, double theta_tau, SubstepReport& rep);
};

// Spec-level wrappers around MosStepper (one-shot; run() reuses one stepper).
StepReport strang_step(PhaseState& st, const ModelParams& p, const SchemeParams& sp);
SubstepReport substep_phi(PhaseState& st, const ScalarField& psi_frozen, double half_tau,
                          const ModelParams& p, const SchemeParams& sp);
SubstepReport substep_psi(PhaseState& st, const ScalarField& phi_half, double tau,
                          const ModelParams& p, const SchemeParams& sp);

struct StabilityReport {
    bool satisfied = false;
    double required_tau = 0.0;  // max over the L/A, L/B ratios
    double margin = 0.0;        // tau - required_tau
    double lip_F = 0.0;
    std::vector<double> lip_gamma;
    std::string message;
};
StabilityReport check_stability_condition(const ModelParams& p, const SchemeParams& sp);

// Generic Strang composition over caller-supplied substep solvers; substeps[0]
// is the innermost (full-tau) map, matching the field-1-innermost default.
using SubstepFn = std::function<SubstepReport(PhaseState&, double theta_tau)>;

class ComposedStepper {
  public:
    ComposedStepper(std::vector<SubstepFn> subs, double tau);
    std::vector<SubstepReport> step(PhaseState& st);

  private:
    std::vector<SubstepFn> subs_;
    double tau_;
};
ComposedStepper compose_mos(std::vector<SubstepFn> substeps, double tau);

struct DiagnosticsRecord {
    std::vector<double> t, energy;
    std::vector<std::vector<double>> volume;      // per record: V_1..V_N
    std::vector<std::vector<double>> field_min, field_max, field_mass;
    // Per-step audits over the whole run:
    double max_energy_increase = 0.0;  // max of W_{n+1} - W_n (negative if decaying)
    double max_mass_drift = 0.0;       // max |mean - mean_0| / max(1, |mean_0|)
    std::vector<double> run_min, run_max;  // per field, over all steps
    long total_iterations = 0;
    int max_iterations = 0;
    double max_residual = 0.0;
    int steps_done = 0;
    bool failed = false;
    std::string failure;

    bool energy_monotone(double tol_scale = 1e-9) const;
};

using StepMonitor = std::function<void(int step, const PhaseState&, const StepReport&)>;

DiagnosticsRecord run(PhaseState& st, const ModelParams& p, const SchemeParams& sp,
                      double t_end, int cadence, const StepMonitor& monitor = nullptr);

}  // namespace dbpf
