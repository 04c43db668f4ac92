#include "dbpf/scheme.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace dbpf {

void SchemeParams::validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("SchemeParams: tau must be > 0");
    if (A1 < 0.0 || A2 < 0.0 || B1 < 0.0 || B2 < 0.0)
        throw std::invalid_argument("SchemeParams: stabilizers must be >= 0");
    if (!(solver_tol > 0.0) || solver_tol > 1e-4)
        throw std::invalid_argument("SchemeParams: solver_tol must lie in (0, 1e-4]");
    if (solver_maxit < 1) throw std::invalid_argument("SchemeParams: solver_maxit must be >= 1");
}

SolverFailure::SolverFailure(int field_, int iterations_, double residual_)
    : std::runtime_error("substep solver did not converge (field " + std::to_string(field_) +
                         ", residual " + std::to_string(residual_) + ")"),
      field(field_),
      iterations(iterations_),
      residual(residual_) {}

UniGamma UniGamma::from(const GammaSet& gs, int i) {
    if (gs.n_phases != 3) throw std::invalid_argument("UniGamma: ternary gamma sets only");
    UniGamma u;
    u.clamp_lim = 1.0 + gs.clamp_delta;
    const int j = (i == 1) ? 2 : 1;  // the one coordinate gamma_i depends on
    double phi[2] = {0.0, 0.0};
    phi[j - 1] = 1.0;
    u.ca = gs.value(i, phi);
    phi[j - 1] = -1.0;
    u.cn = gs.value(i, phi);
    phi[j - 1] = 0.0;
    u.lam = gs.value(i, phi) - 0.5 * (u.ca + u.cn);
    return u;
}

double UniGamma::value(double x) const {
    x = std::clamp(x, -clamp_lim, clamp_lim);
    return ca * blend_a(x) + cn * blend_aN(x) + lam * quartic_bump(x);
}
double UniGamma::deriv(double x) const {
    x = std::clamp(x, -clamp_lim, clamp_lim);
    return ca * blend_a_prime(x) + cn * blend_aN_prime(x) + lam * quartic_bump_prime(x);
}
double UniGamma::second(double x) const {
    x = std::clamp(x, -clamp_lim, clamp_lim);
    return ca * blend_a_second(x) + cn * blend_aN_second(x) + lam * quartic_bump_second(x);
}

ScalarField stabilized_term(StabKind kind, const ScalarField& u_old, const ScalarField& u_new,
                            double A, double tau, const ModelParams& p) {
    if (!u_old.grid->same_layout(*u_new.grid))
        throw std::invalid_argument("stabilized_term: fields live on different grids");
    ScalarField out(*u_old.grid);
    const double at = A * tau;
    if (kind == StabKind::f) {
        for (std::size_t k = 0; k < out.size(); ++k) {
            const double uo = u_old.v[k];
            out.v[k] = well_f(uo) + (0.5 * well_f_prime(uo) + at) * (u_new.v[k] - uo);
        }
        return out;
    }
    const UniGamma g = UniGamma::from(p.gammas, kind == StabKind::gamma1_prime ? 1 : 2);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double uo = u_old.v[k];
        out.v[k] = g.deriv(uo) + (0.5 * g.second(uo) + at) * (u_new.v[k] - uo);
    }
    return out;
}

MosStepper::MosStepper(const Grid2D& g, const ModelParams& p, const SchemeParams& sp)
    : g_(&g), p_(&p), sp_(sp), dct_(g), t1_(g), t2_(g) {
    sp_.validate();
    if (p.n_phases() == 3) {
        ternary_fast_ = true;
        uni_.push_back(UniGamma::from(p.gammas, 1));
        uni_.push_back(UniGamma::from(p.gammas, 2));
    }
}

void MosStepper::assemble_and_solve(PhaseState& st, int fi, double theta_tau,
                                    SubstepReport& rep) {
    const ModelParams& p = *p_;
    const int nf = st.n_fields();
    const double eps = p.epsilon;
    const double inv_eps = 1.0 / eps;
    const double half_eps = 0.5 * eps;
    const double A = (fi == 1) ? sp_.A2 : sp_.A1;
    const double B = (fi == 1) ? sp_.B2 : sp_.B1;
    const double at = A * sp_.tau;
    const double bt = B * sp_.tau;

    const ScalarField& uo = st.fields[fi - 1];
    const std::size_t n = uo.size();

    // Frozen coefficient fields. gamma_i is independent of field i, so the
    // current state provides exactly the Eq.-(4.3)/(4.5)/(4.7) freeze levels.
    ScalarField mob = mobility(fi, st, p);
    ScalarField gam(*g_);
    ScalarField coef(*g_);
    ScalarField r(*g_);

    if (ternary_fast_) {
        const int jo = (fi == 1) ? 2 : 1;  // the other field's gamma index
        const ScalarField& other = st.fields[jo - 1];
        const UniGamma& gself = uni_[fi - 1];
        const UniGamma& gother = uni_[jo - 1];
        ScalarField gdens = g_energy_density(other, eps);
#pragma omp parallel for schedule(static) if (threads() > 1)
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
            const double u = uo.v[k];
            gam.v[k] = std::max(0.0, gself.value(other.v[k]));
            const double st_f = 0.5 * well_f_prime(u) + at;
            const double st_g = 0.5 * gother.second(u) + bt;
            const double wf = inv_eps * gam.v[k];
            const double wg = gdens.v[k];
            coef.v[k] = wf * st_f + wg * st_g;
            r.v[k] = wf * (well_f(u) - st_f * u) + wg * (gother.deriv(u) - st_g * u);
        }
    } else {
        std::array<double, 8> phi{};
        std::vector<const double*> src(nf);
        for (int c = 0; c < nf; ++c) src[c] = st.fields[c].v.data();
        std::vector<ScalarField> gdens;
        gdens.reserve(nf);
        for (int j = 0; j < nf; ++j)
            gdens.push_back(j == fi - 1 ? ScalarField(*g_)
                                        : g_energy_density(st.fields[j], eps));
        const double step = 1e-4;
        for (std::size_t k = 0; k < n; ++k) {
            for (int c = 0; c < nf; ++c) phi[c] = src[c][k];
            const double u = phi[fi - 1];
            gam.v[k] = std::max(0.0, p.gammas.value(fi, phi.data()));
            const double st_f = 0.5 * well_f_prime(u) + at;
            const double wf = inv_eps * gam.v[k];
            coef.v[k] = wf * st_f;
            r.v[k] = wf * (well_f(u) - st_f * u);
            for (int j = 1; j <= nf; ++j) {
                if (j == fi) continue;
                const double d1 = p.gammas.derivative(j, fi, phi.data());
                phi[fi - 1] = u + step;
                const double dp = p.gammas.derivative(j, fi, phi.data());
                phi[fi - 1] = u - step;
                const double dm = p.gammas.derivative(j, fi, phi.data());
                phi[fi - 1] = u;
                const double d2 = (dp - dm) / (2.0 * step);
                const double st_g = 0.5 * d2 + bt;
                const double wg = gdens[j - 1].v[k];
                coef.v[k] += wg * st_g;
                r.v[k] += wg * (d1 - st_g * u);
            }
        }
    }

    // rhs b = u_old + theta_tau * D_mob(-(eps/2) D_gam u_old + r)
    div_coeff_grad(gam, uo, t1_);
    for (std::size_t k = 0; k < n; ++k) t2_.v[k] = -half_eps * t1_.v[k] + r.v[k];
    div_coeff_grad(mob, t2_, t1_);
    ScalarField b(*g_);
    for (std::size_t k = 0; k < n; ++k) b.v[k] = uo.v[k] + theta_tau * t1_.v[k];

    // Constant-coefficient cosine-transform preconditioner built from the
    // mean coefficients (symbol 1 - tt*m*c*lam + tt*(eps/2)*m*g*lam^2 >= 1).
    double msum = 0.0, gsum = 0.0, csum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        msum += mob.v[k];
        gsum += gam.v[k];
        csum += coef.v[k];
    }
    const double mbar = msum / static_cast<double>(n);
    const double gbar = gsum / static_cast<double>(n);
    const double cbar = std::max(0.0, csum / static_cast<double>(n));
    const double pc_b = -theta_tau * mbar * cbar;
    const double pc_c = theta_tau * half_eps * mbar * gbar;

    LinearMap apply = [&](const ScalarField& x, ScalarField& out) {
        div_coeff_grad(gam, x, t1_);
        for (std::size_t k = 0; k < n; ++k) t2_.v[k] = -half_eps * t1_.v[k] + coef.v[k] * x.v[k];
        div_coeff_grad(mob, t2_, t1_);
        for (std::size_t k = 0; k < n; ++k) out.v[k] = x.v[k] - theta_tau * t1_.v[k];
    };
    LinearMap precond = [&](const ScalarField& x, ScalarField& out) {
        dct_.solve(1.0, pc_b, pc_c, x, out);
    };

    KrylovOptions kopt;
    kopt.tol = sp_.solver_tol;
    kopt.maxit = sp_.solver_maxit;
    KrylovResult kres = solve_linear(apply, b, kopt, &precond, &uo);

    rep.field = fi;
    rep.iterations = kres.iterations;
    rep.residual = kres.residual;
    if (!kres.converged) throw SolverFailure(fi, kres.iterations, kres.residual);
    st.fields[fi - 1] = std::move(kres.x);
}

SubstepReport MosStepper::substep(PhaseState& st, int fi, double theta_tau) {
    if (fi < 1 || fi > st.n_fields())
        throw std::invalid_argument("substep: phase-field index out of range");
    if (!st.grid().same_layout(*g_))
        throw std::invalid_argument("substep: state grid does not match the stepper");
    SubstepReport rep;
    rep.mass_before = mean_value(st.fields[fi - 1]);
    assemble_and_solve(st, fi, theta_tau, rep);
    rep.mass_after = mean_value(st.fields[fi - 1]);
    return rep;
}

StepReport MosStepper::step(PhaseState& st, const double* w0_hint) {
    StepReport rep;
    rep.energy_before = w0_hint ? *w0_hint : free_energy(st, *p_);
    for (const auto& f : st.fields) rep.mass_before.push_back(mean_value(f));
    const int nf = st.n_fields();
    const double tau = sp_.tau;
    for (int i = nf; i >= 2; --i) rep.substeps.push_back(substep(st, i, 0.5 * tau));
    rep.substeps.push_back(substep(st, 1, tau));
    for (int i = 2; i <= nf; ++i) rep.substeps.push_back(substep(st, i, 0.5 * tau));
    st.time += tau;
    rep.energy_after = free_energy(st, *p_);
    for (const auto& f : st.fields) rep.mass_after.push_back(mean_value(f));
    return rep;
}

StepReport strang_step(PhaseState& st, const ModelParams& p, const SchemeParams& sp) {
    MosStepper stepper(st.grid(), p, sp);
    return stepper.step(st);
}

SubstepReport substep_phi(PhaseState& st, const ScalarField& psi_frozen, double half_tau,
                          const ModelParams& p, const SchemeParams& sp) {
    if (!psi_frozen.grid->same_layout(st.grid()))
        throw std::invalid_argument("substep_phi: frozen field grid mismatch");
    st.psi() = psi_frozen;
    MosStepper stepper(st.grid(), p, sp);
    return stepper.substep(st, 2, half_tau);
}

SubstepReport substep_psi(PhaseState& st, const ScalarField& phi_half, double tau,
                          const ModelParams& p, const SchemeParams& sp) {
    if (!phi_half.grid->same_layout(st.grid()))
        throw std::invalid_argument("substep_psi: frozen field grid mismatch");
    st.phi() = phi_half;
    MosStepper stepper(st.grid(), p, sp);
    return stepper.substep(st, 1, tau);
}

StabilityReport check_stability_condition(const ModelParams& p, const SchemeParams& sp) {
    StabilityReport rep;
    rep.lip_F = p.lip_F;
    const int nf = p.n_phases() - 1;
    for (int i = 1; i <= nf; ++i) rep.lip_gamma.push_back(p.gammas.lipschitz(i));

    auto ratio = [](double L, double denom) {
        if (L == 0.0) return 0.0;
        if (denom == 0.0) return std::numeric_limits<double>::infinity();
        return L / denom;
    };
    double req = 0.0;
    // field 1 uses (A2, B2); the tau/2 fields use (A1, B1). For the ternary
    // scheme this is exactly Theorem 4.3's max{L_F/A1, L_g1/B1, L_F/A2, L_g2/B2}.
    req = std::max(req, ratio(p.lip_F, sp.A2));
    for (int j = 2; j <= nf; ++j) req = std::max(req, ratio(p.gammas.lipschitz(j), sp.B2));
    for (int i = 2; i <= nf; ++i) {
        req = std::max(req, ratio(p.lip_F, sp.A1));
        for (int j = 1; j <= nf; ++j) {
            if (j == i) continue;
            req = std::max(req, ratio(p.gammas.lipschitz(j), sp.B1));
        }
    }
    rep.required_tau = req;
    rep.margin = sp.tau - req;
    rep.satisfied = rep.margin >= 0.0;
    std::ostringstream os;
    os << "energy-stability condition tau >= max(L/A, L/B): tau = " << sp.tau
       << ", required >= " << req << (rep.satisfied ? " (satisfied)" : " (violated; warning)");
    rep.message = os.str();
    return rep;
}

ComposedStepper::ComposedStepper(std::vector<SubstepFn> subs, double tau)
    : subs_(std::move(subs)), tau_(tau) {
    if (subs_.empty()) throw std::invalid_argument("compose_mos: need at least one substep");
}

std::vector<SubstepReport> ComposedStepper::step(PhaseState& st) {
    std::vector<SubstepReport> reps;
    const int n = static_cast<int>(subs_.size());
    for (int i = n - 1; i >= 1; --i) reps.push_back(subs_[i](st, 0.5 * tau_));
    reps.push_back(subs_[0](st, tau_));
    for (int i = 1; i <= n - 1; ++i) reps.push_back(subs_[i](st, 0.5 * tau_));
    st.time += tau_;
    return reps;
}

ComposedStepper compose_mos(std::vector<SubstepFn> substeps, double tau) {
    return ComposedStepper(std::move(substeps), tau);
}

bool DiagnosticsRecord::energy_monotone(double tol_scale) const {
    // max_energy_increase already subtracts nothing; compare against the
    // scaled tolerance at the worst recorded energy level.
    return max_energy_increase <= tol_scale;
}

DiagnosticsRecord run(PhaseState& st, const ModelParams& p, const SchemeParams& sp,
                      double t_end, int cadence, const StepMonitor& monitor) {
    if (!(t_end > 0.0)) throw std::invalid_argument("run: t_end must be > 0");
    if (cadence < 1) throw std::invalid_argument("run: cadence must be >= 1");
    sp.validate();
    p.validate();

    const long n_steps = std::lround(t_end / sp.tau);
    if (n_steps < 1) throw std::invalid_argument("run: t_end shorter than one step");

    MosStepper stepper(st.grid(), p, sp);
    DiagnosticsRecord rec;
    const int nf = st.n_fields();
    rec.max_energy_increase = -std::numeric_limits<double>::infinity();

    std::vector<double> mass0;
    for (const auto& f : st.fields) mass0.push_back(mean_value(f));
    rec.run_min.assign(nf, std::numeric_limits<double>::infinity());
    rec.run_max.assign(nf, -std::numeric_limits<double>::infinity());

    auto record_state = [&](double energy) {
        rec.t.push_back(st.time);
        rec.energy.push_back(energy);
        rec.volume.push_back(volumes(st));
        std::vector<double> mn, mx, ms;
        for (const auto& f : st.fields) {
            mn.push_back(min_value(f));
            mx.push_back(max_value(f));
            ms.push_back(mean_value(f));
        }
        rec.field_min.push_back(std::move(mn));
        rec.field_max.push_back(std::move(mx));
        rec.field_mass.push_back(std::move(ms));
    };

    double energy = free_energy(st, p);
    record_state(energy);
    for (int k = 0; k < nf; ++k) {
        rec.run_min[k] = std::min(rec.run_min[k], min_value(st.fields[k]));
        rec.run_max[k] = std::max(rec.run_max[k], max_value(st.fields[k]));
    }

    for (long s = 1; s <= n_steps; ++s) {
        StepReport srep;
        try {
            srep = stepper.step(st, &energy);
            energy = srep.energy_after;
        } catch (const SolverFailure& e) {
            rec.failed = true;
            rec.failure = e.what();
            rec.max_residual = std::max(rec.max_residual, e.residual);
            record_state(free_energy(st, p));
            return rec;
        }
        rec.steps_done = static_cast<int>(s);
        rec.max_energy_increase =
            std::max(rec.max_energy_increase,
                     (srep.energy_after - srep.energy_before) /
                         (1.0 + std::abs(srep.energy_before)));
        for (int k = 0; k < nf; ++k) {
            rec.max_mass_drift =
                std::max(rec.max_mass_drift, std::abs(srep.mass_after[k] - mass0[k]) /
                                                 std::max(1.0, std::abs(mass0[k])));
            rec.run_min[k] = std::min(rec.run_min[k], min_value(st.fields[k]));
            rec.run_max[k] = std::max(rec.run_max[k], max_value(st.fields[k]));
        }
        for (const auto& sub : srep.substeps) {
            rec.total_iterations += sub.iterations;
            rec.max_iterations = std::max(rec.max_iterations, sub.iterations);
            rec.max_residual = std::max(rec.max_residual, sub.residual);
        }
        if (s % cadence == 0 || s == n_steps) record_state(srep.energy_after);
        if (monitor) monitor(static_cast<int>(s), st, srep);
    }
    return rec;
}

}  // namespace dbpf
