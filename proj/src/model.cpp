#include "dbpf/model.hpp"

#include <cmath>
#include <stdexcept>

namespace dbpf {

namespace {

double sample_lip_F() {
    const double lim = 1.0 + kClampDelta;
    double L = 0.0;
    const int ns = 2001;
    for (int k = 0; k < ns; ++k) {
        const double z = -lim + 2.0 * lim * k / (ns - 1);
        L = std::max(L, std::abs(well_f_prime(z)));
    }
    return L;
}

}  // namespace

ModelParams ModelParams::ternary(double eps, const SurfaceTensions& s, double alpha,
                                 double m1, double m2, int a1) {
    if (s.n_phases != 3) throw std::invalid_argument("ModelParams::ternary: need N = 3");
    ModelParams p;
    p.epsilon = eps;
    p.alpha = alpha;
    p.tensions = s;
    p.gammas = build_gamma_n(s, alpha);
    p.m = {m1, m2};
    p.mob_exponents = {a1};
    p.lip_F = sample_lip_F();
    p.validate();
    return p;
}

ModelParams ModelParams::nphase(double eps, const SurfaceTensions& s, double alpha,
                                std::vector<double> mob, std::vector<int> exps) {
    ModelParams p;
    p.epsilon = eps;
    p.alpha = alpha;
    p.tensions = s;
    p.gammas = build_gamma_n(s, alpha);
    p.m = std::move(mob);
    p.mob_exponents = std::move(exps);
    p.lip_F = sample_lip_F();
    p.validate();
    return p;
}

void ModelParams::validate() const {
    const int N = tensions.n_phases;
    if (!(epsilon > 0.0)) throw std::invalid_argument("ModelParams: epsilon must be > 0");
    if (static_cast<int>(m.size()) != N - 1)
        throw std::invalid_argument("ModelParams: need N-1 mobility constants");
    for (double mi : m)
        if (!(mi > 0.0)) throw std::invalid_argument("ModelParams: mobility constants must be > 0");
    if (static_cast<int>(mob_exponents.size()) != N - 2)
        throw std::invalid_argument("ModelParams: need N-2 mobility exponents");
    for (int a : mob_exponents)
        if (a < 1) throw std::invalid_argument("ModelParams: mobility exponents must be >= 1");
    if (gammas.n_phases != N) throw std::invalid_argument("ModelParams: gamma set has wrong N");
}

PhaseState::PhaseState(const Grid2D& g, int n_fields) {
    fields.reserve(n_fields);
    for (int k = 0; k < n_fields; ++k) fields.emplace_back(g);
}

ScalarField gamma_field(const GammaSet& gs, int i, const PhaseState& st) {
    const int nf = st.n_fields();
    ScalarField out(st.grid());
    std::vector<const double*> src(nf);
    for (int k = 0; k < nf; ++k) src[k] = st.fields[k].v.data();
    double phi[8];
    for (std::size_t n = 0; n < out.size(); ++n) {
        for (int k = 0; k < nf; ++k) phi[k] = src[k][n];
        out.v[n] = gs.value(i, phi);
    }
    return out;
}

ScalarField g_energy_density(const ScalarField& u, double eps) {
    ScalarField g = grad_sq_energy(u);
    const double half_eps = 0.5 * eps;
    const double inv_eps = 1.0 / eps;
    for (std::size_t k = 0; k < g.size(); ++k)
        g.v[k] = half_eps * g.v[k] + inv_eps * well_F(u.v[k]);
    return g;
}

double free_energy(const PhaseState& st, const ModelParams& p) {
    double W = 0.0;
    for (int i = 1; i <= st.n_fields(); ++i) {
        const ScalarField gam = gamma_field(p.gammas, i, st);
        const ScalarField gi = g_energy_density(st.fields[i - 1], p.epsilon);
        W += inner(gam, gi);
    }
    return W;
}

std::vector<ScalarField> chem_potentials(const PhaseState& st, const ModelParams& p) {
    const int nf = st.n_fields();
    const Grid2D& grid = st.grid();
    const double inv_eps = 1.0 / p.epsilon;

    // One nodewise pass collects gamma_j and all partials d gamma_j / d phi_i.
    std::vector<ScalarField> gam(nf, ScalarField(grid));
    std::vector<std::vector<ScalarField>> dgam(nf);
    for (int j = 0; j < nf; ++j) dgam[j].assign(nf, ScalarField(grid));
    {
        double phi[8], grad[8];
        std::vector<const double*> src(nf);
        for (int k = 0; k < nf; ++k) src[k] = st.fields[k].v.data();
        const std::size_t n = st.fields[0].size();
        for (std::size_t k = 0; k < n; ++k) {
            for (int c = 0; c < nf; ++c) phi[c] = src[c][k];
            for (int j = 1; j <= nf; ++j) {
                gam[j - 1].v[k] = p.gammas.value_grad(j, phi, grad);
                for (int i = 0; i < nf; ++i) dgam[j - 1][i].v[k] = grad[i];
            }
        }
    }

    std::vector<ScalarField> gdens;
    gdens.reserve(nf);
    for (int j = 0; j < nf; ++j) gdens.push_back(g_energy_density(st.fields[j], p.epsilon));

    std::vector<ScalarField> mu;
    mu.reserve(nf);
    for (int i = 1; i <= nf; ++i) {
        const ScalarField& u = st.fields[i - 1];
        ScalarField mi = div_coeff_grad(gam[i - 1], u);
        for (std::size_t k = 0; k < mi.size(); ++k)
            mi.v[k] = -p.epsilon * mi.v[k] + inv_eps * gam[i - 1].v[k] * well_f(u.v[k]);
        for (int j = 1; j <= nf; ++j) {
            if (j == i) continue;
            for (std::size_t k = 0; k < mi.size(); ++k)
                mi.v[k] += dgam[j - 1][i - 1].v[k] * gdens[j - 1].v[k];
        }
        mu.push_back(std::move(mi));
    }
    return mu;
}

ScalarField mobility(int i, const PhaseState& st, const ModelParams& p) {
    if (i < 1 || i > st.n_fields())
        throw std::invalid_argument("mobility: phase-field index out of range");
    ScalarField M(st.grid(), p.m[i - 1]);
    for (int j = 1; j < i; ++j) {
        const ScalarField& f = st.fields[j - 1];
        const int e = 2 * p.mob_exponents[j - 1];
        for (std::size_t k = 0; k < M.size(); ++k) {
            const double base = std::max(0.0, 0.5 * (1.0 + f.v[k]));
            M.v[k] *= std::pow(base, e);
        }
    }
    return M;
}

std::vector<double> volumes(const PhaseState& st) {
    const int nf = st.n_fields();
    ScalarField carry(st.grid(), 1.0);  // prod_{j<i} (1+phi_j)/2
    std::vector<double> V;
    V.reserve(nf + 1);
    ScalarField tmp(st.grid());
    for (int i = 0; i < nf; ++i) {
        const ScalarField& f = st.fields[i];
        for (std::size_t k = 0; k < tmp.size(); ++k)
            tmp.v[k] = carry.v[k] * 0.5 * (1.0 - f.v[k]);
        V.push_back(integrate(tmp));
        for (std::size_t k = 0; k < carry.size(); ++k)
            carry.v[k] *= 0.5 * (1.0 + f.v[k]);
    }
    V.push_back(integrate(carry));
    return V;
}

Spreading spreading_coefficients(const SurfaceTensions& s) {
    if (s.n_phases != 3)
        throw std::invalid_argument("spreading_coefficients: defined for ternary systems");
    Spreading sp;
    const double s12 = s.sigma(1, 2), s13 = s.sigma(1, 3), s23 = s.sigma(2, 3);
    sp.S = {s12 + s13 - s23, s12 + s23 - s13, s13 + s23 - s12};
    sp.partial = sp.S[0] > 0.0 && sp.S[1] > 0.0 && sp.S[2] > 0.0;
    sp.total = sp.S[0] < 0.0 || sp.S[1] < 0.0 || sp.S[2] < 0.0;
    return sp;
}

const std::vector<std::string>& init_preset_names() {
    static const std::vector<std::string> names = {
        "square_cross", "absent_phase1", "liquid_lens", "two_droplets_sym",
        "two_droplets_right"};
    return names;
}

PhaseState init_preset(const std::string& name, const ModelParams& p, const Grid2D& g) {
    const double eps = p.epsilon;
    PhaseState st(g, p.n_phases() - 1);
    auto circ = [](double x, double y, double cx, double cy) {
        return std::sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy));
    };
    if (name == "square_cross") {
        st.psi().fill_from([&](double, double y) { return std::tanh((y - 0.5) / eps); });
        st.phi().fill_from([&](double x, double) { return std::tanh((x - 0.5) / eps); });
    } else if (name == "absent_phase1") {
        st.psi().fill_from([](double, double) { return 1.0; });
        st.phi().fill_from([&](double x, double y) {
            const double d = std::sqrt((x - 0.5) * (x - 0.5) / 1.7 + (y - 0.5) * (y - 0.5));
            return std::tanh((d - 0.2) / eps);
        });
    } else if (name == "liquid_lens") {
        st.psi().fill_from([&](double x, double y) {
            return std::tanh((circ(x, y, 0.5, 0.5) - 0.15) / eps);
        });
        st.phi().fill_from([&](double, double y) { return std::tanh((y - 0.5) / eps); });
    } else if (name == "two_droplets_sym" || name == "two_droplets_right") {
        st.psi().fill_from([&](double x, double y) {
            return 1.0 - std::tanh((circ(x, y, 0.65, 0.5) - 0.15) / eps) -
                   std::tanh((circ(x, y, 0.35, 0.5) - 0.15) / eps);
        });
        if (name == "two_droplets_sym") {
            st.phi().fill_from([&](double x, double) { return std::tanh((x - 0.5) / eps); });
        } else {
            st.phi().fill_from([&](double x, double y) {
                return std::tanh((0.15 - circ(x, y, 0.65, 0.5)) / eps);
            });
        }
    } else {
        throw std::invalid_argument("init_preset: unknown preset '" + name + "'");
    }
    return st;
}

}  // namespace dbpf
