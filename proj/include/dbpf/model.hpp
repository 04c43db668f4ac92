// The N-phase DBPF model evaluated on the grid: free energy, chemical
// potentials, degenerate mobilities, phase volumes, spreading coefficients,
// and the initial-condition presets of the validation experiments.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "dbpf/grid_field.hpp"
#include "dbpf/tension.hpp"

namespace dbpf {

inline constexpr double kClampDelta = 0.1;

inline double clamp_phase(double z) {
    const double lim = 1.0 + kClampDelta;
    return z < -lim ? -lim : (z > lim ? lim : z);
}
// Double-well F(z) = (z^2-1)^2/4 and derivatives, argument-clamped like the
// gamma evaluators so F' is globally Lipschitz.
inline double well_F(double z) {
    z = clamp_phase(z);
    const double t = z * z - 1.0;
    return 0.25 * t * t;
}
inline double well_f(double z) {
    z = clamp_phase(z);
    return z * (z * z - 1.0);
}
inline double well_f_prime(double z) {
    z = clamp_phase(z);
    return 3.0 * z * z - 1.0;
}

struct ModelParams {
    double epsilon = 0.01;
    double alpha = 3.01;
    SurfaceTensions tensions;
    GammaSet gammas;
    std::vector<double> m;           // mobility constants m_1..m_{N-1}
    std::vector<int> mob_exponents;  // a_1..a_{N-2} (M_i uses powers 2*a_j)
    double lip_F = 0.0;              // max |F''| over the clamp interval (sampled)

    static ModelParams ternary(double eps, const SurfaceTensions& s, double alpha,
                               double m1, double m2, int a1 = 4);
    static ModelParams nphase(double eps, const SurfaceTensions& s, double alpha,
                              std::vector<double> mob, std::vector<int> exps);
    int n_phases() const { return tensions.n_phases; }
    void validate() const;
};

// Ordered tuple of the N-1 phase fields on one shared grid.
// Ternary convention: fields[0] = psi, fields[1] = phi.
struct PhaseState {
    std::vector<ScalarField> fields;
    double time = 0.0;

    PhaseState() = default;
    PhaseState(const Grid2D& g, int n_fields);
    const Grid2D& grid() const { return *fields.front().grid; }
    int n_fields() const { return static_cast<int>(fields.size()); }
    ScalarField& psi() { return fields[0]; }
    const ScalarField& psi() const { return fields[0]; }
    ScalarField& phi() { return fields[1]; }
    const ScalarField& phi() const { return fields[1]; }
};

// gamma_i over the state, nodewise (i is 1-based).
ScalarField gamma_field(const GammaSet& gs, int i, const PhaseState& st);
// g(u) = eps/2 |grad u|^2 + F(u)/eps with the energy-consistent gradient form.
ScalarField g_energy_density(const ScalarField& u, double eps);

double free_energy(const PhaseState& st, const ModelParams& p);
std::vector<ScalarField> chem_potentials(const PhaseState& st, const ModelParams& p);
// M_1 = m_1; M_i = m_i prod_{j<i} ((1+phi_j)/2)^{2 a_j}, clamped below at 0.
ScalarField mobility(int i, const PhaseState& st, const ModelParams& p);
// Nested-product phase volumes; sums to |Omega| identically.
std::vector<double> volumes(const PhaseState& st);

struct Spreading {
    std::array<double, 3> S{};  // S_i = sigma_ij + sigma_ik - sigma_jk
    bool partial = false;       // all S_i > 0
    bool total = false;         // some S_i < 0
};
Spreading spreading_coefficients(const SurfaceTensions& s);

PhaseState init_preset(const std::string& name, const ModelParams& p, const Grid2D& g);
const std::vector<std::string>& init_preset_names();

}  // namespace dbpf
