#pragma once

#include "iel/field.hpp"

#include <utility>

namespace iel {

/// Result of the energy-amplification check for one field/step pair.
/// `holds` is energy_out >= energy_in - 1e-6 * max(1, energy_in).
struct EnergyReport {
    double energy_in = 0.0;
    double energy_out = 0.0;
    double ratio = 1.0;
    bool holds = false;
};

/// Discrete Dirichlet energy: sum of squared forward differences
/// (last row / column excluded), accumulated in 64-bit.
double dirichlet_energy(const Field& u);

/// Energy of u versus energy of iel_step(u, dt). The inverse step never
/// decreases this energy, for any dt > 0.
EnergyReport check_energy_amplification(const Field& u, float dt);

/// || u - fel_step(iel_step(u, dt), dt) ||_2, computed directly. Equals
/// dt^2 * || laplacian(laplacian(u)) ||_2, so it vanishes quadratically.
double reconstruction_residual(const Field& u, float dt);

/// Triangle-inequality chain for the noisy-label bound, with the recovery
/// map instantiated as n forward diffusion steps (Lipschitz constant 1 for
/// dt <= h^2/8). Caller constructs m = fel^n(m_hat). Returns (lhs, rhs):
///   lhs = ||u_in - m||_2
///   rhs = ||u_in - fel^n(iel^n(u_in))||_2 + ||iel^n(u_in) - m_hat||_2
/// lhs <= rhs must hold.
std::pair<double, double> theorem2_gap(const Field& u_in, const Field& m,
                                       const Field& m_hat, int n, float dt);

}  // namespace iel
