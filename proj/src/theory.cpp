#include "iel/theory.hpp"

#include "iel/diffusion.hpp"

#include <algorithm>
#include <stdexcept>

namespace iel {

double dirichlet_energy(const Field& u) {
    const float inv_h = 1.0f / u.spacing;
    double acc = 0.0;
    for (int c = 0; c < u.channels; ++c) {
        const float* p = u.plane(c);
        for (int i = 0; i < u.rows; ++i) {
            const float* row = p + static_cast<std::size_t>(i) * u.cols;
            const float* below = row + u.cols;
            for (int j = 0; j < u.cols; ++j) {
                if (i + 1 < u.rows) {
                    double d = static_cast<double>((below[j] - row[j]) * inv_h);
                    acc += d * d;
                }
                if (j + 1 < u.cols) {
                    double d = static_cast<double>((row[j + 1] - row[j]) * inv_h);
                    acc += d * d;
                }
            }
        }
    }
    return acc;
}

EnergyReport check_energy_amplification(const Field& u, float dt) {
    if (!(dt > 0.0f)) throw std::invalid_argument("check_energy_amplification: dt must be > 0");
    EnergyReport r;
    r.energy_in = dirichlet_energy(u);
    r.energy_out = dirichlet_energy(iel_step(u, dt));
    r.ratio = r.energy_in > 0.0 ? r.energy_out / r.energy_in : 1.0;
    r.holds = r.energy_out >= r.energy_in - 1e-6 * std::max(1.0, r.energy_in);
    return r;
}

double reconstruction_residual(const Field& u, float dt) {
    if (!(dt > 0.0f)) throw std::invalid_argument("reconstruction_residual: dt must be > 0");
    Field round_trip = fel_step(iel_step(u, dt), dt);
    return norm2(u - round_trip);
}

std::pair<double, double> theorem2_gap(const Field& u_in, const Field& m,
                                       const Field& m_hat, int n, float dt) {
    if (!u_in.same_shape(m) || !u_in.same_shape(m_hat))
        throw std::invalid_argument("theorem2_gap: shape mismatch");
    DiffusionConfig cfg{dt, n, u_in.spacing};
    Field recovered = apply_iels(u_in, cfg);
    double lhs = norm2(u_in - m);
    double rhs = norm2(u_in - apply_fels(recovered, cfg)) + norm2(recovered - m_hat);
    return {lhs, rhs};
}

}  // namespace iel
