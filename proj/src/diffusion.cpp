#include "iel/diffusion.hpp"

#include "iel/kernels.hpp"

#include <stdexcept>

namespace iel {

void DiffusionConfig::validate() const {
    if (!(dt > 0.0f)) throw std::invalid_argument("DiffusionConfig: dt must be > 0");
    if (n_layers < 0) throw std::invalid_argument("DiffusionConfig: n_layers must be >= 0");
    if (!(spacing > 0.0f)) throw std::invalid_argument("DiffusionConfig: spacing must be > 0");
}

namespace {

Field evolve_step(const Field& u, float dt, float sign) {
    if (!(dt > 0.0f)) throw std::invalid_argument("evolution step: dt must be > 0");
    Field lap = laplacian(u);
    Field out(u.channels, u.rows, u.cols, u.spacing);
    kernels::active().axpy(out.values.data(), u.values.data(), lap.values.data(),
                           sign * dt, u.values.size());
    return out;
}

}  // namespace

Field fel_step(const Field& u, float dt) { return evolve_step(u, dt, 1.0f); }

Field iel_step(const Field& u, float dt) { return evolve_step(u, dt, -1.0f); }

Field apply_iels(const Field& u, const DiffusionConfig& cfg) {
    cfg.validate();
    Field out = u;
    for (int k = 0; k < cfg.n_layers; ++k) out = iel_step(out, cfg.dt);
    return out;
}

Field apply_fels(const Field& u, const DiffusionConfig& cfg) {
    cfg.validate();
    Field out = u;
    for (int k = 0; k < cfg.n_layers; ++k) out = fel_step(out, cfg.dt);
    return out;
}

std::vector<double> merged_coeffs(int n, double dt) {
    if (n < 0) throw std::invalid_argument("merged_coeffs: n must be >= 0");
    std::vector<double> coeffs(static_cast<std::size_t>(n) + 1);
    // binomial(n, k) built iteratively in a 64-bit accumulator:
    //   binom(n, k) = binom(n, k-1) * (n - k + 1) / k   (exact at every step)
    unsigned long long binom = 1;
    double sign_pow = 1.0;
    for (int k = 0; k <= n; ++k) {
        coeffs[static_cast<std::size_t>(k)] = static_cast<double>(binom) * sign_pow;
        sign_pow *= -dt;
        if (k < n) {
            unsigned long long num = static_cast<unsigned long long>(n - k);
            if (binom > ~0ULL / num)
                throw std::overflow_error("merged_coeffs: binomial overflows 64-bit accumulator");
            binom = binom * num / (static_cast<unsigned long long>(k) + 1);
        }
    }
    return coeffs;
}

Field apply_merged(const Field& u, const std::vector<double>& coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("apply_merged: empty coefficient list");
    const int n = static_cast<int>(coeffs.size()) - 1;
    // Horner: acc = c_n*U; repeat acc = lap(acc) + c_k*U for k = n-1 .. 0.
    Field acc = static_cast<float>(coeffs[static_cast<std::size_t>(n)]) * u;
    for (int k = n - 1; k >= 0; --k) {
        Field lap = laplacian(acc);
        kernels::active().axpy(acc.values.data(), lap.values.data(), u.values.data(),
                               static_cast<float>(coeffs[static_cast<std::size_t>(k)]),
                               u.values.size());
    }
    return acc;
}

}  // namespace iel
