#pragma once

#include "iel/field.hpp"

#include <vector>

namespace iel {

/// Heat-diffusion evolution layer settings: time step and stack depth.
struct DiffusionConfig {
    float dt = 0.1f;
    int n_layers = 0;
    float spacing = 1.0f;

    void validate() const;  // dt > 0, n_layers >= 0
};

/// Forward evolution step: U + dt * laplacian(U). Smooths.
Field fel_step(const Field& u, float dt);

/// Inverse evolution step: U - dt * laplacian(U). Amplifies roughness.
Field iel_step(const Field& u, float dt);

/// n_layers sequential inverse steps. This is the path used in training.
Field apply_iels(const Field& u, const DiffusionConfig& cfg);

/// n_layers sequential forward steps.
Field apply_fels(const Field& u, const DiffusionConfig& cfg);

/// Coefficients of the merged single layer: coefficient k multiplies the
/// k-th Laplacian power, binomial(n, k) * (-dt)^k. Throws std::overflow_error
/// when binomial(n, k) exceeds the 64-bit accumulator.
std::vector<double> merged_coeffs(int n, double dt);

/// Evaluate sum_k coeffs[k] * laplacian^k(U) Horner-style: n Laplacian
/// applications, no dense operator is ever formed.
Field apply_merged(const Field& u, const std::vector<double>& coeffs);

}  // namespace iel
