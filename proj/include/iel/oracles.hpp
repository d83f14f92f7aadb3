#pragma once

#include "iel/field.hpp"
#include "iel/model.hpp"
#include "iel/rng.hpp"

#include <vector>

namespace iel::oracles {

/// All-double naive replica of the network's training-mode forward pass
/// with a stack of inverse heat layers on the logits, ending in the mean
/// cross-entropy. No kernels, no tape: plain loops, used as the independent
/// side of the full-model gradient check.
double model_ce_loss_fp64(const ModelParams& params, const Field& image,
                          const LabelMask& target, int iel_layers, double dt);

/// Laplacian via the explicit dense difference matrices: per channel,
/// (U * D_cols + D_rows * U) / h^2 evaluated in double. A deliberately
/// different route from the stencil kernels, used to cross-check them.
std::vector<double> laplacian_matrix_form(const Field& u);

/// Literal per-pixel, per-offset evaluation of the convex shape condition:
/// sum (1 - 2f) over the radius-r disc (off-grid samples count background),
/// violation where the sum is negative at a background pixel.
LabelMask convexity_violations_bruteforce(const LabelMask& f, int r);
LabelMask concave_set_bruteforce(const LabelMask& f, const std::vector<int>& radii);

/// Dilation by exhaustive distance test: -1 wherever some marked pixel lies
/// within Euclidean distance d.
Field speed_field_bruteforce(const LabelMask& c, int d);

// Deterministic test-data helpers.
Field random_field(Rng& rng, int channels, int rows, int cols, float lo = -1.0f, float hi = 1.0f);
LabelMask random_blob_mask(Rng& rng, int rows, int cols);

/// Axis-aligned L-shape (union of two overlapping rectangles) with a
/// re-entrant corner; the canonical concavity fixture.
LabelMask l_shape_mask(int rows, int cols);
/// Centered disc; convex, so the curve-motion step must be the identity.
LabelMask disc_mask(int rows, int cols, int radius);

/// Signed-distance-like level set of a mask: +scale * distance to the
/// complement inside, -scale * distance to the mask outside (Euclidean,
/// exhaustive).
Field signed_distance_field(const LabelMask& mask, float scale);

}  // namespace iel::oracles
