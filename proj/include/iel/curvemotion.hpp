#pragma once

#include "iel/field.hpp"

#include <utility>
#include <vector>

namespace iel {

/// Curve-motion evolution layer settings. `radii` is the ascending set of
/// disc radii probed by the convex shape condition; `dilation` widens the
/// detected concavity set by a Euclidean distance in pixels.
struct CurveMotionConfig {
    float dt = 0.1f;
    int n_steps = 20;
    int dilation = 3;
    std::vector<int> radii = {5, 10, 15};

    void validate() const;
};

/// Lattice disc of radius r: all offsets with di^2 + dj^2 <= r^2, uniform
/// weight 1 / |offsets|.
struct DiscKernel {
    int radius = 1;
    std::vector<std::pair<int, int>> offsets;
    double weight = 0.0;
};

DiscKernel disc_kernel(int r);

/// Binary mask, 1 where the selected channel is strictly positive.
LabelMask indicator(const Field& u, int channel);

/// Pixels violating the convex shape condition at radius r: background
/// pixels whose radius-r disc holds a strict foreground majority. The mask
/// is extended by background outside the grid, so off-grid disc samples
/// count toward the majority threshold |B_r| but never as foreground.
LabelMask convexity_violations(const LabelMask& f, int r);

/// Union of convexity_violations over all radii.
LabelMask concave_set(const LabelMask& f, const std::vector<int>& radii);

/// Speed field: -1 on every pixel within Euclidean distance d of a marked
/// pixel of c, 0 elsewhere (d = 0 keeps exactly c).
Field speed_field(const LabelMask& c, int d);

/// One curve-motion step on the selected channel:
///   f = indicator, C = concave_set(f), V = speed_field(C, d),
///   u[ch] += dt * V * |grad u[ch]|   (centered differences)
/// Other channels pass through unchanged. Convex inputs are fixed points.
Field curve_motion_iel_step(const Field& u, int channel, const CurveMotionConfig& cfg);

/// n_steps sequential curve-motion steps.
Field run_curve_motion_iels(const Field& u, int channel, const CurveMotionConfig& cfg);

/// Rollout that also returns the per-step speed fields (single channel,
/// shaped like the selected plane). Used by the training op, whose backward
/// treats each step's speed as a constant, and by the diagnostics.
struct CurveMotionTrace {
    Field output;
    std::vector<Field> speeds;  // n_steps entries, each 1 x rows x cols
};
CurveMotionTrace run_curve_motion_iels_traced(const Field& u, int channel,
                                              const CurveMotionConfig& cfg);

}  // namespace iel
