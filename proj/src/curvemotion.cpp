#include "iel/curvemotion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace iel {

void CurveMotionConfig::validate() const {
    if (!(dt > 0.0f)) throw std::invalid_argument("CurveMotionConfig: dt must be > 0");
    if (n_steps < 0) throw std::invalid_argument("CurveMotionConfig: n_steps must be >= 0");
    if (dilation < 0) throw std::invalid_argument("CurveMotionConfig: dilation must be >= 0");
    if (radii.empty()) throw std::invalid_argument("CurveMotionConfig: radii must be nonempty");
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (radii[k] < 1) throw std::invalid_argument("CurveMotionConfig: radii must be positive");
        if (k > 0 && radii[k] <= radii[k - 1])
            throw std::invalid_argument("CurveMotionConfig: radii must be strictly ascending");
    }
}

DiscKernel disc_kernel(int r) {
    if (r < 1) throw std::invalid_argument("disc_kernel: radius must be >= 1");
    DiscKernel k;
    k.radius = r;
    for (int di = -r; di <= r; ++di)
        for (int dj = -r; dj <= r; ++dj)
            if (di * di + dj * dj <= r * r) k.offsets.emplace_back(di, dj);
    k.weight = 1.0 / static_cast<double>(k.offsets.size());
    return k;
}

LabelMask indicator(const Field& u, int channel) {
    if (channel < 0 || channel >= u.channels)
        throw std::out_of_range("indicator: channel out of range");
    LabelMask f(u.rows, u.cols, 2);
    const float* p = u.plane(channel);
    for (std::size_t t = 0; t < f.ids.size(); ++t) f.ids[t] = p[t] > 0.0f ? 1 : 0;
    return f;
}

namespace {

// Count of foreground pixels inside the radius-r disc around each pixel,
// restricted to the grid. Row prefix sums bring the cost per pixel down to
// one subtraction per disc row. All integer, so exact.
std::vector<std::int32_t> disc_foreground_counts(const LabelMask& f, int r) {
    const int rows = f.rows, cols = f.cols;
    // prefix[i][j] = number of foreground pixels in row i, columns [0, j)
    std::vector<std::int32_t> prefix(static_cast<std::size_t>(rows) * (cols + 1), 0);
    for (int i = 0; i < rows; ++i) {
        std::int32_t acc = 0;
        const std::int32_t* src = f.ids.data() + static_cast<std::size_t>(i) * cols;
        std::int32_t* dst = prefix.data() + static_cast<std::size_t>(i) * (cols + 1);
        for (int j = 0; j < cols; ++j) {
            dst[j] = acc;
            acc += src[j] != 0 ? 1 : 0;
        }
        dst[cols] = acc;
    }
    std::vector<int> halfwidth(static_cast<std::size_t>(r) + 1);
    for (int dy = 0; dy <= r; ++dy) {
        int w = static_cast<int>(std::sqrt(static_cast<double>(r) * r - static_cast<double>(dy) * dy));
        while ((w + 1) * (w + 1) + dy * dy <= r * r) ++w;
        while (w > 0 && w * w + dy * dy > r * r) --w;
        halfwidth[static_cast<std::size_t>(dy)] = w;
    }
    std::vector<std::int32_t> counts(static_cast<std::size_t>(rows) * cols, 0);
    for (int i = 0; i < rows; ++i) {
        for (int di = -r; di <= r; ++di) {
            int y = i + di;
            if (y < 0 || y >= rows) continue;
            int w = halfwidth[static_cast<std::size_t>(di < 0 ? -di : di)];
            const std::int32_t* row = prefix.data() + static_cast<std::size_t>(y) * (cols + 1);
            std::int32_t* out = counts.data() + static_cast<std::size_t>(i) * cols;
            for (int j = 0; j < cols; ++j) {
                int a = std::max(0, j - w);
                int b = std::min(cols - 1, j + w);
                out[j] += row[b + 1] - row[a];
            }
        }
    }
    return counts;
}

}  // namespace

LabelMask convexity_violations(const LabelMask& f, int r) {
    if (r < 1) throw std::invalid_argument("convexity_violations: radius must be >= 1");
    // sum over the disc of (1 - 2 f) with f zero-extended equals
    // |B_r| - 2 * (in-grid foreground count); violation when negative at a
    // background pixel, i.e. when 2 * count > |B_r|.
    long long disc_size = 0;
    for (int di = -r; di <= r; ++di)
        for (int dj = -r; dj <= r; ++dj)
            if (di * di + dj * dj <= r * r) ++disc_size;
    std::vector<std::int32_t> counts = disc_foreground_counts(f, r);
    LabelMask out(f.rows, f.cols, 2);
    for (std::size_t t = 0; t < out.ids.size(); ++t)
        out.ids[t] = (f.ids[t] == 0 && 2LL * counts[t] > disc_size) ? 1 : 0;
    return out;
}

LabelMask concave_set(const LabelMask& f, const std::vector<int>& radii) {
    if (radii.empty()) throw std::invalid_argument("concave_set: radii must be nonempty");
    LabelMask acc(f.rows, f.cols, 2);
    for (int r : radii) {
        LabelMask v = convexity_violations(f, r);
        for (std::size_t t = 0; t < acc.ids.size(); ++t) acc.ids[t] |= v.ids[t];
    }
    return acc;
}

Field speed_field(const LabelMask& c, int d) {
    if (d < 0) throw std::invalid_argument("speed_field: dilation must be >= 0");
    Field v(1, c.rows, c.cols);
    if (d == 0) {
        for (std::size_t t = 0; t < c.ids.size(); ++t)
            v.values[t] = c.ids[t] != 0 ? -1.0f : 0.0f;
        return v;
    }
    std::vector<std::int32_t> near = disc_foreground_counts(c, d);
    for (std::size_t t = 0; t < c.ids.size(); ++t)
        v.values[t] = near[t] > 0 ? -1.0f : 0.0f;
    return v;
}

namespace {

Field extract_plane(const Field& u, int channel) {
    Field s(1, u.rows, u.cols, u.spacing);
    std::copy(u.plane(channel), u.plane(channel) + u.plane_size(), s.values.begin());
    return s;
}

// One update on the selected plane; returns the speed used.
Field step_plane(Field& u, int channel, const CurveMotionConfig& cfg) {
    Field plane = extract_plane(u, channel);
    LabelMask f = indicator(plane, 0);
    LabelMask c = concave_set(f, cfg.radii);
    Field v = speed_field(c, cfg.dilation);
    Field mag = grad_mag_central(plane);
    float* dst = u.plane(channel);
    for (std::size_t t = 0; t < v.values.size(); ++t)
        dst[t] += cfg.dt * v.values[t] * mag.values[t];
    return v;
}

}  // namespace

Field curve_motion_iel_step(const Field& u, int channel, const CurveMotionConfig& cfg) {
    cfg.validate();
    if (channel < 0 || channel >= u.channels)
        throw std::out_of_range("curve_motion_iel_step: channel out of range");
    Field out = u;
    step_plane(out, channel, cfg);
    return out;
}

Field run_curve_motion_iels(const Field& u, int channel, const CurveMotionConfig& cfg) {
    return run_curve_motion_iels_traced(u, channel, cfg).output;
}

CurveMotionTrace run_curve_motion_iels_traced(const Field& u, int channel,
                                              const CurveMotionConfig& cfg) {
    cfg.validate();
    if (channel < 0 || channel >= u.channels)
        throw std::out_of_range("run_curve_motion_iels: channel out of range");
    CurveMotionTrace trace;
    trace.output = u;
    trace.speeds.reserve(static_cast<std::size_t>(cfg.n_steps));
    for (int n = 0; n < cfg.n_steps; ++n)
        trace.speeds.push_back(step_plane(trace.output, channel, cfg));
    return trace;
}

}  // namespace iel
