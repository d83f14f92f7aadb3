#include "iel/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace iel::oracles {

namespace {

struct T64 {
    int ch = 0, rows = 0, cols = 0;
    std::vector<double> v;
    T64() = default;
    T64(int c, int r, int co) : ch(c), rows(r), cols(co), v(static_cast<std::size_t>(c) * r * co, 0.0) {}
    double& at(int c, int i, int j) { return v[(static_cast<std::size_t>(c) * rows + i) * cols + j]; }
    double at(int c, int i, int j) const { return v[(static_cast<std::size_t>(c) * rows + i) * cols + j]; }
};

T64 conv3x3_64(const T64& x, const ConvLayer& l) {
    T64 y(l.out_ch, x.rows, x.cols);
    for (int oc = 0; oc < l.out_ch; ++oc)
        for (int i = 0; i < x.rows; ++i)
            for (int j = 0; j < x.cols; ++j) {
                double acc = static_cast<double>(l.bias.at(oc, 0, 0));
                for (int ic = 0; ic < l.in_ch; ++ic)
                    for (int di = 0; di < 3; ++di)
                        for (int dj = 0; dj < 3; ++dj) {
                            int ci = std::clamp(i + di - 1, 0, x.rows - 1);
                            int cj = std::clamp(j + dj - 1, 0, x.cols - 1);
                            acc += static_cast<double>(l.filters.at(oc * l.in_ch + ic, di, dj)) *
                                   x.at(ic, ci, cj);
                        }
                y.at(oc, i, j) = acc;
            }
    return y;
}

T64 relu_64(T64 x) {
    for (double& t : x.v) t = t > 0.0 ? t : 0.0;
    return x;
}

T64 maxpool2_64(const T64& x) {
    T64 y(x.ch, x.rows / 2, x.cols / 2);
    for (int c = 0; c < x.ch; ++c)
        for (int i = 0; i < y.rows; ++i)
            for (int j = 0; j < y.cols; ++j)
                y.at(c, i, j) = std::max({x.at(c, 2 * i, 2 * j), x.at(c, 2 * i, 2 * j + 1),
                                          x.at(c, 2 * i + 1, 2 * j), x.at(c, 2 * i + 1, 2 * j + 1)});
    return y;
}

T64 upsample2_64(const T64& x) {
    T64 y(x.ch, x.rows * 2, x.cols * 2);
    for (int c = 0; c < x.ch; ++c)
        for (int i = 0; i < y.rows; ++i)
            for (int j = 0; j < y.cols; ++j) y.at(c, i, j) = x.at(c, i / 2, j / 2);
    return y;
}

T64 concat_64(const T64& a, const T64& b) {
    T64 y(a.ch + b.ch, a.rows, a.cols);
    std::copy(a.v.begin(), a.v.end(), y.v.begin());
    std::copy(b.v.begin(), b.v.end(), y.v.begin() + static_cast<std::ptrdiff_t>(a.v.size()));
    return y;
}

T64 iel_step_64(const T64& x, double dt) {
    T64 y = x;
    for (int c = 0; c < x.ch; ++c)
        for (int i = 0; i < x.rows; ++i)
            for (int j = 0; j < x.cols; ++j) {
                int iu = std::max(0, i - 1), id = std::min(x.rows - 1, i + 1);
                int jl = std::max(0, j - 1), jr = std::min(x.cols - 1, j + 1);
                double lap = x.at(c, iu, j) + x.at(c, id, j) + x.at(c, i, jl) + x.at(c, i, jr) -
                             4.0 * x.at(c, i, j);
                y.at(c, i, j) = x.at(c, i, j) - dt * lap;
            }
    return y;
}

}  // namespace

double model_ce_loss_fp64(const ModelParams& params, const Field& image,
                          const LabelMask& target, int iel_layers, double dt) {
    T64 x(image.channels, image.rows, image.cols);
    for (std::size_t t = 0; t < image.values.size(); ++t) x.v[t] = image.values[t];

    auto block = [&](const T64& in, const char* a, const char* b) {
        return relu_64(conv3x3_64(relu_64(conv3x3_64(in, params.layer(a))), params.layer(b)));
    };
    T64 e1 = block(x, "enc1a", "enc1b");
    T64 e2 = block(maxpool2_64(e1), "enc2a", "enc2b");
    T64 bott = block(maxpool2_64(e2), "bott_a", "bott_b");
    T64 d2 = block(concat_64(upsample2_64(bott), e2), "dec2a", "dec2b");
    T64 d1 = block(concat_64(upsample2_64(d2), e1), "dec1a", "dec1b");
    T64 logits = conv3x3_64(d1, params.layer("head"));
    for (int n = 0; n < iel_layers; ++n) logits = iel_step_64(logits, dt);

    const std::size_t plane = static_cast<std::size_t>(logits.rows) * logits.cols;
    double loss = 0.0;
    for (std::size_t px = 0; px < plane; ++px) {
        double m = logits.v[px];
        for (int c = 1; c < logits.ch; ++c) m = std::max(m, logits.v[plane * c + px]);
        double sum = 0.0;
        for (int c = 0; c < logits.ch; ++c) sum += std::exp(logits.v[plane * c + px] - m);
        std::size_t tgt = plane * static_cast<std::size_t>(target.ids[px]) + px;
        loss += std::log(sum) - (logits.v[tgt] - m);
    }
    return loss / static_cast<double>(plane);
}

std::vector<double> laplacian_matrix_form(const Field& u) {
    const int m1 = u.rows, m2 = u.cols;
    auto diff_matrix = [](int n) {
        // tridiagonal: -1 and 1 in the corners, 1 -2 1 inside
        std::vector<double> d(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) {
            d[static_cast<std::size_t>(i) * n + i] = (i == 0 || i == n - 1) ? -1.0 : -2.0;
            if (i > 0) d[static_cast<std::size_t>(i) * n + i - 1] = 1.0;
            if (i + 1 < n) d[static_cast<std::size_t>(i) * n + i + 1] = 1.0;
        }
        if (n == 1) d[0] = 0.0;  // single row/column: both neighbours clamp to self
        return d;
    };
    std::vector<double> d_rows = diff_matrix(m1);
    std::vector<double> d_cols = diff_matrix(m2);
    const double inv_h2 = 1.0 / (static_cast<double>(u.spacing) * u.spacing);
    std::vector<double> out(u.size(), 0.0);
    for (int c = 0; c < u.channels; ++c) {
        const float* p = u.plane(c);
        double* o = out.data() + u.plane_size() * static_cast<std::size_t>(c);
        // U * D_cols
        for (int i = 0; i < m1; ++i)
            for (int j = 0; j < m2; ++j) {
                double acc = 0.0;
                for (int t = 0; t < m2; ++t)
                    acc += static_cast<double>(p[static_cast<std::size_t>(i) * m2 + t]) *
                           d_cols[static_cast<std::size_t>(t) * m2 + j];
                o[static_cast<std::size_t>(i) * m2 + j] = acc;
            }
        // + D_rows * U
        for (int i = 0; i < m1; ++i)
            for (int j = 0; j < m2; ++j) {
                double acc = 0.0;
                for (int t = 0; t < m1; ++t)
                    acc += d_rows[static_cast<std::size_t>(i) * m1 + t] *
                           static_cast<double>(p[static_cast<std::size_t>(t) * m2 + j]);
                o[static_cast<std::size_t>(i) * m2 + j] =
                    (o[static_cast<std::size_t>(i) * m2 + j] + acc) * inv_h2;
            }
    }
    return out;
}

LabelMask convexity_violations_bruteforce(const LabelMask& f, int r) {
    if (r < 1) throw std::invalid_argument("convexity_violations_bruteforce: radius must be >= 1");
    LabelMask out(f.rows, f.cols, 2);
    for (int i = 0; i < f.rows; ++i) {
        for (int j = 0; j < f.cols; ++j) {
            if (f.at(i, j) != 0) continue;  // the (1 - f) factor
            long long sum = 0;
            for (int di = -r; di <= r; ++di) {
                for (int dj = -r; dj <= r; ++dj) {
                    if (di * di + dj * dj > r * r) continue;
                    int y = i + di, x = j + dj;
                    bool fg = y >= 0 && y < f.rows && x >= 0 && x < f.cols && f.at(y, x) != 0;
                    sum += fg ? -1 : 1;  // 1 - 2f, background off-grid
                }
            }
            out.at(i, j) = sum < 0 ? 1 : 0;
        }
    }
    return out;
}

LabelMask concave_set_bruteforce(const LabelMask& f, const std::vector<int>& radii) {
    LabelMask acc(f.rows, f.cols, 2);
    for (int r : radii) {
        LabelMask v = convexity_violations_bruteforce(f, r);
        for (std::size_t t = 0; t < acc.ids.size(); ++t) acc.ids[t] |= v.ids[t];
    }
    return acc;
}

Field speed_field_bruteforce(const LabelMask& c, int d) {
    Field v(1, c.rows, c.cols);
    for (int i = 0; i < c.rows; ++i) {
        for (int j = 0; j < c.cols; ++j) {
            bool near = false;
            for (int y = std::max(0, i - d); y <= std::min(c.rows - 1, i + d) && !near; ++y)
                for (int x = std::max(0, j - d); x <= std::min(c.cols - 1, j + d) && !near; ++x)
                    if (c.at(y, x) != 0 && (y - i) * (y - i) + (x - j) * (x - j) <= d * d)
                        near = true;
            v.at(0, i, j) = near ? -1.0f : 0.0f;
        }
    }
    return v;
}

Field random_field(Rng& rng, int channels, int rows, int cols, float lo, float hi) {
    Field f(channels, rows, cols);
    for (float& v : f.values) v = rng.uniform(lo, hi);
    return f;
}

LabelMask random_blob_mask(Rng& rng, int rows, int cols) {
    LabelMask m(rows, cols, 2);
    int n_blobs = 1 + static_cast<int>(rng.uniform_int(3));
    for (int b = 0; b < n_blobs; ++b) {
        bool ellipse = rng.uniform_int(2) == 0;
        int ci = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(rows)));
        int cj = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cols)));
        int ri = 2 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(std::max(2, rows / 3))));
        int rj = 2 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(std::max(2, cols / 3))));
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) {
                bool inside;
                if (ellipse) {
                    double di = static_cast<double>(i - ci) / ri;
                    double dj = static_cast<double>(j - cj) / rj;
                    inside = di * di + dj * dj <= 1.0;
                } else {
                    inside = std::abs(i - ci) <= ri && std::abs(j - cj) <= rj;
                }
                if (inside) m.at(i, j) = 1;
            }
    }
    // salt-and-pepper speckle to exercise the detector on rough masks
    int flips = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(rows * cols / 32 + 1)));
    for (int t = 0; t < flips; ++t) {
        int i = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(rows)));
        int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cols)));
        m.at(i, j) ^= 1;
    }
    return m;
}

LabelMask l_shape_mask(int rows, int cols) {
    LabelMask m(rows, cols, 2);
    int i0 = rows / 8, j0 = cols / 8;
    int i1 = rows - rows / 8, j1 = cols - cols / 8;
    int mid_i = rows / 2, mid_j = cols / 2;
    for (int i = i0; i < i1; ++i)
        for (int j = j0; j < mid_j; ++j) m.at(i, j) = 1;  // vertical bar
    for (int i = mid_i; i < i1; ++i)
        for (int j = j0; j < j1; ++j) m.at(i, j) = 1;  // horizontal bar
    return m;
}

LabelMask disc_mask(int rows, int cols, int radius) {
    LabelMask m(rows, cols, 2);
    int ci = rows / 2, cj = cols / 2;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            if ((i - ci) * (i - ci) + (j - cj) * (j - cj) <= radius * radius) m.at(i, j) = 1;
    return m;
}

Field signed_distance_field(const LabelMask& mask, float scale) {
    Field f(1, mask.rows, mask.cols);
    for (int i = 0; i < mask.rows; ++i) {
        for (int j = 0; j < mask.cols; ++j) {
            bool inside = mask.at(i, j) != 0;
            double best = std::numeric_limits<double>::max();
            for (int y = 0; y < mask.rows; ++y)
                for (int x = 0; x < mask.cols; ++x)
                    if ((mask.at(y, x) != 0) != inside) {
                        double d2 = static_cast<double>(y - i) * (y - i) +
                                    static_cast<double>(x - j) * (x - j);
                        best = std::min(best, d2);
                    }
            double d = best == std::numeric_limits<double>::max()
                           ? static_cast<double>(mask.rows + mask.cols)
                           : std::sqrt(best);
            f.at(0, i, j) = static_cast<float>((inside ? d : -d) * scale);
        }
    }
    return f;
}

}  // namespace iel::oracles
