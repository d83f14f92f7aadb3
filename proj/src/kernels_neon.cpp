#include "iel/kernels.hpp"
#include "kernels_detail.hpp"

#include <arm_neon.h>

// NEON (aarch64) variants, lane-exact with the scalar reference: mul/add
// only (no fused ops), borders and remainders via the scalar rows.

namespace iel::kernels {

namespace {

constexpr int kLanes = 4;

void k_laplacian(const float* in, float* out, int rows, int cols, float inv_h2) {
    if (cols < kLanes + 2) {
        detail::laplacian_rows_scalar(in, out, rows, cols, inv_h2, 0, cols);
        return;
    }
    const int j_end = 1 + (cols - 2) / kLanes * kLanes;
    const float32x4_t vscale = vdupq_n_f32(inv_h2);
    const float32x4_t vfour = vdupq_n_f32(4.0f);
    for (int i = 0; i < rows; ++i) {
        const float* up = in + static_cast<std::size_t>(i == 0 ? 0 : i - 1) * cols;
        const float* dn = in + static_cast<std::size_t>(i == rows - 1 ? rows - 1 : i + 1) * cols;
        const float* mid = in + static_cast<std::size_t>(i) * cols;
        float* o = out + static_cast<std::size_t>(i) * cols;
        for (int j = 1; j < j_end; j += kLanes) {
            float32x4_t s = vaddq_f32(vaddq_f32(vld1q_f32(up + j), vld1q_f32(dn + j)),
                                      vaddq_f32(vld1q_f32(mid + j - 1), vld1q_f32(mid + j + 1)));
            s = vsubq_f32(s, vmulq_f32(vfour, vld1q_f32(mid + j)));
            vst1q_f32(o + j, vmulq_f32(s, vscale));
        }
    }
    detail::laplacian_rows_scalar(in, out, rows, cols, inv_h2, 0, 1);
    detail::laplacian_rows_scalar(in, out, rows, cols, inv_h2, j_end, cols);
}

void k_grad_mag(const float* in, float* out, int rows, int cols, float inv_2h) {
    if (cols < kLanes + 2) {
        detail::grad_mag_rows_scalar(in, out, rows, cols, inv_2h, 0, cols);
        return;
    }
    const int j_end = 1 + (cols - 2) / kLanes * kLanes;
    const float32x4_t vscale = vdupq_n_f32(inv_2h);
    for (int i = 0; i < rows; ++i) {
        const float* up = in + static_cast<std::size_t>(i == 0 ? 0 : i - 1) * cols;
        const float* dn = in + static_cast<std::size_t>(i == rows - 1 ? rows - 1 : i + 1) * cols;
        const float* mid = in + static_cast<std::size_t>(i) * cols;
        float* o = out + static_cast<std::size_t>(i) * cols;
        for (int j = 1; j < j_end; j += kLanes) {
            float32x4_t dx = vsubq_f32(vld1q_f32(dn + j), vld1q_f32(up + j));
            float32x4_t dy = vsubq_f32(vld1q_f32(mid + j + 1), vld1q_f32(mid + j - 1));
            float32x4_t s = vaddq_f32(vmulq_f32(dx, dx), vmulq_f32(dy, dy));
            vst1q_f32(o + j, vmulq_f32(vsqrtq_f32(s), vscale));
        }
    }
    detail::grad_mag_rows_scalar(in, out, rows, cols, inv_2h, 0, 1);
    detail::grad_mag_rows_scalar(in, out, rows, cols, inv_2h, j_end, cols);
}

void k_conv_fwd(const float* in, const float* filt, const float* bias, float* out,
                int in_ch, int out_ch, int rows, int cols) {
    if (cols < kLanes + 2) {
        detail::conv3x3_forward_scalar(in, filt, bias, out, in_ch, out_ch, rows, cols, 0, cols);
        return;
    }
    const int j_end = 1 + (cols - 2) / kLanes * kLanes;
    const std::size_t plane = static_cast<std::size_t>(rows) * cols;
    for (int oc = 0; oc < out_ch; ++oc) {
        float* op = out + plane * oc;
        const float32x4_t vbias = vdupq_n_f32(bias[oc]);
        for (int i = 0; i < rows; ++i) {
            int i0 = i == 0 ? 0 : i - 1;
            int i2 = i == rows - 1 ? rows - 1 : i + 1;
            for (int j = 1; j < j_end; j += kLanes) {
                float32x4_t acc = vbias;
                const float* k = filt + static_cast<std::size_t>(oc) * in_ch * 9;
                for (int ic = 0; ic < in_ch; ++ic, k += 9) {
                    const float* p = in + plane * ic;
                    const float* r0 = p + static_cast<std::size_t>(i0) * cols;
                    const float* r1 = p + static_cast<std::size_t>(i) * cols;
                    const float* r2 = p + static_cast<std::size_t>(i2) * cols;
                    acc = vaddq_f32(acc, vmulq_f32(vdupq_n_f32(k[0]), vld1q_f32(r0 + j - 1)));
                    acc = vaddq_f32(acc, vmulq_f32(vdupq_n_f32(k[1]), vld1q_f32(r0 + j)));
                    acc = vaddq_f32(acc, vmulq_f32(vdupq_n_f32(k[2]), vld1q_f32(r0 + j + 1)));
                    acc = vaddq_f32(acc, vmulq_f32(vdupq_n_f32(k[3]), vld1q_f32(r1 + j - 1)));
                    acc = vaddq_f32(acc, vmulq_f32(vdupq_n_f32(k[4]), vld1q_f32(r1 + j)));
                    acc = vaddq_f32(acc, vmulq_f32(vdupq_n_f32(k[5]), vld1q_f32(r1 + j + 1)));
                    acc = vaddq_f32(acc, vmulq_f32(vdupq_n_f32(k[6]), vld1q_f32(r2 + j - 1)));
                    acc = vaddq_f32(acc, vmulq_f32(vdupq_n_f32(k[7]), vld1q_f32(r2 + j)));
                    acc = vaddq_f32(acc, vmulq_f32(vdupq_n_f32(k[8]), vld1q_f32(r2 + j + 1)));
                }
                vst1q_f32(op + static_cast<std::size_t>(i) * cols + j, acc);
            }
        }
    }
    detail::conv3x3_forward_scalar(in, filt, bias, out, in_ch, out_ch, rows, cols, 0, 1);
    detail::conv3x3_forward_scalar(in, filt, bias, out, in_ch, out_ch, rows, cols, j_end, cols);
}

void k_conv_bwd_in(const float* g_out, const float* filt, float* g_in,
                   int in_ch, int out_ch, int rows, int cols) {
    if (cols < kLanes + 2) {
        detail::conv3x3_backward_input_scalar(g_out, filt, g_in, in_ch, out_ch, rows, cols, 0, cols);
        return;
    }
    const int x_end = 1 + (cols - 2) / kLanes * kLanes;
    const std::size_t plane = static_cast<std::size_t>(rows) * cols;
    for (int ic = 0; ic < in_ch; ++ic) {
        float* gp = g_in + plane * ic;
        for (int y = 0; y < rows; ++y) {
            for (int x = 1; x < x_end; x += kLanes) {
                float32x4_t acc = vdupq_n_f32(0.0f);
                for (int oc = 0; oc < out_ch; ++oc) {
                    const float* g = g_out + plane * oc;
                    const float* k = filt + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
                    for (int di = 0; di < 3; ++di) {
                        int r0 = y + 1 - di, r1 = -1;
                        if (di == 0 && y == 0) { r0 = 0; r1 = rows > 1 ? 1 : -1; }
                        else if (di == 2 && y == rows - 1) { r0 = rows > 1 ? rows - 2 : rows - 1; r1 = rows > 1 ? rows - 1 : -1; }
                        else if (r0 < 0 || r0 >= rows) continue;
                        for (int dj = 0; dj < 3; ++dj) {
                            float32x4_t kv = vdupq_n_f32(k[di * 3 + dj]);
                            const float* row = g + static_cast<std::size_t>(r0) * cols;
                            acc = vaddq_f32(acc, vmulq_f32(kv, vld1q_f32(row + x + 1 - dj)));
                            if (r1 >= 0) {
                                const float* row2 = g + static_cast<std::size_t>(r1) * cols;
                                acc = vaddq_f32(acc, vmulq_f32(kv, vld1q_f32(row2 + x + 1 - dj)));
                            }
                        }
                    }
                }
                float* dst = gp + static_cast<std::size_t>(y) * cols + x;
                vst1q_f32(dst, vaddq_f32(vld1q_f32(dst), acc));
            }
        }
    }
    detail::conv3x3_backward_input_scalar(g_out, filt, g_in, in_ch, out_ch, rows, cols, 0, 1);
    detail::conv3x3_backward_input_scalar(g_out, filt, g_in, in_ch, out_ch, rows, cols, x_end, cols);
}

inline double hsum(float32x4_t v) { return static_cast<double>(vaddvq_f32(v)); }

void k_conv_bwd_filt(const float* in, const float* g_out, float* g_filt, float* g_bias,
                     int in_ch, int out_ch, int rows, int cols) {
    const std::size_t plane = static_cast<std::size_t>(rows) * cols;
    for (int oc = 0; oc < out_ch; ++oc) {
        const float* g = g_out + plane * oc;
        double bacc = 0.0;
        for (int i = 0; i < rows; ++i) {
            const float* gr = g + static_cast<std::size_t>(i) * cols;
            float32x4_t v = vdupq_n_f32(0.0f);
            int j = 0;
            for (; j + kLanes <= cols; j += kLanes) v = vaddq_f32(v, vld1q_f32(gr + j));
            double racc = hsum(v);
            for (; j < cols; ++j) racc += gr[j];
            bacc += racc;
        }
        g_bias[oc] += static_cast<float>(bacc);
        for (int ic = 0; ic < in_ch; ++ic) {
            const float* p = in + plane * ic;
            float* gk = g_filt + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
            for (int di = 0; di < 3; ++di) {
                for (int dj = 0; dj < 3; ++dj) {
                    double acc = 0.0;
                    for (int i = 0; i < rows; ++i) {
                        int ci = i + di - 1;
                        ci = ci < 0 ? 0 : (ci > rows - 1 ? rows - 1 : ci);
                        const float* gr = g + static_cast<std::size_t>(i) * cols;
                        const float* pr = p + static_cast<std::size_t>(ci) * cols;
                        double racc = 0.0;
                        int j0 = dj == 0 ? 1 : 0;
                        int j1 = dj == 2 ? cols - 1 : cols;
                        if (dj == 0) racc += static_cast<double>(gr[0]) * pr[0];
                        float32x4_t v = vdupq_n_f32(0.0f);
                        int j = j0;
                        for (; j + kLanes <= j1; j += kLanes)
                            v = vaddq_f32(v, vmulq_f32(vld1q_f32(gr + j), vld1q_f32(pr + j + dj - 1)));
                        racc += hsum(v);
                        for (; j < j1; ++j) racc += static_cast<double>(gr[j]) * pr[j + dj - 1];
                        if (dj == 2) racc += static_cast<double>(gr[cols - 1]) * pr[cols - 1];
                        acc += racc;
                    }
                    gk[di * 3 + dj] += static_cast<float>(acc);
                }
            }
        }
    }
}

void k_axpy(float* dst, const float* x, const float* y, float a, std::size_t n) {
    const float32x4_t va = vdupq_n_f32(a);
    std::size_t t = 0;
    for (; t + kLanes <= n; t += kLanes)
        vst1q_f32(dst + t, vaddq_f32(vld1q_f32(x + t), vmulq_f32(va, vld1q_f32(y + t))));
    for (; t < n; ++t) dst[t] = x[t] + a * y[t];
}

void k_scale_add(float* acc, const float* x, float c, std::size_t n) {
    const float32x4_t vc = vdupq_n_f32(c);
    std::size_t t = 0;
    for (; t + kLanes <= n; t += kLanes)
        vst1q_f32(acc + t, vaddq_f32(vld1q_f32(acc + t), vmulq_f32(vc, vld1q_f32(x + t))));
    for (; t < n; ++t) acc[t] += c * x[t];
}

void k_relu_fwd(const float* x, float* y, std::size_t n) {
    const float32x4_t z = vdupq_n_f32(0.0f);
    std::size_t t = 0;
    for (; t + kLanes <= n; t += kLanes) vst1q_f32(y + t, vmaxq_f32(vld1q_f32(x + t), z));
    for (; t < n; ++t) y[t] = x[t] > 0.0f ? x[t] : 0.0f;
}

void k_relu_bwd(const float* x, const float* gy, float* gx, std::size_t n) {
    const float32x4_t z = vdupq_n_f32(0.0f);
    std::size_t t = 0;
    for (; t + kLanes <= n; t += kLanes) {
        uint32x4_t mask = vcgtq_f32(vld1q_f32(x + t), z);
        float32x4_t g = vreinterpretq_f32_u32(vandq_u32(mask, vreinterpretq_u32_f32(vld1q_f32(gy + t))));
        vst1q_f32(gx + t, vaddq_f32(vld1q_f32(gx + t), g));
    }
    for (; t < n; ++t) gx[t] += x[t] > 0.0f ? gy[t] : 0.0f;
}

}  // namespace

const Backend* neon() {
    static const Backend b{
        "neon",     k_laplacian, k_grad_mag, k_conv_fwd, k_conv_bwd_in,
        k_conv_bwd_filt, k_axpy,  k_scale_add, k_relu_fwd, k_relu_bwd,
    };
    return &b;
}

}  // namespace iel::kernels
