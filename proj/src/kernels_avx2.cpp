#include "iel/kernels.hpp"
#include "kernels_detail.hpp"

#include <immintrin.h>

// AVX2 variants. Every map kernel performs, per lane, the exact operation
// sequence of the scalar reference (mul/add only, no FMA), so results are
// bitwise identical; borders and loop remainders reuse the scalar rows.

namespace iel::kernels {

namespace {

constexpr int kLanes = 8;

void k_laplacian(const float* in, float* out, int rows, int cols, float inv_h2) {
    if (cols < kLanes + 2) {
        detail::laplacian_rows_scalar(in, out, rows, cols, inv_h2, 0, cols);
        return;
    }
    const int j_end = 1 + (cols - 2) / kLanes * kLanes;  // vector span within [1, cols-1)
    const __m256 vscale = _mm256_set1_ps(inv_h2);
    const __m256 vfour = _mm256_set1_ps(4.0f);
    for (int i = 0; i < rows; ++i) {
        const float* up = in + static_cast<std::size_t>(i == 0 ? 0 : i - 1) * cols;
        const float* dn = in + static_cast<std::size_t>(i == rows - 1 ? rows - 1 : i + 1) * cols;
        const float* mid = in + static_cast<std::size_t>(i) * cols;
        float* o = out + static_cast<std::size_t>(i) * cols;
        for (int j = 1; j < j_end; j += kLanes) {
            __m256 vu = _mm256_loadu_ps(up + j);
            __m256 vd = _mm256_loadu_ps(dn + j);
            __m256 vl = _mm256_loadu_ps(mid + j - 1);
            __m256 vr = _mm256_loadu_ps(mid + j + 1);
            __m256 vc = _mm256_loadu_ps(mid + j);
            __m256 s = _mm256_add_ps(_mm256_add_ps(vu, vd), _mm256_add_ps(vl, vr));
            s = _mm256_sub_ps(s, _mm256_mul_ps(vfour, vc));
            _mm256_storeu_ps(o + j, _mm256_mul_ps(s, vscale));
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
    const __m256 vscale = _mm256_set1_ps(inv_2h);
    for (int i = 0; i < rows; ++i) {
        const float* up = in + static_cast<std::size_t>(i == 0 ? 0 : i - 1) * cols;
        const float* dn = in + static_cast<std::size_t>(i == rows - 1 ? rows - 1 : i + 1) * cols;
        const float* mid = in + static_cast<std::size_t>(i) * cols;
        float* o = out + static_cast<std::size_t>(i) * cols;
        for (int j = 1; j < j_end; j += kLanes) {
            __m256 dx = _mm256_sub_ps(_mm256_loadu_ps(dn + j), _mm256_loadu_ps(up + j));
            __m256 dy = _mm256_sub_ps(_mm256_loadu_ps(mid + j + 1), _mm256_loadu_ps(mid + j - 1));
            __m256 s = _mm256_add_ps(_mm256_mul_ps(dx, dx), _mm256_mul_ps(dy, dy));
            _mm256_storeu_ps(o + j, _mm256_mul_ps(_mm256_sqrt_ps(s), vscale));
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
        const __m256 vbias = _mm256_set1_ps(bias[oc]);
        for (int i = 0; i < rows; ++i) {
            int i0 = i == 0 ? 0 : i - 1;
            int i2 = i == rows - 1 ? rows - 1 : i + 1;
            for (int j = 1; j < j_end; j += kLanes) {
                __m256 acc = vbias;
                const float* k = filt + static_cast<std::size_t>(oc) * in_ch * 9;
                for (int ic = 0; ic < in_ch; ++ic, k += 9) {
                    const float* p = in + plane * ic;
                    const float* r0 = p + static_cast<std::size_t>(i0) * cols;
                    const float* r1 = p + static_cast<std::size_t>(i) * cols;
                    const float* r2 = p + static_cast<std::size_t>(i2) * cols;
                    acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_set1_ps(k[0]), _mm256_loadu_ps(r0 + j - 1)));
                    acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_set1_ps(k[1]), _mm256_loadu_ps(r0 + j)));
                    acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_set1_ps(k[2]), _mm256_loadu_ps(r0 + j + 1)));
                    acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_set1_ps(k[3]), _mm256_loadu_ps(r1 + j - 1)));
                    acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_set1_ps(k[4]), _mm256_loadu_ps(r1 + j)));
                    acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_set1_ps(k[5]), _mm256_loadu_ps(r1 + j + 1)));
                    acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_set1_ps(k[6]), _mm256_loadu_ps(r2 + j - 1)));
                    acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_set1_ps(k[7]), _mm256_loadu_ps(r2 + j)));
                    acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_set1_ps(k[8]), _mm256_loadu_ps(r2 + j + 1)));
                }
                _mm256_storeu_ps(op + static_cast<std::size_t>(i) * cols + j, acc);
            }
        }
    }
    detail::conv3x3_forward_scalar(in, filt, bias, out, in_ch, out_ch, rows, cols, 0, 1);
    detail::conv3x3_forward_scalar(in, filt, bias, out, in_ch, out_ch, rows, cols, j_end, cols);
}

// Scalar tap order for interior targets is (oc, di, dj) with singleton row
// sources except at y=0 / y=rows-1, where a folded second row follows the
// primary one inside the same (di, dj) step.
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
                __m256 acc = _mm256_setzero_ps();
                for (int oc = 0; oc < out_ch; ++oc) {
                    const float* g = g_out + plane * oc;
                    const float* k = filt + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
                    for (int di = 0; di < 3; ++di) {
                        int r0 = y + 1 - di, r1 = -1;
                        if (di == 0 && y == 0) { r0 = 0; r1 = rows > 1 ? 1 : -1; }
                        else if (di == 2 && y == rows - 1) { r0 = rows > 1 ? rows - 2 : rows - 1; r1 = rows > 1 ? rows - 1 : -1; }
                        else if (r0 < 0 || r0 >= rows) continue;
                        for (int dj = 0; dj < 3; ++dj) {
                            __m256 kv = _mm256_set1_ps(k[di * 3 + dj]);
                            const float* row = g + static_cast<std::size_t>(r0) * cols;
                            acc = _mm256_add_ps(acc, _mm256_mul_ps(kv, _mm256_loadu_ps(row + x + 1 - dj)));
                            if (r1 >= 0) {
                                const float* row2 = g + static_cast<std::size_t>(r1) * cols;
                                acc = _mm256_add_ps(acc, _mm256_mul_ps(kv, _mm256_loadu_ps(row2 + x + 1 - dj)));
                            }
                        }
                    }
                }
                float* dst = gp + static_cast<std::size_t>(y) * cols + x;
                _mm256_storeu_ps(dst, _mm256_add_ps(_mm256_loadu_ps(dst), acc));
            }
        }
    }
    detail::conv3x3_backward_input_scalar(g_out, filt, g_in, in_ch, out_ch, rows, cols, 0, 1);
    detail::conv3x3_backward_input_scalar(g_out, filt, g_in, in_ch, out_ch, rows, cols, x_end, cols);
}

inline double hsum(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 sh = _mm_movehdup_ps(lo);
    __m128 s = _mm_add_ps(lo, sh);
    sh = _mm_movehl_ps(sh, s);
    s = _mm_add_ss(s, sh);
    return static_cast<double>(_mm_cvtss_f32(s));
}

// Reduction kernel: per-row vector partials, horizontal sum into a double.
// Deterministic, but the association differs from scalar; callers treat it
// as tolerance-equivalent, not bitwise.
void k_conv_bwd_filt(const float* in, const float* g_out, float* g_filt, float* g_bias,
                     int in_ch, int out_ch, int rows, int cols) {
    const std::size_t plane = static_cast<std::size_t>(rows) * cols;
    for (int oc = 0; oc < out_ch; ++oc) {
        const float* g = g_out + plane * oc;
        double bacc = 0.0;
        for (int i = 0; i < rows; ++i) {
            const float* gr = g + static_cast<std::size_t>(i) * cols;
            __m256 v = _mm256_setzero_ps();
            int j = 0;
            for (; j + kLanes <= cols; j += kLanes) v = _mm256_add_ps(v, _mm256_loadu_ps(gr + j));
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
                        // columns 0 and cols-1 read a clamped neighbour; do them scalar
                        double racc = 0.0;
                        int j0 = dj == 0 ? 1 : 0;
                        int j1 = dj == 2 ? cols - 1 : cols;
                        if (dj == 0) racc += static_cast<double>(gr[0]) * pr[0];
                        __m256 v = _mm256_setzero_ps();
                        int j = j0;
                        for (; j + kLanes <= j1; j += kLanes)
                            v = _mm256_add_ps(v, _mm256_mul_ps(_mm256_loadu_ps(gr + j),
                                                               _mm256_loadu_ps(pr + j + dj - 1)));
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
    const __m256 va = _mm256_set1_ps(a);
    std::size_t t = 0;
    for (; t + kLanes <= n; t += kLanes) {
        __m256 r = _mm256_add_ps(_mm256_loadu_ps(x + t), _mm256_mul_ps(va, _mm256_loadu_ps(y + t)));
        _mm256_storeu_ps(dst + t, r);
    }
    for (; t < n; ++t) dst[t] = x[t] + a * y[t];
}

void k_scale_add(float* acc, const float* x, float c, std::size_t n) {
    const __m256 vc = _mm256_set1_ps(c);
    std::size_t t = 0;
    for (; t + kLanes <= n; t += kLanes) {
        __m256 r = _mm256_add_ps(_mm256_loadu_ps(acc + t), _mm256_mul_ps(vc, _mm256_loadu_ps(x + t)));
        _mm256_storeu_ps(acc + t, r);
    }
    for (; t < n; ++t) acc[t] += c * x[t];
}

void k_relu_fwd(const float* x, float* y, std::size_t n) {
    const __m256 z = _mm256_setzero_ps();
    std::size_t t = 0;
    for (; t + kLanes <= n; t += kLanes)
        _mm256_storeu_ps(y + t, _mm256_max_ps(_mm256_loadu_ps(x + t), z));
    for (; t < n; ++t) y[t] = x[t] > 0.0f ? x[t] : 0.0f;
}

void k_relu_bwd(const float* x, const float* gy, float* gx, std::size_t n) {
    const __m256 z = _mm256_setzero_ps();
    std::size_t t = 0;
    for (; t + kLanes <= n; t += kLanes) {
        __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + t), z, _CMP_GT_OQ);
        __m256 g = _mm256_and_ps(mask, _mm256_loadu_ps(gy + t));
        _mm256_storeu_ps(gx + t, _mm256_add_ps(_mm256_loadu_ps(gx + t), g));
    }
    for (; t < n; ++t) gx[t] += x[t] > 0.0f ? gy[t] : 0.0f;
}

}  // namespace

const Backend* avx2() {
    if (!__builtin_cpu_supports("avx2")) return nullptr;
    static const Backend b{
        "avx2",     k_laplacian, k_grad_mag, k_conv_fwd, k_conv_bwd_in,
        k_conv_bwd_filt, k_axpy,  k_scale_add, k_relu_fwd, k_relu_bwd,
    };
    return &b;
}

}  // namespace iel::kernels
