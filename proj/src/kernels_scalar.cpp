#include "iel/kernels.hpp"

#include <cmath>

// Reference kernels. The arithmetic here fixes the element-level operation
// order that the SIMD backends replicate lane-for-lane; see kernels.hpp.

namespace iel::kernels {

namespace detail {

// Border column handling shared by every backend: the SIMD variants call
// these for the clamped edge columns and run vector code on the interior.

void laplacian_rows_scalar(const float* in, float* out, int rows, int cols,
                           float inv_h2, int j_begin, int j_end) {
    for (int i = 0; i < rows; ++i) {
        const float* up = in + static_cast<std::size_t>(i == 0 ? 0 : i - 1) * cols;
        const float* dn = in + static_cast<std::size_t>(i == rows - 1 ? rows - 1 : i + 1) * cols;
        const float* mid = in + static_cast<std::size_t>(i) * cols;
        float* o = out + static_cast<std::size_t>(i) * cols;
        for (int j = j_begin; j < j_end; ++j) {
            float left = mid[j == 0 ? 0 : j - 1];
            float right = mid[j == cols - 1 ? cols - 1 : j + 1];
            o[j] = ((up[j] + dn[j]) + (left + right) - 4.0f * mid[j]) * inv_h2;
        }
    }
}

void grad_mag_rows_scalar(const float* in, float* out, int rows, int cols,
                          float inv_2h, int j_begin, int j_end) {
    for (int i = 0; i < rows; ++i) {
        const float* up = in + static_cast<std::size_t>(i == 0 ? 0 : i - 1) * cols;
        const float* dn = in + static_cast<std::size_t>(i == rows - 1 ? rows - 1 : i + 1) * cols;
        const float* mid = in + static_cast<std::size_t>(i) * cols;
        float* o = out + static_cast<std::size_t>(i) * cols;
        for (int j = j_begin; j < j_end; ++j) {
            float dx = dn[j] - up[j];
            float dy = mid[j == cols - 1 ? cols - 1 : j + 1] - mid[j == 0 ? 0 : j - 1];
            o[j] = std::sqrt(dx * dx + dy * dy) * inv_2h;
        }
    }
}

// Forward conv for an arbitrary column range, clamp-aware. Accumulation
// order per output element: bias, then ic-major, tap row-major.
void conv3x3_forward_scalar(const float* in, const float* filt, const float* bias,
                            float* out, int in_ch, int out_ch, int rows, int cols,
                            int j_begin, int j_end) {
    const std::size_t plane = static_cast<std::size_t>(rows) * cols;
    for (int oc = 0; oc < out_ch; ++oc) {
        float* op = out + plane * oc;
        for (int i = 0; i < rows; ++i) {
            int i0 = i == 0 ? 0 : i - 1;
            int i2 = i == rows - 1 ? rows - 1 : i + 1;
            for (int j = j_begin; j < j_end; ++j) {
                int j0 = j == 0 ? 0 : j - 1;
                int j2 = j == cols - 1 ? cols - 1 : j + 1;
                float acc = bias[oc];
                const float* k = filt + static_cast<std::size_t>(oc) * in_ch * 9;
                for (int ic = 0; ic < in_ch; ++ic, k += 9) {
                    const float* p = in + plane * ic;
                    const float* r0 = p + static_cast<std::size_t>(i0) * cols;
                    const float* r1 = p + static_cast<std::size_t>(i) * cols;
                    const float* r2 = p + static_cast<std::size_t>(i2) * cols;
                    acc += k[0] * r0[j0];
                    acc += k[1] * r0[j];
                    acc += k[2] * r0[j2];
                    acc += k[3] * r1[j0];
                    acc += k[4] * r1[j];
                    acc += k[5] * r1[j2];
                    acc += k[6] * r2[j0];
                    acc += k[7] * r2[j];
                    acc += k[8] * r2[j2];
                }
                op[static_cast<std::size_t>(i) * cols + j] = acc;
            }
        }
    }
}

// Backward-input in gather form. The forward scatter sends the tap (di,dj)
// of output pixel (i,j) to input pixel (clamp(i+di-1), clamp(j+dj-1)); for a
// target (y,x) the contributing output rows for tap row di are y+1-di, plus
// a folded duplicate at the clamped edges:
//   y = 0,      di = 0: rows {0, 1}
//   y = rows-1, di = 2: rows {rows-2, rows-1}   (rows-2 only if in range)
// and symmetrically for columns.
inline int src_list(int y, int d, int n, int out[2]) {
    int cnt = 0;
    int s = y + 1 - d;
    if (d == 0 && y == 0) {
        out[cnt++] = 0;
        if (n > 1) out[cnt++] = 1;
        return cnt;
    }
    if (d == 2 && y == n - 1) {
        if (n > 1) out[cnt++] = n - 2;
        out[cnt++] = n - 1;
        return cnt;
    }
    if (s >= 0 && s < n) out[cnt++] = s;
    return cnt;
}

void conv3x3_backward_input_scalar(const float* g_out, const float* filt, float* g_in,
                                   int in_ch, int out_ch, int rows, int cols,
                                   int j_begin, int j_end) {
    const std::size_t plane = static_cast<std::size_t>(rows) * cols;
    for (int ic = 0; ic < in_ch; ++ic) {
        float* gp = g_in + plane * ic;
        for (int y = 0; y < rows; ++y) {
            for (int x = j_begin; x < j_end; ++x) {
                float acc = 0.0f;
                for (int oc = 0; oc < out_ch; ++oc) {
                    const float* g = g_out + plane * oc;
                    const float* k = filt + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
                    for (int di = 0; di < 3; ++di) {
                        int ri[2];
                        int nri = src_list(y, di, rows, ri);
                        for (int dj = 0; dj < 3; ++dj) {
                            int cj[2];
                            int ncj = src_list(x, dj, cols, cj);
                            float kv = k[di * 3 + dj];
                            for (int a = 0; a < nri; ++a)
                                for (int b = 0; b < ncj; ++b)
                                    acc += kv * g[static_cast<std::size_t>(ri[a]) * cols + cj[b]];
                        }
                    }
                }
                gp[static_cast<std::size_t>(y) * cols + x] += acc;
            }
        }
    }
}

}  // namespace detail

namespace {

void k_laplacian(const float* in, float* out, int rows, int cols, float inv_h2) {
    detail::laplacian_rows_scalar(in, out, rows, cols, inv_h2, 0, cols);
}

void k_grad_mag(const float* in, float* out, int rows, int cols, float inv_2h) {
    detail::grad_mag_rows_scalar(in, out, rows, cols, inv_2h, 0, cols);
}

void k_conv_fwd(const float* in, const float* filt, const float* bias, float* out,
                int in_ch, int out_ch, int rows, int cols) {
    detail::conv3x3_forward_scalar(in, filt, bias, out, in_ch, out_ch, rows, cols, 0, cols);
}

void k_conv_bwd_in(const float* g_out, const float* filt, float* g_in,
                   int in_ch, int out_ch, int rows, int cols) {
    detail::conv3x3_backward_input_scalar(g_out, filt, g_in, in_ch, out_ch, rows, cols, 0, cols);
}

void k_conv_bwd_filt(const float* in, const float* g_out, float* g_filt, float* g_bias,
                     int in_ch, int out_ch, int rows, int cols) {
    const std::size_t plane = static_cast<std::size_t>(rows) * cols;
    for (int oc = 0; oc < out_ch; ++oc) {
        const float* g = g_out + plane * oc;
        double bacc = 0.0;
        for (std::size_t t = 0; t < plane; ++t) bacc += g[t];
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
                        for (int j = 0; j < cols; ++j) {
                            int cj = j + dj - 1;
                            cj = cj < 0 ? 0 : (cj > cols - 1 ? cols - 1 : cj);
                            racc += static_cast<double>(gr[j]) * pr[cj];
                        }
                        acc += racc;
                    }
                    gk[di * 3 + dj] += static_cast<float>(acc);
                }
            }
        }
    }
}

void k_axpy(float* dst, const float* x, const float* y, float a, std::size_t n) {
    for (std::size_t t = 0; t < n; ++t) dst[t] = x[t] + a * y[t];
}

void k_scale_add(float* acc, const float* x, float c, std::size_t n) {
    for (std::size_t t = 0; t < n; ++t) acc[t] += c * x[t];
}

void k_relu_fwd(const float* x, float* y, std::size_t n) {
    for (std::size_t t = 0; t < n; ++t) y[t] = x[t] > 0.0f ? x[t] : 0.0f;
}

void k_relu_bwd(const float* x, const float* gy, float* gx, std::size_t n) {
    for (std::size_t t = 0; t < n; ++t) gx[t] += x[t] > 0.0f ? gy[t] : 0.0f;
}

}  // namespace

const Backend& scalar() {
    static const Backend b{
        "scalar",   k_laplacian, k_grad_mag, k_conv_fwd, k_conv_bwd_in,
        k_conv_bwd_filt, k_axpy,  k_scale_add, k_relu_fwd, k_relu_bwd,
    };
    return b;
}

}  // namespace iel::kernels
