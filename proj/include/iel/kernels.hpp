#pragma once

#include <cstddef>
#include <string>

namespace iel::kernels {

// Low-level kernels behind the stencils, the 3x3 convolution and the
// elementwise tensor updates. Each backend implements the same contract:
//
//   * map kernels (laplacian_plane, grad_mag_plane, conv3x3_forward,
//     conv3x3_backward_input, axpy, scale_add, relu_forward,
//     relu_backward_acc) must produce results bitwise identical to the
//     scalar backend. They perform the exact same IEEE single-precision
//     operation sequence per element; vector lanes only batch elements.
//   * reduction kernels (conv3x3_backward_filters) may reassociate the
//     accumulation. They are deterministic for a fixed backend but are only
//     required to match scalar within a small relative tolerance.
//
// Convolution layout: input (in_ch, rows, cols) channel-major, filters
// (out_ch, in_ch, 3, 3), cross-correlation with replicate padding, stride 1.
struct Backend {
    const char* name;

    // out = (sum of 4 clamped neighbours - 4*center) * inv_h2
    void (*laplacian_plane)(const float* in, float* out, int rows, int cols, float inv_h2);
    // out = sqrt(dx^2 + dy^2) * inv_2h with centered, clamped differences
    void (*grad_mag_plane)(const float* in, float* out, int rows, int cols, float inv_2h);

    void (*conv3x3_forward)(const float* in, const float* filt, const float* bias,
                            float* out, int in_ch, int out_ch, int rows, int cols);
    // g_in += adjoint of the forward map applied to g_out (replicate-clamp aware)
    void (*conv3x3_backward_input)(const float* g_out, const float* filt, float* g_in,
                                   int in_ch, int out_ch, int rows, int cols);
    // g_filt += dL/dfilt, g_bias += dL/dbias (row-wise accumulation)
    void (*conv3x3_backward_filters)(const float* in, const float* g_out, float* g_filt,
                                     float* g_bias, int in_ch, int out_ch, int rows, int cols);

    void (*axpy)(float* dst, const float* x, const float* y, float a, std::size_t n);  // dst = x + a*y
    void (*scale_add)(float* acc, const float* x, float c, std::size_t n);             // acc += c*x
    void (*relu_forward)(const float* x, float* y, std::size_t n);
    void (*relu_backward_acc)(const float* x, const float* gy, float* gx, std::size_t n);
};

/// Active backend. Chosen once at startup: the best SIMD variant the CPU
/// supports, unless overridden by set_backend or the IELSEG_BACKEND
/// environment variable ("scalar", "avx2", "neon").
const Backend& active();

const Backend& scalar();
const Backend* avx2();  // nullptr when unsupported (wrong arch or CPU)
const Backend* neon();

/// Force a backend by name; "auto" restores runtime detection.
/// Throws std::invalid_argument for unknown or unsupported names.
void set_backend(const std::string& name);

}  // namespace iel::kernels
