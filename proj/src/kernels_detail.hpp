#pragma once

#include <cstddef>

// Internal: scalar row/column routines shared with the SIMD backends, which
// use them for the clamped border columns and for loop remainders.

namespace iel::kernels::detail {

void laplacian_rows_scalar(const float* in, float* out, int rows, int cols,
                           float inv_h2, int j_begin, int j_end);
void grad_mag_rows_scalar(const float* in, float* out, int rows, int cols,
                          float inv_2h, int j_begin, int j_end);
void conv3x3_forward_scalar(const float* in, const float* filt, const float* bias,
                            float* out, int in_ch, int out_ch, int rows, int cols,
                            int j_begin, int j_end);
void conv3x3_backward_input_scalar(const float* g_out, const float* filt, float* g_in,
                                   int in_ch, int out_ch, int rows, int cols,
                                   int j_begin, int j_end);

}  // namespace iel::kernels::detail
