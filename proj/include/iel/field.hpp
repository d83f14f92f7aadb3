#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace iel {

/// Dense real-valued grid: channels x rows x cols, channel-major then
/// row-major, 32-bit values. `spacing` is the pixel spacing h; it defaults
/// to 1 and is carried because the stencils divide by it.
struct Field {
    int channels = 0;
    int rows = 0;
    int cols = 0;
    float spacing = 1.0f;
    std::vector<float> values;

    Field() = default;
    Field(int channels, int rows, int cols, float spacing = 1.0f);

    std::size_t size() const { return values.size(); }
    std::size_t plane_size() const { return static_cast<std::size_t>(rows) * cols; }

    float* plane(int c) { return values.data() + plane_size() * c; }
    const float* plane(int c) const { return values.data() + plane_size() * c; }

    float& at(int c, int i, int j) { return values[(static_cast<std::size_t>(c) * rows + i) * cols + j]; }
    float at(int c, int i, int j) const { return values[(static_cast<std::size_t>(c) * rows + i) * cols + j]; }

    bool same_shape(const Field& o) const {
        return channels == o.channels && rows == o.rows && cols == o.cols;
    }

    void fill(float v);
    bool all_finite() const;
};

/// Integer class map, row-major. Every id lies in [0, classes).
struct LabelMask {
    int rows = 0;
    int cols = 0;
    int classes = 2;
    std::vector<std::int32_t> ids;

    LabelMask() = default;
    LabelMask(int rows, int cols, int classes);

    std::int32_t& at(int i, int j) { return ids[static_cast<std::size_t>(i) * cols + j]; }
    std::int32_t at(int i, int j) const { return ids[static_cast<std::size_t>(i) * cols + j]; }

    std::size_t size() const { return ids.size(); }
    void validate() const;  // throws if any id is outside [0, classes)
};

/// Replicate (Neumann) fetch: reads U at (i+di, j+dj) with both coordinates
/// clamped into the grid. (i, j) itself must be in range and |di|,|dj| <= 2.
float replicate_pad_neighbor(const Field& u, int channel, int i, int j, int di, int dj);
float replicate_pad_neighbor(const Field& u, int i, int j, int di, int dj);

/// 5-point Laplacian with replicate boundary, per channel:
///   (u[i+1,j] + u[i-1,j] + u[i,j-1] + u[i,j+1] - 4 u[i,j]) / h^2
Field laplacian(const Field& u);

/// Centered-difference gradient magnitude with replicate boundary:
///   sqrt((u[i+1,j]-u[i-1,j])^2 + (u[i,j+1]-u[i,j-1])^2) / (2h)
Field grad_mag_central(const Field& u);

/// Forward differences (u[i+1,j]-u[i,j])/h and (u[i,j+1]-u[i,j])/h with the
/// last row (respectively column) set to zero.
std::pair<Field, Field> grad_forward(const Field& u);

// Reductions accumulate in 64-bit, in a fixed element order.
double dot(const Field& a, const Field& b);
double norm2(const Field& a);     // Euclidean norm over all entries
double sum_all(const Field& a);
float max_abs(const Field& a);

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(float s, const Field& a);

}  // namespace iel
