#include "iel/field.hpp"

#include "iel/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace iel {

Field::Field(int channels_, int rows_, int cols_, float spacing_)
    : channels(channels_), rows(rows_), cols(cols_), spacing(spacing_) {
    if (channels < 1 || rows < 1 || cols < 1)
        throw std::invalid_argument("Field: channels, rows and cols must all be >= 1");
    if (!(spacing > 0.0f))
        throw std::invalid_argument("Field: spacing must be positive");
    values.assign(static_cast<std::size_t>(channels) * rows * cols, 0.0f);
}

void Field::fill(float v) { std::fill(values.begin(), values.end(), v); }

bool Field::all_finite() const {
    for (float v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

LabelMask::LabelMask(int rows_, int cols_, int classes_)
    : rows(rows_), cols(cols_), classes(classes_) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("LabelMask: empty grid");
    if (classes < 2) throw std::invalid_argument("LabelMask: classes must be >= 2");
    ids.assign(static_cast<std::size_t>(rows) * cols, 0);
}

void LabelMask::validate() const {
    for (std::int32_t id : ids)
        if (id < 0 || id >= classes)
            throw std::out_of_range("LabelMask: id outside [0, classes)");
}

float replicate_pad_neighbor(const Field& u, int channel, int i, int j, int di, int dj) {
    if (channel < 0 || channel >= u.channels)
        throw std::out_of_range("replicate_pad_neighbor: channel out of range");
    if (i < 0 || i >= u.rows || j < 0 || j >= u.cols)
        throw std::out_of_range("replicate_pad_neighbor: (i, j) outside the grid");
    if (di < -2 || di > 2 || dj < -2 || dj > 2)
        throw std::out_of_range("replicate_pad_neighbor: |di|, |dj| must be <= 2");
    int ci = std::clamp(i + di, 0, u.rows - 1);
    int cj = std::clamp(j + dj, 0, u.cols - 1);
    return u.at(channel, ci, cj);
}

float replicate_pad_neighbor(const Field& u, int i, int j, int di, int dj) {
    return replicate_pad_neighbor(u, 0, i, j, di, dj);
}

Field laplacian(const Field& u) {
    Field out(u.channels, u.rows, u.cols, u.spacing);
    float inv_h2 = 1.0f / (u.spacing * u.spacing);
    const auto& k = kernels::active();
    for (int c = 0; c < u.channels; ++c)
        k.laplacian_plane(u.plane(c), out.plane(c), u.rows, u.cols, inv_h2);
    return out;
}

Field grad_mag_central(const Field& u) {
    Field out(u.channels, u.rows, u.cols, u.spacing);
    float inv_2h = 1.0f / (2.0f * u.spacing);
    const auto& k = kernels::active();
    for (int c = 0; c < u.channels; ++c)
        k.grad_mag_plane(u.plane(c), out.plane(c), u.rows, u.cols, inv_2h);
    return out;
}

std::pair<Field, Field> grad_forward(const Field& u) {
    Field gx(u.channels, u.rows, u.cols, u.spacing);
    Field gy(u.channels, u.rows, u.cols, u.spacing);
    float inv_h = 1.0f / u.spacing;
    for (int c = 0; c < u.channels; ++c) {
        for (int i = 0; i < u.rows; ++i) {
            for (int j = 0; j < u.cols; ++j) {
                if (i + 1 < u.rows) gx.at(c, i, j) = (u.at(c, i + 1, j) - u.at(c, i, j)) * inv_h;
                if (j + 1 < u.cols) gy.at(c, i, j) = (u.at(c, i, j + 1) - u.at(c, i, j)) * inv_h;
            }
        }
    }
    return {std::move(gx), std::move(gy)};
}

double dot(const Field& a, const Field& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("dot: shape mismatch");
    double acc = 0.0;
    for (std::size_t t = 0; t < a.values.size(); ++t)
        acc += static_cast<double>(a.values[t]) * b.values[t];
    return acc;
}

double norm2(const Field& a) {
    double acc = 0.0;
    for (float v : a.values) acc += static_cast<double>(v) * v;
    return std::sqrt(acc);
}

double sum_all(const Field& a) {
    double acc = 0.0;
    for (float v : a.values) acc += v;
    return acc;
}

float max_abs(const Field& a) {
    float m = 0.0f;
    for (float v : a.values) m = std::max(m, std::fabs(v));
    return m;
}

Field operator+(const Field& a, const Field& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("Field +: shape mismatch");
    Field out = a;
    for (std::size_t t = 0; t < out.values.size(); ++t) out.values[t] += b.values[t];
    return out;
}

Field operator-(const Field& a, const Field& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("Field -: shape mismatch");
    Field out = a;
    for (std::size_t t = 0; t < out.values.size(); ++t) out.values[t] -= b.values[t];
    return out;
}

Field operator*(float s, const Field& a) {
    Field out = a;
    for (float& v : out.values) v *= s;
    return out;
}

}  // namespace iel
