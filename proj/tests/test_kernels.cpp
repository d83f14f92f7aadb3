#include "iel/kernels.hpp"
#include "iel/oracles.hpp"
#include "iel/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

using namespace iel;

// Backend equivalence: map kernels must agree bitwise with the scalar
// reference on every shape, including the clamped borders and the vector
// remainders; the filter-gradient reduction may reassociate and is held to
// a tight relative tolerance instead.

namespace {

std::vector<const kernels::Backend*> simd_backends() {
    std::vector<const kernels::Backend*> out;
    if (kernels::avx2()) out.push_back(kernels::avx2());
    if (kernels::neon()) out.push_back(kernels::neon());
    return out;
}

bool bitwise_equal(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::memcmp(&a[i], &b[i], sizeof(float)) != 0) return false;
    return true;
}

}  // namespace

TEST_CASE("map kernels match scalar bitwise across backends") {
    Rng rng(1);
    const int shapes[][2] = {{1, 1}, {1, 9}, {3, 3}, {5, 8}, {7, 9}, {16, 16}, {13, 31},
                             {33, 47}, {64, 64}, {2, 130}};
    for (const kernels::Backend* simd : simd_backends()) {
        CAPTURE(simd->name);
        for (const auto& s : shapes) {
            const int rows = s[0], cols = s[1];
            Field u = oracles::random_field(rng, 1, rows, cols);
            const std::size_t n = u.size();

            std::vector<float> a(n), b(n);
            kernels::scalar().laplacian_plane(u.values.data(), a.data(), rows, cols, 1.0f);
            simd->laplacian_plane(u.values.data(), b.data(), rows, cols, 1.0f);
            CHECK(bitwise_equal(a, b));

            kernels::scalar().grad_mag_plane(u.values.data(), a.data(), rows, cols, 0.5f);
            simd->grad_mag_plane(u.values.data(), b.data(), rows, cols, 0.5f);
            CHECK(bitwise_equal(a, b));

            Field x = oracles::random_field(rng, 1, rows, cols);
            std::vector<float> accA(n, 0.5f), accB(n, 0.5f);
            kernels::scalar().axpy(a.data(), u.values.data(), x.values.data(), -0.37f, n);
            simd->axpy(b.data(), u.values.data(), x.values.data(), -0.37f, n);
            CHECK(bitwise_equal(a, b));
            kernels::scalar().scale_add(accA.data(), x.values.data(), 1.3f, n);
            simd->scale_add(accB.data(), x.values.data(), 1.3f, n);
            CHECK(bitwise_equal(accA, accB));

            kernels::scalar().relu_forward(u.values.data(), a.data(), n);
            simd->relu_forward(u.values.data(), b.data(), n);
            CHECK(bitwise_equal(a, b));
            std::fill(accA.begin(), accA.end(), 0.25f);
            std::fill(accB.begin(), accB.end(), 0.25f);
            kernels::scalar().relu_backward_acc(u.values.data(), x.values.data(), accA.data(), n);
            simd->relu_backward_acc(u.values.data(), x.values.data(), accB.data(), n);
            CHECK(bitwise_equal(accA, accB));
        }
    }
}

TEST_CASE("conv3x3 forward and backward-input match scalar bitwise") {
    Rng rng(2);
    const int shapes[][2] = {{4, 4}, {6, 9}, {9, 6}, {1, 12}, {12, 1}, {16, 16}, {11, 33}};
    for (const kernels::Backend* simd : simd_backends()) {
        CAPTURE(simd->name);
        for (const auto& s : shapes) {
            const int rows = s[0], cols = s[1], in_ch = 3, out_ch = 4;
            Field x = oracles::random_field(rng, in_ch, rows, cols);
            Field filt = oracles::random_field(rng, out_ch * in_ch, 3, 3);
            Field bias = oracles::random_field(rng, out_ch, 1, 1);
            Field gout = oracles::random_field(rng, out_ch, rows, cols);

            std::vector<float> a(static_cast<std::size_t>(out_ch) * rows * cols);
            std::vector<float> b(a.size());
            kernels::scalar().conv3x3_forward(x.values.data(), filt.values.data(),
                                              bias.values.data(), a.data(), in_ch, out_ch, rows, cols);
            simd->conv3x3_forward(x.values.data(), filt.values.data(), bias.values.data(), b.data(),
                                  in_ch, out_ch, rows, cols);
            CHECK(bitwise_equal(a, b));

            std::vector<float> ga(static_cast<std::size_t>(in_ch) * rows * cols, 0.1f);
            std::vector<float> gb(ga.size(), 0.1f);
            kernels::scalar().conv3x3_backward_input(gout.values.data(), filt.values.data(),
                                                     ga.data(), in_ch, out_ch, rows, cols);
            simd->conv3x3_backward_input(gout.values.data(), filt.values.data(), gb.data(), in_ch,
                                         out_ch, rows, cols);
            CHECK(bitwise_equal(ga, gb));
        }
    }
}

TEST_CASE("conv3x3 filter gradients agree within reduction tolerance") {
    Rng rng(3);
    for (const kernels::Backend* simd : simd_backends()) {
        CAPTURE(simd->name);
        const int rows = 17, cols = 23, in_ch = 3, out_ch = 4;
        Field x = oracles::random_field(rng, in_ch, rows, cols);
        Field gout = oracles::random_field(rng, out_ch, rows, cols);
        std::vector<float> gfa(static_cast<std::size_t>(out_ch) * in_ch * 9, 0.0f), gba(out_ch, 0.0f);
        std::vector<float> gfb = gfa, gbb = gba;
        kernels::scalar().conv3x3_backward_filters(x.values.data(), gout.values.data(), gfa.data(),
                                                   gba.data(), in_ch, out_ch, rows, cols);
        simd->conv3x3_backward_filters(x.values.data(), gout.values.data(), gfb.data(), gbb.data(),
                                       in_ch, out_ch, rows, cols);
        for (std::size_t i = 0; i < gfa.size(); ++i)
            CHECK(std::fabs(gfa[i] - gfb[i]) <= 1e-4 * std::max(1.0f, std::fabs(gfa[i])));
        for (std::size_t i = 0; i < gba.size(); ++i)
            CHECK(std::fabs(gba[i] - gbb[i]) <= 1e-4 * std::max(1.0f, std::fabs(gba[i])));
    }
}

TEST_CASE("backward-input scatter semantics, checked against a naive scatter") {
    // the gather-with-folds implementation must equal the literal adjoint of
    // the clamped forward: scatter g_out through each tap
    Rng rng(4);
    const int rows = 5, cols = 6, in_ch = 2, out_ch = 2;
    Field filt = oracles::random_field(rng, out_ch * in_ch, 3, 3);
    Field gout = oracles::random_field(rng, out_ch, rows, cols);

    std::vector<double> naive(static_cast<std::size_t>(in_ch) * rows * cols, 0.0);
    for (int oc = 0; oc < out_ch; ++oc)
        for (int ic = 0; ic < in_ch; ++ic)
            for (int i = 0; i < rows; ++i)
                for (int j = 0; j < cols; ++j)
                    for (int di = 0; di < 3; ++di)
                        for (int dj = 0; dj < 3; ++dj) {
                            int ci = std::clamp(i + di - 1, 0, rows - 1);
                            int cj = std::clamp(j + dj - 1, 0, cols - 1);
                            naive[(static_cast<std::size_t>(ic) * rows + ci) * cols + cj] +=
                                static_cast<double>(gout.at(oc, i, j)) *
                                filt.at(oc * in_ch + ic, di, dj);
                        }

    std::vector<float> got(naive.size(), 0.0f);
    kernels::scalar().conv3x3_backward_input(gout.values.data(), filt.values.data(), got.data(),
                                             in_ch, out_ch, rows, cols);
    for (std::size_t t = 0; t < naive.size(); ++t)
        CHECK(std::fabs(static_cast<double>(got[t]) - naive[t]) <= 1e-5);
}

TEST_CASE("backend selection") {
    CHECK(std::string(kernels::scalar().name) == "scalar");
    CHECK_THROWS_AS(kernels::set_backend("sse9"), std::invalid_argument);
    kernels::set_backend("scalar");
    CHECK(std::string(kernels::active().name) == "scalar");
    kernels::set_backend("auto");
#if defined(__x86_64__)
    if (kernels::avx2()) CHECK(std::string(kernels::active().name) == "avx2");
#endif
}
