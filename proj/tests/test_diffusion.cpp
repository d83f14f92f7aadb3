#include "iel/diffusion.hpp"
#include "iel/oracles.hpp"
#include "iel/rng.hpp"
#include "iel/theory.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>

using namespace iel;

namespace {

Field delta3x3() {
    Field f(1, 3, 3);
    f.at(0, 1, 1) = 1.0f;
    return f;
}

double rel_gap(const Field& a, const Field& b) {
    return static_cast<double>(max_abs(a - b)) / std::max(1.0, static_cast<double>(max_abs(b)));
}

}  // namespace

TEST_CASE("single forward/inverse steps on the delta") {
    Field f = delta3x3();
    Field fwd = fel_step(f, 0.1f);
    const float want_f[9] = {0, 0.1f, 0, 0.1f, 0.6f, 0.1f, 0, 0.1f, 0};
    for (int t = 0; t < 9; ++t)
        CHECK(fwd.values[static_cast<std::size_t>(t)] == doctest::Approx(want_f[t]));

    Field inv = iel_step(f, 0.1f);
    const float want_i[9] = {0, -0.1f, 0, -0.1f, 1.4f, -0.1f, 0, -0.1f, 0};
    for (int t = 0; t < 9; ++t)
        CHECK(inv.values[static_cast<std::size_t>(t)] == doctest::Approx(want_i[t]));

    // the inverse step amplifies the forward-difference energy: 9.08 vs 4
    CHECK(dirichlet_energy(f) == doctest::Approx(4.0));
    CHECK(dirichlet_energy(inv) == doctest::Approx(9.08));

    Field c(2, 5, 5);
    c.fill(-2.5f);
    CHECK(max_abs(fel_step(c, 0.3f) - c) == 0.0f);
    CHECK(max_abs(iel_step(c, 0.3f) - c) == 0.0f);
}

TEST_CASE("forward then inverse leaves a dt^2 residual, not the identity") {
    Rng rng(5);
    Field u = oracles::random_field(rng, 1, 16, 16);
    Field round = iel_step(fel_step(u, 0.1f), 0.1f);
    Field expected = u - (0.1f * 0.1f) * laplacian(laplacian(u));
    CHECK(rel_gap(round, expected) <= 1e-5);
    CHECK(max_abs(round - u) > 1e-4);  // not the identity
}

TEST_CASE("stacked layers: zero layers is the identity, config validation") {
    Rng rng(6);
    Field u = oracles::random_field(rng, 2, 8, 8);
    CHECK(max_abs(apply_iels(u, DiffusionConfig{0.1f, 0, 1.0f}) - u) == 0.0f);
    CHECK_THROWS_AS(apply_iels(u, DiffusionConfig{0.0f, 3, 1.0f}), std::invalid_argument);
    CHECK_THROWS_AS(apply_iels(u, DiffusionConfig{0.1f, -1, 1.0f}), std::invalid_argument);
    // the WBC-style stack: 20 layers at dt 0.1 stays finite
    Field deep = apply_iels(u, DiffusionConfig{0.1f, 20, 1.0f});
    CHECK(deep.all_finite());
}

TEST_CASE("merged coefficient lists") {
    auto c0 = merged_coeffs(0, 0.1);
    REQUIRE(c0.size() == 1);
    CHECK(c0[0] == 1.0);

    auto c1 = merged_coeffs(1, 0.1);
    REQUIRE(c1.size() == 2);
    CHECK(c1[0] == doctest::Approx(1.0));
    CHECK(c1[1] == doctest::Approx(-0.1));

    auto c2 = merged_coeffs(2, 0.1);
    REQUIRE(c2.size() == 3);
    CHECK(c2[0] == doctest::Approx(1.0));
    CHECK(c2[1] == doctest::Approx(-0.2));
    CHECK(c2[2] == doctest::Approx(0.01));

    CHECK_THROWS_AS(merged_coeffs(80, 0.1), std::overflow_error);
    CHECK_THROWS_AS(merged_coeffs(-1, 0.1), std::invalid_argument);
}

TEST_CASE("merged application equals the stacked layers") {
    Rng rng(7);
    Field u = oracles::random_field(rng, 1, 32, 32);

    CHECK(max_abs(apply_merged(u, {1.0}) - u) == 0.0f);
    CHECK(max_abs(apply_merged(u, {0.0})) == 0.0f);
    CHECK_THROWS_AS(apply_merged(u, {}), std::invalid_argument);

    for (int n : {1, 3, 5, 10}) {
        Field seq = apply_iels(u, DiffusionConfig{0.1f, n, 1.0f});
        Field mrg = apply_merged(u, merged_coeffs(n, 0.1));
        CHECK(rel_gap(mrg, seq) <= 1e-4);
    }
}

TEST_CASE("linearity and the spectral bound of the inverse step") {
    Rng rng(8);
    Field u = oracles::random_field(rng, 1, 12, 12);
    Field w = oracles::random_field(rng, 1, 12, 12);
    Field lhs = iel_step(2.0f * u + (-3.0f) * w, 0.05f);
    Field rhs = 2.0f * iel_step(u, 0.05f) + (-3.0f) * iel_step(w, 0.05f);
    CHECK(rel_gap(lhs, rhs) <= 1e-5);

    for (float dt : {0.05f, 0.1f, 1.0f}) {
        Field stepped = iel_step(u, dt);
        CHECK(max_abs(stepped) <= (1.0f + 8.0f * dt) * max_abs(u) * (1.0f + 1e-6f));
    }
}
