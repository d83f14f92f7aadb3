#include "iel/field.hpp"
#include "iel/oracles.hpp"
#include "iel/rng.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>

using namespace iel;

namespace {

Field make3x3(std::initializer_list<float> vals) {
    Field f(1, 3, 3);
    std::copy(vals.begin(), vals.end(), f.values.begin());
    return f;
}

}  // namespace

TEST_CASE("field construction validates invariants") {
    CHECK_THROWS_AS(Field(0, 3, 3), std::invalid_argument);
    CHECK_THROWS_AS(Field(1, 0, 3), std::invalid_argument);
    CHECK_THROWS_AS(Field(1, 3, 3, 0.0f), std::invalid_argument);
    CHECK_THROWS_AS(Field(1, 3, 3, -1.0f), std::invalid_argument);
    Field f(2, 3, 4);
    CHECK(f.size() == 24);
    CHECK(f.all_finite());
}

TEST_CASE("replicate fetch clamps to the grid") {
    Field row(1, 1, 3);
    row.values = {1.0f, 2.0f, 3.0f};
    CHECK(replicate_pad_neighbor(row, 0, 0, 0, -1) == 1.0f);  // left edge clamps to itself
    CHECK(replicate_pad_neighbor(row, 0, 2, 0, +1) == 3.0f);  // right edge clamps
    Field g(1, 3, 3);
    for (int i = 0; i < 9; ++i) g.values[static_cast<std::size_t>(i)] = static_cast<float>(i);
    CHECK(replicate_pad_neighbor(g, 1, 1, +1, 0) == g.at(0, 2, 1));  // interior untouched
    CHECK_THROWS_AS(replicate_pad_neighbor(g, 3, 0, 0, 0), std::out_of_range);
    CHECK_THROWS_AS(replicate_pad_neighbor(g, 1, 1, 3, 0), std::out_of_range);
}

TEST_CASE("laplacian of the 3x3 delta") {
    Field f = make3x3({0, 0, 0, 0, 1, 0, 0, 0, 0});
    Field lap = laplacian(f);
    const float want[9] = {0, 1, 0, 1, -4, 1, 0, 1, 0};
    for (int t = 0; t < 9; ++t)
        CHECK(lap.values[static_cast<std::size_t>(t)] == doctest::Approx(want[t]).epsilon(1e-6));

    Field c(2, 4, 5);
    c.fill(3.25f);
    Field lc = laplacian(c);
    for (float v : lc.values) CHECK(v == 0.0f);  // constants are annihilated
}

TEST_CASE("laplacian agrees with the dense matrix route") {
    Rng rng(12);
    Field u = oracles::random_field(rng, 1, 5, 7);
    Field lap = laplacian(u);
    std::vector<double> oracle = oracles::laplacian_matrix_form(u);
    for (std::size_t t = 0; t < oracle.size(); ++t)
        CHECK(static_cast<double>(lap.values[t]) ==
              doctest::Approx(oracle[t]).epsilon(1e-6).scale(1.0));
}

TEST_CASE("laplacian with spacing scales by 1/h^2") {
    Field f = make3x3({0, 0, 0, 0, 1, 0, 0, 0, 0});
    f.spacing = 0.5f;
    Field lap = laplacian(f);
    CHECK(lap.at(0, 1, 1) == doctest::Approx(-16.0));
}

TEST_CASE("centered gradient magnitude") {
    Field c(1, 4, 4);
    c.fill(2.0f);
    for (float v : grad_mag_central(c).values) CHECK(v == 0.0f);

    // column ramp: 1.0 inside, 0.5 at the first/last column (replicate
    // halves the centered difference)
    Field ramp(1, 4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) ramp.at(0, i, j) = static_cast<float>(j);
    Field m = grad_mag_central(ramp);
    for (int i = 0; i < 4; ++i) {
        CHECK(m.at(0, i, 0) == doctest::Approx(0.5));
        CHECK(m.at(0, i, 1) == doctest::Approx(1.0));
        CHECK(m.at(0, i, 2) == doctest::Approx(1.0));
        CHECK(m.at(0, i, 3) == doctest::Approx(0.5));
    }

    // isolated unit pixel at (2,2) of a 5x5 grid: the centered stencil sees
    // the spike only from its four edge neighbours (value 1/(2h)); at the
    // diagonal neighbours both centered differences miss the spike entirely
    Field spike(1, 5, 5);
    spike.at(0, 2, 2) = 1.0f;
    Field sm = grad_mag_central(spike);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            bool edge_neighbor = std::abs(i - 2) + std::abs(j - 2) == 1;
            CHECK(sm.at(0, i, j) == doctest::Approx(edge_neighbor ? 0.5 : 0.0));
        }
    for (float v : sm.values) CHECK(v >= 0.0f);
}

TEST_CASE("forward differences zero the last row and column") {
    Field c(3, 2, 2);
    c.fill(1.5f);
    auto [cx, cy] = grad_forward(c);
    for (float v : cx.values) CHECK(v == 0.0f);
    for (float v : cy.values) CHECK(v == 0.0f);

    Field f(1, 2, 2);
    f.values = {0, 1, 2, 3};
    auto [gx, gy] = grad_forward(f);
    CHECK(gx.values[0] == 2.0f);
    CHECK(gx.values[1] == 2.0f);
    CHECK(gx.values[2] == 0.0f);
    CHECK(gx.values[3] == 0.0f);
    CHECK(gy.values[0] == 1.0f);
    CHECK(gy.values[1] == 0.0f);
    CHECK(gy.values[2] == 1.0f);
    CHECK(gy.values[3] == 0.0f);

    Field one_row(1, 1, 8);
    for (int j = 0; j < 8; ++j) one_row.at(0, 0, j) = static_cast<float>(j * j);
    auto [rx, ry] = grad_forward(one_row);
    for (float v : rx.values) CHECK(v == 0.0f);
}

TEST_CASE("laplacian is self-adjoint and mean-preserving on random fields") {
    Rng rng(77);
    for (int t = 0; t < 10; ++t) {
        Field u = oracles::random_field(rng, 2, 9, 13);
        Field w = oracles::random_field(rng, 2, 9, 13);
        double a = dot(laplacian(u), w);
        double b = dot(u, laplacian(w));
        CHECK(std::fabs(a - b) <= 1e-5 * std::max({1.0, std::fabs(a), std::fabs(b)}));
        CHECK(std::fabs(sum_all(laplacian(u))) <= 1e-5 * 9 * 13);
    }
}

TEST_CASE("label mask validation") {
    LabelMask m(2, 2, 3);
    m.ids = {0, 1, 2, 1};
    CHECK_NOTHROW(m.validate());
    m.ids[2] = 3;
    CHECK_THROWS_AS(m.validate(), std::out_of_range);
    CHECK_THROWS_AS(LabelMask(2, 2, 1), std::invalid_argument);
}
