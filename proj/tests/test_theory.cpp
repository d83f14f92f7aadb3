#include "iel/theory.hpp"

#include "iel/diffusion.hpp"
#include "iel/oracles.hpp"
#include "iel/rng.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>

using namespace iel;

TEST_CASE("dirichlet energy of the frozen fixtures") {
    Field c(1, 6, 6);
    c.fill(4.2f);
    CHECK(dirichlet_energy(c) == 0.0);

    Field delta(1, 3, 3);
    delta.at(0, 1, 1) = 1.0f;
    CHECK(dirichlet_energy(delta) == doctest::Approx(4.0));
    CHECK(dirichlet_energy(iel_step(delta, 0.1f)) == doctest::Approx(9.08));

    // h rescales the energy by 1/h^2
    Field scaled = delta;
    scaled.spacing = 2.0f;
    CHECK(dirichlet_energy(scaled) == doctest::Approx(1.0));
}

TEST_CASE("energy amplification report") {
    Field delta(1, 3, 3);
    delta.at(0, 1, 1) = 1.0f;
    EnergyReport r = check_energy_amplification(delta, 0.1f);
    CHECK(r.holds);
    CHECK(r.energy_in == doctest::Approx(4.0));
    CHECK(r.energy_out == doctest::Approx(9.08));
    CHECK(r.ratio == doctest::Approx(2.27));

    Field c(1, 4, 4);
    c.fill(1.0f);
    EnergyReport rc = check_energy_amplification(c, 5.0f);
    CHECK(rc.holds);  // 0 <= 0
    CHECK(rc.energy_out == 0.0);

    Rng rng(100);
    for (int t = 0; t < 200; ++t) {
        Field u = oracles::random_field(rng, 1, 16, 16);
        for (float dt : {0.01f, 0.1f, 1.0f, 10.0f}) CHECK(check_energy_amplification(u, dt).holds);
    }
}

TEST_CASE("reconstruction residual is quadratic in dt") {
    Field c(2, 8, 8);
    c.fill(0.7f);
    CHECK(reconstruction_residual(c, 0.1f) == 0.0);

    Rng rng(101);
    Field u = oracles::random_field(rng, 1, 32, 32);
    double r1 = reconstruction_residual(u, 0.1f);
    double r2 = reconstruction_residual(u, 0.05f);
    CHECK(r2 / r1 >= 0.24);
    CHECK(r2 / r1 <= 0.26);

    double identity = 0.1 * 0.1 * norm2(laplacian(laplacian(u)));
    CHECK(std::fabs(r1 - identity) <= 1e-5 * std::max(1.0, identity));
}

TEST_CASE("noisy-label bound chain") {
    Rng rng(102);
    DiffusionConfig cfg{0.05f, 5, 1.0f};

    // exact-recovery corner: u_in equals the clean target
    Field m_hat = oracles::random_field(rng, 1, 16, 16);
    Field m = apply_fels(m_hat, cfg);
    auto [lhs0, rhs0] = theorem2_gap(m, m, m_hat, 5, 0.05f);
    CHECK(lhs0 == 0.0);
    CHECK(rhs0 >= 0.0);

    for (int t = 0; t < 50; ++t) {
        Field mh = oracles::random_field(rng, 1, 12, 12);
        Field mm = apply_fels(mh, cfg);
        Field u = mm;
        for (float& v : u.values) v += rng.uniform(-0.2f, 0.2f);
        auto [lhs, rhs] = theorem2_gap(u, mm, mh, 5, 0.05f);
        CHECK(lhs <= rhs + 1e-9 * std::max(1.0, rhs));
    }

    Field wrong(1, 8, 8);
    CHECK_THROWS_AS(theorem2_gap(wrong, Field(1, 8, 9), Field(1, 8, 8), 3, 0.05f),
                    std::invalid_argument);
}
