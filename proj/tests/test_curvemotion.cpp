#include "iel/curvemotion.hpp"
#include "iel/oracles.hpp"
#include "iel/rng.hpp"

#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>

using namespace iel;

TEST_CASE("disc kernels enumerate the lattice disc") {
    DiscKernel k1 = disc_kernel(1);
    CHECK(k1.offsets.size() == 5);
    CHECK(k1.weight == doctest::Approx(1.0 / 5.0));

    CHECK(disc_kernel(2).offsets.size() == 13);
    CHECK(disc_kernel(5).offsets.size() == 81);
    CHECK_THROWS_AS(disc_kernel(0), std::invalid_argument);

    // symmetric under negation
    DiscKernel k3 = disc_kernel(3);
    for (auto [di, dj] : k3.offsets) {
        bool found = std::find(k3.offsets.begin(), k3.offsets.end(),
                               std::make_pair(-di, -dj)) != k3.offsets.end();
        CHECK(found);
    }
}

TEST_CASE("indicator thresholds strictly above zero") {
    Field u(1, 2, 3);
    u.values = {-1.0f, 0.0f, 1e-6f, 2.0f, -0.5f, 0.0f};
    LabelMask f = indicator(u, 0);
    CHECK(f.ids == std::vector<std::int32_t>({0, 0, 1, 1, 0, 0}));  // exact zeros are background

    Field all_neg(1, 3, 3);
    all_neg.fill(-2.0f);
    LabelMask z = indicator(all_neg, 0);
    CHECK(std::all_of(z.ids.begin(), z.ids.end(), [](std::int32_t v) { return v == 0; }));

    Field rect(1, 8, 8);
    rect.fill(-1.0f);
    for (int i = 2; i < 6; ++i)
        for (int j = 3; j < 7; ++j) rect.at(0, i, j) = 1.0f;
    LabelMask r = indicator(rect, 0);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            CHECK(r.at(i, j) == ((i >= 2 && i < 6 && j >= 3 && j < 7) ? 1 : 0));

    CHECK_THROWS_AS(indicator(rect, 2), std::out_of_range);
}

TEST_CASE("violations: solid rectangle away from the border is clean") {
    for (int r : {2, 3, 5}) {
        LabelMask rect(40, 40, 2);
        for (int i = 8; i < 32; ++i)
            for (int j = 8; j < 32; ++j) rect.at(i, j) = 1;
        LabelMask v = convexity_violations(rect, r);
        CHECK(std::all_of(v.ids.begin(), v.ids.end(), [](std::int32_t x) { return x == 0; }));
        LabelMask vb = oracles::convexity_violations_bruteforce(rect, r);
        CHECK(v.ids == vb.ids);
    }
}

TEST_CASE("violations: all-zero mask is clean") {
    LabelMask zero(16, 16, 2);
    for (int r : {1, 2, 5}) {
        LabelMask v = convexity_violations(zero, r);
        CHECK(std::all_of(v.ids.begin(), v.ids.end(), [](std::int32_t x) { return x == 0; }));
    }
}

TEST_CASE("violations: L-shape flags the re-entrant corner and matches brute force") {
    LabelMask l = oracles::l_shape_mask(64, 64);
    for (int r : {2, 3, 5}) {
        LabelMask fast = convexity_violations(l, r);
        LabelMask slow = oracles::convexity_violations_bruteforce(l, r);
        CHECK(fast.ids == slow.ids);
        long long count = 0;
        bool contained = true;
        for (int i = 0; i < 64; ++i)
            for (int j = 0; j < 64; ++j)
                if (fast.at(i, j) != 0) {
                    ++count;
                    if (std::abs(i - 32) > r + 1 || std::abs(j - 32) > r + 1) contained = false;
                }
        CHECK(count > 0);
        CHECK(contained);
    }
}

TEST_CASE("concave set is the union over radii and detects only background") {
    Rng rng(123);
    for (int t = 0; t < 25; ++t) {
        LabelMask f = oracles::random_blob_mask(rng, 48, 48);
        LabelMask fast = concave_set(f, {2, 3, 5});
        LabelMask slow = oracles::concave_set_bruteforce(f, {2, 3, 5});
        CHECK(fast.ids == slow.ids);
        for (std::size_t i = 0; i < fast.ids.size(); ++i)
            if (fast.ids[i] != 0) CHECK(f.ids[i] == 0);
    }
    LabelMask l = oracles::l_shape_mask(32, 32);
    CHECK(concave_set(l, {3}).ids == convexity_violations(l, 3).ids);  // singleton radius set
}

TEST_CASE("speed field marks the dilated concavity set") {
    LabelMask c(9, 9, 2);

    SUBCASE("empty set gives zero speed") {
        Field v = speed_field(c, 3);
        CHECK(max_abs(v) == 0.0f);
    }

    SUBCASE("single pixel, d=1 marks the 5-pixel disc") {
        c.at(4, 4) = 1;
        Field v = speed_field(c, 1);
        int marked = 0;
        for (float x : v.values) marked += x == -1.0f;
        CHECK(marked == 5);
        CHECK(v.at(0, 4, 4) == -1.0f);
        CHECK(v.at(0, 3, 4) == -1.0f);
        CHECK(v.at(0, 5, 4) == -1.0f);
        CHECK(v.at(0, 4, 3) == -1.0f);
        CHECK(v.at(0, 4, 5) == -1.0f);
    }

    SUBCASE("d=0 keeps exactly the set; d=3 matches the brute-force dilation") {
        c.at(2, 3) = 1;
        c.at(7, 7) = 1;
        Field v0 = speed_field(c, 0);
        for (int i = 0; i < 9; ++i)
            for (int j = 0; j < 9; ++j) CHECK(v0.at(0, i, j) == (c.at(i, j) ? -1.0f : 0.0f));
        Field v3 = speed_field(c, 3);
        Field ref = oracles::speed_field_bruteforce(c, 3);
        CHECK(v3.values == ref.values);
    }
}

TEST_CASE("curve-motion step: convex inputs are exact fixed points") {
    LabelMask disc = oracles::disc_mask(48, 48, 14);
    Field sdf = oracles::signed_distance_field(disc, 0.1f);
    CurveMotionConfig cfg;  // {5,10,15}, d=3, dt=0.1
    Field one = curve_motion_iel_step(sdf, 0, cfg);
    CHECK(one.values == sdf.values);
    cfg.n_steps = 7;
    Field many = run_curve_motion_iels(sdf, 0, cfg);
    CHECK(many.values == sdf.values);
}

TEST_CASE("curve-motion step: concavity deepens on the L-shape") {
    LabelMask l = oracles::l_shape_mask(48, 48);
    Field sdf = oracles::signed_distance_field(l, 0.1f);
    CurveMotionConfig cfg;
    cfg.radii = {2, 3, 5};
    cfg.dilation = 2;
    cfg.n_steps = 20;

    auto violations = [&](const Field& u) {
        LabelMask c = oracles::concave_set_bruteforce(indicator(u, 0), cfg.radii);
        long long n = 0;
        for (auto id : c.ids) n += id;
        return n;
    };

    long long initial = violations(sdf);
    CHECK(initial > 0);

    // a single step never lowers the count; over the whole run the count
    // trends upward (individual steps can fluctuate as the corner pixels
    // flip, so only the single-step and whole-run comparisons are asserted)
    Field one_stepped = curve_motion_iel_step(sdf, 0, cfg);
    CHECK(violations(one_stepped) >= initial);

    Field u = run_curve_motion_iels(sdf, 0, cfg);
    CHECK(violations(u) > initial);  // the motion actually bit

    // update magnitude bound: |u1 - u0| <= dt * max |grad u0|
    Field one_step = curve_motion_iel_step(sdf, 0, cfg);
    CHECK(max_abs(one_step - sdf) <= cfg.dt * max_abs(grad_mag_central(sdf)) * (1.0f + 1e-6f));
}

TEST_CASE("zero steps and pass-through channels") {
    Rng rng(9);
    Field u = oracles::random_field(rng, 3, 16, 16);
    CurveMotionConfig cfg;
    cfg.n_steps = 0;
    CHECK(run_curve_motion_iels(u, 1, cfg).values == u.values);

    cfg.n_steps = 4;
    cfg.radii = {2, 3};
    Field moved = run_curve_motion_iels(u, 1, cfg);
    for (std::size_t t = 0; t < u.plane_size(); ++t) {
        CHECK(moved.plane(0)[t] == u.plane(0)[t]);
        CHECK(moved.plane(2)[t] == u.plane(2)[t]);
    }

    CHECK_THROWS_AS(run_curve_motion_iels(u, 3, cfg), std::out_of_range);
    CurveMotionConfig bad;
    bad.radii = {5, 5};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CurveMotionConfig empty;
    empty.radii = {};
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}
