#include "iel/data_io.hpp"

#include "iel/oracles.hpp"
#include "iel/rng.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace iel;

TEST_CASE("synthetic generation: determinism, ranges, shapes") {
    Dataset empty = gen_synthetic(0, 64, 2, 1);
    CHECK(empty.size() == 0);

    Dataset a = gen_synthetic(4, 64, 3, 42);
    Dataset b = gen_synthetic(4, 64, 3, 42);
    Dataset c = gen_synthetic(4, 64, 3, 43);
    REQUIRE(a.size() == 4);
    bool same = true, differs = false;
    for (std::size_t i = 0; i < 4; ++i) {
        same = same && a.images[i].values == b.images[i].values &&
               a.clean_masks[i].ids == b.clean_masks[i].ids;
        differs = differs || a.images[i].values != c.images[i].values;
    }
    CHECK(same);
    CHECK(differs);

    for (std::size_t i = 0; i < 4; ++i) {
        for (float v : a.images[i].values) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
        }
        CHECK_NOTHROW(a.clean_masks[i].validate());
        long long fg = 0;
        for (auto id : a.clean_masks[i].ids) fg += id != 0;
        CHECK(fg > 0);  // at least one shape made it into frame
    }
    CHECK_THROWS_AS(gen_synthetic(1, 30, 2, 1), std::invalid_argument);
}

TEST_CASE("window noise: counts, alignment, determinism") {
    LabelMask mask(64, 64, 2);
    for (int i = 20; i < 44; ++i)
        for (int j = 20; j < 44; ++j) mask.at(i, j) = 1;

    SUBCASE("zero fraction leaves the mask alone") {
        NoiseSpec spec{3, 0.0f, 2, 9};
        CHECK(inject_window_noise(mask, spec).ids == mask.ids);
    }

    SUBCASE("the 64x64 / k=3 / p=0.2 arithmetic: 91 windows, 819 candidates") {
        NoiseSpec spec{3, 0.2f, 2, 9};
        LabelMask noisy = inject_window_noise(mask, spec);
        // windows are disjoint and 3-aligned, so touched cells come in
        // whole windows; count touched windows
        int touched = 0;
        long long candidate_cells = 0;
        for (int wi = 0; wi + 3 <= 64; wi += 3)
            for (int wj = 0; wj + 3 <= 64; wj += 3) {
                bool any = false, all_same = true;
                std::int32_t first = noisy.at(wi, wj);
                for (int i = wi; i < wi + 3; ++i)
                    for (int j = wj; j < wj + 3; ++j) {
                        any = any || noisy.at(i, j) != mask.at(i, j);
                        all_same = all_same && noisy.at(i, j) == first;
                    }
                if (any) {
                    ++touched;
                    candidate_cells += 9;
                    CHECK(all_same);  // the whole window got one class
                }
            }
        CHECK(touched <= 91);  // windows replaced by their original class are invisible
        CHECK(touched >= 30);  // but most of the 91 draws hit
        CHECK(candidate_cells == 9LL * touched);

        LabelMask again = inject_window_noise(mask, spec);
        CHECK(noisy.ids == again.ids);
    }

    SUBCASE("changed pixels never exceed windows * k^2") {
        NoiseSpec spec{2, 0.1f, 4, 5};
        LabelMask noisy = inject_window_noise(mask, spec);
        long long changed = 0;
        for (std::size_t t = 0; t < noisy.ids.size(); ++t) changed += noisy.ids[t] != mask.ids[t];
        CHECK(changed <= 102LL * 4);  // floor(0.1*4096/4) = 102 windows
    }

    SUBCASE("overdemanding fraction fails loudly") {
        LabelMask tiny(4, 4, 2);
        NoiseSpec spec{3, 1.0f, 2, 1};  // floor(16/9) = 1 window demanded, 1 available: fine
        CHECK_NOTHROW(inject_window_noise(tiny, spec));
        NoiseSpec bad{3, 1.0f, 2, 1};
        LabelMask five(5, 5, 2);  // floor(25/9) = 2 demanded, 1 aligned window available
        CHECK_THROWS_AS(inject_window_noise(five, bad), std::invalid_argument);
        NoiseSpec too_big{9, 0.5f, 2, 1};
        CHECK_THROWS_AS(inject_window_noise(LabelMask(8, 8, 2), too_big), std::invalid_argument);
    }
}

TEST_CASE("paper-style noise settings run clean") {
    LabelMask mask(64, 64, 4);
    Rng rng(3);
    for (auto& id : mask.ids) id = static_cast<std::int32_t>(rng.uniform_int(4));
    for (auto [k, p] : {std::pair<int, float>{2, 0.10f}, {3, 0.20f}, {5, 0.20f}, {1, 0.50f}}) {
        NoiseSpec spec{k, p, 4, 77};
        LabelMask noisy = inject_window_noise(mask, spec);
        CHECK_NOTHROW(noisy.validate());
    }
}

TEST_CASE("label preprocessing erases islands and thin structures alike") {
    LabelMask mask(32, 32, 2);
    mask.at(8, 8) = 1;                            // isolated 1-pixel island
    for (int i = 4; i < 28; ++i) mask.at(i, 20) = 1;  // thin 1-pixel-wide line

    CHECK(preprocess_labels(mask, 0, 0.1f).ids == mask.ids);  // n=0 is the identity

    LabelMask cooked = preprocess_labels(mask, 10, 0.2f);
    CHECK(cooked.at(8, 8) == 0);  // the island diffused away
    int line_left = 0;
    for (int i = 4; i < 28; ++i) line_left += cooked.at(i, 20) == 1;
    CHECK(line_left == 0);  // and so did the thin true structure
}

TEST_CASE("prediction postprocessing") {
    Field logits(2, 16, 16);
    Rng rng(4);
    // confident foreground block with salt-and-pepper logit flips
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            bool fg = i >= 4 && i < 12 && j >= 4 && j < 12;
            logits.at(0, i, j) = fg ? -1.0f : 1.0f;
            logits.at(1, i, j) = fg ? 1.0f : -1.0f;
        }
    LabelMask clean = postprocess_predictions(logits, 0, 0.1f);  // plain argmax
    // flip logits at fixed spots well inside / outside the block
    Field noisy_logits = logits;
    const int flips[][2] = {{7, 7}, {9, 6}, {1, 1}, {14, 13}, {6, 9}};
    for (auto [i, j] : flips) {
        noisy_logits.at(0, i, j) *= -1.0f;
        noisy_logits.at(1, i, j) *= -1.0f;
    }
    CHECK(postprocess_predictions(noisy_logits, 0, 0.1f).ids != clean.ids);
    LabelMask smoothed = postprocess_predictions(noisy_logits, 5, 0.15f);
    for (auto [i, j] : flips) CHECK(smoothed.at(i, j) == clean.at(i, j));  // flips healed
    (void)rng;

    // constant logits: ties go to the lowest class id
    Field flat(3, 4, 4);
    flat.fill(0.25f);
    LabelMask ties = postprocess_predictions(flat, 0, 0.1f);
    for (auto id : ties.ids) CHECK(id == 0);
}

TEST_CASE("FLD1 round trip is bit-exact and rejects malformed input") {
    Rng rng(5);
    Field f = oracles::random_field(rng, 3, 7, 9);
    f.spacing = 0.625f;
    const char* path = "/tmp/ielseg_field_test.fld";
    write_field(path, f);
    Field back = read_field(path);
    CHECK(back.channels == 3);
    CHECK(back.rows == 7);
    CHECK(back.cols == 9);
    CHECK(back.spacing == f.spacing);
    CHECK(back.values == f.values);

    // hand-written 1x2x2 record
    {
        std::ofstream out("/tmp/ielseg_hand.fld", std::ios::binary);
        out << "FLD1\n1 2 2 1\n";
        const float vals[4] = {1.0f, 2.0f, -3.5f, 0.25f};
        out.write(reinterpret_cast<const char*>(vals), sizeof(vals));
    }
    Field hand = read_field("/tmp/ielseg_hand.fld");
    CHECK(hand.values == std::vector<float>({1.0f, 2.0f, -3.5f, 0.25f}));

    {
        std::ofstream out("/tmp/ielseg_bad.fld", std::ios::binary);
        out << "FLDX\n1 2 2 1\n";
    }
    CHECK_THROWS_WITH_AS(read_field("/tmp/ielseg_bad.fld"),
                         doctest::Contains("bad FLD1 magic at byte 0"), std::runtime_error);
    {
        std::ofstream out("/tmp/ielseg_trunc.fld", std::ios::binary);
        out << "FLD1\n1 2 2 1\nxx";
    }
    CHECK_THROWS_WITH_AS(read_field("/tmp/ielseg_trunc.fld"), doctest::Contains("truncated"),
                         std::runtime_error);
}

TEST_CASE("PGM and PPM round trips") {
    LabelMask mask(5, 7, 4);
    Rng rng(6);
    for (auto& id : mask.ids) id = static_cast<std::int32_t>(rng.uniform_int(4));
    write_pgm("/tmp/ielseg_mask.pgm", mask);
    LabelMask back = read_pgm("/tmp/ielseg_mask.pgm");
    CHECK(back.ids == mask.ids);
    CHECK(back.classes == 4);

    Dataset ds = gen_synthetic(1, 8, 2, 7);
    write_ppm("/tmp/ielseg_img.ppm", ds.images[0]);
    Field img = read_ppm("/tmp/ielseg_img.ppm");
    CHECK(img.values == ds.images[0].values);  // generator quantizes to the 8-bit grid

    CHECK_THROWS_AS(read_pgm("/tmp/ielseg_img.ppm"), std::runtime_error);  // P6 is not a PGM
}

TEST_CASE("metrics CSV is stable") {
    std::vector<MetricsRow> rows = {{0, "val", "plain", 0.5, 0.4, 0.0, 0.693147},
                                    {1, "val", "iel-heat", 0.75, 0.6, 0.125, 0.25}};
    std::string csv = metrics_csv_string(rows);
    CHECK(csv ==
          "epoch,split,variant,dice,miou,noise_rate,loss\n"
          "0,val,plain,0.500000,0.400000,0.000000,0.693147\n"
          "1,val,iel-heat,0.750000,0.600000,0.125000,0.250000\n");
}

TEST_CASE("dataset directory round trip") {
    namespace fs = std::filesystem;
    const std::string dir = "/tmp/ielseg_ds_test";
    fs::remove_all(dir);
    Dataset train = gen_synthetic(3, 16, 2, 11, "train");
    NoiseSpec spec{2, 0.25f, 2, 11};
    inject_dataset_noise(train, spec);
    Dataset val = gen_synthetic(2, 16, 2, 12, "val");
    save_dataset(dir, train);
    save_dataset(dir, val);

    Dataset train_back = load_dataset(dir, "train");
    Dataset val_back = load_dataset(dir, "val");
    REQUIRE(train_back.size() == 3);
    REQUIRE(val_back.size() == 2);
    CHECK(val_back.noisy_masks.empty());
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(train_back.images[i].values == train.images[i].values);
        CHECK(train_back.clean_masks[i].ids == train.clean_masks[i].ids);
        CHECK(train_back.noisy_masks[i].ids == train.noisy_masks[i].ids);
    }
    fs::remove_all(dir);
}
