#pragma once

#include "iel/field.hpp"
#include "iel/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace iel {

/// Window-noise protocol: non-overlapping k x k windows on the k-aligned
/// grid are chosen uniformly at random until floor(fraction * rows * cols /
/// k^2) windows are marked; each window's labels are replaced by one random
/// class (possibly the original).
struct NoiseSpec {
    int window = 2;
    float fraction = 0.1f;
    int classes = 2;
    std::uint64_t seed = 0;

    void validate() const;
};

/// One split of a synthetic segmentation set. noisy_masks stays empty until
/// noise is injected; only training splits carry it.
struct Dataset {
    std::vector<Field> images;  // 3 channels, values in [0, 1]
    std::vector<LabelMask> clean_masks;
    std::vector<LabelMask> noisy_masks;
    std::string split = "train";

    std::size_t size() const { return images.size(); }
    const LabelMask& target(std::size_t i) const {
        return noisy_masks.empty() ? clean_masks[i] : noisy_masks[i];
    }
};

/// Deterministic synthetic scenes: a dark background and 1 to 3 filled
/// ellipses or rectangles with class-dependent colors, plus mild per-pixel
/// image noise (labels stay exact). Images are quantized to the 8-bit grid
/// so an on-disk round trip is lossless. `size` must be divisible by 4.
Dataset gen_synthetic(int n, int size, int classes, std::uint64_t seed,
                      const std::string& split = "train");

LabelMask inject_window_noise(const LabelMask& mask, const NoiseSpec& spec);

/// Corrupt every mask of the split (per-sample substreams of spec.seed) and
/// store the results as noisy_masks.
void inject_dataset_noise(Dataset& ds, const NoiseSpec& spec);

/// One-hot encode, run n forward diffusion steps per channel, re-threshold
/// by argmax (ties to the lowest class id).
LabelMask preprocess_labels(const LabelMask& mask, int n, float dt);

/// n forward diffusion steps on the logits, then argmax.
LabelMask postprocess_predictions(const Field& logits, int n, float dt);

/// Argmax over channels, ties to the lowest class id.
LabelMask argmax_mask(const Field& logits);

// ---- file formats ---------------------------------------------------------
//
// PGM (P5, maxval 255) stores label ids; a "# classes=N" comment preserves
// the class count. PPM (P6, maxval 255) stores images as round(255 * v).
// Raw tensors use the FLD1 container: "FLD1\n", one ASCII header line
// "channels rows cols spacing\n", then little-endian float32 data in
// channel-major row-major order. Parse failures report the byte offset.

void write_pgm(const std::string& path, const LabelMask& mask);
LabelMask read_pgm(const std::string& path);

void write_ppm(const std::string& path, const Field& image);
Field read_ppm(const std::string& path);

void write_field(const std::string& path, const Field& f);
Field read_field(const std::string& path);

/// Multi-record FLD1 files (checkpoints): records are simply concatenated.
void write_fields(const std::string& path, const std::vector<Field>& fs);
std::vector<Field> read_fields(const std::string& path);

/// Model checkpoints: one FLD1 record per parameter tensor, filters then
/// bias for each layer in ModelParams order.
void save_params(const std::string& path, const ModelParams& params);
ModelParams load_params(const std::string& path);

struct MetricsRow {
    int epoch = 0;
    std::string split;
    std::string variant;
    double dice = 0.0;
    double miou = 0.0;
    double noise_rate = 0.0;
    double loss = 0.0;
};

/// Header "epoch,split,variant,dice,miou,noise_rate,loss", fixed %.6f
/// formatting so reruns are byte-identical.
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);
std::string metrics_csv_string(const std::vector<MetricsRow>& rows);

/// Dataset directory layout: meta.json plus per-sample img_NNNN.ppm,
/// clean_NNNN.pgm and (when present) noisy_NNNN.pgm under SPLIT/.
void save_dataset(const std::string& dir, const Dataset& ds);
Dataset load_dataset(const std::string& dir, const std::string& split);

}  // namespace iel
