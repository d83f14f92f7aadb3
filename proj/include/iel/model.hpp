#pragma once

#include "iel/autodiff.hpp"
#include "iel/curvemotion.hpp"
#include "iel/diffusion.hpp"
#include "iel/field.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace iel {

/// Which extra term / evolution-layer stack a training run uses. Exactly one
/// tag is active. iel_heat and curve_iel act on the logits during training
/// only; fel_heat stays active at evaluation time as well; grad_penalty and
/// weight_decay add loss terms and leave the logits alone.
struct LossVariant {
    enum class Tag { plain, iel_heat, fel_heat, curve_iel, grad_penalty, weight_decay };
    Tag tag = Tag::plain;
    DiffusionConfig diffusion;    // iel_heat / fel_heat
    CurveMotionConfig curve;      // curve_iel
    float lambda = 0.0f;          // grad_penalty / weight_decay

    static LossVariant plain() { return {}; }
    static LossVariant iel_heat(DiffusionConfig d) { return {Tag::iel_heat, d, {}, 0.0f}; }
    static LossVariant fel_heat(DiffusionConfig d) { return {Tag::fel_heat, d, {}, 0.0f}; }
    static LossVariant curve_iel(CurveMotionConfig c) { return {Tag::curve_iel, {}, c, 0.0f}; }
    static LossVariant grad_penalty(float lambda) { return {Tag::grad_penalty, {}, {}, lambda}; }
    static LossVariant weight_decay(float lambda) { return {Tag::weight_decay, {}, {}, lambda}; }

    std::string name() const;
};

enum class Mode { Train, Eval };

struct ConvLayer {
    std::string name;
    int in_ch = 0;
    int out_ch = 0;
    float init_bound = 0.0f;  // kernels were drawn uniform within +-init_bound
    Field filters;            // (out_ch * in_ch, 3, 3)
    Field bias;               // (out_ch, 1, 1)
};

/// Parameters of the fixed encoder/decoder net: two 3x3 conv + relu blocks
/// per level, 8/16/32 channels over two maxpool levels, nearest-neighbour
/// upsampling with channel-concat skips, and a 3x3 head that starts out as
/// a centered 1x1. Checkpoints store the layers in this exact order.
struct ModelParams {
    int classes = 2;
    std::vector<ConvLayer> layers;

    const ConvLayer& layer(const std::string& name) const;
    ConvLayer& layer(const std::string& name);
};

/// Layer order: enc1a enc1b enc2a enc2b bott_a bott_b dec2a dec2b dec1a
/// dec1b head. Kernels uniform in +-sqrt(6 / (fan_in + fan_out)) with
/// fan = channels * 9 (the head uses fan = channels and only its center tap
/// is nonzero at init); biases start at zero. Deterministic per seed.
ModelParams init_params(std::uint64_t seed, int classes);

struct ForwardResult {
    ad::NodePtr logits;
    // parameter nodes in layer order: filters then bias per layer
    std::vector<ad::NodePtr> filter_nodes;
    std::vector<ad::NodePtr> bias_nodes;
};

/// Build the forward graph on the tape. Image rows/cols must be divisible
/// by 4. In Train mode the variant's evolution layers are appended to the
/// logits; in Eval mode only fel_heat remains active.
ForwardResult forward(ad::Tape& tape, const ModelParams& params, const Field& image,
                      Mode mode, const LossVariant& variant, bool params_require_grad);

}  // namespace iel
