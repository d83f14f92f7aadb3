#include "iel/model.hpp"

#include "iel/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace iel {

std::string LossVariant::name() const {
    switch (tag) {
        case Tag::plain: return "plain";
        case Tag::iel_heat: return "iel-heat";
        case Tag::fel_heat: return "fel-heat";
        case Tag::curve_iel: return "curve-iel";
        case Tag::grad_penalty: return "grad-loss";
        case Tag::weight_decay: return "l2";
    }
    return "?";
}

const ConvLayer& ModelParams::layer(const std::string& name) const {
    for (const auto& l : layers)
        if (l.name == name) return l;
    throw std::invalid_argument("ModelParams: no layer named " + name);
}

ConvLayer& ModelParams::layer(const std::string& name) {
    for (auto& l : layers)
        if (l.name == name) return l;
    throw std::invalid_argument("ModelParams: no layer named " + name);
}

ModelParams init_params(std::uint64_t seed, int classes) {
    if (classes < 2) throw std::invalid_argument("init_params: classes must be >= 2");
    struct Spec {
        const char* name;
        int in_ch, out_ch;
        bool head;
    };
    const Spec specs[] = {
        {"enc1a", 3, 8, false},   {"enc1b", 8, 8, false},
        {"enc2a", 8, 16, false},  {"enc2b", 16, 16, false},
        {"bott_a", 16, 32, false}, {"bott_b", 32, 32, false},
        {"dec2a", 48, 16, false}, {"dec2b", 16, 16, false},
        {"dec1a", 24, 8, false},  {"dec1b", 8, 8, false},
        {"head", 8, classes, true},
    };
    ModelParams params;
    params.classes = classes;
    Rng rng(Rng::derive(seed, 0x6d6f64656cULL));
    for (const Spec& s : specs) {
        ConvLayer l;
        l.name = s.name;
        l.in_ch = s.in_ch;
        l.out_ch = s.head ? classes : s.out_ch;
        // the head is a 1x1 conv carried as a 3x3: only its center tap is
        // drawn, with 1x1 fan-in/out
        float fan_in = s.head ? static_cast<float>(s.in_ch) : static_cast<float>(s.in_ch) * 9.0f;
        float fan_out = s.head ? static_cast<float>(l.out_ch) : static_cast<float>(l.out_ch) * 9.0f;
        l.init_bound = std::sqrt(6.0f / (fan_in + fan_out));
        l.filters = Field(l.out_ch * l.in_ch, 3, 3);
        l.bias = Field(l.out_ch, 1, 1);
        if (s.head) {
            for (int f = 0; f < l.out_ch * l.in_ch; ++f)
                l.filters.at(f, 1, 1) = rng.uniform(-l.init_bound, l.init_bound);
        } else {
            for (float& v : l.filters.values) v = rng.uniform(-l.init_bound, l.init_bound);
        }
        params.layers.push_back(std::move(l));
    }
    return params;
}

namespace {

ad::NodePtr conv_block(ad::Tape& tape, const ad::NodePtr& x, const ad::NodePtr& f,
                       const ad::NodePtr& b) {
    return ad::op_relu(tape, ad::op_conv3x3(tape, x, f, b));
}

}  // namespace

ForwardResult forward(ad::Tape& tape, const ModelParams& params, const Field& image,
                      Mode mode, const LossVariant& variant, bool params_require_grad) {
    if (image.rows % 4 != 0 || image.cols % 4 != 0)
        throw std::invalid_argument("forward: image rows and cols must be divisible by 4");
    if (image.channels != 3)
        throw std::invalid_argument("forward: expected a 3-channel image");
    if (params.layers.size() != 11)
        throw std::invalid_argument("forward: malformed parameter set");

    ForwardResult r;
    for (const auto& l : params.layers) {
        r.filter_nodes.push_back(tape.leaf(l.filters, params_require_grad));
        r.bias_nodes.push_back(tape.leaf(l.bias, params_require_grad));
    }
    auto F = [&](int i) { return r.filter_nodes[static_cast<std::size_t>(i)]; };
    auto B = [&](int i) { return r.bias_nodes[static_cast<std::size_t>(i)]; };

    ad::NodePtr x = tape.leaf(image, false);
    ad::NodePtr e1 = conv_block(tape, conv_block(tape, x, F(0), B(0)), F(1), B(1));
    ad::NodePtr p1 = ad::op_maxpool2(tape, e1);
    ad::NodePtr e2 = conv_block(tape, conv_block(tape, p1, F(2), B(2)), F(3), B(3));
    ad::NodePtr p2 = ad::op_maxpool2(tape, e2);
    ad::NodePtr bott = conv_block(tape, conv_block(tape, p2, F(4), B(4)), F(5), B(5));
    ad::NodePtr u2 = ad::op_concat_channels(tape, ad::op_upsample_nearest2(tape, bott), e2);
    ad::NodePtr d2 = conv_block(tape, conv_block(tape, u2, F(6), B(6)), F(7), B(7));
    ad::NodePtr u1 = ad::op_concat_channels(tape, ad::op_upsample_nearest2(tape, d2), e1);
    ad::NodePtr d1 = conv_block(tape, conv_block(tape, u1, F(8), B(8)), F(9), B(9));
    ad::NodePtr logits = ad::op_conv3x3(tape, d1, F(10), B(10));

    if (mode == Mode::Train && variant.tag == LossVariant::Tag::iel_heat)
        logits = ad::op_iel_heat(tape, logits, variant.diffusion);
    if (mode == Mode::Train && variant.tag == LossVariant::Tag::curve_iel)
        logits = ad::op_curve_iel(tape, logits, variant.curve);
    // forward evolution layers stay on in both training and prediction
    if (variant.tag == LossVariant::Tag::fel_heat)
        logits = ad::op_fel_heat(tape, logits, variant.diffusion);

    r.logits = logits;
    return r;
}

}  // namespace iel
