#include "iel/trainer.hpp"

#include "iel/kernels.hpp"
#include "iel/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace iel {

void ExperimentConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("ExperimentConfig: epochs must be >= 1");
    if (!(lr >= 0.0f)) throw std::invalid_argument("ExperimentConfig: lr must be >= 0");
    if (batch < 1) throw std::invalid_argument("ExperimentConfig: batch must be >= 1");
}

namespace {

struct TensorSet {
    std::vector<Field> filters;
    std::vector<Field> biases;

    explicit TensorSet(const ModelParams& p) {
        for (const auto& l : p.layers) {
            filters.emplace_back(l.filters.channels, 3, 3);
            biases.emplace_back(l.bias.channels, 1, 1);
        }
    }

    void zero() {
        for (auto& f : filters) f.fill(0.0f);
        for (auto& b : biases) b.fill(0.0f);
    }
};

double sample_loss_and_grads(const ExperimentConfig& cfg, const ModelParams& params,
                             const Field& image, const LabelMask& target, TensorSet& grads) {
    ad::Tape tape;
    ForwardResult fw = forward(tape, params, image, Mode::Train, cfg.variant, true);
    ad::NodePtr loss = ad::softmax_cross_entropy(tape, fw.logits, target);
    if (cfg.variant.tag == LossVariant::Tag::grad_penalty && cfg.variant.lambda > 0.0f)
        loss = ad::op_add(tape, loss,
                          ad::grad_penalty_term(tape, fw.logits, cfg.variant.lambda));
    tape.backward(loss);
    const auto& k = kernels::active();
    for (std::size_t l = 0; l < grads.filters.size(); ++l) {
        k.scale_add(grads.filters[l].values.data(), fw.filter_nodes[l]->grad.values.data(), 1.0f,
                    grads.filters[l].size());
        k.scale_add(grads.biases[l].values.data(), fw.bias_nodes[l]->grad.values.data(), 1.0f,
                    grads.biases[l].size());
    }
    return ad::scalar_value(loss);
}

double weight_sumsq(const ModelParams& params) {
    double acc = 0.0;
    for (const auto& l : params.layers) {
        for (float v : l.filters.values) acc += static_cast<double>(v) * v;
        for (float v : l.bias.values) acc += static_cast<double>(v) * v;
    }
    return acc;
}

// one optimizer step for a single tensor; grad holds the batch-mean gradient
void adam_step(Field& w, const Field& grad, Field& m, Field& v, float lr, long long t) {
    const float b1 = 0.9f, b2 = 0.999f, eps = 1e-8f;
    const float c1 = 1.0f - std::pow(b1, static_cast<float>(t));
    const float c2 = 1.0f - std::pow(b2, static_cast<float>(t));
    for (std::size_t i = 0; i < w.values.size(); ++i) {
        float g = grad.values[i];
        m.values[i] = b1 * m.values[i] + (1.0f - b1) * g;
        v.values[i] = b2 * v.values[i] + (1.0f - b2) * g * g;
        float mhat = m.values[i] / c1;
        float vhat = v.values[i] / c2;
        w.values[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace

MetricsRecord evaluate(const ModelParams& params, const Dataset& data, const LossVariant& variant) {
    if (data.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
    const int classes = params.classes;
    MetricsRecord rec;
    rec.dice_per_class.assign(static_cast<std::size_t>(classes), 0.0);
    double loss_acc = 0.0, noise_acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        ad::Tape tape;
        ForwardResult fw = forward(tape, params, data.images[i], Mode::Eval, variant, false);
        LabelMask pred = argmax_mask(fw.logits->value);
        pred.classes = classes;
        ad::NodePtr loss = ad::softmax_cross_entropy(tape, fw.logits, data.clean_masks[i]);
        loss_acc += ad::scalar_value(loss);
        for (int cls = 0; cls < classes; ++cls)
            rec.dice_per_class[static_cast<std::size_t>(cls)] +=
                dice(pred, data.clean_masks[i], cls);
        rec.miou += miou(pred, data.clean_masks[i], classes);
        rec.mean_dice += mean_foreground_dice(pred, data.clean_masks[i], classes);
        if (!data.noisy_masks.empty())
            noise_acc += noise_overfit_rate(pred, data.clean_masks[i], data.noisy_masks[i]);
    }
    const double n = static_cast<double>(data.size());
    for (double& d : rec.dice_per_class) d /= n;
    rec.mean_dice /= n;
    rec.miou /= n;
    rec.loss = loss_acc / n;
    rec.noise_rate = data.noisy_masks.empty() ? 0.0 : noise_acc / n;
    return rec;
}

TrainResult train(const ExperimentConfig& cfg, const Dataset& train_split,
                  const Dataset& val_split) {
    cfg.validate();
    if (train_split.size() == 0) throw std::invalid_argument("train: empty training split");
    if (val_split.size() == 0) throw std::invalid_argument("train: empty validation split");
    const int classes = train_split.clean_masks[0].classes;

    TrainResult result;
    result.params = init_params(cfg.seed, classes);
    TensorSet grads(result.params);
    TensorSet m1(result.params), m2(result.params);  // Adam moments
    const auto& k = kernels::active();
    const bool adam = cfg.optimizer == ExperimentConfig::Optimizer::adam;
    const bool decay = cfg.variant.tag == LossVariant::Tag::weight_decay && cfg.variant.lambda > 0.0f;
    long long step = 0;

    std::vector<std::size_t> order(train_split.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(Rng::derive(cfg.seed, 0x65706f6368ULL + static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            std::size_t j = i + shuffle_rng.uniform_int(order.size() - i);
            std::swap(order[i], order[j]);
        }

        double epoch_loss = 0.0;
        std::size_t done = 0;
        while (done < order.size()) {
            std::size_t bsz = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch),
                                                    order.size() - done);
            grads.zero();
            double batch_loss = 0.0;
            for (std::size_t b = 0; b < bsz; ++b) {
                std::size_t idx = order[done + b];
                batch_loss += sample_loss_and_grads(cfg, result.params, train_split.images[idx],
                                                    train_split.target(idx), grads);
            }
            batch_loss /= static_cast<double>(bsz);
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train: loss diverged (non-finite) at epoch " +
                                         std::to_string(epoch) + ", sample " +
                                         std::to_string(done));
            epoch_loss += batch_loss * static_cast<double>(bsz);

            const float inv_b = 1.0f / static_cast<float>(bsz);
            ++step;
            for (std::size_t l = 0; l < result.params.layers.size(); ++l) {
                ConvLayer& layer = result.params.layers[l];
                for (int part = 0; part < 2; ++part) {
                    Field& w = part == 0 ? layer.filters : layer.bias;
                    Field& g = part == 0 ? grads.filters[l] : grads.biases[l];
                    for (float& gv : g.values) gv *= inv_b;
                    if (decay)  // d(lambda * sum w^2)/dw, part of the loss gradient
                        k.scale_add(g.values.data(), w.values.data(), 2.0f * cfg.variant.lambda,
                                    g.size());
                    if (adam) {
                        Field& mm = part == 0 ? m1.filters[l] : m1.biases[l];
                        Field& vv = part == 0 ? m2.filters[l] : m2.biases[l];
                        adam_step(w, g, mm, vv, cfg.lr, step);
                    } else {
                        k.scale_add(w.values.data(), g.values.data(), -cfg.lr, w.size());
                    }
                }
            }
            done += bsz;
        }
        epoch_loss /= static_cast<double>(order.size());
        if (decay) epoch_loss += cfg.variant.lambda * weight_sumsq(result.params);

        MetricsRecord val = evaluate(result.params, val_split, cfg.variant);
        result.history.push_back({epoch, "val", cfg.variant.name(), val.mean_dice, val.miou,
                                  val.noise_rate, val.loss});
        if (cfg.track_train_metrics || epoch == cfg.epochs - 1) {
            MetricsRecord tr = evaluate(result.params, train_split, cfg.variant);
            result.history.push_back({epoch, "train", cfg.variant.name(), tr.mean_dice, tr.miou,
                                      tr.noise_rate, epoch_loss});
        }
    }
    return result;
}

}  // namespace iel
