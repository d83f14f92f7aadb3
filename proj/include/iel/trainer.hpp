#pragma once

#include "iel/data_io.hpp"
#include "iel/field.hpp"
#include "iel/metrics.hpp"
#include "iel/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace iel {

/// Training run settings. Per-epoch shuffles and the parameter init derive
/// from `seed`; both optimizers are deterministic, so a config rerun
/// reproduces its metric history byte for byte. Adam is the default: the
/// noisy-label failure mode that the inverse layers counteract only shows
/// up at this scale under an adaptive optimizer.
struct ExperimentConfig {
    enum class Optimizer { adam, sgd };

    int epochs = 30;
    float lr = 1e-3f;
    int batch = 1;
    std::uint64_t seed = 7;
    Optimizer optimizer = Optimizer::adam;
    LossVariant variant;
    bool track_train_metrics = true;  // per-epoch noise/dice rows on the train split

    void validate() const;
};

struct TrainResult {
    ModelParams params;
    std::vector<MetricsRow> history;
};

/// SGD on the training split's target masks (noisy when present); after
/// each epoch, eval-mode metrics on the clean validation split are appended
/// to the history (plus train-split rows when track_train_metrics is set).
/// Throws std::runtime_error with a diagnostic if the loss turns non-finite.
TrainResult train(const ExperimentConfig& cfg, const Dataset& train_split,
                  const Dataset& val_split);

/// Eval-mode metrics against the clean masks (evolution layers off, except
/// fel_heat which stays active). noise_rate is filled when the dataset
/// carries noisy masks. Throws on an empty dataset.
MetricsRecord evaluate(const ModelParams& params, const Dataset& data, const LossVariant& variant);

}  // namespace iel
