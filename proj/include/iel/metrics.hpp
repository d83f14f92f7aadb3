#pragma once

#include "iel/field.hpp"

#include <vector>

namespace iel {

/// Per-evaluation scores. mean_dice averages the per-class dice over the
/// foreground classes (ids 1 .. classes-1); classes absent from both masks
/// score dice 1 and are excluded from the miou mean.
struct MetricsRecord {
    std::vector<double> dice_per_class;
    double mean_dice = 0.0;
    double miou = 0.0;
    double noise_rate = 0.0;
    double loss = 0.0;
};

/// 2 TP / (2 TP + FP + FN); 1 when the class is absent from both masks.
double dice(const LabelMask& pred, const LabelMask& gt, int cls);

/// Mean over classes of TP / (TP + FP + FN), skipping classes absent from
/// both masks.
double miou(const LabelMask& pred, const LabelMask& gt, int classes);

/// Among pixels where noisy != clean, the fraction where pred == noisy;
/// 0 when no pixel was corrupted.
double noise_overfit_rate(const LabelMask& pred, const LabelMask& clean, const LabelMask& noisy);

double mean_foreground_dice(const LabelMask& pred, const LabelMask& gt, int classes);

}  // namespace iel
