#include "iel/metrics.hpp"

#include <stdexcept>

namespace iel {

namespace {

struct Counts {
    long long tp = 0, fp = 0, fn = 0;
};

Counts count_class(const LabelMask& pred, const LabelMask& gt, int cls) {
    if (pred.rows != gt.rows || pred.cols != gt.cols)
        throw std::invalid_argument("metrics: shape mismatch");
    Counts c;
    for (std::size_t t = 0; t < pred.ids.size(); ++t) {
        bool p = pred.ids[t] == cls;
        bool g = gt.ids[t] == cls;
        c.tp += p && g;
        c.fp += p && !g;
        c.fn += !p && g;
    }
    return c;
}

}  // namespace

double dice(const LabelMask& pred, const LabelMask& gt, int cls) {
    Counts c = count_class(pred, gt, cls);
    long long denom = 2 * c.tp + c.fp + c.fn;
    if (denom == 0) return 1.0;  // class absent from both
    return 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

double miou(const LabelMask& pred, const LabelMask& gt, int classes) {
    double acc = 0.0;
    int counted = 0;
    for (int cls = 0; cls < classes; ++cls) {
        Counts c = count_class(pred, gt, cls);
        long long denom = c.tp + c.fp + c.fn;
        if (denom == 0) continue;
        acc += static_cast<double>(c.tp) / static_cast<double>(denom);
        ++counted;
    }
    return counted == 0 ? 1.0 : acc / counted;
}

double noise_overfit_rate(const LabelMask& pred, const LabelMask& clean, const LabelMask& noisy) {
    if (pred.rows != clean.rows || pred.cols != clean.cols || pred.rows != noisy.rows ||
        pred.cols != noisy.cols)
        throw std::invalid_argument("noise_overfit_rate: shape mismatch");
    long long corrupted = 0, reproduced = 0;
    for (std::size_t t = 0; t < pred.ids.size(); ++t) {
        if (noisy.ids[t] == clean.ids[t]) continue;
        ++corrupted;
        reproduced += pred.ids[t] == noisy.ids[t];
    }
    if (corrupted == 0) return 0.0;
    return static_cast<double>(reproduced) / static_cast<double>(corrupted);
}

double mean_foreground_dice(const LabelMask& pred, const LabelMask& gt, int classes) {
    double acc = 0.0;
    for (int cls = 1; cls < classes; ++cls) acc += dice(pred, gt, cls);
    return classes > 1 ? acc / (classes - 1) : 1.0;
}

}  // namespace iel
