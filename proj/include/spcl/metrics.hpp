#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "spcl/errors.hpp"

namespace spcl {

// Confusion counts keyed by (gold, predicted).
struct ConfusionCounts {
    std::map<std::pair<int, int>, std::size_t> cells;
    std::size_t total = 0;

    void add(int gold, int predicted) {
        cells[{gold, predicted}] += 1;
        total += 1;
    }

    std::size_t at(int gold, int predicted) const {
        const auto it = cells.find({gold, predicted});
        return it == cells.end() ? 0 : it->second;
    }
};

inline ConfusionCounts confusion_counts(const std::vector<int>& predictions,
                                        const std::vector<int>& golds) {
    if (predictions.size() != golds.size())
        throw StructuralError("confusion_counts: length mismatch");
    ConfusionCounts c;
    for (std::size_t i = 0; i < golds.size(); ++i) c.add(golds[i], predictions[i]);
    return c;
}

/// Per-class F1 averaged with weights proportional to gold support. Classes
/// with no gold samples are excluded; a class with gold support but no
/// correct prediction scores 0.
inline double weighted_f1(const std::vector<int>& predictions, const std::vector<int>& golds) {
    if (predictions.size() != golds.size())
        throw StructuralError("weighted_f1: predictions/golds length mismatch");
    if (golds.empty()) throw StructuralError("weighted_f1: empty input");

    std::map<int, std::size_t> support, tp, fp, fn;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        support[golds[i]] += 1;
        if (predictions[i] == golds[i]) {
            tp[golds[i]] += 1;
        } else {
            fn[golds[i]] += 1;
            fp[predictions[i]] += 1;
        }
    }
    double total = 0.0;
    for (const auto& [label, n] : support) {
        const double t = static_cast<double>(tp[label]);
        const double p_den = t + static_cast<double>(fp[label]);
        const double r_den = t + static_cast<double>(fn[label]);
        double f1 = 0.0;
        if (t > 0.0) {
            const double precision = t / p_den;
            const double recall = t / r_den;
            f1 = 2.0 * precision * recall / (precision + recall);
        }
        total += f1 * static_cast<double>(n);
    }
    return total / static_cast<double>(golds.size());
}

}  // namespace spcl
