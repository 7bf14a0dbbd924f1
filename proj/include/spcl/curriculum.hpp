#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "spcl/errors.hpp"
#include "spcl/numerics.hpp"
#include "spcl/rng.hpp"

namespace spcl {

// Per-label mean representation plus the sample count behind each mean.
struct ClassCenters {
    std::map<int, Vector> centers;
    std::map<int, std::size_t> counts;

    bool contains(int label) const { return centers.count(label) != 0; }
    std::size_t size() const { return centers.size(); }
};

inline ClassCenters class_centers(const std::vector<Vector>& reps,
                                  const std::vector<int>& labels) {
    if (reps.size() != labels.size())
        throw StructuralError("class_centers: reps/labels length mismatch");
    if (reps.empty()) throw StructuralError("class_centers: empty input");
    ClassCenters out;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        if (!all_finite(reps[i]))
            throw DegenerateInputError("class_centers: non-finite representation at index " +
                                       std::to_string(i));
        auto [it, fresh] = out.centers.try_emplace(labels[i], Vector(reps[i].size(), 0.0));
        if (!fresh && it->second.size() != reps[i].size())
            throw StructuralError("class_centers: mixed dimensions");
        axpy(1.0, reps[i], it->second);
        out.counts[labels[i]] += 1;
    }
    for (auto& [label, center] : out.centers) {
        const double inv = 1.0 / static_cast<double>(out.counts[label]);
        for (double& x : center) x *= inv;
    }
    return out;
}

inline double cosine_distance(const Vector& a, const Vector& b) {
    return 1.0 - cosine_similarity(a, b);
}

/// DIF(z, y) = dis(z, C_y) / sum_j dis(z, C_j) with dis = cosine distance.
/// Always in [0, 1]; low means easy (close to the own-class center and far
/// from the others).
inline double difficulty(const Vector& z, int y, const ClassCenters& centers) {
    if (!centers.contains(y))
        throw StructuralError("difficulty: no center for label " + std::to_string(y));
    if (centers.size() < 2)
        throw StructuralError("difficulty: need at least 2 class centers, have " +
                              std::to_string(centers.size()));
    double own = 0.0;
    double total = 0.0;
    for (const auto& [label, center] : centers.centers) {
        const double d = cosine_distance(z, center);
        total += d;
        if (label == y) own = d;
    }
    if (total == 0.0)
        throw DegenerateInputError("difficulty: sample coincides with every class center");
    return own / total;
}

/// Indices sorted ascending by DIF, easiest first; ties keep original order.
inline std::vector<std::size_t> rank_by_difficulty(const std::vector<Vector>& reps,
                                                   const std::vector<int>& labels,
                                                   const ClassCenters& centers) {
    if (reps.size() != labels.size())
        throw StructuralError("rank_by_difficulty: reps/labels length mismatch");
    std::vector<double> dif(reps.size());
    for (std::size_t i = 0; i < reps.size(); ++i)
        dif[i] = difficulty(reps[i], labels[i], centers);
    std::vector<std::size_t> order(reps.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dif[a] < dif[b]; });
    return order;
}

// Keep-probability progression for one epoch: an arithmetic sequence from
// 1 - k/R down (or up) to k/R, so epoch 0 is easy-biased and epoch R is
// hard-biased, and the expected subset size is L/2 at every epoch.
struct CurriculumSchedule {
    std::size_t epoch = 0;
    std::size_t total_epochs = 1;
    std::vector<double> keep_probabilities;

    std::size_t size() const { return keep_probabilities.size(); }
};

inline CurriculumSchedule epoch_keep_probabilities(std::size_t k, std::size_t total_epochs,
                                                   std::size_t dataset_size) {
    if (total_epochs < 1) throw ConfigError("epoch_keep_probabilities: R must be >= 1");
    if (k > total_epochs)
        throw ConfigError("epoch_keep_probabilities: epoch " + std::to_string(k) +
                          " outside 0.." + std::to_string(total_epochs));
    if (dataset_size < 2)
        throw StructuralError("epoch_keep_probabilities: dataset size must be >= 2");
    const double a1 = 1.0 - static_cast<double>(k) / static_cast<double>(total_epochs);
    const double aL = static_cast<double>(k) / static_cast<double>(total_epochs);
    const double step = (aL - a1) / static_cast<double>(dataset_size - 1);
    CurriculumSchedule s;
    s.epoch = k;
    s.total_epochs = total_epochs;
    s.keep_probabilities.resize(dataset_size);
    for (std::size_t i = 0; i < dataset_size; ++i)
        s.keep_probabilities[i] =
            std::clamp(a1 + static_cast<double>(i) * step, 0.0, 1.0);
    return s;
}

/// One independent Bernoulli(a_i) draw per position of the difficulty-sorted
/// order; kept positions map back to dataset indices. An all-zero draw is
/// retried up to 16 times, then falls back to the single highest-probability
/// position so the training loop always has data.
inline std::vector<std::size_t> sample_epoch_subset(const std::vector<std::size_t>& sorted_indices,
                                                    const CurriculumSchedule& schedule,
                                                    Rng& rng) {
    if (sorted_indices.size() != schedule.size())
        throw StructuralError("sample_epoch_subset: index/schedule size mismatch");
    std::vector<std::size_t> subset;
    for (int attempt = 0; attempt < 16; ++attempt) {
        subset.clear();
        for (std::size_t i = 0; i < sorted_indices.size(); ++i)
            if (rng.bernoulli(schedule.keep_probabilities[i]))
                subset.push_back(sorted_indices[i]);
        if (!subset.empty()) return subset;
    }
    const auto best = std::max_element(schedule.keep_probabilities.begin(),
                                       schedule.keep_probabilities.end());
    const std::size_t pos =
        static_cast<std::size_t>(best - schedule.keep_probabilities.begin());
    return {sorted_indices[pos]};
}

}  // namespace spcl
