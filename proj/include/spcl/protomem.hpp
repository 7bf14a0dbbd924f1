#pragma once

#include <deque>
#include <map>
#include <string>
#include <vector>

#include "spcl/errors.hpp"
#include "spcl/numerics.hpp"
#include "spcl/rng.hpp"

namespace spcl {

// Fixed-capacity FIFO of detached, unit-normalized representations for one
// label. Entries are value snapshots: later encoder updates never touch them.
class ClassQueue {
  public:
    ClassQueue(int label, std::size_t capacity, std::size_t dim)
        : label_(label), capacity_(capacity), dim_(dim) {
        if (capacity == 0) throw ConfigError("ClassQueue: capacity must be >= 1");
        if (dim == 0) throw ConfigError("ClassQueue: dim must be >= 1");
    }

    int label() const { return label_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    void clear() { entries_.clear(); }

    const Vector& entry(std::size_t i) const { return entries_[i]; }

    // Normalizes rep and appends it, evicting the single oldest entry when
    // the queue is full.
    void push(const Vector& rep) {
        if (rep.size() != dim_)
            throw StructuralError("ClassQueue::push: expected dim " + std::to_string(dim_) +
                                  ", got " + std::to_string(rep.size()));
        if (!all_finite(rep))
            throw DegenerateInputError("ClassQueue::push: non-finite representation");
        Vector unit = l2_normalize(rep);  // throws on zero norm
        if (entries_.size() == capacity_) entries_.pop_front();
        entries_.push_back(std::move(unit));
    }

    // min(k, size) distinct entries, uniform without replacement. An empty
    // queue yields an empty draw; the caller decides the fallback.
    std::vector<Vector> sample_support_set(std::size_t k, Rng& rng) const {
        if (k == 0) throw ConfigError("sample_support_set: K must be >= 1");
        if (entries_.empty()) return {};
        std::vector<Vector> out;
        for (std::size_t idx : rng.sample_without_replacement(entries_.size(), k))
            out.push_back(entries_[idx]);
        return out;
    }

  private:
    int label_;
    std::size_t capacity_;
    std::size_t dim_;
    std::deque<Vector> entries_;
};

// One prototype per label present. Labels whose queues were empty are absent.
using PrototypeSet = std::map<int, Vector>;

// Element-wise arithmetic mean of the support set; the mean is deliberately
// not re-normalized.
inline Vector compute_prototype(const std::vector<Vector>& support) {
    if (support.empty()) throw StructuralError("compute_prototype: empty support set");
    const std::size_t d = support.front().size();
    Vector mean(d, 0.0);
    for (const Vector& v : support) {
        if (v.size() != d)
            throw StructuralError("compute_prototype: mixed dimensions in support set");
        axpy(1.0, v, mean);
    }
    for (double& x : mean) x /= static_cast<double>(support.size());
    return mean;
}

// One prototype per non-empty queue. Iteration is in label order so a seeded
// rng gives identical results on repeated calls.
inline PrototypeSet prototypes_for_all(const std::map<int, ClassQueue>& queues,
                                       std::size_t k, Rng& rng) {
    if (k == 0) throw ConfigError("prototypes_for_all: K must be >= 1");
    PrototypeSet out;
    for (const auto& [label, queue] : queues) {
        auto support = queue.sample_support_set(k, rng);
        if (support.empty()) continue;
        out.emplace(label, compute_prototype(support));
    }
    return out;
}

}  // namespace spcl
