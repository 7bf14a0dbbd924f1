#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "spcl/errors.hpp"
#include "spcl/numerics.hpp"
#include "spcl/protomem.hpp"

namespace spcl {

struct LossConfig {
    double temperature = 0.1;

    void validate() const {
        if (temperature <= 0.0)
            throw ConfigError("LossConfig: temperature must be positive, got " +
                              std::to_string(temperature));
    }
};

// A batch of N representations with labels. For sample i, A(i) is every
// other index and P(i) the subset of A(i) sharing i's label.
struct BatchView {
    const std::vector<Vector>* reps = nullptr;
    const std::vector<int>* labels = nullptr;

    std::size_t size() const { return reps->size(); }

    void validate(std::size_t min_size) const {
        if (!reps || !labels) throw StructuralError("BatchView: null fields");
        if (reps->size() != labels->size())
            throw StructuralError("BatchView: reps/labels length mismatch");
        if (reps->size() < min_size)
            throw StructuralError("BatchView: batch too small, need at least " +
                                  std::to_string(min_size) + " samples, got " +
                                  std::to_string(reps->size()));
        const std::size_t d = reps->front().size();
        for (const Vector& z : *reps) {
            if (z.size() != d) throw StructuralError("BatchView: mixed dimensions");
            if (!all_finite(z)) throw DegenerateInputError("BatchView: non-finite representation");
        }
        for (int y : *labels) {
            if (y < 0) throw StructuralError("BatchView: negative label id");
        }
    }
};

struct LossOutput {
    double value = 0.0;
    std::vector<Vector> grads;  // d loss / d z_i, one per batch member
    // Structural term counts per sample: positives are same-label batch
    // members plus the own-class prototype, negatives are everything else
    // entering the denominator. Samples with no positive term contribute
    // zero loss and are counted in skipped_samples.
    std::vector<std::size_t> positive_terms;
    std::vector<std::size_t> negative_terms;
    std::size_t skipped_samples = 0;
};

/// F(z_i, z_j) = exp(cos(z_i, z_j) / tau).
inline double pair_score(const Vector& zi, const Vector& zj, const LossConfig& cfg) {
    cfg.validate();
    return std::exp(cosine_similarity(zi, zj) / cfg.temperature);
}

namespace detail {

// d cos(a, b) / d a = (b_hat - cos * a_hat) / |a|, expressed in the
// pre-normalized quantities the loss loops already hold.
inline void add_cos_grad(Vector& grad, const Vector& a_hat, const Vector& b_hat,
                         double cos_ab, double a_norm, double weight) {
    const double s = weight / a_norm;
    for (std::size_t t = 0; t < grad.size(); ++t)
        grad[t] += s * (b_hat[t] - cos_ab * a_hat[t]);
}

struct NormalizedBatch {
    std::vector<Vector> unit;
    std::vector<double> norms;
};

inline NormalizedBatch normalize_batch(const std::vector<Vector>& reps) {
    NormalizedBatch nb;
    nb.unit.reserve(reps.size());
    nb.norms.reserve(reps.size());
    for (const Vector& z : reps) {
        const double n = norm(z);
        if (n == 0.0) throw DegenerateInputError("contrastive loss: zero-norm representation");
        nb.unit.push_back(scaled(z, 1.0 / n));
        nb.norms.push_back(n);
    }
    return nb;
}

}  // namespace detail

/// Supervised contrastive loss. Per sample,
///   L_i = -log( (1/|P(i)|) * P_sup(i) / N_sup(i) )
/// with the 1/|P(i)| coefficient inside the log; the batch value is the
/// plain sum of per-sample losses. Samples whose label appears nowhere else
/// in the batch contribute zero. Scores accumulate in log space so
/// temperatures down to 0.01 stay finite.
inline LossOutput supcon_loss(const BatchView& batch, const LossConfig& cfg) {
    cfg.validate();
    batch.validate(2);
    const auto& reps = *batch.reps;
    const auto& labels = *batch.labels;
    const std::size_t n = reps.size();
    const std::size_t d = reps.front().size();
    const double inv_tau = 1.0 / cfg.temperature;

    const auto nb = detail::normalize_batch(reps);

    LossOutput out;
    out.grads.assign(n, Vector(d, 0.0));
    out.positive_terms.assign(n, 0);
    out.negative_terms.assign(n, 0);

    // cosine matrix, symmetric
    std::vector<double> cosm(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double c = std::clamp(dot(nb.unit[i], nb.unit[j]), -1.0, 1.0);
            cosm[i * n + j] = c;
            cosm[j * n + i] = c;
        }

    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> pos_scores, all_scores;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double s = cosm[i * n + j] * inv_tau;
            all_scores.push_back(s);
            if (labels[j] == labels[i]) {
                pos_scores.push_back(s);
                out.positive_terms[i] += 1;
            } else {
                out.negative_terms[i] += 1;
            }
        }
        if (pos_scores.empty()) {
            out.skipped_samples += 1;
            continue;
        }
        const double log_p = log_sum_exp(pos_scores);
        const double log_n = log_sum_exp(all_scores);
        out.value += std::log(static_cast<double>(pos_scores.size())) - log_p + log_n;

        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double c = cosm[i * n + j];
            const double s = c * inv_tau;
            double w = std::exp(s - log_n);
            if (labels[j] == labels[i]) w -= std::exp(s - log_p);
            if (w == 0.0) continue;
            detail::add_cos_grad(out.grads[i], nb.unit[i], nb.unit[j], c, nb.norms[i],
                                 w * inv_tau);
            detail::add_cos_grad(out.grads[j], nb.unit[j], nb.unit[i], c, nb.norms[j],
                                 w * inv_tau);
        }
    }
    return out;
}

/// Supervised prototypical contrastive loss. Each present prototype acts as
/// an extra scored sample of its class: the own-class prototype joins the
/// numerator (and the divisor grows to |P(i)|+1), the other-class prototypes
/// join the denominator. Prototypes are detached — gradients flow only to
/// batch representations. With an empty PrototypeSet this reduces exactly to
/// supcon_loss.
inline LossOutput spcl_loss(const BatchView& batch, const PrototypeSet& prototypes,
                            const LossConfig& cfg) {
    cfg.validate();
    batch.validate(1);
    const auto& reps = *batch.reps;
    const auto& labels = *batch.labels;
    const std::size_t n = reps.size();
    const std::size_t d = reps.front().size();
    const double inv_tau = 1.0 / cfg.temperature;

    for (const auto& [label, proto] : prototypes) {
        if (proto.size() != d)
            throw StructuralError("spcl_loss: prototype dim " + std::to_string(proto.size()) +
                                  " does not match batch dim " + std::to_string(d));
        if (!all_finite(proto) || norm(proto) == 0.0)
            throw DegenerateInputError("spcl_loss: degenerate prototype for label " +
                                       std::to_string(label));
    }

    const auto nb = detail::normalize_batch(reps);

    std::vector<int> proto_labels;
    std::vector<Vector> proto_unit;
    for (const auto& [label, proto] : prototypes) {
        proto_labels.push_back(label);
        proto_unit.push_back(l2_normalize(proto));
    }

    LossOutput out;
    out.grads.assign(n, Vector(d, 0.0));
    out.positive_terms.assign(n, 0);
    out.negative_terms.assign(n, 0);

    std::vector<double> cosm(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double c = std::clamp(dot(nb.unit[i], nb.unit[j]), -1.0, 1.0);
            cosm[i * n + j] = c;
            cosm[j * n + i] = c;
        }

    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> pos_scores, den_scores;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double s = cosm[i * n + j] * inv_tau;
            den_scores.push_back(s);
            if (labels[j] == labels[i]) {
                pos_scores.push_back(s);
                out.positive_terms[i] += 1;
            } else {
                out.negative_terms[i] += 1;
            }
        }
        // prototype scores; own class goes to the numerator only
        std::vector<double> proto_cos(proto_labels.size());
        double own_proto_score = 0.0;
        for (std::size_t k = 0; k < proto_labels.size(); ++k) {
            const double c = std::clamp(dot(nb.unit[i], proto_unit[k]), -1.0, 1.0);
            proto_cos[k] = c;
            const double s = c * inv_tau;
            if (proto_labels[k] == labels[i]) {
                own_proto_score = s;
                pos_scores.push_back(s);
                out.positive_terms[i] += 1;
            } else {
                den_scores.push_back(s);
                out.negative_terms[i] += 1;
            }
        }
        // No positive term: cold queues, sample contributes zero. An empty
        // denominator (N == 1 with only the own-class prototype present)
        // would be -inf and is skipped the same way.
        if (pos_scores.empty() || den_scores.empty()) {
            out.skipped_samples += 1;
            continue;
        }
        const double log_p = log_sum_exp(pos_scores);
        const double log_n = log_sum_exp(den_scores);
        out.value += std::log(static_cast<double>(pos_scores.size())) - log_p + log_n;

        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double c = cosm[i * n + j];
            const double s = c * inv_tau;
            double w = std::exp(s - log_n);
            if (labels[j] == labels[i]) w -= std::exp(s - log_p);
            if (w == 0.0) continue;
            detail::add_cos_grad(out.grads[i], nb.unit[i], nb.unit[j], c, nb.norms[i],
                                 w * inv_tau);
            detail::add_cos_grad(out.grads[j], nb.unit[j], nb.unit[i], c, nb.norms[j],
                                 w * inv_tau);
        }
        for (std::size_t k = 0; k < proto_labels.size(); ++k) {
            const double c = proto_cos[k];
            double w;
            if (proto_labels[k] == labels[i]) {
                w = -std::exp(own_proto_score - log_p);
            } else {
                w = std::exp(c * inv_tau - log_n);
            }
            detail::add_cos_grad(out.grads[i], nb.unit[i], proto_unit[k], c, nb.norms[i],
                                 w * inv_tau);
        }
    }
    return out;
}

struct CrossEntropyOutput {
    double value = 0.0;
    Matrix grad;  // d loss / d logits, same shape as logits
};

/// Mean cross-entropy over the batch; gradient is (softmax - onehot) / N.
inline CrossEntropyOutput cross_entropy_loss(const Matrix& logits,
                                             const std::vector<int>& labels) {
    if (logits.rows != labels.size())
        throw StructuralError("cross_entropy_loss: logits rows != labels length");
    if (logits.rows == 0) throw StructuralError("cross_entropy_loss: empty batch");
    const std::size_t n = logits.rows;
    const std::size_t classes = logits.cols;

    CrossEntropyOutput out;
    out.grad = Matrix(n, classes);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
            throw StructuralError("cross_entropy_loss: label " + std::to_string(labels[i]) +
                                  " out of range for " + std::to_string(classes) + " classes");
        Vector row(logits.entries.begin() + i * classes,
                   logits.entries.begin() + (i + 1) * classes);
        const Vector p = softmax(row, 1.0);
        out.value += -std::log(p[static_cast<std::size_t>(labels[i])]);
        for (std::size_t c = 0; c < classes; ++c) {
            const double onehot = (static_cast<std::size_t>(labels[i]) == c) ? 1.0 : 0.0;
            out.grad.at(i, c) = (p[c] - onehot) / static_cast<double>(n);
        }
    }
    out.value /= static_cast<double>(n);
    return out;
}

}  // namespace spcl
