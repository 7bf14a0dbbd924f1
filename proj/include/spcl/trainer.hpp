#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "spcl/curriculum.hpp"
#include "spcl/data.hpp"
#include "spcl/encoder.hpp"
#include "spcl/errors.hpp"
#include "spcl/losses.hpp"
#include "spcl/metrics.hpp"
#include "spcl/numerics.hpp"
#include "spcl/optimizer.hpp"
#include "spcl/protomem.hpp"
#include "spcl/rng.hpp"

namespace spcl {

enum class LossKind { CrossEntropy, SupCon, Spcl };

inline const char* loss_kind_name(LossKind k) {
    switch (k) {
        case LossKind::CrossEntropy: return "ce";
        case LossKind::SupCon: return "supcon";
        case LossKind::Spcl: return "spcl";
    }
    return "?";
}

inline LossKind loss_kind_from_name(const std::string& name) {
    if (name == "ce") return LossKind::CrossEntropy;
    if (name == "supcon") return LossKind::SupCon;
    if (name == "spcl") return LossKind::Spcl;
    throw ConfigError("unknown loss kind \"" + name + "\" (expected ce|supcon|spcl)");
}

struct TrainConfig {
    LossKind loss = LossKind::Spcl;
    bool curriculum = true;
    std::size_t epochs = 30;  // R; the loop runs k = 0..R inclusive
    std::size_t batch_size = 16;
    double temperature = 0.1;
    std::size_t queue_capacity = 128;  // M
    std::size_t support_size = 16;     // K
    double learning_rate = 3e-3;
    double weight_decay = 0.01;
    double lr_floor = 1e-5;
    std::uint64_t seed = 1;
    // encoder
    std::string encoder_kind = "toy";  // toy | passthrough
    std::size_t hash_dim = 256;
    std::size_t hidden_dim = 64;
    std::size_t rep_dim = 32;
    // conversation data
    std::size_t context_window = 8;
    std::size_t max_len = 256;
    bool aux_pairs = true;

    void validate() const {
        if (epochs < 1) throw ConfigError("TrainConfig: epochs (R) must be >= 1");
        if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
        if (loss == LossKind::SupCon && batch_size < 2)
            throw ConfigError("TrainConfig: supcon needs batch_size >= 2");
        if (temperature <= 0.0) throw ConfigError("TrainConfig: temperature must be positive");
        if (queue_capacity < 1) throw ConfigError("TrainConfig: queue_capacity (M) must be >= 1");
        if (support_size < 1) throw ConfigError("TrainConfig: support_size (K) must be >= 1");
        if (learning_rate <= 0.0) throw ConfigError("TrainConfig: learning rate must be positive");
        if (encoder_kind != "toy" && encoder_kind != "passthrough")
            throw ConfigError("TrainConfig: unknown encoder \"" + encoder_kind + "\"");
    }
};

struct TrainedModel {
    std::shared_ptr<Encoder> encoder;
    ClassCenters centers;  // over the full training set, at the best checkpoint
    LossKind loss = LossKind::Spcl;
    double temperature = 0.1;
    bool has_probe = false;
    Matrix probe_w;  // classes x d
    Vector probe_b;
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double mean_loss = 0.0;  // summed batch losses / samples stepped
    std::size_t subset_size = 0;
    double dev_f1 = 0.0;
    double test_f1 = std::numeric_limits<double>::quiet_NaN();
};

struct MetricsReport {
    std::vector<EpochMetrics> epochs;
    std::size_t best_epoch = 0;
    double best_dev_f1 = 0.0;
    double final_train_f1 = 0.0;
    double final_dev_f1 = 0.0;
    double final_test_f1 = std::numeric_limits<double>::quiet_NaN();
    ConfusionCounts confusion;  // over test if present, else dev, at the best checkpoint
    std::size_t unknown_label_count = 0;
};

struct CenterMatchResult {
    int label = -1;
    std::map<int, double> probabilities;
};

/// argmax over class centers of the cosine similarity; ties go to the lowest
/// label id. The probability vector is a temperature softmax of the
/// similarities (presentation only — the argmax is the contract).
inline CenterMatchResult predict_center_match(const Vector& z, const ClassCenters& centers,
                                              double temperature) {
    if (centers.size() == 0) throw StructuralError("predict_center_match: no centers");
    CenterMatchResult out;
    std::vector<int> labels;
    Vector sims;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [label, center] : centers.centers) {
        const double s = cosine_similarity(z, center);
        labels.push_back(label);
        sims.push_back(s);
        if (s > best) {  // strict: first (lowest) label wins ties
            best = s;
            out.label = label;
        }
    }
    const Vector probs = softmax(sims, temperature);
    for (std::size_t i = 0; i < labels.size(); ++i) out.probabilities[labels[i]] = probs[i];
    return out;
}

struct ProbeConfig {
    std::size_t classes = 0;
    std::size_t iterations = 300;  // full-batch steps; 0 returns the init
    OptimizerConfig optimizer;
    std::uint64_t seed = 1;
};

/// Cross-entropy training of (W, b) over frozen representations; no gradient
/// reaches the encoder.
inline std::pair<Matrix, Vector> train_linear_probe(const std::vector<Vector>& representations,
                                                    const std::vector<int>& labels,
                                                    const ProbeConfig& cfg) {
    if (representations.empty() || representations.size() != labels.size())
        throw StructuralError("train_linear_probe: bad input sizes");
    if (cfg.classes == 0) throw ConfigError("train_linear_probe: classes must be >= 1");
    const std::size_t d = representations.front().size();
    const std::size_t n = representations.size();

    Rng rng(cfg.seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    Matrix w(cfg.classes, d);
    for (double& x : w.entries) x = (2.0 * rng.uniform() - 1.0) * scale;
    Vector b(cfg.classes, 0.0);
    Matrix gw(cfg.classes, d);
    Vector gb(cfg.classes, 0.0);

    std::vector<ParamBlock> blocks = {{"probe_w", &w.entries, &gw.entries},
                                      {"probe_b", &b, &gb}};
    OptimizerConfig opt = cfg.optimizer;
    opt.total_steps = cfg.iterations;
    AdamWState state = AdamWState::for_blocks(blocks);

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        Matrix logits(n, cfg.classes);
        for (std::size_t i = 0; i < n; ++i) {
            Vector row = w.apply(representations[i]);
            for (std::size_t c = 0; c < cfg.classes; ++c) logits.at(i, c) = row[c] + b[c];
        }
        const CrossEntropyOutput ce = cross_entropy_loss(logits, labels);
        std::fill(gw.entries.begin(), gw.entries.end(), 0.0);
        std::fill(gb.begin(), gb.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < cfg.classes; ++c) {
                const double g = ce.grad.at(i, c);
                gb[c] += g;
                double* row = gw.entries.data() + c * d;
                for (std::size_t t = 0; t < d; ++t) row[t] += g * representations[i][t];
            }
        optimizer_step(blocks, state, opt);
    }
    return {std::move(w), std::move(b)};
}

namespace detail {

inline int predict_one(const TrainedModel& model, const Vector& z) {
    if (model.loss == LossKind::CrossEntropy) {
        if (!model.has_probe) throw StructuralError("evaluate: CE model without a probe");
        Vector logits = model.probe_w.apply(z);
        for (std::size_t c = 0; c < logits.size(); ++c) logits[c] += model.probe_b[c];
        int best = 0;
        for (std::size_t c = 1; c < logits.size(); ++c)
            if (logits[c] > logits[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
        return best;
    }
    return predict_center_match(z, model.centers, model.temperature).label;
}

inline bool label_known(const TrainedModel& model, int label) {
    if (model.loss == LossKind::CrossEntropy)
        return label >= 0 && static_cast<std::size_t>(label) < model.probe_w.rows;
    return model.centers.contains(label);
}

}  // namespace detail

struct EvalResult {
    double f1 = 0.0;
    ConfusionCounts confusion;
    std::size_t unknown_label_count = 0;
    std::vector<int> predictions;
};

/// Weighted-F1 plus confusion counts. Gold labels outside the training label
/// set can never be predicted; they count as wrong and are tallied.
inline EvalResult evaluate(const TrainedModel& model, const Dataset& dataset) {
    if (dataset.empty()) throw StructuralError("evaluate: empty dataset");
    EvalResult out;
    std::vector<int> golds;
    for (const Sample& s : dataset) {
        const Vector z = model.encoder->encode(s);
        const int pred = detail::predict_one(model, z);
        out.predictions.push_back(pred);
        golds.push_back(s.label);
        if (!detail::label_known(model, s.label)) out.unknown_label_count += 1;
    }
    out.f1 = weighted_f1(out.predictions, golds);
    out.confusion = confusion_counts(out.predictions, golds);
    return out;
}

namespace detail {

inline std::size_t infer_input_dim(const TrainConfig& cfg, const Dataset& train) {
    if (!train.empty() && train.front().is_vector()) return train.front().features.size();
    return cfg.hash_dim;
}

inline std::shared_ptr<Encoder> make_encoder(const TrainConfig& cfg, const Dataset& train,
                                             std::uint64_t seed) {
    const std::size_t in_dim = infer_input_dim(cfg, train);
    if (cfg.encoder_kind == "passthrough") {
        if (train.empty() || !train.front().is_vector())
            throw ConfigError("passthrough encoder requires vector examples");
        return std::make_shared<PassthroughEncoder>(in_dim);
    }
    return std::make_shared<ToyEncoder>(in_dim, cfg.hidden_dim, cfg.rep_dim, seed);
}

inline std::vector<Vector> encode_all(const Encoder& enc, const Dataset& data) {
    std::vector<Vector> reps;
    reps.reserve(data.size());
    for (const Sample& s : data) reps.push_back(enc.encode(s));
    return reps;
}

}  // namespace detail

/// The full training loop: per epoch, fresh difficulty ranking over the
/// whole training set, a curriculum subset, cleared queues, and batched
/// loss/optimizer steps; dev weighted-F1 picks the checkpoint that is
/// returned. Fixed seeds give bit-identical reports.
inline std::pair<TrainedModel, MetricsReport> train(const TrainConfig& cfg, const Dataset& train_set,
                                                    const Dataset& dev_set,
                                                    const Dataset* test_set = nullptr) {
    cfg.validate();
    if (train_set.empty()) throw StructuralError("train: empty training set");
    if (dev_set.empty()) throw StructuralError("train: empty dev set");

    const std::size_t total_samples = train_set.size();
    std::vector<int> train_labels(total_samples);
    int max_label = 0;
    for (std::size_t i = 0; i < total_samples; ++i) {
        train_labels[i] = train_set[i].label;
        if (train_labels[i] < 0) throw StructuralError("train: negative label id");
        max_label = std::max(max_label, train_labels[i]);
    }
    const std::size_t classes = static_cast<std::size_t>(max_label) + 1;

    Rng master(cfg.seed);
    Rng init_rng = master.child(1);
    Rng curriculum_rng = master.child(2);
    Rng support_rng = master.child(3);

    auto encoder = detail::make_encoder(cfg, train_set, init_rng.next_u64());
    const std::size_t d = encoder->dim();

    // probe is the CE head; it trains jointly with the encoder for the CE
    // baseline and stays untouched otherwise
    Matrix probe_w(classes, d);
    Vector probe_b(classes, 0.0);
    Matrix probe_gw(classes, d);
    Vector probe_gb(classes, 0.0);
    if (cfg.loss == LossKind::CrossEntropy) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(d));
        for (double& x : probe_w.entries) x = (2.0 * init_rng.uniform() - 1.0) * scale;
    }

    std::vector<ParamBlock> blocks = encoder->param_blocks();
    if (cfg.loss == LossKind::CrossEntropy) {
        blocks.push_back({"probe_w", &probe_w.entries, &probe_gw.entries});
        blocks.push_back({"probe_b", &probe_b, &probe_gb});
    }

    OptimizerConfig opt;
    opt.learning_rate = cfg.learning_rate;
    opt.lr_floor = cfg.lr_floor;
    opt.weight_decay = cfg.weight_decay;
    const std::size_t effective_size =
        cfg.curriculum ? (total_samples + 1) / 2 : total_samples;
    opt.total_steps = (cfg.epochs + 1) *
                      ((effective_size + cfg.batch_size - 1) / cfg.batch_size);
    AdamWState opt_state = AdamWState::for_blocks(blocks);

    const LossConfig loss_cfg{cfg.temperature};

    auto make_eval_model = [&]() {
        TrainedModel m;
        m.encoder = encoder;
        m.loss = cfg.loss;
        m.temperature = cfg.temperature;
        if (cfg.loss == LossKind::CrossEntropy) {
            m.has_probe = true;
            m.probe_w = probe_w;
            m.probe_b = probe_b;
        } else {
            const auto reps = detail::encode_all(*encoder, train_set);
            m.centers = class_centers(reps, train_labels);
        }
        return m;
    };

    MetricsReport report;
    double best_dev = -1.0;
    std::vector<std::vector<double>> best_params;
    Matrix best_probe_w;
    Vector best_probe_b;

    encoder->reserve_slots(cfg.batch_size);

    for (std::size_t epoch = 0; epoch <= cfg.epochs; ++epoch) {
        try {
            // fresh encodings of the full training set drive centers and DIF
            std::vector<std::size_t> subset(total_samples);
            for (std::size_t i = 0; i < total_samples; ++i) subset[i] = i;
            if (cfg.curriculum && total_samples >= 2) {
                const auto reps = detail::encode_all(*encoder, train_set);
                const ClassCenters centers = class_centers(reps, train_labels);
                const auto order = rank_by_difficulty(reps, train_labels, centers);
                const auto schedule =
                    epoch_keep_probabilities(epoch, cfg.epochs, total_samples);
                subset = sample_epoch_subset(order, schedule, curriculum_rng);
            }

            std::map<int, ClassQueue> queues;
            if (cfg.loss == LossKind::Spcl) {
                for (std::size_t c = 0; c < classes; ++c)
                    queues.emplace(static_cast<int>(c),
                                   ClassQueue(static_cast<int>(c), cfg.queue_capacity, d));
            }

            double epoch_loss = 0.0;
            std::size_t stepped_samples = 0;
            for (std::size_t start = 0; start < subset.size(); start += cfg.batch_size) {
                const std::size_t n = std::min(cfg.batch_size, subset.size() - start);
                if (cfg.loss == LossKind::SupCon && n < 2) continue;

                std::vector<Vector> reps(n);
                std::vector<int> labels(n);
                for (std::size_t b = 0; b < n; ++b) {
                    const Sample& s = train_set[subset[start + b]];
                    reps[b] = encoder->forward_cached(s, b);
                    labels[b] = s.label;
                }

                encoder->zero_grads();
                double batch_loss = 0.0;
                if (cfg.loss == LossKind::CrossEntropy) {
                    Matrix logits(n, classes);
                    for (std::size_t b = 0; b < n; ++b) {
                        Vector row = probe_w.apply(reps[b]);
                        for (std::size_t c = 0; c < classes; ++c)
                            logits.at(b, c) = row[c] + probe_b[c];
                    }
                    const CrossEntropyOutput ce = cross_entropy_loss(logits, labels);
                    batch_loss = ce.value;
                    std::fill(probe_gw.entries.begin(), probe_gw.entries.end(), 0.0);
                    std::fill(probe_gb.begin(), probe_gb.end(), 0.0);
                    for (std::size_t b = 0; b < n; ++b) {
                        Vector glogit(classes);
                        for (std::size_t c = 0; c < classes; ++c) {
                            const double g = ce.grad.at(b, c);
                            glogit[c] = g;
                            probe_gb[c] += g;
                            double* row = probe_gw.entries.data() + c * d;
                            for (std::size_t t = 0; t < d; ++t) row[t] += g * reps[b][t];
                        }
                        encoder->backward(b, probe_w.apply_transposed(glogit));
                    }
                } else {
                    BatchView view{&reps, &labels};
                    LossOutput loss;
                    if (cfg.loss == LossKind::SupCon) {
                        loss = supcon_loss(view, loss_cfg);
                    } else {
                        const PrototypeSet protos =
                            prototypes_for_all(queues, cfg.support_size, support_rng);
                        loss = spcl_loss(view, protos, loss_cfg);
                    }
                    batch_loss = loss.value;
                    for (std::size_t b = 0; b < n; ++b) encoder->backward(b, loss.grads[b]);
                    // detach and enqueue only after the batch loss is done
                    if (cfg.loss == LossKind::Spcl)
                        for (std::size_t b = 0; b < n; ++b)
                            queues.at(labels[b]).push(reps[b]);
                }
                optimizer_step(blocks, opt_state, opt);
                epoch_loss += batch_loss;
                stepped_samples += n;
            }

            const TrainedModel eval_model = make_eval_model();
            EpochMetrics em;
            em.epoch = epoch;
            em.subset_size = subset.size();
            em.mean_loss = stepped_samples ? epoch_loss / static_cast<double>(stepped_samples)
                                           : 0.0;
            em.dev_f1 = evaluate(eval_model, dev_set).f1;
            if (test_set && !test_set->empty())
                em.test_f1 = evaluate(eval_model, *test_set).f1;
            report.epochs.push_back(em);

            if (em.dev_f1 > best_dev) {
                best_dev = em.dev_f1;
                report.best_epoch = epoch;
                best_params.clear();
                for (const auto& blk : encoder->param_blocks()) best_params.push_back(*blk.values);
                if (cfg.loss == LossKind::CrossEntropy) {
                    best_probe_w = probe_w;
                    best_probe_b = probe_b;
                }
            }
        } catch (const Error& e) {
            throw Error("epoch " + std::to_string(epoch) + ": " + e.what());
        }
    }

    // restore the dev-best checkpoint
    {
        auto blks = encoder->param_blocks();
        for (std::size_t i = 0; i < blks.size(); ++i) *blks[i].values = best_params[i];
        if (cfg.loss == LossKind::CrossEntropy) {
            probe_w = best_probe_w;
            probe_b = best_probe_b;
        }
    }

    TrainedModel model = make_eval_model();
    if (model.loss != LossKind::CrossEntropy) {
        // centers already recomputed from the restored checkpoint
    } else {
        const auto reps = detail::encode_all(*encoder, train_set);
        model.centers = class_centers(reps, train_labels);
    }

    report.best_dev_f1 = best_dev;
    report.final_train_f1 = evaluate(model, train_set).f1;
    const EvalResult dev_final = evaluate(model, dev_set);
    report.final_dev_f1 = dev_final.f1;
    if (test_set && !test_set->empty()) {
        const EvalResult test_final = evaluate(model, *test_set);
        report.final_test_f1 = test_final.f1;
        report.confusion = test_final.confusion;
        report.unknown_label_count = test_final.unknown_label_count;
    } else {
        report.confusion = dev_final.confusion;
        report.unknown_label_count = dev_final.unknown_label_count;
    }
    return {std::move(model), std::move(report)};
}

}  // namespace spcl
