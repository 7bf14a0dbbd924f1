#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spcl/data.hpp"
#include "spcl/encoder.hpp"
#include "spcl/errors.hpp"
#include "spcl/trainer.hpp"

namespace spcl {

// 17 significant digits round-trip an IEEE-754 double exactly.
inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline void write_values(std::ostream& out, const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
        out << (i ? " " : "") << fmt_double(values[i]);
    out << '\n';
}

inline std::vector<double> read_values(std::istream& in, std::size_t count,
                                       const std::string& what) {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        if (!(in >> out[i])) throw IoError("checkpoint: truncated " + what);
    return out;
}

inline void expect_word(std::istream& in, const std::string& want) {
    std::string got;
    if (!(in >> got) || got != want)
        throw IoError("checkpoint: expected \"" + want + "\", got \"" + got + "\"");
}

}  // namespace detail

inline constexpr const char* kCheckpointMagic = "spcl-checkpoint";

/// Versioned text checkpoint: header (version, loss, dims, label table) plus
/// a full-precision decimal payload — bit-exact across platforms.
inline void save_checkpoint(const std::string& path, const TrainedModel& model,
                            const LabelTable& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint " + path);
    out << kCheckpointMagic << " v1\n";
    out << "loss " << loss_kind_name(model.loss) << '\n';
    out << "temperature " << fmt_double(model.temperature) << '\n';
    out << "labels " << labels.size();
    for (const auto& name : labels.names) out << ' ' << name;
    out << '\n';

    if (const auto* toy = dynamic_cast<const ToyEncoder*>(model.encoder.get())) {
        const auto& p = toy->params();
        out << "encoder toy " << p.in_dim << ' ' << p.hidden_dim << ' ' << p.out_dim << '\n';
        detail::write_values(out, p.w1.entries);
        detail::write_values(out, p.b1);
        detail::write_values(out, p.w2.entries);
        detail::write_values(out, p.b2);
    } else {
        out << "encoder passthrough " << model.encoder->dim() << '\n';
    }

    out << "centers " << model.centers.size() << '\n';
    for (const auto& [label, center] : model.centers.centers) {
        out << label << ' ' << model.centers.counts.at(label) << ' ' << center.size() << '\n';
        detail::write_values(out, center);
    }

    out << "probe " << (model.has_probe ? 1 : 0) << '\n';
    if (model.has_probe) {
        out << model.probe_w.rows << ' ' << model.probe_w.cols << '\n';
        detail::write_values(out, model.probe_w.entries);
        detail::write_values(out, model.probe_b);
    }
    if (!out) throw IoError("write failed for checkpoint " + path);
}

inline std::pair<TrainedModel, LabelTable> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint " + path);
    detail::expect_word(in, kCheckpointMagic);
    detail::expect_word(in, "v1");

    TrainedModel model;
    detail::expect_word(in, "loss");
    std::string loss_name;
    in >> loss_name;
    model.loss = loss_kind_from_name(loss_name);
    detail::expect_word(in, "temperature");
    in >> model.temperature;

    detail::expect_word(in, "labels");
    std::size_t label_count = 0;
    in >> label_count;
    LabelTable labels;
    for (std::size_t i = 0; i < label_count; ++i) {
        std::string name;
        if (!(in >> name)) throw IoError("checkpoint: truncated label table");
        labels.names.push_back(name);
    }

    detail::expect_word(in, "encoder");
    std::string kind;
    in >> kind;
    if (kind == "toy") {
        ToyEncoderParams p;
        in >> p.in_dim >> p.hidden_dim >> p.out_dim;
        if (!in) throw IoError("checkpoint: bad encoder dims");
        p.w1 = Matrix(p.hidden_dim, p.in_dim);
        p.w1.entries = detail::read_values(in, p.hidden_dim * p.in_dim, "w1");
        p.b1 = detail::read_values(in, p.hidden_dim, "b1");
        p.w2 = Matrix(p.out_dim, p.hidden_dim);
        p.w2.entries = detail::read_values(in, p.out_dim * p.hidden_dim, "w2");
        p.b2 = detail::read_values(in, p.out_dim, "b2");
        model.encoder = std::make_shared<ToyEncoder>(std::move(p));
    } else if (kind == "passthrough") {
        std::size_t dim = 0;
        in >> dim;
        model.encoder = std::make_shared<PassthroughEncoder>(dim);
    } else {
        throw IoError("checkpoint: unknown encoder kind \"" + kind + "\"");
    }

    detail::expect_word(in, "centers");
    std::size_t center_count = 0;
    in >> center_count;
    for (std::size_t i = 0; i < center_count; ++i) {
        int label = 0;
        std::size_t count = 0, dim = 0;
        if (!(in >> label >> count >> dim)) throw IoError("checkpoint: bad center header");
        model.centers.centers[label] = detail::read_values(in, dim, "center");
        model.centers.counts[label] = count;
    }

    detail::expect_word(in, "probe");
    int has_probe = 0;
    in >> has_probe;
    model.has_probe = has_probe != 0;
    if (model.has_probe) {
        std::size_t rows = 0, cols = 0;
        in >> rows >> cols;
        model.probe_w = Matrix(rows, cols);
        model.probe_w.entries = detail::read_values(in, rows * cols, "probe_w");
        model.probe_b = detail::read_values(in, rows, "probe_b");
    }
    return {std::move(model), std::move(labels)};
}

/// Per-epoch rows; %.17g keeps the file byte-stable and exactly re-parsable.
inline void write_metrics_csv(const std::string& path, const MetricsReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "epoch,loss,subset_size,dev_f1,test_f1\n";
    for (const auto& em : report.epochs) {
        out << em.epoch << ',' << fmt_double(em.mean_loss) << ',' << em.subset_size << ','
            << fmt_double(em.dev_f1) << ','
            << (std::isnan(em.test_f1) ? std::string() : fmt_double(em.test_f1)) << '\n';
    }
}

inline void write_metrics_jsonl(const std::string& path, const MetricsReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& em : report.epochs) {
        nlohmann::json j;
        j["record"] = "epoch";
        j["epoch"] = em.epoch;
        j["loss"] = em.mean_loss;
        j["subset_size"] = em.subset_size;
        j["dev_f1"] = em.dev_f1;
        if (!std::isnan(em.test_f1)) j["test_f1"] = em.test_f1;
        out << j.dump() << '\n';
    }
    nlohmann::json j;
    j["record"] = "final";
    j["best_epoch"] = report.best_epoch;
    j["best_dev_f1"] = report.best_dev_f1;
    j["train_f1"] = report.final_train_f1;
    j["dev_f1"] = report.final_dev_f1;
    if (!std::isnan(report.final_test_f1)) j["test_f1"] = report.final_test_f1;
    j["unknown_labels"] = report.unknown_label_count;
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& [key, n] : report.confusion.cells)
        cells.push_back({{"gold", key.first}, {"pred", key.second}, {"count", n}});
    j["confusion"] = cells;
    out << j.dump() << '\n';
}

}  // namespace spcl
