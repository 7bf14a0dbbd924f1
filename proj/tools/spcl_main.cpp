#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spcl/config.hpp"
#include "spcl/curriculum.hpp"
#include "spcl/data.hpp"
#include "spcl/encoder.hpp"
#include "spcl/serialize.hpp"
#include "spcl/trainer.hpp"

namespace fs = std::filesystem;
using namespace spcl;

namespace {

const std::vector<std::string> kMeldLabels = {"neutral", "joy",     "surprise", "anger",
                                              "sadness", "disgust", "fear"};
const std::vector<std::size_t> kMeldImbalanceCounts = {1024, 128, 64, 32, 32, 32, 32};

std::vector<std::size_t> parse_count_list(const std::string& s) {
    std::vector<std::size_t> out;
    for (const auto& item : spcl::detail::split_list(s))
        out.push_back(spcl::detail::parse_number<std::size_t>("counts", item));
    return out;
}

std::vector<std::string> default_label_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("class" + std::to_string(i));
    return out;
}

// Shared cluster geometry for train/dev/test splits of one generated set.
std::vector<Vector> draw_centers(std::size_t classes, std::size_t dim, Rng& rng) {
    std::vector<Vector> centers;
    for (std::size_t c = 0; c < classes; ++c) {
        Vector v(dim);
        for (double& x : v) x = rng.normal();
        centers.push_back(l2_normalize(v));
    }
    return centers;
}

std::vector<VectorExample> draw_split(const std::vector<Vector>& centers,
                                      const std::vector<std::size_t>& counts, double spread,
                                      Rng& rng) {
    std::vector<ClusterSpec> spec;
    for (std::size_t c = 0; c < counts.size(); ++c)
        spec.push_back({counts[c], centers[c], spread});
    return generate_synthetic_clusters(spec, centers.front().size(), rng);
}

// Tiny label-correlated dialogue generator: each class owns a vocabulary
// pool, so hashed bag-of-tokens features carry the label signal.
std::vector<Conversation> draw_dialogues(const std::vector<std::string>& labels,
                                         std::size_t conversations, Rng& rng) {
    static const std::vector<std::string> speakers = {"alice", "bob", "carol", "dave"};
    static const std::vector<std::string> filler = {"well", "so", "i", "you", "the",
                                                    "it",   "is", "a", "that"};
    std::vector<Conversation> out;
    for (std::size_t c = 0; c < conversations; ++c) {
        Conversation conv;
        conv.id = "dlg" + std::to_string(c);
        const std::size_t turns = 4 + rng.uniform_below(6);
        for (std::size_t t = 0; t < turns; ++t) {
            Turn turn;
            turn.speaker = speakers[rng.uniform_below(speakers.size())];
            turn.label = static_cast<int>(rng.uniform_below(labels.size()));
            const std::string& mood = labels[static_cast<std::size_t>(turn.label)];
            const std::size_t words = 3 + rng.uniform_below(5);
            for (std::size_t w = 0; w < words; ++w) {
                if (rng.uniform() < 0.55) {
                    turn.text.push_back(mood + std::to_string(rng.uniform_below(6)));
                } else {
                    turn.text.push_back(filler[rng.uniform_below(filler.size())]);
                }
            }
            conv.turns.push_back(std::move(turn));
        }
        out.push_back(std::move(conv));
    }
    return out;
}

void print_histogram(const std::vector<VectorExample>& data, const LabelTable& labels) {
    std::map<int, std::size_t> hist;
    for (const auto& ex : data) hist[ex.label] += 1;
    std::cout << "class histogram (" << data.size() << " examples):\n";
    for (const auto& [label, n] : hist)
        std::cout << "  " << labels.name_of(label) << ": " << n << '\n';
}

Dataset load_dataset(const std::string& path, const RunConfig& cfg, Rng& pair_rng) {
    if (cfg.data_kind == "vector") return to_samples(load_vector_examples(path));
    const auto convs = load_conversations(path, cfg.label_table());
    return to_samples(expand_conversations(convs, cfg.train.context_window, cfg.train.max_len,
                                           pair_rng, cfg.train.aux_pairs));
}

int max_label_of(const Dataset& data) {
    int m = -1;
    for (const auto& s : data) m = std::max(m, s.label);
    return m;
}

void ensure_labels(RunConfig& cfg, const Dataset& train) {
    if (cfg.labels.empty())
        cfg.labels = default_label_names(static_cast<std::size_t>(max_label_of(train)) + 1);
}

struct SweepCell {
    std::string loss;
    std::size_t batch_size = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    double f1 = 0.0;
    std::string error;
};

int cmd_gen_data(const std::string& out_dir, const std::string& name, const std::string& kind,
                 const std::string& preset, const std::string& counts_arg, std::size_t dim,
                 double spread, std::uint64_t seed, const std::string& labels_arg,
                 std::size_t dev_count, std::size_t test_count, std::size_t conversations) {
    fs::create_directories(out_dir);

    std::vector<std::size_t> counts;
    std::vector<std::string> labels;
    if (!preset.empty()) {
        if (preset != "meld-imbalance") throw ConfigError("unknown preset \"" + preset + "\"");
        counts = kMeldImbalanceCounts;
        labels = kMeldLabels;
    } else if (!counts_arg.empty()) {
        counts = parse_count_list(counts_arg);
    }
    if (!labels_arg.empty()) labels = spcl::detail::split_list(labels_arg);

    Rng rng(seed);
    if (kind == "dialogue") {
        if (labels.empty()) labels = {"calm", "happy", "upset"};
        const LabelTable table = LabelTable::from_names(labels);
        const std::size_t n = conversations ? conversations : 40;
        Rng d = rng.child(1);
        const auto convs = draw_dialogues(labels, n, d);
        const std::string path = (fs::path(out_dir) / (name + ".jsonl")).string();
        save_conversations(path, convs, table);
        std::size_t turns = 0;
        for (const auto& c : convs) turns += c.turns.size();
        std::cout << "wrote " << convs.size() << " dialogues (" << turns << " turns) to " << path
                  << '\n';
        if (dev_count) {
            Rng dd = rng.child(2);
            const auto dev = draw_dialogues(labels, dev_count, dd);
            const std::string dev_path = (fs::path(out_dir) / (name + ".dev.jsonl")).string();
            save_conversations(dev_path, dev, table);
            std::cout << "wrote " << dev.size() << " dialogues to " << dev_path << '\n';
        }
        if (test_count) {
            Rng dt = rng.child(3);
            const auto test = draw_dialogues(labels, test_count, dt);
            const std::string test_path = (fs::path(out_dir) / (name + ".test.jsonl")).string();
            save_conversations(test_path, test, table);
            std::cout << "wrote " << test.size() << " dialogues to " << test_path << '\n';
        }
        return 0;
    }

    if (counts.empty())
        throw ConfigError("gen-data: need --preset or --counts for vector data");
    if (labels.empty()) labels = default_label_names(counts.size());
    if (labels.size() != counts.size())
        throw ConfigError("gen-data: labels/counts length mismatch");
    const LabelTable table = LabelTable::from_names(labels);

    Rng center_rng = rng.child(1);
    const auto centers = draw_centers(counts.size(), dim, center_rng);

    Rng train_rng = rng.child(2);
    const auto train = draw_split(centers, counts, spread, train_rng);
    const std::string path = (fs::path(out_dir) / (name + ".jsonl")).string();
    save_vector_examples(path, train);
    print_histogram(train, table);
    std::cout << "wrote " << train.size() << " examples to " << path << '\n';

    if (dev_count) {
        Rng dev_rng = rng.child(3);
        const std::vector<std::size_t> dev_counts(counts.size(), dev_count);
        const auto dev = draw_split(centers, dev_counts, spread, dev_rng);
        const std::string dev_path = (fs::path(out_dir) / (name + ".dev.jsonl")).string();
        save_vector_examples(dev_path, dev);
        std::cout << "wrote " << dev.size() << " examples to " << dev_path << '\n';
    }
    if (test_count) {
        Rng test_rng = rng.child(4);
        const std::vector<std::size_t> test_counts(counts.size(), test_count);
        const auto test = draw_split(centers, test_counts, spread, test_rng);
        const std::string test_path = (fs::path(out_dir) / (name + ".test.jsonl")).string();
        save_vector_examples(test_path, test);
        std::cout << "wrote " << test.size() << " examples to " << test_path << '\n';
    }
    return 0;
}

int cmd_train(RunConfig cfg) {
    if (cfg.train_path.empty()) throw ConfigError("train: missing train dataset path");
    if (cfg.dev_path.empty()) throw ConfigError("train: missing dev dataset path");

    Rng pair_rng(mix_seed(cfg.train.seed, 11));
    const Dataset train_set = load_dataset(cfg.train_path, cfg, pair_rng);
    const Dataset dev_set = load_dataset(cfg.dev_path, cfg, pair_rng);
    Dataset test_set;
    if (!cfg.test_path.empty()) test_set = load_dataset(cfg.test_path, cfg, pair_rng);
    ensure_labels(cfg, train_set);

    auto [model, report] = train(cfg.train, train_set, dev_set,
                                 test_set.empty() ? nullptr : &test_set);

    fs::create_directories(cfg.out_dir);
    save_checkpoint((fs::path(cfg.out_dir) / "checkpoint.txt").string(), model,
                    cfg.label_table());
    write_metrics_csv((fs::path(cfg.out_dir) / "metrics.csv").string(), report);
    write_metrics_jsonl((fs::path(cfg.out_dir) / "metrics.jsonl").string(), report);

    std::cout << "best epoch " << report.best_epoch << ": dev_f1=" << fmt_double(report.best_dev_f1)
              << " train_f1=" << fmt_double(report.final_train_f1);
    if (!std::isnan(report.final_test_f1))
        std::cout << " test_f1=" << fmt_double(report.final_test_f1);
    std::cout << '\n';
    return 0;
}

int cmd_rank(RunConfig cfg, const std::string& checkpoint_path) {
    if (cfg.train_path.empty()) throw ConfigError("rank: missing train dataset path");
    Rng pair_rng(mix_seed(cfg.train.seed, 11));
    const Dataset data = load_dataset(cfg.train_path, cfg, pair_rng);
    ensure_labels(cfg, data);

    std::shared_ptr<Encoder> encoder;
    if (!checkpoint_path.empty()) {
        encoder = load_checkpoint(checkpoint_path).first.encoder;
    } else {
        Rng master(cfg.train.seed);
        Rng init = master.child(1);
        encoder = spcl::detail::make_encoder(cfg.train, data, init.next_u64());
    }

    std::vector<Vector> reps;
    std::vector<int> labels;
    for (const auto& s : data) {
        reps.push_back(encoder->encode(s));
        labels.push_back(s.label);
    }
    const ClassCenters centers = class_centers(reps, labels);
    std::vector<double> dif(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        dif[i] = difficulty(reps[i], labels[i], centers);
    const auto order = rank_by_difficulty(reps, labels, centers);

    fs::create_directories(cfg.out_dir);
    const std::string path = (fs::path(cfg.out_dir) / "rank.csv").string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "index,label,dif,rank\n";
    for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t i = order[r];
        out << i << ',' << labels[i] << ',' << fmt_double(dif[i]) << ',' << r << '\n';
    }

    // quintile digest, easiest first
    const std::size_t q = std::max<std::size_t>(1, order.size() / 5);
    double overall = 0.0;
    for (double x : dif) overall += x;
    overall /= static_cast<double>(dif.size());
    std::cout << "ranked " << order.size() << " samples; mean DIF " << fmt_double(overall)
              << '\n';
    for (std::size_t quint = 0; quint < 5; ++quint) {
        const std::size_t lo = quint * q;
        if (lo >= order.size()) break;
        const std::size_t hi = quint == 4 ? order.size() : std::min(order.size(), lo + q);
        double m = 0.0;
        for (std::size_t r = lo; r < hi; ++r) m += dif[order[r]];
        m /= static_cast<double>(hi - lo);
        std::cout << "  quintile " << (quint + 1) << " (" << (hi - lo)
                  << " samples): mean DIF " << fmt_double(m) << '\n';
    }
    std::cout << "wrote " << path << '\n';
    return 0;
}

int cmd_sweep(RunConfig cfg) {
    if (cfg.train_path.empty()) throw ConfigError("sweep: missing train dataset path");
    if (cfg.dev_path.empty()) throw ConfigError("sweep: missing dev dataset path");
    if (cfg.seeds.empty()) throw ConfigError("sweep: empty seed list");

    Rng pair_rng(mix_seed(cfg.train.seed, 11));
    const Dataset train_set = load_dataset(cfg.train_path, cfg, pair_rng);
    const Dataset dev_set = load_dataset(cfg.dev_path, cfg, pair_rng);
    Dataset test_set;
    if (!cfg.test_path.empty()) test_set = load_dataset(cfg.test_path, cfg, pair_rng);
    ensure_labels(cfg, train_set);

    std::vector<SweepCell> cells;
    for (const auto& loss_name : cfg.sweep_losses)
        for (std::size_t batch : cfg.sweep_batch_sizes)
            for (std::uint64_t seed : cfg.seeds) {
                SweepCell cell;
                cell.loss = loss_name;
                cell.batch_size = batch;
                cell.seed = seed;
                try {
                    TrainConfig tc = cfg.train;
                    tc.loss = loss_kind_from_name(loss_name);
                    tc.batch_size = batch;
                    tc.seed = seed;
                    auto [model, report] =
                        train(tc, train_set, dev_set, test_set.empty() ? nullptr : &test_set);
                    cell.f1 = std::isnan(report.final_test_f1) ? report.best_dev_f1
                                                               : report.final_test_f1;
                    cell.ok = true;
                } catch (const std::exception& e) {
                    cell.error = e.what();
                }
                std::cout << "cell loss=" << cell.loss << " batch=" << cell.batch_size
                          << " seed=" << cell.seed << " -> "
                          << (cell.ok ? "f1=" + fmt_double(cell.f1) : "ERROR " + cell.error)
                          << '\n';
                cells.push_back(std::move(cell));
            }

    fs::create_directories(cfg.out_dir);
    const std::string path = (fs::path(cfg.out_dir) / "sweep.csv").string();
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path);
        out << "loss,batch_size,seed,status,f1\n";
        for (const auto& c : cells)
            out << c.loss << ',' << c.batch_size << ',' << c.seed << ','
                << (c.ok ? "ok" : "error") << ',' << (c.ok ? fmt_double(c.f1) : std::string())
                << '\n';
    }

    // drop between largest and smallest batch size, per loss, seed-averaged
    const auto [lo_it, hi_it] =
        std::minmax_element(cfg.sweep_batch_sizes.begin(), cfg.sweep_batch_sizes.end());
    const std::string drop_path = (fs::path(cfg.out_dir) / "sweep_drop.csv").string();
    std::ofstream drop_out(drop_path, std::ios::binary);
    drop_out << "loss,f1_small_batch,f1_large_batch,drop\n";
    for (const auto& loss_name : cfg.sweep_losses) {
        double lo_sum = 0.0, hi_sum = 0.0;
        std::size_t lo_n = 0, hi_n = 0;
        for (const auto& c : cells) {
            if (!c.ok || c.loss != loss_name) continue;
            if (c.batch_size == *lo_it) {
                lo_sum += c.f1;
                ++lo_n;
            }
            if (c.batch_size == *hi_it) {
                hi_sum += c.f1;
                ++hi_n;
            }
        }
        if (lo_n == 0 || hi_n == 0) continue;
        const double lo_mean = lo_sum / static_cast<double>(lo_n);
        const double hi_mean = hi_sum / static_cast<double>(hi_n);
        drop_out << loss_name << ',' << fmt_double(lo_mean) << ',' << fmt_double(hi_mean) << ','
                 << fmt_double(hi_mean - lo_mean) << '\n';
        std::cout << loss_name << ": f1(batch=" << *lo_it << ")=" << fmt_double(lo_mean)
                  << " f1(batch=" << *hi_it << ")=" << fmt_double(hi_mean)
                  << " drop=" << fmt_double(hi_mean - lo_mean) << '\n';
    }
    std::cout << "wrote " << path << " and " << drop_path << '\n';

    for (const auto& c : cells)
        if (!c.ok) return 1;
    return 0;
}

int cmd_report(const std::string& in_dir) {
    const fs::path sweep_path = fs::path(in_dir) / "sweep.csv";
    if (!fs::exists(sweep_path))
        throw IoError("no metrics found: missing " + sweep_path.string());

    std::ifstream in(sweep_path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty " + sweep_path.string());
    struct Agg {
        std::vector<double> values;
    };
    std::map<std::pair<std::string, std::size_t>, Agg> by_cell;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = spcl::detail::split_list(line);
        if (fields.size() < 5 || fields[3] != "ok") continue;
        by_cell[{fields[0], spcl::detail::parse_number<std::size_t>("batch_size", fields[1])}]
            .values.push_back(spcl::detail::parse_number<double>("f1", fields[4]));
    }
    if (by_cell.empty()) throw IoError("no metrics found in " + sweep_path.string());

    std::map<std::string, std::map<std::size_t, double>> means;
    std::cout << "loss,batch_size,mean_f1,stddev,seeds\n";
    for (const auto& [key, agg] : by_cell) {
        double mean = 0.0;
        for (double v : agg.values) mean += v;
        mean /= static_cast<double>(agg.values.size());
        double var = 0.0;
        for (double v : agg.values) var += (v - mean) * (v - mean);
        const double sd = agg.values.size() > 1
                              ? std::sqrt(var / static_cast<double>(agg.values.size() - 1))
                              : 0.0;
        means[key.first][key.second] = mean;
        std::cout << key.first << ',' << key.second << ',' << fmt_double(mean) << ','
                  << fmt_double(sd) << ',' << agg.values.size() << '\n';
    }

    // which loss degrades less from the largest to the smallest batch
    std::string least_loss;
    double least_drop = 0.0;
    bool first = true;
    for (const auto& [loss_name, by_batch] : means) {
        if (by_batch.size() < 2) continue;
        const double drop = by_batch.rbegin()->second - by_batch.begin()->second;
        std::cout << loss_name << " drop (batch " << by_batch.rbegin()->first << " -> "
                  << by_batch.begin()->first << "): " << fmt_double(drop) << '\n';
        if (first || drop < least_drop) {
            least_drop = drop;
            least_loss = loss_name;
            first = false;
        }
    }
    if (!least_loss.empty())
        std::cout << "least degradation with small batches: " << least_loss << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SPCL training toolkit: prototypical contrastive learning with a "
                 "distance-based curriculum"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate synthetic datasets");
    std::string gd_out = "out", gd_name = "data", gd_kind = "vector", gd_preset, gd_counts,
                gd_labels;
    std::size_t gd_dim = 16, gd_dev = 0, gd_test = 0, gd_convs = 0;
    double gd_spread = 0.1;
    std::uint64_t gd_seed = 1;
    gen->add_option("--out", gd_out, "output directory");
    gen->add_option("--name", gd_name, "output file base name");
    gen->add_option("--kind", gd_kind, "vector | dialogue")
        ->check(CLI::IsMember({"vector", "dialogue"}));
    gen->add_option("--preset", gd_preset, "named preset (meld-imbalance)");
    gen->add_option("--counts", gd_counts, "per-class sample counts, e.g. 5,5");
    gen->add_option("--labels", gd_labels, "label names, comma separated");
    gen->add_option("--dim", gd_dim, "feature dimension");
    gen->add_option("--spread", gd_spread, "cluster spread");
    gen->add_option("--seed", gd_seed, "rng seed");
    gen->add_option("--dev-count", gd_dev, "per-class dev examples (vector) or dialogues");
    gen->add_option("--test-count", gd_test, "per-class test examples (vector) or dialogues");
    gen->add_option("--conversations", gd_convs, "dialogue count (dialogue kind)");

    // shared train-ish options
    auto add_run_options = [](CLI::App* cmd, std::string& config_path,
                              std::vector<std::string>& overrides) {
        cmd->add_option("--config", config_path, "run config file (key=value lines)");
        cmd->add_option("--set", overrides, "override config entries, key=value")
            ->expected(-1);
    };

    auto* train_cmd = app.add_subcommand("train", "train a model per the run config");
    std::string tr_config;
    std::vector<std::string> tr_set;
    add_run_options(train_cmd, tr_config, tr_set);
    std::string tr_loss, tr_curriculum, tr_out, tr_train, tr_dev, tr_test;
    std::int64_t tr_seed = -1, tr_batch = -1;
    train_cmd->add_option("--loss", tr_loss, "ce | supcon | spcl");
    train_cmd->add_option("--curriculum", tr_curriculum, "on | off");
    train_cmd->add_option("--seed", tr_seed, "rng seed");
    train_cmd->add_option("--batch-size", tr_batch, "batch size");
    train_cmd->add_option("--out", tr_out, "output directory");
    train_cmd->add_option("--train", tr_train, "train dataset path");
    train_cmd->add_option("--dev", tr_dev, "dev dataset path");
    train_cmd->add_option("--test", tr_test, "test dataset path");

    auto* rank_cmd = app.add_subcommand("rank", "emit difficulty ranking CSV");
    std::string rk_config, rk_checkpoint, rk_out, rk_train;
    std::vector<std::string> rk_set;
    add_run_options(rank_cmd, rk_config, rk_set);
    rank_cmd->add_option("--checkpoint", rk_checkpoint, "checkpoint to rank with");
    rank_cmd->add_option("--out", rk_out, "output directory");
    rank_cmd->add_option("--train", rk_train, "dataset to rank");
    std::int64_t rk_seed = -1;
    rank_cmd->add_option("--seed", rk_seed, "rng seed (fresh encoder)");

    auto* sweep_cmd = app.add_subcommand("sweep", "loss x batch-size x seed grid");
    std::string sw_config, sw_out, sw_seeds, sw_batches, sw_losses;
    std::vector<std::string> sw_set;
    add_run_options(sweep_cmd, sw_config, sw_set);
    sweep_cmd->add_option("--out", sw_out, "output directory");
    sweep_cmd->add_option("--seeds", sw_seeds, "seed list, e.g. 1,2,3");
    sweep_cmd->add_option("--batch-sizes", sw_batches, "batch sizes, e.g. 4,8,16,32");
    sweep_cmd->add_option("--losses", sw_losses, "losses, e.g. supcon,spcl");

    auto* report_cmd = app.add_subcommand("report", "aggregate sweep metrics");
    std::string rp_in = "out";
    report_cmd->add_option("--in", rp_in, "directory holding sweep.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen_data(gd_out, gd_name, gd_kind, gd_preset, gd_counts, gd_dim, gd_spread,
                                gd_seed, gd_labels, gd_dev, gd_test, gd_convs);

        auto build_config = [](const std::string& path, const std::vector<std::string>& sets) {
            RunConfig cfg = path.empty() ? RunConfig{} : load_run_config(path);
            for (const auto& kv : sets) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw ConfigError("--set expects key=value, got \"" + kv + "\"");
                apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
            }
            return cfg;
        };

        if (train_cmd->parsed()) {
            RunConfig cfg = build_config(tr_config, tr_set);
            if (!tr_loss.empty()) cfg.train.loss = loss_kind_from_name(tr_loss);
            if (!tr_curriculum.empty())
                cfg.train.curriculum = spcl::detail::parse_on_off("curriculum", tr_curriculum);
            if (tr_seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(tr_seed);
            if (tr_batch > 0) cfg.train.batch_size = static_cast<std::size_t>(tr_batch);
            if (!tr_out.empty()) cfg.out_dir = tr_out;
            if (!tr_train.empty()) cfg.train_path = tr_train;
            if (!tr_dev.empty()) cfg.dev_path = tr_dev;
            if (!tr_test.empty()) cfg.test_path = tr_test;
            return cmd_train(std::move(cfg));
        }
        if (rank_cmd->parsed()) {
            RunConfig cfg = build_config(rk_config, rk_set);
            if (!rk_out.empty()) cfg.out_dir = rk_out;
            if (!rk_train.empty()) cfg.train_path = rk_train;
            if (rk_seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(rk_seed);
            return cmd_rank(std::move(cfg), rk_checkpoint);
        }
        if (sweep_cmd->parsed()) {
            RunConfig cfg = build_config(sw_config, sw_set);
            if (!sw_out.empty()) cfg.out_dir = sw_out;
            if (!sw_seeds.empty()) apply_config_entry(cfg, "seeds", sw_seeds);
            if (!sw_batches.empty()) apply_config_entry(cfg, "batch_sizes", sw_batches);
            if (!sw_losses.empty()) apply_config_entry(cfg, "losses", sw_losses);
            return cmd_sweep(std::move(cfg));
        }
        if (report_cmd->parsed()) return cmd_report(rp_in);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
