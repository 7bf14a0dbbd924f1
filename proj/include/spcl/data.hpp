#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spcl/errors.hpp"
#include "spcl/numerics.hpp"
#include "spcl/rng.hpp"

namespace spcl {

inline constexpr const char* kMaskToken = "<mask>";

// Declared label set for a run; maps label strings to dense ids.
struct LabelTable {
    std::vector<std::string> names;

    static LabelTable from_names(std::vector<std::string> names) {
        LabelTable t;
        t.names = std::move(names);
        return t;
    }

    std::size_t size() const { return names.size(); }

    int id_of(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        throw IoError("unknown label \"" + name + "\"");
    }

    const std::string& name_of(int id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= names.size())
            throw StructuralError("label id " + std::to_string(id) + " out of range");
        return names[static_cast<std::size_t>(id)];
    }
};

struct Turn {
    std::string speaker;
    std::vector<std::string> text;  // token sequence, possibly empty
    int label = 0;
};

struct Conversation {
    std::string id;
    std::vector<Turn> turns;
};

struct TrainingPair {
    std::vector<std::string> input_tokens;  // context ++ prompt
    int target_label = 0;
    std::string conversation_id;
    std::size_t target_turn = 0;    // t
    std::size_t prompted_turn = 0;  // t for the primary pair, h for the auxiliary
};

struct VectorExample {
    Vector features;
    int label = 0;
};

// Whitespace split with lowercasing; the real subword tokenizer belongs to
// the out-of-scope backbone.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string tok;
    while (ss >> tok) {
        for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out.push_back(tok);
    }
    return out;
}

// --- line-delimited dataset files ------------------------------------------

inline std::vector<Conversation> load_conversations(const std::string& path,
                                                    const LabelTable& labels) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<Conversation> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(path + ":" + std::to_string(lineno) + ": malformed record: " + e.what());
        }
        try {
            Conversation conv;
            conv.id = j.at("id").get<std::string>();
            for (const auto& jt : j.at("turns")) {
                Turn turn;
                turn.speaker = jt.at("speaker").get<std::string>();
                turn.text = tokenize(jt.at("text").get<std::string>());
                turn.label = labels.id_of(jt.at("label").get<std::string>());
                conv.turns.push_back(std::move(turn));
            }
            if (conv.turns.empty())
                throw IoError("conversation \"" + conv.id + "\" has no turns");
            out.push_back(std::move(conv));
        } catch (const nlohmann::json::exception& e) {
            throw IoError(path + ":" + std::to_string(lineno) + ": malformed record: " + e.what());
        } catch (const IoError& e) {
            throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline void save_conversations(const std::string& path, const std::vector<Conversation>& convs,
                               const LabelTable& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& conv : convs) {
        nlohmann::json j;
        j["id"] = conv.id;
        j["turns"] = nlohmann::json::array();
        for (const auto& turn : conv.turns) {
            std::string text;
            for (std::size_t i = 0; i < turn.text.size(); ++i) {
                if (i) text += ' ';
                text += turn.text[i];
            }
            j["turns"].push_back({{"speaker", turn.speaker},
                                  {"text", text},
                                  {"label", labels.name_of(turn.label)}});
        }
        out << j.dump() << '\n';
    }
}

inline std::vector<VectorExample> load_vector_examples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<VectorExample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            VectorExample ex;
            ex.features = j.at("features").get<Vector>();
            ex.label = j.at("label").get<int>();
            if (ex.features.empty() || !all_finite(ex.features))
                throw IoError("empty or non-finite feature vector");
            out.push_back(std::move(ex));
        } catch (const nlohmann::json::exception& e) {
            throw IoError(path + ":" + std::to_string(lineno) + ": malformed record: " + e.what());
        } catch (const IoError& e) {
            throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline void save_vector_examples(const std::string& path,
                                 const std::vector<VectorExample>& examples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& ex : examples) {
        nlohmann::json j;
        j["features"] = ex.features;
        j["label"] = ex.label;
        out << j.dump() << '\n';
    }
}

// --- context and prompt assembly --------------------------------------------

constexpr std::size_t kNoTokenLimit = static_cast<std::size_t>(-1);

/// [s_{t-w}, u_{t-w}, ..., s_t, u_t] with w = min(window, t); speakers are
/// single tokens. If max_tokens is given, the oldest tokens are dropped
/// first.
inline std::vector<std::string> assemble_context(const Conversation& conv, std::size_t t,
                                                 std::size_t window,
                                                 std::size_t max_tokens = kNoTokenLimit) {
    if (t >= conv.turns.size())
        throw StructuralError("assemble_context: turn index " + std::to_string(t) +
                              " out of range");
    const std::size_t first = t - std::min(window, t);
    std::vector<std::string> out;
    for (std::size_t i = first; i <= t; ++i) {
        out.push_back(conv.turns[i].speaker);
        out.insert(out.end(), conv.turns[i].text.begin(), conv.turns[i].text.end());
    }
    if (out.size() > max_tokens)
        out.erase(out.begin(), out.end() - static_cast<std::ptrdiff_t>(max_tokens));
    return out;
}

/// Prompt template: for <utterance> , <speaker> fells <mask>
/// ("fells" is the template's literal spelling).
inline std::vector<std::string> build_prompt(const Turn& turn) {
    std::vector<std::string> out;
    out.reserve(turn.text.size() + 5);
    out.push_back("for");
    out.insert(out.end(), turn.text.begin(), turn.text.end());
    out.push_back(",");
    out.push_back(turn.speaker);
    out.push_back("fells");
    out.push_back(kMaskToken);
    return out;
}

/// The primary pair (C_t ++ P_t, y_t) and, when in-window history exists and
/// aux is enabled, one auxiliary pair (C_t ++ P_h, y_h) with h drawn
/// uniformly from the in-window turns strictly before t. Both pairs share a
/// token-identical context and respect max_len, truncating the oldest
/// context tokens first.
inline std::vector<TrainingPair> make_training_pairs(const Conversation& conv, std::size_t t,
                                                     std::size_t window, std::size_t max_len,
                                                     Rng& rng, bool aux = true) {
    if (t >= conv.turns.size())
        throw StructuralError("make_training_pairs: turn index out of range");
    const std::vector<std::string> prompt_t = build_prompt(conv.turns[t]);

    const std::size_t first = t - std::min(window, t);
    std::size_t h = t;
    std::vector<std::string> prompt_h;
    const bool have_history = aux && window > 0 && first < t;
    if (have_history) {
        h = first + static_cast<std::size_t>(rng.uniform_below(t - first));
        prompt_h = build_prompt(conv.turns[h]);
    }

    // One truncation budget for both prompts keeps the shared context
    // literally identical across the two pairs.
    const std::size_t widest_prompt =
        std::max(prompt_t.size(), have_history ? prompt_h.size() : std::size_t{0});
    const std::size_t budget = widest_prompt >= max_len ? 0 : max_len - widest_prompt;
    const std::vector<std::string> context = assemble_context(conv, t, window, budget);

    std::vector<TrainingPair> out;
    TrainingPair primary;
    primary.input_tokens = context;
    primary.input_tokens.insert(primary.input_tokens.end(), prompt_t.begin(), prompt_t.end());
    if (primary.input_tokens.size() > max_len) primary.input_tokens.resize(max_len);
    primary.target_label = conv.turns[t].label;
    primary.conversation_id = conv.id;
    primary.target_turn = t;
    primary.prompted_turn = t;
    out.push_back(std::move(primary));

    if (have_history) {
        TrainingPair auxiliary;
        auxiliary.input_tokens = context;
        auxiliary.input_tokens.insert(auxiliary.input_tokens.end(), prompt_h.begin(),
                                      prompt_h.end());
        if (auxiliary.input_tokens.size() > max_len) auxiliary.input_tokens.resize(max_len);
        auxiliary.target_label = conv.turns[h].label;
        auxiliary.conversation_id = conv.id;
        auxiliary.target_turn = t;
        auxiliary.prompted_turn = h;
        out.push_back(std::move(auxiliary));
    }
    return out;
}

// --- synthetic generators ----------------------------------------------------

struct ClusterSpec {
    std::size_t count = 0;
    Vector center;        // unit direction; empty means "draw one at random"
    double spread = 0.1;  // gaussian perturbation scale
};

/// Per class, points are normalize(center + spread * gaussian); labels are
/// the spec order. Seeded-reproducible.
inline std::vector<VectorExample> generate_synthetic_clusters(const std::vector<ClusterSpec>& spec,
                                                              std::size_t dim, Rng& rng) {
    if (dim < 2) throw ConfigError("generate_synthetic_clusters: dim must be >= 2");
    // centers first so a class's points do not disturb later centers' draws
    std::vector<Vector> centers;
    for (const auto& cs : spec) {
        if (cs.center.empty()) {
            Vector c(dim);
            for (double& x : c) x = rng.normal();
            centers.push_back(l2_normalize(c));
        } else {
            if (cs.center.size() != dim)
                throw StructuralError("generate_synthetic_clusters: center dim mismatch");
            centers.push_back(l2_normalize(cs.center));
        }
    }
    std::vector<VectorExample> out;
    for (std::size_t c = 0; c < spec.size(); ++c) {
        for (std::size_t i = 0; i < spec[c].count; ++i) {
            Vector p = centers[c];
            if (spec[c].spread > 0.0) {
                for (double& x : p) x += spec[c].spread * rng.normal();
            }
            VectorExample ex;
            ex.features = l2_normalize(p);
            ex.label = static_cast<int>(c);
            out.push_back(std::move(ex));
        }
    }
    return out;
}

/// Uniform without-replacement per-class draw with exactly the requested
/// counts; classes are emitted in label order.
inline std::vector<VectorExample> imbalanced_subset(const std::vector<VectorExample>& dataset,
                                                    const std::map<int, std::size_t>& counts,
                                                    Rng& rng) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < dataset.size(); ++i)
        by_class[dataset[i].label].push_back(i);
    std::vector<VectorExample> out;
    for (const auto& [label, want] : counts) {
        const auto it = by_class.find(label);
        const std::size_t have = it == by_class.end() ? 0 : it->second.size();
        if (want > have)
            throw StructuralError("imbalanced_subset: class " + std::to_string(label) +
                                  " has " + std::to_string(have) + " samples, need " +
                                  std::to_string(want) + " (short by " +
                                  std::to_string(want - have) + ")");
        if (want == 0) continue;
        for (std::size_t k : rng.sample_without_replacement(have, want))
            out.push_back(dataset[it->second[k]]);
    }
    return out;
}

// --- the unified sample the trainer consumes ---------------------------------

// Either a token sequence (conversation-derived) or a raw feature vector.
struct Sample {
    std::vector<std::string> tokens;
    Vector features;
    int label = 0;

    bool is_vector() const { return !features.empty(); }
};

using Dataset = std::vector<Sample>;

inline Dataset to_samples(const std::vector<VectorExample>& examples) {
    Dataset out;
    out.reserve(examples.size());
    for (const auto& ex : examples) out.push_back({{}, ex.features, ex.label});
    return out;
}

inline Dataset to_samples(const std::vector<TrainingPair>& pairs) {
    Dataset out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back({p.input_tokens, {}, p.target_label});
    return out;
}

/// Expand conversations into the flat training set of prompt pairs.
inline std::vector<TrainingPair> expand_conversations(const std::vector<Conversation>& convs,
                                                      std::size_t window, std::size_t max_len,
                                                      Rng& rng, bool aux = true) {
    std::vector<TrainingPair> out;
    for (const auto& conv : convs)
        for (std::size_t t = 0; t < conv.turns.size(); ++t) {
            auto pairs = make_training_pairs(conv, t, window, max_len, rng, aux);
            for (auto& p : pairs) out.push_back(std::move(p));
        }
    return out;
}

}  // namespace spcl
