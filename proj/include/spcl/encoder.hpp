#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "spcl/data.hpp"
#include "spcl/errors.hpp"
#include "spcl/numerics.hpp"
#include "spcl/rng.hpp"

namespace spcl {

// A named, flat view of one parameter tensor and its gradient accumulator;
// the unit the optimizer walks over.
struct ParamBlock {
    std::string name;
    std::vector<double>* values = nullptr;
    std::vector<double>* grads = nullptr;
};

// --- feature hashing ----------------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Hashed bag-of-tokens with a sign hash: each token adds +-1 to one bucket.
/// The result is L2-normalized and never zero-norm — an empty sequence (or a
/// full sign cancellation) maps to the reserved bucket 0.
inline Vector featurize(const std::vector<std::string>& tokens, std::size_t hash_dim) {
    if (hash_dim < 16) throw ConfigError("featurize: hash_dim must be >= 16");
    Vector v(hash_dim, 0.0);
    for (const auto& tok : tokens) {
        const std::uint64_t h = fnv1a64(tok);
        const std::size_t bucket = static_cast<std::size_t>(h % hash_dim);
        v[bucket] += (h >> 63) ? -1.0 : 1.0;
    }
    if (norm(v) == 0.0) v[0] = 1.0;
    return l2_normalize(v);
}

// --- toy trainable encoder ----------------------------------------------------

// Two-layer perceptron x -> tanh(W1 x + b1) -> W2 h + b2, the desk-scale
// stand-in for a pretrained backbone.
struct ToyEncoderParams {
    std::size_t in_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t out_dim = 0;
    Matrix w1;  // hidden x in
    Vector b1;
    Matrix w2;  // out x hidden
    Vector b2;

    static ToyEncoderParams init(std::size_t in, std::size_t hidden, std::size_t out,
                                 Rng& rng) {
        ToyEncoderParams p;
        p.in_dim = in;
        p.hidden_dim = hidden;
        p.out_dim = out;
        p.w1 = Matrix(hidden, in);
        p.b1.assign(hidden, 0.0);
        p.w2 = Matrix(out, hidden);
        p.b2.assign(out, 0.0);
        const double s1 = 1.0 / std::sqrt(static_cast<double>(in));
        for (double& x : p.w1.entries) x = (2.0 * rng.uniform() - 1.0) * s1;
        const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
        for (double& x : p.w2.entries) x = (2.0 * rng.uniform() - 1.0) * s2;
        return p;
    }
};

struct ToyEncoderGrads {
    Matrix w1;
    Vector b1;
    Matrix w2;
    Vector b2;

    static ToyEncoderGrads zeros_like(const ToyEncoderParams& p) {
        ToyEncoderGrads g;
        g.w1 = Matrix(p.hidden_dim, p.in_dim);
        g.b1.assign(p.hidden_dim, 0.0);
        g.w2 = Matrix(p.out_dim, p.hidden_dim);
        g.b2.assign(p.out_dim, 0.0);
        return g;
    }

    void zero() {
        std::fill(w1.entries.begin(), w1.entries.end(), 0.0);
        std::fill(b1.begin(), b1.end(), 0.0);
        std::fill(w2.entries.begin(), w2.entries.end(), 0.0);
        std::fill(b2.begin(), b2.end(), 0.0);
    }
};

struct ToyForwardCache {
    Vector input;
    Vector hidden;  // post-tanh
    Vector rep;
};

inline ToyForwardCache toy_forward(const ToyEncoderParams& p, const Vector& features) {
    if (features.size() != p.in_dim)
        throw StructuralError("toy_forward: feature dim " + std::to_string(features.size()) +
                              " != encoder in_dim " + std::to_string(p.in_dim));
    ToyForwardCache c;
    c.input = features;
    c.hidden = p.w1.apply(features);
    for (std::size_t i = 0; i < c.hidden.size(); ++i)
        c.hidden[i] = std::tanh(c.hidden[i] + p.b1[i]);
    c.rep = p.w2.apply(c.hidden);
    for (std::size_t i = 0; i < c.rep.size(); ++i) c.rep[i] += p.b2[i];
    return c;
}

/// Exact chain-rule gradients, accumulated into g (supports batching).
inline void toy_backward(const ToyEncoderParams& p, const ToyForwardCache& cache,
                         const Vector& upstream, ToyEncoderGrads& g) {
    if (upstream.size() != p.out_dim || cache.hidden.size() != p.hidden_dim ||
        cache.input.size() != p.in_dim)
        throw StructuralError("toy_backward: cache/upstream shape mismatch");
    // W2, b2
    for (std::size_t r = 0; r < p.out_dim; ++r) {
        const double u = upstream[r];
        g.b2[r] += u;
        double* row = g.w2.entries.data() + r * p.hidden_dim;
        for (std::size_t c = 0; c < p.hidden_dim; ++c) row[c] += u * cache.hidden[c];
    }
    // through tanh
    Vector gh = p.w2.apply_transposed(upstream);
    for (std::size_t i = 0; i < gh.size(); ++i)
        gh[i] *= 1.0 - cache.hidden[i] * cache.hidden[i];
    // W1, b1
    for (std::size_t r = 0; r < p.hidden_dim; ++r) {
        const double u = gh[r];
        g.b1[r] += u;
        double* row = g.w1.entries.data() + r * p.in_dim;
        for (std::size_t c = 0; c < p.in_dim; ++c) row[c] += u * cache.input[c];
    }
}

// --- the pluggable contract ----------------------------------------------------

// Maps a training example to a d-dimensional representation. Trainable
// encoders expose parameter blocks and accumulate gradients through
// slot-addressed forward caches.
class Encoder {
  public:
    virtual ~Encoder() = default;
    virtual std::size_t dim() const = 0;
    virtual Vector encode(const Sample& s) const = 0;
    virtual std::vector<ParamBlock> param_blocks() { return {}; }
    virtual void zero_grads() {}
    virtual void reserve_slots(std::size_t) {}
    virtual Vector forward_cached(const Sample& s, std::size_t) { return encode(s); }
    virtual void backward(std::size_t, const Vector&) {}
};

/// Returns the example's raw feature vector unchanged (or unit-normalized).
inline Vector vector_passthrough_encoder(const VectorExample& example, bool normalize = false) {
    if (example.features.empty() || norm(example.features) == 0.0)
        throw DegenerateInputError("vector_passthrough_encoder: zero feature vector");
    return normalize ? l2_normalize(example.features) : example.features;
}

class PassthroughEncoder final : public Encoder {
  public:
    explicit PassthroughEncoder(std::size_t dim, bool normalize = false)
        : dim_(dim), normalize_(normalize) {}

    std::size_t dim() const override { return dim_; }

    Vector encode(const Sample& s) const override {
        if (!s.is_vector())
            throw StructuralError("PassthroughEncoder: sample carries no feature vector");
        VectorExample ex{s.features, s.label};
        Vector v = vector_passthrough_encoder(ex, normalize_);
        if (v.size() != dim_)
            throw StructuralError("PassthroughEncoder: feature dim mismatch");
        return v;
    }

  private:
    std::size_t dim_;
    bool normalize_;
};

// Token samples are feature-hashed into in_dim buckets; vector samples must
// already have in_dim features.
class ToyEncoder final : public Encoder {
  public:
    ToyEncoder(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim,
               std::uint64_t seed) {
        Rng rng(seed);
        params_ = ToyEncoderParams::init(in_dim, hidden_dim, out_dim, rng);
        grads_ = ToyEncoderGrads::zeros_like(params_);
    }

    explicit ToyEncoder(ToyEncoderParams params) : params_(std::move(params)) {
        grads_ = ToyEncoderGrads::zeros_like(params_);
    }

    std::size_t dim() const override { return params_.out_dim; }

    const ToyEncoderParams& params() const { return params_; }

    Vector features_of(const Sample& s) const {
        if (s.is_vector()) return s.features;
        return featurize(s.tokens, params_.in_dim);
    }

    Vector encode(const Sample& s) const override {
        return toy_forward(params_, features_of(s)).rep;
    }

    std::vector<ParamBlock> param_blocks() override {
        return {{"w1", &params_.w1.entries, &grads_.w1.entries},
                {"b1", &params_.b1, &grads_.b1},
                {"w2", &params_.w2.entries, &grads_.w2.entries},
                {"b2", &params_.b2, &grads_.b2}};
    }

    void zero_grads() override { grads_.zero(); }

    void reserve_slots(std::size_t n) override { caches_.resize(n); }

    Vector forward_cached(const Sample& s, std::size_t slot) override {
        if (slot >= caches_.size())
            throw StructuralError("ToyEncoder: forward slot out of range");
        caches_[slot] = toy_forward(params_, features_of(s));
        return caches_[slot].rep;
    }

    void backward(std::size_t slot, const Vector& upstream) override {
        if (slot >= caches_.size() || caches_[slot].rep.empty())
            throw StructuralError("ToyEncoder: backward without matching forward");
        toy_backward(params_, caches_[slot], upstream, grads_);
    }

  private:
    ToyEncoderParams params_;
    ToyEncoderGrads grads_;
    std::vector<ToyForwardCache> caches_;
};

}  // namespace spcl
