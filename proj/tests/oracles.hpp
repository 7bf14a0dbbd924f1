#pragma once

// Independent naive oracles for the contrastive losses and small helpers for
// randomized tests. Everything here is self-contained (own dot/norm/cos) and
// deliberately evaluates the loss definitions term by term with plain exp
// and divisions, so it shares no accumulation path with the library.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "spcl/numerics.hpp"
#include "spcl/rng.hpp"

namespace oracle {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline double cos(const std::vector<double>& a, const std::vector<double>& b) {
    return dot(a, b) / (norm(a) * norm(b));
}

inline double score(const std::vector<double>& a, const std::vector<double>& b, double tau) {
    return std::exp(cos(a, b) / tau);
}

// L = sum_i -log( (1/|P(i)|) * P_sup(i)/N_sup(i) ), skipping samples with
// empty P(i).
inline double naive_supcon(const std::vector<std::vector<double>>& reps,
                           const std::vector<int>& labels, double tau) {
    double total = 0.0;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        double p_sum = 0.0, n_sum = 0.0;
        std::size_t p_count = 0;
        for (std::size_t j = 0; j < reps.size(); ++j) {
            if (j == i) continue;
            const double f = score(reps[i], reps[j], tau);
            n_sum += f;
            if (labels[j] == labels[i]) {
                p_sum += f;
                ++p_count;
            }
        }
        if (p_count == 0) continue;
        total += -std::log((1.0 / static_cast<double>(p_count)) * (p_sum / n_sum));
    }
    return total;
}

// The prototypical extension: the own-class prototype joins the numerator
// (divisor grows by one), the other-class prototypes join the denominator.
inline double naive_spcl(const std::vector<std::vector<double>>& reps,
                         const std::vector<int>& labels,
                         const std::map<int, std::vector<double>>& prototypes, double tau) {
    double total = 0.0;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        double p_sum = 0.0, n_sum = 0.0;
        std::size_t p_count = 0;
        for (std::size_t j = 0; j < reps.size(); ++j) {
            if (j == i) continue;
            const double f = score(reps[i], reps[j], tau);
            n_sum += f;
            if (labels[j] == labels[i]) {
                p_sum += f;
                ++p_count;
            }
        }
        std::size_t divisor = p_count;
        for (const auto& [k, proto] : prototypes) {
            const double f = score(reps[i], proto, tau);
            if (k == labels[i]) {
                p_sum += f;
                ++divisor;
            } else {
                n_sum += f;
            }
        }
        if (divisor == 0 || n_sum == 0.0) continue;
        total += -std::log((1.0 / static_cast<double>(divisor)) * (p_sum / n_sum));
    }
    return total;
}

// --- randomized-batch helpers -------------------------------------------------

struct RandomBatch {
    std::vector<std::vector<double>> reps;
    std::vector<int> labels;
};

inline RandomBatch random_batch(spcl::Rng& rng, std::size_t n, std::size_t dim, int classes) {
    RandomBatch b;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> z(dim);
        for (double& x : z) x = rng.normal();
        b.reps.push_back(std::move(z));
        b.labels.push_back(static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(classes))));
    }
    return b;
}

inline std::map<int, std::vector<double>> random_prototypes(spcl::Rng& rng, int classes,
                                                            std::size_t dim) {
    std::map<int, std::vector<double>> out;
    for (int c = 0; c < classes; ++c) {
        std::vector<double> p(dim);
        for (double& x : p) x = rng.normal();
        out[c] = std::move(p);
    }
    return out;
}

// Max relative error between analytic and central-difference gradients of a
// scalar function over a flattened batch; denominator max(|g|_2, 1e-8).
template <typename LossFn>
double max_grad_rel_err(const LossFn& loss_value, std::vector<std::vector<double>> reps,
                        const std::vector<std::vector<double>>& analytic, double eps = 1e-5) {
    double gnorm2 = 0.0;
    for (const auto& g : analytic)
        for (double x : g) gnorm2 += x * x;
    const double denom = std::max(std::sqrt(gnorm2), 1e-8);
    double worst = 0.0;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        for (std::size_t t = 0; t < reps[i].size(); ++t) {
            const double saved = reps[i][t];
            reps[i][t] = saved + eps;
            const double fp = loss_value(reps);
            reps[i][t] = saved - eps;
            const double fm = loss_value(reps);
            reps[i][t] = saved;
            const double fd = (fp - fm) / (2.0 * eps);
            worst = std::max(worst, std::abs(fd - analytic[i][t]) / denom);
        }
    }
    return worst;
}

}  // namespace oracle
