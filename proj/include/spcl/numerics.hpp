#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "spcl/errors.hpp"

namespace spcl {

// Dense column vector of 64-bit reals. All public operations reject
// non-finite entries and zero norms where the math requires it.
using Vector = std::vector<double>;

inline bool all_finite(const Vector& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vector& a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, const Vector& x, Vector& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vector scaled(const Vector& x, double alpha) {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = alpha * x[i];
    return out;
}

// Row-major dense matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> entries;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), entries(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return entries[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }

    // y = M x
    Vector apply(const Vector& x) const {
        if (x.size() != cols)
            throw StructuralError("matrix apply: expected input of size " +
                                  std::to_string(cols) + ", got " +
                                  std::to_string(x.size()));
        Vector y(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* row = entries.data() + r * cols;
            double s = 0.0;
            for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
            y[r] = s;
        }
        return y;
    }

    // y = M^T x
    Vector apply_transposed(const Vector& x) const {
        if (x.size() != rows)
            throw StructuralError("matrix apply_transposed: expected input of size " +
                                  std::to_string(rows) + ", got " +
                                  std::to_string(x.size()));
        Vector y(cols, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            const double xr = x[r];
            const double* row = entries.data() + r * cols;
            for (std::size_t c = 0; c < cols; ++c) y[c] += xr * row[c];
        }
        return y;
    }
};

/// cos(a, b) = <a,b> / (|a||b|), clamped to [-1, 1] to absorb rounding.
/// Throws DegenerateInputError on zero-norm input — a silent 0 would hide
/// encoder bugs downstream.
inline double cosine_similarity(const Vector& a, const Vector& b) {
    if (a.size() != b.size())
        throw StructuralError("cosine_similarity: dimension mismatch " +
                              std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0)
        throw DegenerateInputError("cosine_similarity: zero-norm input");
    const double c = dot(a, b) / (na * nb);
    return std::clamp(c, -1.0, 1.0);
}

inline Vector l2_normalize(const Vector& a) {
    const double n = norm(a);
    if (n == 0.0) throw DegenerateInputError("l2_normalize: zero-norm input");
    return scaled(a, 1.0 / n);
}

/// Softmax of scores/temperature, computed in shifted log-space.
inline Vector softmax(const Vector& scores, double temperature) {
    if (temperature <= 0.0)
        throw ConfigError("softmax: temperature must be positive, got " +
                          std::to_string(temperature));
    if (scores.empty()) throw StructuralError("softmax: empty scores");
    double hi = -std::numeric_limits<double>::infinity();
    for (double s : scores) hi = std::max(hi, s / temperature);
    Vector out(scores.size());
    double z = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] / temperature - hi);
        z += out[i];
    }
    for (double& x : out) x /= z;
    return out;
}

// log(sum_i exp(s_i)) over a term list; -inf for an empty list.
inline double log_sum_exp(const std::vector<double>& scores) {
    if (scores.empty()) return -std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double s : scores) hi = std::max(hi, s);
    double z = 0.0;
    for (double s : scores) z += std::exp(s - hi);
    return hi + std::log(z);
}

/// Central finite differences, the gradient oracle for every analytic
/// gradient in the library. f must be evaluable in a neighborhood of x.
inline Vector finite_difference_gradient(const std::function<double(const Vector&)>& f,
                                         const Vector& x, double eps) {
    if (eps < 1e-7 || eps > 1e-3)
        throw ConfigError("finite_difference_gradient: eps outside [1e-7, 1e-3]");
    Vector g(x.size());
    Vector p = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + eps;
        const double fp = f(p);
        p[i] = saved - eps;
        const double fm = f(p);
        p[i] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw EvaluationError("finite_difference_gradient: non-finite value at coordinate " +
                                  std::to_string(i));
        g[i] = (fp - fm) / (2.0 * eps);
    }
    return g;
}

}  // namespace spcl
