#ifndef ADALAB_VEC_HPP
#define ADALAB_VEC_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "adalab/rng.hpp"

namespace adalab {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) {
    double s = 0.0;
    for (const double v : a) s += v * v;
    return std::sqrt(s);
}

inline Vec& axpy(Vec& y, double alpha, const Vec& x) {
    if (y.size() != x.size()) throw std::invalid_argument("axpy: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
    return y;
}

inline Vec& scale(Vec& y, double alpha) {
    for (double& v : y) v *= alpha;
    return y;
}

inline Vec sub(const Vec& a, const Vec& b) {
    Vec r = a;
    axpy(r, -1.0, b);
    return r;
}

inline double dist2(const Vec& a, const Vec& b) { return norm2(sub(a, b)); }

inline Vec basis(std::size_t d, std::size_t i, double v = 1.0) {
    Vec e(d, 0.0);
    e.at(i) = v;
    return e;
}

// Projection onto the l2 unit ball: w if ||w|| <= 1, else w/||w||.
inline Vec project_unit_ball(Vec w) {
    const double n = norm2(w);
    if (n > 1.0) scale(w, 1.0 / n);
    return w;
}

inline bool all_finite(const Vec& v) {
    for (const double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Uniform direction on the unit sphere.
inline Vec random_unit(std::size_t d, Rng& rng) {
    Vec v(d);
    double n = 0.0;
    while (n < 1e-12) {
        for (auto& x : v) x = rng.normal();
        n = norm2(v);
    }
    scale(v, 1.0 / n);
    return v;
}

} // namespace adalab

#endif
