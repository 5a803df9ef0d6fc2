#ifndef ADALAB_CHECKS_HPP
#define ADALAB_CHECKS_HPP

#include <cmath>
#include <sstream>
#include <string>

#include "adalab/convex.hpp"
#include "adalab/rng.hpp"
#include "adalab/vec.hpp"

namespace adalab {

struct CheckReport {
    bool pass = true;
    std::string detail;

    static CheckReport ok() { return {}; }
    static CheckReport fail(std::string d) { return {false, std::move(d)}; }
};

namespace detail {
inline Vec sample_ball_point(int d, Rng& rng, double radius = 1.0) {
    Vec w = random_unit(d, rng);
    scale(w, radius * rng.next_double());
    return w;
}
} // namespace detail

// Central finite differences against the analytic gradient at random smooth
// points; points closer than `margin` to a nonsmooth locus (per the
// function's own smooth_margin) are resampled.
inline CheckReport check_gradients(const StochasticConvexFunction& f, Rng rng,
                                   int points = 200, double rel_tol = 1e-5,
                                   double margin = 1e-6, double h = 1e-7) {
    const int d = f.dim();
    for (int p = 0; p < points; ++p) {
        Vec w;
        int x = 0;
        bool found = false;
        for (int attempt = 0; attempt < 200 && !found; ++attempt) {
            w = detail::sample_ball_point(d, rng);
            x = static_cast<int>(rng.next_below(f.domain_size()));
            found = f.smooth_margin(w, x) > margin;
        }
        if (!found) continue; // nonsmooth loci everywhere near samples; skip point

        const Vec g = f.eval(w, x).gradient;
        Vec fd(d);
        for (int i = 0; i < d; ++i) {
            Vec wp = w, wm = w;
            wp[i] += h;
            wm[i] -= h;
            fd[i] = (f.eval(wp, x).value - f.eval(wm, x).value) / (2.0 * h);
        }
        const double err = dist2(fd, g);
        if (err > rel_tol * (1.0 + norm2(g))) {
            std::ostringstream os;
            os << "gradient mismatch at point " << p << " (x=" << x << "): |fd - grad| = "
               << err;
            return CheckReport::fail(os.str());
        }
    }
    return CheckReport::ok();
}

// f(lw + (1-l)w', x) <= l f(w,x) + (1-l) f(w',x) + slack on random triples.
inline CheckReport check_convexity(const StochasticConvexFunction& f, Rng rng,
                                   int triples = 10000, double slack = 1e-9) {
    const int d = f.dim();
    for (int p = 0; p < triples; ++p) {
        const Vec w1 = detail::sample_ball_point(d, rng);
        const Vec w2 = detail::sample_ball_point(d, rng);
        const double l = rng.next_double();
        const int x = static_cast<int>(rng.next_below(f.domain_size()));
        Vec mid = w1;
        scale(mid, l);
        axpy(mid, 1.0 - l, w2);
        const double lhs = f.eval(mid, x).value;
        const double rhs = l * f.eval(w1, x).value + (1.0 - l) * f.eval(w2, x).value;
        if (lhs > rhs + slack) {
            std::ostringstream os;
            os << "convexity violated by " << lhs - rhs << " at triple " << p;
            return CheckReport::fail(os.str());
        }
    }
    return CheckReport::ok();
}

// Sampled gradient norms against the declared Lipschitz constant.
inline CheckReport check_lipschitz(const StochasticConvexFunction& f, Rng rng,
                                   int points = 1000, double slack = 1e-9) {
    const int d = f.dim();
    for (int p = 0; p < points; ++p) {
        const Vec w = detail::sample_ball_point(d, rng);
        const int x = static_cast<int>(rng.next_below(f.domain_size()));
        const double n = norm2(f.eval(w, x).gradient);
        if (n > f.lipschitz() + slack) {
            std::ostringstream os;
            os << "gradient norm " << n << " exceeds declared constant " << f.lipschitz();
            return CheckReport::fail(os.str());
        }
    }
    return CheckReport::ok();
}

// Pointwise lower bound f >= floor on random points.
inline CheckReport check_floor(const StochasticConvexFunction& f, double floor, Rng rng,
                               int points = 10000) {
    const int d = f.dim();
    for (int p = 0; p < points; ++p) {
        const Vec w = detail::sample_ball_point(d, rng);
        const int x = static_cast<int>(rng.next_below(f.domain_size()));
        const double v = f.eval(w, x).value;
        if (v < floor) {
            std::ostringstream os;
            os << "value " << v << " below floor " << floor;
            return CheckReport::fail(os.str());
        }
    }
    return CheckReport::ok();
}

} // namespace adalab

#endif
