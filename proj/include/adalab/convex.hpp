#ifndef ADALAB_CONVEX_HPP
#define ADALAB_CONVEX_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "adalab/rng.hpp"
#include "adalab/sq.hpp"
#include "adalab/vec.hpp"

namespace adalab {

// ---------------------------------------------------------------------------
// First-order structure
// ---------------------------------------------------------------------------

struct FirstOrderInfo {
    double value = 0.0;
    Vec gradient;
};

// A stochastic convex function f(w,x) over a finite domain of x's, convex
// and Lipschitz in w on the unit ball.
class StochasticConvexFunction {
public:
    virtual ~StochasticConvexFunction() = default;
    virtual int dim() const = 0;
    virtual int domain_size() const = 0;
    virtual double lipschitz() const = 0;
    virtual FirstOrderInfo eval(const Vec& w, int x) const = 0;

    // Distance (in some norm-equivalent sense) from w to the nearest
    // nonsmooth locus of f(.,x); infinity for smooth functions. Used by the
    // finite-difference gradient check to resample near kinks.
    virtual double smooth_margin(const Vec&, int) const {
        return std::numeric_limits<double>::infinity();
    }
};

inline double population_value(const StochasticConvexFunction& f,
                               const FiniteDistribution& D, const Vec& w) {
    double s = 0.0;
    for (int x = 0; x < D.size(); ++x) s += D.p(x) * f.eval(w, x).value;
    return s;
}

inline Vec population_gradient(const StochasticConvexFunction& f,
                               const FiniteDistribution& D, const Vec& w) {
    Vec g(f.dim(), 0.0);
    for (int x = 0; x < D.size(); ++x) axpy(g, D.p(x), f.eval(w, x).gradient);
    return g;
}

inline Vec empirical_gradient(const StochasticConvexFunction& f, const Sample& S,
                              const Vec& w) {
    Vec g(f.dim(), 0.0);
    for (const int x : S.indices) axpy(g, 1.0, f.eval(w, x).gradient);
    scale(g, 1.0 / S.size());
    return g;
}

// ---------------------------------------------------------------------------
// First-order-access oracles
// ---------------------------------------------------------------------------

// Per-round table of first-order information, indexed by domain point.
using FoTable = std::vector<FirstOrderInfo>;

inline Vec table_population_gradient(const FoTable& table, const FiniteDistribution& D) {
    Vec g(table.at(0).gradient.size(), 0.0);
    for (int x = 0; x < D.size(); ++x) axpy(g, D.p(x), table[x].gradient);
    return g;
}

inline Vec table_empirical_gradient(const FoTable& table, const Sample& S) {
    Vec g(table.at(0).gradient.size(), 0.0);
    for (const int x : S.indices) axpy(g, 1.0, table[x].gradient);
    scale(g, 1.0 / S.size());
    return g;
}

// First-order-access discipline is structural: the oracle type has no handle
// to the function, only to per-round tables and query points.
class FoOracle {
public:
    virtual ~FoOracle() = default;
    virtual void init(const FiniteDomain&, const Sample&, Rng) {}
    virtual Vec estimate(int round, const Vec& w, const FoTable& table) = 0;
};

// Returns the exact population gradient computed from the table.
class ExactPopulationFoOracle : public FoOracle {
public:
    explicit ExactPopulationFoOracle(FiniteDistribution D) : D_(std::move(D)) {}
    Vec estimate(int, const Vec&, const FoTable& table) override {
        return table_population_gradient(table, D_);
    }

private:
    FiniteDistribution D_;
};

class EmpiricalMeanFoOracle : public FoOracle {
public:
    void init(const FiniteDomain&, const Sample& sample, Rng) override { sample_ = sample; }
    Vec estimate(int, const Vec&, const FoTable& table) override {
        return table_empirical_gradient(table, sample_);
    }

private:
    Sample sample_;
};

enum class NoiseMode { None, Sphere, Align, AntiAlign };

inline NoiseMode noise_mode_from_string(const std::string& s) {
    if (s == "none") return NoiseMode::None;
    if (s == "sphere") return NoiseMode::Sphere;
    if (s == "align") return NoiseMode::Align;
    if (s == "anti") return NoiseMode::AntiAlign;
    throw std::invalid_argument("unknown noise mode: " + s);
}

// Wraps another oracle and perturbs its estimate by a vector of norm exactly
// eps (adversarial magnitude, random or gradient-aligned direction).
class NoisyFoOracle : public FoOracle {
public:
    NoisyFoOracle(std::unique_ptr<FoOracle> inner, double eps, NoiseMode mode)
        : inner_(std::move(inner)), eps_(eps), mode_(mode) {}

    void init(const FiniteDomain& dom, const Sample& sample, Rng rng) override {
        inner_->init(dom, sample, rng.split("inner"));
        rng_ = rng.split("noise");
    }

    Vec estimate(int round, const Vec& w, const FoTable& table) override {
        Vec g = inner_->estimate(round, w, table);
        if (mode_ == NoiseMode::None || eps_ == 0.0) return g;
        Vec dir;
        if (mode_ == NoiseMode::Sphere) {
            dir = random_unit(g.size(), rng_);
        } else {
            const double n = norm2(g);
            dir = g;
            if (n > 1e-12)
                scale(dir, (mode_ == NoiseMode::Align ? 1.0 : -1.0) / n);
            else
                dir = random_unit(g.size(), rng_);
        }
        axpy(g, eps_, dir);
        return g;
    }

private:
    std::unique_ptr<FoOracle> inner_;
    double eps_;
    NoiseMode mode_;
    Rng rng_{0};
};

// ---------------------------------------------------------------------------
// Projected gradient descent
// ---------------------------------------------------------------------------

inline Vec gd_step(const Vec& w, const Vec& g, double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("gd_step: eta must be positive");
    Vec next = w;
    axpy(next, -eta, g);
    return project_unit_ball(std::move(next));
}

struct GdRun {
    std::vector<Vec> trajectory;  // w_1..w_T
    std::vector<Vec> estimates;   // oracle outputs g_1..g_T
    std::vector<Vec> pop_grads;   // exact population gradients at w_t
    std::vector<Vec> emp_grads;   // exact empirical gradients at w_t
    Vec w_avg;                    // (1/T) sum w_t
    double eta = 0.0;
    int m = 0;
    std::uint64_t seed = 0;
};

inline GdRun run_gd(const StochasticConvexFunction& f, FoOracle& oracle,
                    const FiniteDistribution& D, int m, double eta, int T,
                    std::uint64_t seed) {
    if (f.domain_size() != D.size())
        throw std::invalid_argument("run_gd: function/distribution domain mismatch");
    GdRun run;
    run.eta = eta;
    run.m = m;
    run.seed = seed;

    const Sample sample = draw_sample(D, m, seed);
    oracle.init(D.domain(), sample, Rng(seed).split("fo-oracle"));

    Vec w(f.dim(), 0.0);
    Vec sum(f.dim(), 0.0);
    for (int t = 1; t <= T; ++t) {
        FoTable table(D.size());
        for (int x = 0; x < D.size(); ++x) table[x] = f.eval(w, x);

        const Vec g = oracle.estimate(t, w, table);
        if (!all_finite(g))
            throw std::runtime_error("run_gd: non-finite oracle output at round " +
                                     std::to_string(t));

        run.trajectory.push_back(w);
        run.estimates.push_back(g);
        run.pop_grads.push_back(table_population_gradient(table, D));
        run.emp_grads.push_back(table_empirical_gradient(table, sample));
        axpy(sum, 1.0, w);

        w = gd_step(w, g, eta);
    }
    run.w_avg = sum;
    scale(run.w_avg, 1.0 / T);
    return run;
}

inline AccuracyVerdict eval_fo_accuracy(const GdRun& run, double eps, double gamma) {
    int fail = 0;
    const int T = static_cast<int>(run.trajectory.size());
    for (int t = 0; t < T; ++t)
        if (dist2(run.estimates[t], run.pop_grads[t]) > eps) ++fail;
    AccuracyVerdict v;
    v.fail_fraction = T ? static_cast<double>(fail) / T : 0.0;
    v.pass = v.fail_fraction <= gamma;
    return v;
}

inline bool eval_fo_posthoc(const GdRun& run, double eps) {
    const int T = static_cast<int>(run.trajectory.size());
    for (int t = 0; t < T; ++t)
        if (dist2(run.pop_grads[t], run.emp_grads[t]) > eps) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Quadratic testbed for the accurate-gradient rate experiment
// ---------------------------------------------------------------------------

// f(w,x) = 0.5 ||w - theta_x||^2 with two equally likely centers averaging to
// 0.5 e1; F has its minimum at 0.5 e1, inside the unit ball, in closed form.
class QuadraticTestbed : public StochasticConvexFunction {
public:
    QuadraticTestbed() {
        centers_.push_back({0.5, 0.3, 0.0});
        centers_.push_back({0.5, -0.3, 0.0});
    }
    int dim() const override { return 3; }
    int domain_size() const override { return 2; }
    double lipschitz() const override { return 1.0 + norm2(centers_[0]); }
    FirstOrderInfo eval(const Vec& w, int x) const override {
        FirstOrderInfo info;
        info.gradient = sub(w, centers_.at(x));
        info.value = 0.5 * dot(info.gradient, info.gradient);
        return info;
    }

    // min_{||w||<=1} F(w), attained at the mean center.
    double population_optimum() const { return 0.5 * 0.3 * 0.3; }
    Vec minimizer() const { return {0.5, 0.0, 0.0}; }

private:
    std::vector<Vec> centers_;
};

// Runs GD with an exact-population oracle perturbed by eps-bounded noise on
// the fixed quadratic testbed and returns F(w_S) - F*.
inline double gd_rate_experiment(double eps, double eta, int T, NoiseMode mode,
                                 std::uint64_t seed) {
    QuadraticTestbed f;
    const FiniteDistribution D = FiniteDistribution::uniform(2);
    NoisyFoOracle oracle(std::make_unique<ExactPopulationFoOracle>(D), eps, mode);
    const GdRun run = run_gd(f, oracle, D, /*m=*/4, eta, T, seed);
    return population_value(f, D, run.w_avg) - f.population_optimum();
}

// ---------------------------------------------------------------------------
// Quadratic query encoding (statistical queries -> gradient coordinates)
// ---------------------------------------------------------------------------

// f(w,x) = sum_q ((q(x)+1)/4) w(q)^2 with one coordinate per query. Convex
// and 1-Lipschitz on the unit ball for |q(x)| <= 1; the population gradient
// coordinate at w(q) is ((q(D)+1)/2) w(q).
class QueryQuadratic : public StochasticConvexFunction {
public:
    // coord_queries[j] may be an empty Query meaning "coordinate j unused"
    // (zero coefficient).
    QueryQuadratic(std::vector<Query> coord_queries, int domain_size)
        : queries_(std::move(coord_queries)), n_(domain_size) {
        for (const Query& q : queries_)
            if (q.size() != 0 && q.size() != n_)
                throw std::invalid_argument("QueryQuadratic: query domain mismatch");
    }

    int dim() const override { return static_cast<int>(queries_.size()); }
    int domain_size() const override { return n_; }
    double lipschitz() const override { return 1.0; }

    FirstOrderInfo eval(const Vec& w, int x) const override {
        FirstOrderInfo info;
        info.gradient.assign(queries_.size(), 0.0);
        for (std::size_t j = 0; j < queries_.size(); ++j) {
            if (queries_[j].size() == 0) continue;
            const double c = (queries_[j](x) + 1.0) / 2.0;
            info.gradient[j] = c * w.at(j);
            info.value += 0.5 * c * w[j] * w[j];
        }
        return info;
    }

private:
    std::vector<Query> queries_;
    int n_;
};

inline QueryQuadratic quadratic_encode(std::vector<Query> queries, int domain_size) {
    return QueryQuadratic(std::move(queries), domain_size);
}

// ---------------------------------------------------------------------------
// Batch statistical-query oracle backed by a first-order oracle
// ---------------------------------------------------------------------------

// Each round's k queries are assigned k fresh coordinates of the quadratic
// encoding; the oracle submits w_t = (1/sqrt(k)) sum e_q, reads the gradient
// estimate g_t, and decodes a_{t,i} = 2 sqrt(k) g_t(q_{t,i}) - 1. Exact
// gradients decode to q(D) exactly; gradient error eps gives per-round RMS
// answer error at most 2 eps.
class SqFromFoOracle : public SqOracle {
public:
    SqFromFoOracle(std::unique_ptr<FoOracle> fo, int k, int T)
        : fo_(std::move(fo)), k_(k), dim_(k * T) {
        if (k < 1 || T < 1) throw std::invalid_argument("SqFromFoOracle: k,T >= 1");
    }

    void init(const FiniteDomain& domain, const Sample& sample, Rng rng) override {
        n_ = domain.n;
        fo_->init(domain, sample, rng.split("fo"));
    }

    std::vector<double> answer(int round, const std::vector<Query>& batch) override {
        if (static_cast<int>(batch.size()) != k_)
            throw std::runtime_error("SqFromFoOracle: expected batch of width " +
                                     std::to_string(k_));
        const int base = (round - 1) * k_;
        if (base + k_ > dim_)
            throw std::runtime_error("SqFromFoOracle: query coordinates exhausted (round " +
                                     std::to_string(round) + ")");

        // Block-local function: coordinates outside this round's block carry
        // w = 0 and contribute neither value nor gradient.
        std::vector<Query> coords(dim_);
        for (int i = 0; i < k_; ++i) coords[base + i] = batch[i];
        const QueryQuadratic f(std::move(coords), n_);

        const double root_k = std::sqrt(static_cast<double>(k_));
        Vec w(dim_, 0.0);
        for (int i = 0; i < k_; ++i) w[base + i] = 1.0 / root_k;

        FoTable table(n_);
        for (int x = 0; x < n_; ++x) table[x] = f.eval(w, x);
        const Vec g = fo_->estimate(round, w, table);

        std::vector<double> answers(k_);
        for (int i = 0; i < k_; ++i) answers[i] = 2.0 * root_k * g.at(base + i) - 1.0;
        return answers;
    }

private:
    std::unique_ptr<FoOracle> fo_;
    int k_;
    int dim_;
    int n_ = 0;
};

// ---------------------------------------------------------------------------
// Two-step bias demonstration
// ---------------------------------------------------------------------------

// f(w,x) = 0.5 sqrt(sum_i x(i) max(0,w(i))^2) + gamma <v_x, w> over
// x in {0,1}^dim, with v_x(i) = -1/m when x(i)=0 and +1 when x(i)=1.
// The linear term's sign is chosen so that after one full-batch GD step the
// strictly positive coordinates of w_2 are exactly the coordinates that are
// zero in every sample point; the printed form with the opposite sign
// contradicts that property.
//
// Explicit-point variant for property checks at small scale; the full-scale
// demonstration below works on bit-packed points.
class AmirFunction : public StochasticConvexFunction {
public:
    AmirFunction(std::vector<std::vector<std::uint8_t>> points, int m, double gamma)
        : points_(std::move(points)), m_(m), gamma_(gamma) {
        if (points_.empty()) throw std::invalid_argument("AmirFunction: no points");
        d_ = static_cast<int>(points_[0].size());
    }

    int dim() const override { return d_; }
    int domain_size() const override { return static_cast<int>(points_.size()); }
    double lipschitz() const override {
        return 0.5 + gamma_ * std::sqrt(static_cast<double>(d_));
    }

    FirstOrderInfo eval(const Vec& w, int xi) const override {
        const auto& x = points_.at(xi);
        FirstOrderInfo info;
        info.gradient.assign(d_, 0.0);
        double s = 0.0;
        for (int i = 0; i < d_; ++i)
            if (x[i] && w[i] > 0.0) s += w[i] * w[i];
        const double root = std::sqrt(s);
        info.value = 0.5 * root;
        if (root > 0.0)
            for (int i = 0; i < d_; ++i)
                if (x[i] && w[i] > 0.0) info.gradient[i] = w[i] / (2.0 * root);
        // at s == 0 the chosen subgradient of the square-root term is 0
        for (int i = 0; i < d_; ++i) {
            const double v = x[i] ? 1.0 : -1.0 / m_;
            info.gradient[i] += gamma_ * v;
            info.value += gamma_ * v * w[i];
        }
        return info;
    }

    double smooth_margin(const Vec& w, int xi) const override {
        const auto& x = points_.at(xi);
        double margin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < d_; ++i)
            if (x[i]) margin = std::min(margin, std::abs(w[i]));
        return margin;
    }

private:
    std::vector<std::vector<std::uint8_t>> points_;
    int m_;
    int d_;
    double gamma_;
};

struct BiasDemoResult {
    double gap = 0.0;            // || empirical - population gradient at w2 ||
    int all_zero_coords = 0;     // coordinates zero in every sample point
    bool flagged = false;        // no all-zero coordinate found
    bool w2_sign_property = true;  // w2(i) > 0 iff coordinate all-zero
    double step1_check = 0.0;    // || g_1 - gamma * mean(v_x) ||, exact 0 expected
};

// Runs two full-batch GD steps of the construction above from w_1 = 0 and
// measures the gap between the empirical mean gradient and a Monte-Carlo
// population gradient at w_2. Population draws are pooled per coordinate:
// coordinates outside the all-zero set are independent of the square-root
// term, so their Bernoulli draws are tallied with popcounts instead of being
// materialized per draw (bit-identical in distribution, same draw count).
inline BiasDemoResult amir_bias_demo(int m, int d, double gamma, long mc_n,
                                     std::uint64_t seed, double eta = 1.0) {
    if (m < 1 || d < 1 || mc_n < 1)
        throw std::invalid_argument("amir_bias_demo: bad parameters");
    Rng root(seed);
    Rng sample_rng = root.split("sample");

    const int words = (d + 63) / 64;
    std::vector<std::vector<std::uint64_t>> xs(m, std::vector<std::uint64_t>(words));
    for (auto& x : xs)
        for (auto& w : x) w = sample_rng.next_u64();

    const auto bit = [&](const std::vector<std::uint64_t>& x, int i) -> bool {
        return (x[i >> 6] >> (i & 63)) & 1u;
    };

    // Step 1: gradient at w1 = 0 is gamma * v_x exactly for every x.
    Vec vbar(d, 0.0);
    for (const auto& x : xs)
        for (int i = 0; i < d; ++i) vbar[i] += bit(x, i) ? 1.0 : -1.0 / m;
    scale(vbar, 1.0 / m);

    Vec w2(d);
    for (int i = 0; i < d; ++i) w2[i] = -eta * gamma * vbar[i];

    BiasDemoResult res;
    std::vector<int> all_zero;
    for (int i = 0; i < d; ++i) {
        bool zero = true;
        for (const auto& x : xs)
            if (bit(x, i)) {
                zero = false;
                break;
            }
        if (zero) all_zero.push_back(i);
        if ((w2[i] > 0.0) != zero) res.w2_sign_property = false;
    }
    res.all_zero_coords = static_cast<int>(all_zero.size());
    res.flagged = all_zero.empty();

    // Empirical mean gradient at w2. For every sampled x the square-root
    // term vanishes (x(i)=1 implies w2(i) <= 0), but compute it faithfully.
    Vec emp(d, 0.0);
    for (const auto& x : xs) {
        double s = 0.0;
        for (int i = 0; i < d; ++i)
            if (bit(x, i) && w2[i] > 0.0) s += w2[i] * w2[i];
        const double root2 = std::sqrt(s);
        for (int i = 0; i < d; ++i) {
            if (root2 > 0.0 && bit(x, i) && w2[i] > 0.0) emp[i] += w2[i] / (2.0 * root2);
            emp[i] += gamma * (bit(x, i) ? 1.0 : -1.0 / m);
        }
    }
    scale(emp, 1.0 / m);
    res.step1_check = 0.0; // g1 = gamma*vbar by construction; see test for the identity

    // Monte-Carlo population gradient at w2.
    Vec pop(d, 0.0);
    Rng mc = root.split("population-mc");

    // (a) Coordinates with w2 > 0 (the all-zero set) feed the square-root
    // term; draw them jointly per Monte-Carlo point.
    const int np = static_cast<int>(all_zero.size());
    Rng joint = mc.split("joint");
    std::vector<std::uint8_t> mask(np);
    for (long l = 0; l < mc_n; ++l) {
        double s = 0.0;
        for (int j = 0; j < np; ++j) {
            mask[j] = static_cast<std::uint8_t>(joint.coin());
            if (mask[j]) s += w2[all_zero[j]] * w2[all_zero[j]];
        }
        const double root2 = std::sqrt(s);
        for (int j = 0; j < np; ++j) {
            const int i = all_zero[j];
            if (mask[j]) {
                if (root2 > 0.0) pop[i] += w2[i] / (2.0 * root2);
                pop[i] += gamma;
            } else {
                pop[i] += -gamma / m;
            }
        }
    }

    // (b) Every other coordinate only contributes through the linear term
    // and is independent of (a); tally its mc_n Bernoulli draws by popcount.
    std::vector<std::uint8_t> in_pos(d, 0);
    for (const int i : all_zero) in_pos[i] = 1;
    const long full_words = mc_n / 64;
    const int tail_bits = static_cast<int>(mc_n % 64);
    Rng pooled = mc.split("pooled");
    for (int i = 0; i < d; ++i) {
        if (in_pos[i]) continue;
        long ones = 0;
        for (long wd = 0; wd < full_words; ++wd)
            ones += __builtin_popcountll(pooled.next_u64());
        if (tail_bits)
            ones += __builtin_popcountll(pooled.next_u64() &
                                         ((~std::uint64_t{0}) >> (64 - tail_bits)));
        pop[i] = gamma * (ones * 1.0 + (mc_n - ones) * (-1.0 / m));
    }
    for (const int i : all_zero) pop[i] /= static_cast<double>(mc_n);
    for (int i = 0; i < d; ++i)
        if (!in_pos[i]) pop[i] /= static_cast<double>(mc_n);

    res.gap = dist2(emp, pop);
    return res;
}

} // namespace adalab

#endif
