#ifndef ADALAB_ATTACKS_HPP
#define ADALAB_ATTACKS_HPP

#include <algorithm>
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
// One-time-pad membership attack
// ---------------------------------------------------------------------------

// The attacked distribution is uniform over N elements; element j carries a
// secret pad v_j in {-1,+1}^N. The round-t query reveals coordinate t of
// every pad, so its population value is ~0 while its empirical value over a
// small sample is a +-1 average with fluctuation ~1/sqrt(m). The analyst's
// state transition consumes only answers rounded to a 0.01 grid and
// accumulates per-element correlation scores (the membership statistic).
class PadAttackAnalyst : public Analyst {
public:
    PadAttackAnalyst(int N, std::uint64_t seed) : N_(N), scores_(N, 0.0) {
        if (N < 1) throw std::invalid_argument("pad_attack: horizon must be >= 1");
        Rng rng = Rng(seed).split("pads");
        pads_.assign(N, std::vector<signed char>(N));
        for (auto& pad : pads_)
            for (auto& b : pad) b = rng.coin() ? 1 : -1;
    }

    int horizon() const override { return N_; }

    // Uniform over the N pad-carrying elements.
    FiniteDistribution distribution() const { return FiniteDistribution::uniform(N_); }

    std::vector<Query> next_queries(const std::vector<double>& prev_answers) override {
        if (!prev_answers.empty()) {
            // rounded-answer state transition
            const double r = std::round(prev_answers.at(0) * 100.0) / 100.0;
            for (int j = 0; j < N_; ++j) scores_[j] += pads_[j][t_] * r;
            ++t_;
        }
        if (t_ >= N_) throw std::runtime_error("pad_attack: horizon exhausted");
        Vec q(N_);
        for (int j = 0; j < N_; ++j) q[j] = pads_[j][t_];
        return {Query(std::move(q))};
    }

    // Correlation of element j's pad with the rounded answers so far. For a
    // sampled element this concentrates around t/m; for others around 0.
    const Vec& membership_scores() const { return scores_; }

    std::vector<int> top_scores(int m) const {
        std::vector<int> idx(N_);
        for (int j = 0; j < N_; ++j) idx[j] = j;
        std::partial_sort(idx.begin(), idx.begin() + std::min(m, N_), idx.end(),
                          [&](int a, int b) { return scores_[a] > scores_[b]; });
        idx.resize(std::min(m, N_));
        return idx;
    }

private:
    int N_;
    std::vector<std::vector<signed char>> pads_;
    Vec scores_;
    int t_ = 0;
};

inline int pad_attack_horizon(int m, double gamma, double c) {
    if (m < 2) throw std::invalid_argument("pad_attack: m >= 2 required");
    if (!(gamma < 0.5)) throw std::invalid_argument("pad_attack: gamma < 1/2 required");
    const double slack = 0.5 - gamma;
    return static_cast<int>(std::ceil(c * m * m / (slack * slack * slack * slack)));
}

// Frozen default: c = 2 * (1/4)^4 so that at gamma = 1/4 the horizon is
// N = 2 m^2 (calibrated once against the empirical-mean oracle; see the
// default config).
inline constexpr double kPadAttackDefaultC = 2.0 / 256.0;

inline std::unique_ptr<PadAttackAnalyst> pad_attack(int m, double gamma,
                                                    std::uint64_t seed,
                                                    double c = kPadAttackDefaultC,
                                                    int horizon_cap = 1000000) {
    const int N = pad_attack_horizon(m, gamma, c);
    if (N > horizon_cap)
        throw std::invalid_argument(
            "pad_attack: horizon " + std::to_string(N) + " exceeds cap " +
            std::to_string(horizon_cap) + "; lower m (or gamma's distance from 1/2)");
    return std::make_unique<PadAttackAnalyst>(N, seed);
}

// ---------------------------------------------------------------------------
// Reconstruction instance and decoder
// ---------------------------------------------------------------------------

// n elements with k-bit descriptions; queries are the k coordinate maps
// q_j(s) = 2 s(j) - 1. Answers approximate (1/n) sum_i q_j(s_i) v(i) for a
// hidden target v in [0,1]^n.
struct ReconstructionInstance {
    int n = 0;
    int k = 0;
    std::vector<std::vector<std::uint8_t>> rows; // n x k bits
    std::uint64_t seed = 0;

    double q(int i, int j) const { return 2.0 * rows[i][j] - 1.0; }

    double measure(const Vec& v, int j) const {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += q(i, j) * v[i];
        return s / n;
    }

    std::vector<double> exact_answers(const Vec& v) const {
        if (static_cast<int>(v.size()) != n)
            throw std::invalid_argument("exact_answers: target length mismatch");
        std::vector<double> a(k);
        for (int j = 0; j < k; ++j) a[j] = measure(v, j);
        return a;
    }
};

inline ReconstructionInstance make_reconstruction_instance(int n, int k,
                                                           std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("make_reconstruction_instance: n >= 1");
    if (k < n)
        throw std::invalid_argument(
            "make_reconstruction_instance: k >= n required (decoder needs enough measurements)");
    ReconstructionInstance inst;
    inst.n = n;
    inst.k = k;
    inst.seed = seed;
    Rng rng = Rng(seed).split("recon-rows");
    inst.rows.assign(n, std::vector<std::uint8_t>(k));
    for (auto& row : inst.rows)
        for (auto& b : row) b = static_cast<std::uint8_t>(rng.coin());
    return inst;
}

struct ReconstructResult {
    Vec v;                      // best iterate, in [0,1]^n
    double objective = 0.0;     // sum_j |measurement residual| at best iterate
    bool budget_warning = false; // still improving near the end of the budget
};

// Least-absolute-deviation fit of v in [0,1]^n to the measurement model,
// solved by projected subgradient descent with a fixed iteration budget and
// a 1/sqrt(t) step schedule; the best iterate seen is returned. The l1 loss
// makes the fit robust to a small fraction of arbitrarily wrong answers.
inline ReconstructResult reconstruct(const ReconstructionInstance& inst,
                                     const std::vector<double>& answers,
                                     long budget = 20000) {
    if (static_cast<int>(answers.size()) != inst.k)
        throw std::invalid_argument("reconstruct: expected " + std::to_string(inst.k) +
                                    " answers");
    const int n = inst.n, k = inst.k;
    Vec v(n, 0.5);
    ReconstructResult best;
    best.v = v;
    best.objective = std::numeric_limits<double>::infinity();

    const double alpha0 = static_cast<double>(n) / k;
    const long last_quarter = budget - budget / 4;
    double best_at_quarter = 0.0;

    for (long t = 1; t <= budget; ++t) {
        // residuals, objective, and subgradient in one pass
        double obj = 0.0;
        Vec g(n, 0.0);
        for (int j = 0; j < k; ++j) {
            const double r = inst.measure(v, j) - answers[j];
            obj += std::abs(r);
            if (r == 0.0) continue;
            const double s = r > 0.0 ? 1.0 : -1.0;
            for (int i = 0; i < n; ++i) g[i] += s * inst.q(i, j) / n;
        }
        if (obj < best.objective) {
            best.objective = obj;
            best.v = v;
        }
        if (t == last_quarter) best_at_quarter = best.objective;

        const double alpha = alpha0 / std::sqrt(static_cast<double>(t));
        for (int i = 0; i < n; ++i) v[i] = std::clamp(v[i] - alpha * g[i], 0.0, 1.0);
    }
    best.budget_warning = best_at_quarter - best.objective > 1e-9 * k;
    return best;
}

inline double mean_abs_error(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("mean_abs_error: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s / a.size();
}

// ---------------------------------------------------------------------------
// Composed analyst: d adaptive sub-analysts behind k non-adaptive queries
// ---------------------------------------------------------------------------

// Product distribution over pairs (i, x): pick sub-analyst index i uniformly,
// then x ~ D_i. Flat index i * |X| + x.
inline FiniteDistribution composed_distribution(const std::vector<FiniteDistribution>& subs) {
    if (subs.empty()) throw std::invalid_argument("composed_distribution: no components");
    const int nx = subs[0].size();
    for (const auto& D : subs)
        if (D.size() != nx)
            throw std::invalid_argument("composed_distribution: component sizes differ");
    const int d = static_cast<int>(subs.size());
    Vec p(static_cast<std::size_t>(d) * nx);
    for (int i = 0; i < d; ++i)
        for (int x = 0; x < nx; ++x) p[static_cast<std::size_t>(i) * nx + x] = subs[i].p(x) / d;
    return FiniteDistribution(FiniteDomain::product(d, nx), std::move(p));
}

// Each round: collect one query per sub-analyst, emit the k product queries
// q'_j(i,x) = q_j(s_i) * q_{t,i}(x); on the k answers, invert the affine
// relation between product-query means and the measurement model, decode the
// per-sub-analyst answers with the reconstruction decoder, and feed them back.
class ComposedAnalyst : public Analyst {
public:
    ComposedAnalyst(std::vector<std::unique_ptr<Analyst>> subs,
                    ReconstructionInstance inst, int T, long decoder_budget = 20000)
        : subs_(std::move(subs)), inst_(std::move(inst)), T_(T), budget_(decoder_budget) {
        if (static_cast<int>(subs_.size()) != inst_.n)
            throw std::invalid_argument("compose_analyst: instance n must equal the number "
                                        "of sub-analysts");
        for (const auto& s : subs_) {
            if (s->width() != 1)
                throw std::invalid_argument("compose_analyst: sub-analysts must have width 1");
            if (s->horizon() < T_)
                throw std::invalid_argument("compose_analyst: sub-analyst horizon exhausted");
        }
        // column means (1/d) sum_i q_j(s_i), used in the answer transform
        col_mean_.assign(inst_.k, 0.0);
        for (int j = 0; j < inst_.k; ++j) {
            for (int i = 0; i < inst_.n; ++i) col_mean_[j] += inst_.q(i, j);
            col_mean_[j] /= inst_.n;
        }
    }

    int horizon() const override { return T_; }
    int width() const override { return inst_.k; }

    std::vector<Query> next_queries(const std::vector<double>& prev_answers) override {
        const int d = inst_.n;
        if (prev_answers.empty()) {
            for (int i = 0; i < d; ++i)
                sub_queries_.push_back(std::move(subs_[i]->next_queries({}).at(0)));
        } else {
            // a'_j = 2 * (1/d) sum_i q_j(s_i) v(i) - (1/d) sum_i q_j(s_i)
            // with v(i) = (a_i + 1)/2, so the decoder target is the inverse:
            std::vector<double> target(inst_.k);
            for (int j = 0; j < inst_.k; ++j)
                target[j] = (prev_answers.at(j) + col_mean_[j]) / 2.0;
            const ReconstructResult dec = reconstruct(inst_, target, budget_);
            last_decoded_ = dec.v;
            for (int i = 0; i < d; ++i) {
                const double a_hat = 2.0 * dec.v[i] - 1.0;
                sub_queries_[i] = std::move(subs_[i]->next_queries({a_hat}).at(0));
            }
        }
        nx_ = sub_queries_[0].size();

        std::vector<Query> batch;
        batch.reserve(inst_.k);
        for (int j = 0; j < inst_.k; ++j) {
            Vec q(static_cast<std::size_t>(d) * nx_);
            for (int i = 0; i < d; ++i)
                for (int x = 0; x < nx_; ++x)
                    q[static_cast<std::size_t>(i) * nx_ + x] = inst_.q(i, j) * sub_queries_[i](x);
            batch.emplace_back(std::move(q));
        }
        return batch;
    }

    const Vec& last_decoded() const { return last_decoded_; }
    const std::vector<Query>& current_sub_queries() const { return sub_queries_; }

private:
    std::vector<std::unique_ptr<Analyst>> subs_;
    ReconstructionInstance inst_;
    int T_;
    long budget_;
    Vec col_mean_;
    std::vector<Query> sub_queries_;
    Vec last_decoded_;
    int nx_ = 0;
};

inline std::unique_ptr<ComposedAnalyst> compose_analyst(
    std::vector<std::unique_ptr<Analyst>> subs, ReconstructionInstance inst, int T,
    long decoder_budget = 20000) {
    return std::make_unique<ComposedAnalyst>(std::move(subs), std::move(inst), T,
                                             decoder_budget);
}

} // namespace adalab

#endif
