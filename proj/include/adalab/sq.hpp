#ifndef ADALAB_SQ_HPP
#define ADALAB_SQ_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "adalab/rng.hpp"
#include "adalab/vec.hpp"

namespace adalab {

// ---------------------------------------------------------------------------
// Domains, distributions, queries, samples
// ---------------------------------------------------------------------------

// Finite domain of n points, indexed 0..n-1. A domain may be tagged as the
// product of two component domains (point (i,x) <-> flat index i*comp_b + x).
struct FiniteDomain {
    int n = 1;
    int comp_a = 0; // product components; 0 means "not a product"
    int comp_b = 0;

    explicit FiniteDomain(int size = 1) : n(size) {
        if (n < 1) throw std::invalid_argument("FiniteDomain: size must be >= 1");
    }
    static FiniteDomain product(int a, int b) {
        FiniteDomain d(a * b);
        d.comp_a = a;
        d.comp_b = b;
        return d;
    }
    bool is_product() const { return comp_a > 0; }
    int flat(int i, int x) const { return i * comp_b + x; }
};

class FiniteDistribution {
public:
    FiniteDistribution(FiniteDomain domain, Vec probs)
        : domain_(domain), p_(std::move(probs)) {
        if (static_cast<int>(p_.size()) != domain_.n)
            throw std::invalid_argument("FiniteDistribution: length mismatch");
        double sum = 0.0;
        for (const double v : p_) {
            if (v < 0.0) throw std::invalid_argument("FiniteDistribution: negative mass");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("FiniteDistribution: mass sums to " + std::to_string(sum));
    }

    static FiniteDistribution uniform(int n) {
        return FiniteDistribution(FiniteDomain(n), Vec(n, 1.0 / n));
    }

    static FiniteDistribution random(int n, Rng rng) {
        Vec p(n);
        double s = 0.0;
        for (auto& v : p) {
            v = -std::log(1.0 - rng.next_double());
            s += v;
        }
        for (auto& v : p) v /= s;
        // renormalize exactly to absorb rounding
        double s2 = 0.0;
        for (const double v : p) s2 += v;
        p.back() += 1.0 - s2;
        return FiniteDistribution(FiniteDomain(n), std::move(p));
    }

    const FiniteDomain& domain() const { return domain_; }
    int size() const { return domain_.n; }
    double p(int i) const { return p_.at(i); }
    const Vec& probs() const { return p_; }

    int draw(Rng& rng) const {
        double u = rng.next_double();
        for (int i = 0; i < domain_.n; ++i) {
            u -= p_[i];
            if (u < 0.0) return i;
        }
        return domain_.n - 1;
    }

private:
    FiniteDomain domain_;
    Vec p_;
};

// A statistical query: a table q: X -> [-1,1].
struct Query {
    Vec values;

    Query() = default;
    explicit Query(Vec v) : values(std::move(v)) { validate(); }

    void validate() const {
        for (const double x : values)
            if (!(x >= -1.0 && x <= 1.0))
                throw std::invalid_argument("Query: value outside [-1,1]");
    }
    int size() const { return static_cast<int>(values.size()); }
    double operator()(int x) const { return values.at(x); }

    static Query constant(int n, double c) { return Query(Vec(n, c)); }
    static Query random(int n, Rng& rng) {
        Vec v(n);
        for (auto& e : v) e = rng.uniform(-1.0, 1.0);
        return Query(std::move(v));
    }
};

// An i.i.d. multiset of domain indices, together with the seed that drew it.
struct Sample {
    std::vector<int> indices;
    std::uint64_t seed = 0;

    int size() const { return static_cast<int>(indices.size()); }
};

inline Sample draw_sample(const FiniteDistribution& D, int m, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("draw_sample: empty sample");
    Sample s;
    s.seed = seed;
    Rng rng = Rng(seed).split("sample");
    s.indices.reserve(m);
    for (int i = 0; i < m; ++i) s.indices.push_back(D.draw(rng));
    return s;
}

// ---------------------------------------------------------------------------
// Exact values
// ---------------------------------------------------------------------------

// Population mean q(D) = sum_i p(i) q(i).
inline double population_value(const Query& q, const FiniteDistribution& D) {
    if (q.size() != D.size())
        throw std::invalid_argument("population_value: domain mismatch");
    double s = 0.0;
    for (int i = 0; i < D.size(); ++i) s += D.p(i) * q(i);
    return s;
}

// Empirical mean (1/m) sum q(x_i).
inline double empirical_value(const Query& q, const Sample& S) {
    if (S.indices.empty()) throw std::invalid_argument("empirical_value: empty sample");
    double s = 0.0;
    for (const int x : S.indices) s += q(x);
    return s / static_cast<double>(S.size());
}

// ---------------------------------------------------------------------------
// Analysts and oracles
// ---------------------------------------------------------------------------

// The adaptive party. Stateful: next_queries is called once per round with
// the (clamped) answers to the previous round's batch; the first call
// receives an empty vector. A Boolean analyst must depend only on answer
// signs (testable by replay under sign-preserving perturbations).
class Analyst {
public:
    virtual ~Analyst() = default;
    virtual int horizon() const = 0;
    virtual int width() const { return 1; }
    virtual bool is_boolean() const { return false; }
    virtual std::vector<Query> next_queries(const std::vector<double>& prev_answers) = 0;
};

// The answering party. Initialized with the sample; answers one batch per
// round. Answers are expected in [-1,1]; out-of-range answers are clamped by
// the interaction loop and flagged in the transcript.
class SqOracle {
public:
    virtual ~SqOracle() = default;
    virtual void init(const FiniteDomain& domain, const Sample& sample, Rng rng) = 0;
    virtual std::vector<double> answer(int round, const std::vector<Query>& batch) = 0;
};

// ---------------------------------------------------------------------------
// Transcripts
// ---------------------------------------------------------------------------

struct RoundRecord {
    std::vector<Query> queries; // empty when query storage is disabled
    std::vector<double> answers;        // clamped to [-1,1]
    std::vector<double> raw_answers;    // as returned by the oracle
    std::vector<bool> clamped;
    std::vector<double> population;     // exact q(D)
    std::vector<double> empirical;      // exact (1/m) sum q(x_i)
};

struct Transcript {
    std::vector<RoundRecord> rounds;
    int m = 0;
    int T = 0;
    int k = 1;
    std::uint64_t seed = 0;
    bool queries_stored = true;
};

// Runs the T-round interaction: draw the sample, then alternate analyst
// query / oracle answer, recording exact population and empirical values per
// query. Analyst contract violations abort with the offending round named.
inline Transcript run_interaction(Analyst& analyst, SqOracle& oracle,
                                  const FiniteDistribution& D, int m, int T,
                                  std::uint64_t seed, bool store_queries = true) {
    if (T < 1) throw std::invalid_argument("run_interaction: horizon must be >= 1");
    Transcript tr;
    tr.m = m;
    tr.T = T;
    tr.k = analyst.width();
    tr.seed = seed;
    tr.queries_stored = store_queries;

    const Sample sample = draw_sample(D, m, seed);
    oracle.init(D.domain(), sample, Rng(seed).split("oracle"));

    std::vector<double> prev;
    for (int t = 1; t <= T; ++t) {
        std::vector<Query> batch;
        try {
            batch = analyst.next_queries(prev);
        } catch (const std::exception& e) {
            throw std::runtime_error("run_interaction: analyst failed at round " +
                                     std::to_string(t) + ": " + e.what());
        }
        if (batch.empty())
            throw std::runtime_error("run_interaction: empty batch at round " + std::to_string(t));
        for (const Query& q : batch) {
            if (q.size() != D.size())
                throw std::runtime_error("run_interaction: query domain mismatch at round " +
                                         std::to_string(t));
            try {
                q.validate();
            } catch (const std::exception& e) {
                throw std::runtime_error("run_interaction: analyst range violation at round " +
                                         std::to_string(t) + ": " + e.what());
            }
        }

        std::vector<double> raw = oracle.answer(t, batch);
        if (raw.size() != batch.size())
            throw std::runtime_error("run_interaction: oracle batch size mismatch at round " +
                                     std::to_string(t));

        RoundRecord rec;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if (!std::isfinite(raw[i]))
                throw std::runtime_error("run_interaction: non-finite answer at round " +
                                         std::to_string(t));
            const double a = std::clamp(raw[i], -1.0, 1.0);
            rec.raw_answers.push_back(raw[i]);
            rec.answers.push_back(a);
            rec.clamped.push_back(a != raw[i]);
            rec.population.push_back(population_value(batch[i], D));
            rec.empirical.push_back(empirical_value(batch[i], sample));
        }
        if (store_queries) rec.queries = batch;
        prev = rec.answers;
        tr.rounds.push_back(std::move(rec));
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Accuracy evaluators
// ---------------------------------------------------------------------------

struct AccuracyVerdict {
    bool pass = false;
    double fail_fraction = 0.0;
};

// (eps,gamma)-accuracy: fraction of queries with |a - q(D)| > eps must be at
// most gamma. Width-1 transcripts make "queries" and "rounds" coincide.
inline AccuracyVerdict eval_accuracy(const Transcript& tr, double eps, double gamma) {
    int total = 0, fail = 0;
    for (const RoundRecord& r : tr.rounds)
        for (std::size_t i = 0; i < r.answers.size(); ++i) {
            ++total;
            if (std::abs(r.answers[i] - r.population[i]) > eps) ++fail;
        }
    AccuracyVerdict v;
    v.fail_fraction = total ? static_cast<double>(fail) / total : 0.0;
    v.pass = v.fail_fraction <= gamma;
    return v;
}

// Post-hoc generalization: |empirical - population| <= eps for every query.
inline bool eval_posthoc(const Transcript& tr, double eps) {
    for (const RoundRecord& r : tr.rounds)
        for (std::size_t i = 0; i < r.empirical.size(); ++i)
            if (std::abs(r.empirical[i] - r.population[i]) > eps) return false;
    return true;
}

// Batch accuracy: at least (1-gamma_T) of the rounds must each have at least
// (1-gamma_k) of their queries within eps.
inline bool eval_batch_accuracy(const Transcript& tr, double eps, double gamma_T,
                                double gamma_k) {
    int good_rounds = 0;
    for (const RoundRecord& r : tr.rounds) {
        const int k = static_cast<int>(r.answers.size());
        int good = 0;
        for (int i = 0; i < k; ++i)
            if (std::abs(r.answers[i] - r.population[i]) <= eps) ++good;
        if (good >= (1.0 - gamma_k) * k - 1e-12) ++good_rounds;
    }
    const int T = static_cast<int>(tr.rounds.size());
    return good_rounds >= (1.0 - gamma_T) * T - 1e-12;
}

// ---------------------------------------------------------------------------
// Built-in oracles
// ---------------------------------------------------------------------------

// Answers every query with its exact population value. Baseline for attacks:
// accurate by definition, with zero per-round error.
class TruthfulOracle : public SqOracle {
public:
    explicit TruthfulOracle(FiniteDistribution D) : D_(std::move(D)) {}
    void init(const FiniteDomain&, const Sample&, Rng) override {}
    std::vector<double> answer(int, const std::vector<Query>& batch) override {
        std::vector<double> a;
        a.reserve(batch.size());
        for (const Query& q : batch) a.push_back(population_value(q, D_));
        return a;
    }

private:
    FiniteDistribution D_;
};

class EmpiricalMeanOracle : public SqOracle {
public:
    void init(const FiniteDomain&, const Sample& sample, Rng) override { sample_ = sample; }
    std::vector<double> answer(int, const std::vector<Query>& batch) override {
        std::vector<double> a;
        a.reserve(batch.size());
        for (const Query& q : batch) a.push_back(empirical_value(q, sample_));
        return a;
    }

private:
    Sample sample_;
};

// Empirical mean plus N(0, sigma^2) noise, clamped to [-1,1].
class GaussianNoiseOracle : public SqOracle {
public:
    explicit GaussianNoiseOracle(double sigma) : sigma_(sigma) {}
    void init(const FiniteDomain&, const Sample& sample, Rng rng) override {
        sample_ = sample;
        rng_ = rng.split("gaussian-oracle");
    }
    std::vector<double> answer(int, const std::vector<Query>& batch) override {
        std::vector<double> a;
        a.reserve(batch.size());
        for (const Query& q : batch)
            a.push_back(std::clamp(empirical_value(q, sample_) + sigma_ * rng_.normal(),
                                   -1.0, 1.0));
        return a;
    }

private:
    double sigma_;
    Sample sample_;
    Rng rng_{0};
};

// Splits the sample into T chunks and answers round t from chunk t alone,
// so each answer sees fresh data.
class SampleSplittingOracle : public SqOracle {
public:
    explicit SampleSplittingOracle(int T) : T_(T) {
        if (T < 1) throw std::invalid_argument("SampleSplittingOracle: T >= 1 required");
    }
    void init(const FiniteDomain&, const Sample& sample, Rng) override {
        sample_ = sample;
        if (sample_.size() < T_)
            throw std::invalid_argument("SampleSplittingOracle: sample smaller than T");
    }
    std::vector<double> answer(int round, const std::vector<Query>& batch) override {
        const int m = sample_.size();
        const int chunk = m / T_;
        const int lo = std::min(m - chunk, (round - 1) % T_ * chunk);
        Sample part;
        part.indices.assign(sample_.indices.begin() + lo,
                            sample_.indices.begin() + lo + chunk);
        std::vector<double> a;
        a.reserve(batch.size());
        for (const Query& q : batch) a.push_back(empirical_value(q, part));
        return a;
    }

private:
    int T_;
    Sample sample_;
};

// ---------------------------------------------------------------------------
// boolean_wrap
// ---------------------------------------------------------------------------

inline int bisection_probe_count(double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("boolean_wrap: eps must be in (0,1)");
    return static_cast<int>(std::ceil(std::log2(2.0 / eps)));
}

// Turns a value-query analyst into a Boolean analyst. Each inner value query
// is answered by bisection over thresholds b in [-1,1]; each probe is the
// sign query (q - b)/2, which keeps the probe range inside [-1,1]. After
// ceil(log2(2/eps)) probes the interval midpoint is fed to the inner analyst.
// If every sign answer satisfies the eps-sign contract, the reconstructed
// value is within 4*eps of the true one (2.5*eps, in fact).
class BooleanWrapAnalyst : public Analyst {
public:
    BooleanWrapAnalyst(std::unique_ptr<Analyst> inner, double eps)
        : inner_(std::move(inner)), probes_(bisection_probe_count(eps)) {
        if (inner_->width() != 1)
            throw std::invalid_argument("boolean_wrap: inner analyst must have width 1");
    }

    int horizon() const override { return inner_->horizon() * probes_; }
    bool is_boolean() const override { return true; }

    std::vector<Query> next_queries(const std::vector<double>& prev_answers) override {
        if (!started_) {
            started_ = true;
            begin_inner_query(inner_->next_queries({}));
        } else {
            const double s = prev_answers.at(0) >= 0.0 ? 1.0 : -1.0;
            if (s > 0.0)
                lo_ = threshold();
            else
                hi_ = threshold();
            ++done_probes_;
            if (done_probes_ == probes_) {
                const double estimate = 0.5 * (lo_ + hi_);
                begin_inner_query(inner_->next_queries({estimate}));
            }
        }
        Vec probe(q_.values.size());
        const double b = threshold();
        for (std::size_t i = 0; i < probe.size(); ++i) probe[i] = (q_.values[i] - b) / 2.0;
        return {Query(std::move(probe))};
    }

private:
    double threshold() const { return 0.5 * (lo_ + hi_); }

    void begin_inner_query(std::vector<Query> batch) {
        q_ = std::move(batch.at(0));
        lo_ = -1.0;
        hi_ = 1.0;
        done_probes_ = 0;
    }

    std::unique_ptr<Analyst> inner_;
    int probes_;
    bool started_ = false;
    Query q_;
    double lo_ = -1.0, hi_ = 1.0;
    int done_probes_ = 0;
};

inline std::unique_ptr<Analyst> boolean_wrap(std::unique_ptr<Analyst> inner, double eps) {
    return std::make_unique<BooleanWrapAnalyst>(std::move(inner), eps);
}

// Fixed script of queries; handy for tests and baselines.
class ScriptedAnalyst : public Analyst {
public:
    explicit ScriptedAnalyst(std::vector<Query> queries) : queries_(std::move(queries)) {}
    int horizon() const override { return static_cast<int>(queries_.size()); }
    std::vector<Query> next_queries(const std::vector<double>&) override {
        return {queries_.at(next_++)};
    }

private:
    std::vector<Query> queries_;
    std::size_t next_ = 0;
};

} // namespace adalab

#endif
