#ifndef ADALAB_HARNESS_HPP
#define ADALAB_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "adalab/attacks.hpp"
#include "adalab/checks.hpp"
#include "adalab/convex.hpp"
#include "adalab/gdsim.hpp"
#include "adalab/rng.hpp"
#include "adalab/sq.hpp"

namespace adalab {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    std::string experiment = "simulate";
    std::string oracle = "truthful"; // truthful | noisy | empirical
    std::string noise = "sphere";    // sphere | align | anti | none

    int m = 16;
    int T = 3;
    int k = 8;
    int n = 8;      // domain size
    int d = 0;      // hiding dimension; 0 = identity hiding at sim dimension
    double eps = 1.0 / 400.0;
    double eta = 1.0 / 800.0;
    double gamma = 0.25;
    double gamma_T = 0.1;
    double gamma_k = 0.1;
    double a = 1.0 / 16.0;
    double c = 1.0 / 8.0;
    double sigma = 0.05;
    double pad_c = kPadAttackDefaultC;
    int pad_horizon_cap = 1000000;

    int bias_m = 12;
    int bias_d = 65536;
    long mc_n = 100000;
    long decoder_budget = 20000;

    int trials = 20;
    std::uint64_t seed = 1;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["experiment"] = experiment;
        j["oracle"] = oracle;
        j["noise"] = noise;
        j["m"] = m;
        j["T"] = T;
        j["k"] = k;
        j["n"] = n;
        j["d"] = d;
        j["eps"] = eps;
        j["eta"] = eta;
        j["gamma"] = gamma;
        j["gamma_T"] = gamma_T;
        j["gamma_k"] = gamma_k;
        j["a"] = a;
        j["c"] = c;
        j["sigma"] = sigma;
        j["pad_c"] = pad_c;
        j["pad_horizon_cap"] = pad_horizon_cap;
        j["bias_m"] = bias_m;
        j["bias_d"] = bias_d;
        j["mc_n"] = mc_n;
        j["decoder_budget"] = decoder_budget;
        j["trials"] = trials;
        j["seed"] = seed;
        return j;
    }

    static ExperimentConfig from_json(const nlohmann::json& j) {
        ExperimentConfig c0;
        c0.experiment = j.value("experiment", c0.experiment);
        c0.oracle = j.value("oracle", c0.oracle);
        c0.noise = j.value("noise", c0.noise);
        c0.m = j.value("m", c0.m);
        c0.T = j.value("T", c0.T);
        c0.k = j.value("k", c0.k);
        c0.n = j.value("n", c0.n);
        c0.d = j.value("d", c0.d);
        c0.eps = j.value("eps", c0.eps);
        c0.eta = j.value("eta", c0.eta);
        c0.gamma = j.value("gamma", c0.gamma);
        c0.gamma_T = j.value("gamma_T", c0.gamma_T);
        c0.gamma_k = j.value("gamma_k", c0.gamma_k);
        c0.a = j.value("a", c0.a);
        c0.c = j.value("c", c0.c);
        c0.sigma = j.value("sigma", c0.sigma);
        c0.pad_c = j.value("pad_c", c0.pad_c);
        c0.pad_horizon_cap = j.value("pad_horizon_cap", c0.pad_horizon_cap);
        c0.bias_m = j.value("bias_m", c0.bias_m);
        c0.bias_d = j.value("bias_d", c0.bias_d);
        c0.mc_n = j.value("mc_n", c0.mc_n);
        c0.decoder_budget = j.value("decoder_budget", c0.decoder_budget);
        c0.trials = j.value("trials", c0.trials);
        c0.seed = j.value("seed", c0.seed);
        return c0;
    }

    std::string hash() const {
        std::ostringstream os;
        os << std::hex << Rng::fnv1a(to_json().dump());
        return os.str();
    }

    // Rejects parameter sets violating a documented constraint, naming it.
    void validate() const {
        auto reject = [](const std::string& name) {
            throw std::invalid_argument("config: constraint violated: " + name);
        };
        if (trials < 1) reject("trials >= 1");
        if (n < 1) reject("n >= 1");
        if (m < 1) reject("m >= 1");
        if (T < 1) reject("T >= 1");
        if (!(eps > 0.0 && eps < 1.0)) reject("eps in (0,1)");
        if (!(eta > 0.0)) reject("eta > 0");
        if (oracle != "truthful" && oracle != "noisy" && oracle != "empirical")
            reject("oracle in {truthful, noisy, empirical}");

        if (experiment == "simulate" || experiment == "reduce") {
            if (!(a > 0.0 && a <= 1.0 / 16.0)) reject("0 < a <= 1/16");
            if (!(c > 0.0 && c < 3.0 * a - 12.0 * eps)) reject("0 < c < 3a - 12*eps");
            if (!(T < 1.0 / (4.0 * eta))) reject("T < 1/(4*eta)");
            if (!(T < 1.0 / (24.0 * eps))) reject("T < 1/(24*eps)");
            if (!(eta < std::sqrt(eps / 48.0))) reject("eta < sqrt(eps/48)");
            if (d != 0 && d < sim_dimension(T)) reject("d >= 4*2^T - 3 (or d = 0)");
        }
        if (experiment == "attack") {
            if (m < 2) reject("m >= 2 (pad attack)");
            if (!(gamma < 0.5)) reject("gamma < 1/2 (pad attack)");
            if (pad_attack_horizon(m, gamma, pad_c) > pad_horizon_cap)
                reject("pad horizon <= cap (lower m)");
        }
        if (experiment == "reduce" && k < 1) reject("k >= 1");
        if (experiment == "bias-demo") {
            if (bias_m < 1) reject("bias_m >= 1");
            if (bias_d < 1) reject("bias_d >= 1");
            if (mc_n < 1) reject("mc_n >= 1");
        }
    }
};

// ---------------------------------------------------------------------------
// Result tables
// ---------------------------------------------------------------------------

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<Vec> rows;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version = "1.0";

    void add_row(Vec row) {
        if (row.size() != columns.size())
            throw std::invalid_argument("ResultTable: row width mismatch");
        rows.push_back(std::move(row));
    }

    void write_csv(std::ostream& os) const {
        os << "# config_hash=" << config_hash << " seed=" << seed
           << " version=" << version << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            os << (i ? "," : "") << columns[i];
        os << "\n";
        os << std::setprecision(17);
        for (const Vec& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << "\n";
        }
    }
};

struct ExperimentOutcome {
    ResultTable table;
    bool accept = true;
    std::string message;
};

namespace detail {

inline std::uint64_t trial_seed(const ExperimentConfig& cfg, const char* label, int t) {
    return Rng(cfg.seed).split(label).split(static_cast<std::uint64_t>(t)).next_u64();
}

inline std::unique_ptr<FoOracle> make_fo_oracle(const std::string& kind,
                                                const FiniteDistribution& D, double eps) {
    if (kind == "truthful") return std::make_unique<ExactPopulationFoOracle>(D);
    if (kind == "noisy")
        return std::make_unique<NoisyFoOracle>(std::make_unique<ExactPopulationFoOracle>(D),
                                               eps, NoiseMode::Sphere);
    if (kind == "empirical") return std::make_unique<EmpiricalMeanFoOracle>();
    throw std::invalid_argument("unknown oracle kind: " + kind);
}

// Non-adaptive batch analyst asking k fresh random queries per round.
class RandomBatchAnalyst : public Analyst {
public:
    RandomBatchAnalyst(int k, int T, int n, Rng rng) : k_(k), T_(T), n_(n), rng_(rng) {}
    int horizon() const override { return T_; }
    int width() const override { return k_; }
    std::vector<Query> next_queries(const std::vector<double>&) override {
        std::vector<Query> batch;
        batch.reserve(k_);
        for (int i = 0; i < k_; ++i) batch.push_back(Query::random(n_, rng_));
        return batch;
    }

private:
    int k_, T_, n_;
    Rng rng_;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Experiment runners (shared by the CLI and the acceptance suite)
// ---------------------------------------------------------------------------

// GD simulation end-to-end: random trees and distributions, chosen oracle,
// contract verdicts per round. Accepts iff every verdict passes and (for the
// truthful oracle) every confidently-signed answer matches sign(q_t(D)).
inline ExperimentOutcome run_simulate_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentOutcome out;
    out.table.columns = {"trial", "t0",        "premise",   "table_ok",
                         "answer_checked", "answer_ok", "pass"};
    out.table.config_hash = cfg.hash();
    out.table.seed = cfg.seed;

    int sign_mismatches = 0, table_fails = 0, answer_fails = 0;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t s = detail::trial_seed(cfg, "simulate", trial);
        Rng rng(s);
        const BooleanAnalystTree tree =
            BooleanAnalystTree::random(cfg.T, cfg.n, rng.split("tree"));
        const FiniteDistribution D = FiniteDistribution::random(cfg.n, rng.split("dist"));
        const SimFunction f = build_sim_function(tree, cfg.eta, cfg.a, cfg.c, s, cfg.eps);
        const HidingEmbedding sigma =
            cfg.d == 0 ? HidingEmbedding::identity(f.dim())
                       : HidingEmbedding::random(cfg.d, rng.split("hiding"));

        auto oracle = detail::make_fo_oracle(cfg.oracle, D, cfg.eps);
        const SimTranscript tr = run_simulation(f, *oracle, D, cfg.m, s, sigma);
        const auto verdicts =
            check_sim_accuracy(tr, f, D, sigma, cfg.eps, 99.0 * cfg.eps);
        for (const SimVerdict& v : verdicts) {
            out.table.add_row({double(trial), double(v.t0), double(v.premise),
                               double(v.table_ok), double(v.answer_checked),
                               double(v.answer_ok), double(v.pass)});
            out.accept = out.accept && v.pass;
            if (v.premise && !v.table_ok) ++table_fails;
            if (v.answer_checked && !v.answer_ok) ++answer_fails;
        }
        if (cfg.oracle == "truthful")
            for (std::size_t i = 0; i < tr.answers.size(); ++i) {
                const double qD = tr.path_popvals[i];
                if (std::abs(qD) > 99.0 * cfg.eps &&
                    tr.answers[i] != (qD > 0.0 ? 1 : -1))
                    ++sign_mismatches;
            }
    }
    if (sign_mismatches > 0) {
        out.accept = false;
        out.message = std::to_string(sign_mismatches) + " confident answers off-sign";
    } else if (!out.accept) {
        out.message = "table clause failed in " + std::to_string(table_fails) +
                      " rounds, answer clause in " + std::to_string(answer_fails) +
                      " (answers all matched population signs)";
    }
    return out;
}

// Pad attack vs the chosen oracle: per-trial fractions of rounds failing
// the 0.01 accuracy and post-hoc margins.
inline ExperimentOutcome run_attack_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentOutcome out;
    out.table.columns = {"seed", "m", "T", "fail_fraction", "posthoc_fail_fraction"};
    out.table.config_hash = cfg.hash();
    out.table.seed = cfg.seed;

    int forced = 0;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t s = detail::trial_seed(cfg, "attack", trial);
        auto analyst = pad_attack(cfg.m, cfg.gamma, s, cfg.pad_c, cfg.pad_horizon_cap);
        const int N = analyst->horizon();
        const FiniteDistribution D = analyst->distribution();

        std::unique_ptr<SqOracle> oracle;
        if (cfg.oracle == "truthful")
            oracle = std::make_unique<TruthfulOracle>(D);
        else if (cfg.oracle == "empirical")
            oracle = std::make_unique<EmpiricalMeanOracle>();
        else
            oracle = std::make_unique<GaussianNoiseOracle>(cfg.sigma);

        const Transcript tr =
            run_interaction(*analyst, *oracle, D, cfg.m, N, s, /*store_queries=*/false);
        int fail = 0, ph_fail = 0;
        for (const RoundRecord& r : tr.rounds) {
            if (std::abs(r.answers[0] - r.population[0]) > 0.01) ++fail;
            if (std::abs(r.empirical[0] - r.population[0]) > 0.01) ++ph_fail;
        }
        const double ff = double(fail) / N, pf = double(ph_fail) / N;
        out.table.add_row({double(s), double(cfg.m), double(N), ff, pf});
        if (ff > 0.25) ++forced;
        if (cfg.oracle == "truthful" && ff != 0.0) out.accept = false;
    }
    if (cfg.oracle == "empirical" && forced * 2 < cfg.trials) {
        out.accept = false;
        out.message = "attack forced error in only " + std::to_string(forced) + "/" +
                      std::to_string(cfg.trials) + " trials";
    }
    return out;
}

// Quadratic-encoding reduction: exact gradients must decode answers exactly;
// eps-noisy gradients within per-round RMS 2*eps; the simulation-backed
// statistical-query oracle must answer a tree analyst with correct signs.
inline ExperimentOutcome run_reduce_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentOutcome out;
    out.table.columns = {"trial", "exact_max_err", "noisy_max_rms", "foa_sign_ok"};
    out.table.config_hash = cfg.hash();
    out.table.seed = cfg.seed;

    for (int trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t s = detail::trial_seed(cfg, "reduce", trial);
        Rng rng(s);
        const FiniteDistribution D = FiniteDistribution::random(cfg.n, rng.split("dist"));

        // exact decode
        double exact_max = 0.0;
        {
            detail::RandomBatchAnalyst analyst(cfg.k, cfg.T, cfg.n, rng.split("queries"));
            SqFromFoOracle oracle(std::make_unique<ExactPopulationFoOracle>(D), cfg.k,
                                  cfg.T);
            const Transcript tr = run_interaction(analyst, oracle, D, cfg.m, cfg.T, s);
            for (const RoundRecord& r : tr.rounds)
                for (std::size_t i = 0; i < r.answers.size(); ++i)
                    exact_max =
                        std::max(exact_max, std::abs(r.answers[i] - r.population[i]));
        }

        // noisy decode
        double noisy_max_rms = 0.0;
        {
            detail::RandomBatchAnalyst analyst(cfg.k, cfg.T, cfg.n, rng.split("queries"));
            SqFromFoOracle oracle(
                std::make_unique<NoisyFoOracle>(std::make_unique<ExactPopulationFoOracle>(D),
                                                cfg.eps, NoiseMode::Sphere),
                cfg.k, cfg.T);
            const Transcript tr = run_interaction(analyst, oracle, D, cfg.m, cfg.T, s);
            for (const RoundRecord& r : tr.rounds) {
                double se = 0.0;
                for (std::size_t i = 0; i < r.answers.size(); ++i)
                    se += (r.answers[i] - r.population[i]) * (r.answers[i] - r.population[i]);
                noisy_max_rms = std::max(noisy_max_rms, std::sqrt(se / r.answers.size()));
            }
        }

        // simulation-backed oracle vs a tree analyst
        bool foa_ok = true;
        {
            const int Tsim = std::min(cfg.T, 4);
            const BooleanAnalystTree tree =
                BooleanAnalystTree::random(Tsim, cfg.n, rng.split("tree"));
            TreeAnalyst analyst(tree);
            GdSimParams p;
            p.eta = cfg.eta;
            p.a = cfg.a;
            p.c = cfg.c;
            p.eps = cfg.eps;
            auto oracle = sq_oracle_from_foa(
                tree, std::make_unique<ExactPopulationFoOracle>(D), p,
                HidingEmbedding::identity(sim_dimension(Tsim)), s);
            const Transcript tr = run_interaction(analyst, *oracle, D, cfg.m, Tsim, s);
            for (const RoundRecord& r : tr.rounds)
                if (std::abs(r.population[0]) > 99.0 * cfg.eps &&
                    (r.answers[0] > 0.0) != (r.population[0] > 0.0))
                    foa_ok = false;
        }

        out.table.add_row({double(trial), exact_max, noisy_max_rms, double(foa_ok)});
        out.accept = out.accept && exact_max <= 1e-9 &&
                     noisy_max_rms <= 2.0 * cfg.eps + 1e-12 && foa_ok;
    }
    return out;
}

// Two-step bias demonstration across seeds.
inline ExperimentOutcome run_bias_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentOutcome out;
    out.table.columns = {"seed", "gap", "all_zero_coords", "flagged", "sign_ok"};
    out.table.config_hash = cfg.hash();
    out.table.seed = cfg.seed;

    const double gamma = 1.0 / (2.0 * std::sqrt(double(cfg.bias_d)));
    int big_gap = 0;
    bool structure_ok = true;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t s = detail::trial_seed(cfg, "bias", trial);
        const BiasDemoResult r = amir_bias_demo(cfg.bias_m, cfg.bias_d, gamma, cfg.mc_n, s);
        out.table.add_row({double(s), r.gap, double(r.all_zero_coords), double(r.flagged),
                           double(r.w2_sign_property)});
        if (r.gap >= 0.5) ++big_gap;
        structure_ok = structure_ok && !r.flagged && r.w2_sign_property;
    }
    out.accept = structure_ok && 2 * big_gap >= cfg.trials;
    if (!out.accept)
        out.message = "gap >= 0.5 in " + std::to_string(big_gap) + "/" +
                      std::to_string(cfg.trials) + " seeds" +
                      (structure_ok ? "" : "; structural property failed");
    return out;
}

// Suboptimality of averaged projected GD with eps-perturbed exact gradients
// against the 10*(eta + 1/(eta T) + eps) envelope, over a parameter grid.
inline ExperimentOutcome run_gd_rates_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentOutcome out;
    out.table.columns = {"eta", "T", "eps", "noise_mode", "seed", "suboptimality", "bound"};
    out.table.config_hash = cfg.hash();
    out.table.seed = cfg.seed;

    const double etas[] = {1e-3, 1e-2, 1e-1};
    const int Ts[] = {100, 1000, 10000};
    const double epss[] = {0.0, 1e-2};
    for (const double eta : etas)
        for (const int T : Ts)
            for (const double eps : epss) {
                const std::vector<NoiseMode> modes =
                    eps == 0.0 ? std::vector<NoiseMode>{NoiseMode::None}
                               : std::vector<NoiseMode>{NoiseMode::Sphere, NoiseMode::Align,
                                                        NoiseMode::AntiAlign};
                const int seeds = eps == 0.0 ? 1 : cfg.trials;
                for (const NoiseMode mode : modes)
                    for (int trial = 0; trial < seeds; ++trial) {
                        const std::uint64_t s = detail::trial_seed(cfg, "rates", trial);
                        const double sub = gd_rate_experiment(eps, eta, T, mode, s);
                        const double bound = 10.0 * (eta + 1.0 / (eta * T) + eps);
                        out.table.add_row({eta, double(T), eps, double(int(mode)),
                                           double(s), sub, bound});
                        if (!(sub <= bound)) out.accept = false;
                    }
            }
    return out;
}

// Property suite: gradient, convexity, and Lipschitz checks on every
// function family, plus the simulation floor.
inline ExperimentOutcome run_verify_experiment(const ExperimentConfig& cfg) {
    ExperimentOutcome out;
    out.table.columns = {"function", "check", "pass"};
    out.table.config_hash = cfg.hash();
    out.table.seed = cfg.seed;
    Rng rng(cfg.seed);

    struct Entry {
        std::unique_ptr<StochasticConvexFunction> f;
        double margin;
        double floor; // NaN = no floor check
    };
    std::vector<Entry> entries;
    entries.push_back({std::make_unique<QuadraticTestbed>(), 1e-6,
                       std::numeric_limits<double>::quiet_NaN()});
    {
        std::vector<Query> qs;
        Rng qr = rng.split("qq");
        for (int j = 0; j < 8; ++j) qs.push_back(Query::random(cfg.n, qr));
        entries.push_back({std::make_unique<QueryQuadratic>(std::move(qs), cfg.n), 1e-6,
                           std::numeric_limits<double>::quiet_NaN()});
    }
    {
        Rng fr = rng.split("fixture");
        entries.push_back({std::make_unique<OverviewFixture>(
                               Query::random(cfg.n, fr), Query::random(cfg.n, fr),
                               Query::random(cfg.n, fr), cfg.eta),
                           1e-6, std::numeric_limits<double>::quiet_NaN()});
    }
    {
        Rng ar = rng.split("amir");
        std::vector<std::vector<std::uint8_t>> pts(6, std::vector<std::uint8_t>(12));
        for (auto& p : pts)
            for (auto& b : p) b = static_cast<std::uint8_t>(ar.coin());
        // margin 1e-2: near the square-root kink the curvature blows up and
        // finite differences are meaningless at any step size
        entries.push_back({std::make_unique<AmirFunction>(std::move(pts), 4,
                                                          1.0 / (2.0 * std::sqrt(12.0))),
                           1e-2, std::numeric_limits<double>::quiet_NaN()});
    }
    {
        const BooleanAnalystTree tree =
            BooleanAnalystTree::random(3, cfg.n, rng.split("tree"));
        auto f = std::make_unique<SimFunction>(tree, cfg.eta, cfg.a, cfg.c, cfg.eps,
                                               cfg.seed);
        const double floor = f->floor_value();
        entries.push_back({std::move(f), 1e-6, floor});
    }

    int fid = 0;
    for (const Entry& e : entries) {
        const CheckReport g = check_gradients(*e.f, rng.split("grad"), 200, 1e-5, e.margin);
        const CheckReport cv = check_convexity(*e.f, rng.split("convex"), 10000, 1e-9);
        const CheckReport l = check_lipschitz(*e.f, rng.split("lip"), 1000, 1e-9);
        out.table.add_row({double(fid), 0.0, double(g.pass)});
        out.table.add_row({double(fid), 1.0, double(cv.pass)});
        out.table.add_row({double(fid), 2.0, double(l.pass)});
        out.accept = out.accept && g.pass && cv.pass && l.pass;
        if (!g.pass) out.message += g.detail + "; ";
        if (!cv.pass) out.message += cv.detail + "; ";
        if (!l.pass) out.message += l.detail + "; ";
        if (!std::isnan(e.floor)) {
            const CheckReport fl = check_floor(*e.f, e.floor, rng.split("floor"), 10000);
            out.table.add_row({double(fid), 3.0, double(fl.pass)});
            out.accept = out.accept && fl.pass;
            if (!fl.pass) out.message += fl.detail + "; ";
        }
        ++fid;
    }
    return out;
}

inline ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
    if (cfg.experiment == "simulate") return run_simulate_experiment(cfg);
    if (cfg.experiment == "attack") return run_attack_experiment(cfg);
    if (cfg.experiment == "reduce") return run_reduce_experiment(cfg);
    if (cfg.experiment == "bias-demo") return run_bias_experiment(cfg);
    if (cfg.experiment == "gd-rates") return run_gd_rates_experiment(cfg);
    if (cfg.experiment == "verify") return run_verify_experiment(cfg);
    throw std::invalid_argument("unknown experiment: " + cfg.experiment);
}

} // namespace adalab

#endif
