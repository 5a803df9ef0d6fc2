// Command-line experiment runner. Every subcommand is a pure function of its
// configuration and seed; rerunning with the same inputs is byte-identical.
// Exit code 0 only if the experiment's acceptance predicate passed.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "adalab/harness.hpp"
#include "adalab/serialize.hpp"

namespace fs = std::filesystem;
using namespace adalab;

int main(int argc, char** argv) {
    CLI::App app{"adaptive-analysis simulation laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    ExperimentConfig cfg;

    // subcommands share the full option set; irrelevant knobs are ignored
    const std::vector<std::pair<std::string, std::string>> subs = {
        {"simulate", "run the GD simulation end-to-end"},
        {"attack", "run the pad attack against a chosen oracle"},
        {"reduce", "run the quadratic-encoding and simulation-backed reductions"},
        {"bias-demo", "run the two-step full-batch GD bias demonstration"},
        {"gd-rates", "sweep GD suboptimality against the rate envelope"},
        {"verify", "run the property-check suite"},
    };
    for (const auto& [name, desc] : subs) {
        CLI::App* sc = app.add_subcommand(name, desc);
        sc->add_option("--config", config_path, "JSON config file");
        sc->add_option("--out", out_dir, "output directory for CSV tables");
        sc->add_option("--seed", cfg.seed, "master seed");
        sc->add_option("--trials", cfg.trials, "number of seeded trials");
        sc->add_option("--m", cfg.m, "sample size");
        sc->add_option("--T", cfg.T, "horizon / tree depth");
        sc->add_option("--k", cfg.k, "batch width");
        sc->add_option("--n", cfg.n, "domain size");
        sc->add_option("--d", cfg.d, "hiding dimension (0 = identity)");
        sc->add_option("--eps", cfg.eps, "accuracy parameter");
        sc->add_option("--eta", cfg.eta, "learning rate");
        sc->add_option("--gamma", cfg.gamma, "failure fraction");
        sc->add_option("--a", cfg.a, "h1 coefficient scale");
        sc->add_option("--c", cfg.c, "floor scale");
        sc->add_option("--sigma", cfg.sigma, "Gaussian oracle noise");
        sc->add_option("--pad-c", cfg.pad_c, "pad attack horizon constant");
        sc->add_option("--oracle", cfg.oracle, "truthful | noisy | empirical");
        sc->add_option("--noise", cfg.noise, "sphere | align | anti | none");
        sc->add_option("--bias-m", cfg.bias_m, "bias demo sample size");
        sc->add_option("--bias-d", cfg.bias_d, "bias demo dimension");
        sc->add_option("--mc-n", cfg.mc_n, "Monte-Carlo draws for population gradients");
        sc->add_option("--decoder-budget", cfg.decoder_budget,
                       "reconstruction decoder iteration budget");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().at(0)->get_name();

    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw std::runtime_error("cannot open config: " + config_path);
            nlohmann::json j;
            in >> j;
            // precedence: start from the file, re-apply explicit flags
            ExperimentConfig base = ExperimentConfig::from_json(j);
            const CLI::App* sc = app.get_subcommands().at(0);
            auto touched = [&](const std::string& flag) {
                return sc->count(flag) > 0;
            };
            if (touched("--seed")) base.seed = cfg.seed;
            if (touched("--trials")) base.trials = cfg.trials;
            if (touched("--m")) base.m = cfg.m;
            if (touched("--T")) base.T = cfg.T;
            if (touched("--k")) base.k = cfg.k;
            if (touched("--n")) base.n = cfg.n;
            if (touched("--d")) base.d = cfg.d;
            if (touched("--eps")) base.eps = cfg.eps;
            if (touched("--eta")) base.eta = cfg.eta;
            if (touched("--gamma")) base.gamma = cfg.gamma;
            if (touched("--a")) base.a = cfg.a;
            if (touched("--c")) base.c = cfg.c;
            if (touched("--sigma")) base.sigma = cfg.sigma;
            if (touched("--pad-c")) base.pad_c = cfg.pad_c;
            if (touched("--oracle")) base.oracle = cfg.oracle;
            if (touched("--noise")) base.noise = cfg.noise;
            if (touched("--bias-m")) base.bias_m = cfg.bias_m;
            if (touched("--bias-d")) base.bias_d = cfg.bias_d;
            if (touched("--mc-n")) base.mc_n = cfg.mc_n;
            if (touched("--decoder-budget")) base.decoder_budget = cfg.decoder_budget;
            cfg = base;
        }
        cfg.experiment = sub;
        cfg.validate();

        const ExperimentOutcome outcome = run_experiment(cfg);

        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            std::ofstream csv(fs::path(out_dir) / (sub + ".csv"));
            outcome.table.write_csv(csv);
            std::ofstream jcfg(fs::path(out_dir) / (sub + ".config.json"));
            jcfg << cfg.to_json().dump(2) << "\n";
        } else {
            outcome.table.write_csv(std::cout);
        }

        std::cerr << sub << ": " << (outcome.accept ? "ACCEPT" : "REJECT");
        if (!outcome.message.empty()) std::cerr << " (" << outcome.message << ")";
        std::cerr << "\n";
        return outcome.accept ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
