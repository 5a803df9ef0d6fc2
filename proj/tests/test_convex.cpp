#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <vector>

#include "adalab/checks.hpp"
#include "adalab/convex.hpp"

using namespace adalab;

TEST_CASE("quadratic testbed has the documented optimum") {
    QuadraticTestbed f;
    const FiniteDistribution D = FiniteDistribution::uniform(2);

    const Vec w = {0.1, -0.2, 0.3};
    const FirstOrderInfo info = f.eval(w, 0);
    REQUIRE(info.gradient[0] == Catch::Approx(0.1 - 0.5));
    REQUIRE(info.gradient[1] == Catch::Approx(-0.2 - 0.3));
    REQUIRE(info.value == Catch::Approx(0.5 * dot(info.gradient, info.gradient)));

    REQUIRE(population_value(f, D, f.minimizer()) == Catch::Approx(f.population_optimum()));
    REQUIRE(norm2(population_gradient(f, D, f.minimizer())) < 1e-15);
}

TEST_CASE("population and empirical gradients are weighted piece averages") {
    QuadraticTestbed f;
    const FiniteDistribution D(FiniteDomain(2), {0.25, 0.75});
    const Vec w = {0.0, 0.0, 0.0};
    const Vec g = population_gradient(f, D, w);
    REQUIRE(g[0] == Catch::Approx(-0.5));
    REQUIRE(g[1] == Catch::Approx(0.25 * (-0.3) + 0.75 * 0.3));

    Sample s;
    s.indices = {0, 0, 1};
    const Vec ge = empirical_gradient(f, s, w);
    REQUIRE(ge[1] == Catch::Approx((2.0 * (-0.3) + 0.3) / 3.0));
}

TEST_CASE("gd_step descends and projects onto the unit ball") {
    const Vec w = {0.9, 0.0};
    const Vec g = {-1.0, 0.0};
    const Vec next = gd_step(w, g, 0.5);
    REQUIRE(norm2(next) == Catch::Approx(1.0)); // 1.4 projected back
    REQUIRE(next[0] == Catch::Approx(1.0));
    REQUIRE_THROWS(gd_step(w, g, 0.0));
}

TEST_CASE("run_gd with exact gradients converges on the testbed") {
    QuadraticTestbed f;
    const FiniteDistribution D = FiniteDistribution::uniform(2);
    ExactPopulationFoOracle oracle(D);
    const GdRun run = run_gd(f, oracle, D, 4, 0.1, 200, 3);

    REQUIRE(run.trajectory.size() == 200);
    REQUIRE(run.estimates.size() == 200);
    REQUIRE(run.trajectory[0] == Vec{0.0, 0.0, 0.0});
    REQUIRE(dist2(run.trajectory.back(), f.minimizer()) < 1e-6);
    REQUIRE(eval_fo_accuracy(run, 1e-12, 0.0).pass);

    // manual replay of the first step
    const Vec g1 = population_gradient(f, D, run.trajectory[0]);
    REQUIRE(run.trajectory[1] == gd_step(run.trajectory[0], g1, 0.1));
}

TEST_CASE("noisy oracle perturbs by exactly eps in the requested mode") {
    const FiniteDistribution D = FiniteDistribution::uniform(2);
    QuadraticTestbed f;
    const Vec w = {0.2, 0.1, 0.0};
    FoTable table(2);
    for (int x = 0; x < 2; ++x) table[x] = f.eval(w, x);
    const Vec exact = table_population_gradient(table, D);

    for (const NoiseMode mode : {NoiseMode::Sphere, NoiseMode::Align, NoiseMode::AntiAlign}) {
        NoisyFoOracle oracle(std::make_unique<ExactPopulationFoOracle>(D), 0.01, mode);
        oracle.init(D.domain(), Sample{{0, 1}, 0}, Rng(5));
        const Vec g = oracle.estimate(1, w, table);
        REQUIRE(dist2(g, exact) == Catch::Approx(0.01).epsilon(1e-9));
        if (mode == NoiseMode::Align) REQUIRE(norm2(g) > norm2(exact));
        if (mode == NoiseMode::AntiAlign) REQUIRE(norm2(g) < norm2(exact));
    }

    NoisyFoOracle none(std::make_unique<ExactPopulationFoOracle>(D), 0.01, NoiseMode::None);
    none.init(D.domain(), Sample{{0, 1}, 0}, Rng(5));
    REQUIRE(dist2(none.estimate(1, w, table), exact) == 0.0);

    REQUIRE(noise_mode_from_string("sphere") == NoiseMode::Sphere);
    REQUIRE_THROWS(noise_mode_from_string("bogus"));
}

TEST_CASE("rate experiment stays under its envelope on one grid cell") {
    const double eta = 1e-2;
    const int T = 1000;
    const double eps = 1e-2;
    const double sub = gd_rate_experiment(eps, eta, T, NoiseMode::AntiAlign, 17);
    REQUIRE(sub >= -1e-12);
    REQUIRE(sub <= 10.0 * (eta + 1.0 / (eta * T) + eps));
}

TEST_CASE("query quadratic exposes query means through its gradient") {
    Rng rng(31);
    const int n = 5;
    std::vector<Query> qs;
    for (int j = 0; j < 3; ++j) qs.push_back(Query::random(n, rng));
    qs.push_back(Query()); // unused coordinate
    const QueryQuadratic f(qs, n);
    REQUIRE(f.dim() == 4);

    const Vec w = {0.5, -0.25, 1.0, 0.7};
    for (int x = 0; x < n; ++x) {
        const FirstOrderInfo info = f.eval(w, x);
        for (int j = 0; j < 3; ++j)
            REQUIRE(info.gradient[j] ==
                    Catch::Approx(((qs[j](x) + 1.0) / 2.0) * w[j]).margin(1e-15));
        REQUIRE(info.gradient[3] == 0.0);
    }

    // population gradient coordinate = ((q(D)+1)/2) w_j
    const FiniteDistribution D = FiniteDistribution::random(n, rng.split("dist"));
    const Vec g = population_gradient(f, D, w);
    for (int j = 0; j < 3; ++j)
        REQUIRE(g[j] == Catch::Approx(((population_value(qs[j], D) + 1.0) / 2.0) * w[j]));
}

TEST_CASE("statistical queries decode exactly from exact gradients") {
    const int n = 6, k = 4, T = 5;
    Rng rng(32);
    const FiniteDistribution D = FiniteDistribution::random(n, rng.split("dist"));
    SqFromFoOracle oracle(std::make_unique<ExactPopulationFoOracle>(D), k, T);
    oracle.init(D.domain(), Sample{{0, 1, 2}, 0}, Rng(1));

    for (int t = 1; t <= T; ++t) {
        std::vector<Query> batch;
        for (int i = 0; i < k; ++i) batch.push_back(Query::random(n, rng));
        const std::vector<double> answers = oracle.answer(t, batch);
        for (int i = 0; i < k; ++i)
            REQUIRE(answers[i] ==
                    Catch::Approx(population_value(batch[i], D)).margin(1e-12));
    }

    // coordinates exhausted after T rounds
    std::vector<Query> batch;
    for (int i = 0; i < k; ++i) batch.push_back(Query::random(n, rng));
    REQUIRE_THROWS(oracle.answer(T + 1, batch));
    REQUIRE_THROWS(oracle.answer(1, {Query::random(n, rng)})); // wrong width
}

TEST_CASE("sign-kinked function computes its subgradient away from kinks") {
    std::vector<std::vector<std::uint8_t>> pts = {{1, 0, 1}, {0, 1, 1}};
    const double gamma = 0.1;
    AmirFunction f(pts, 4, gamma);
    REQUIRE(f.dim() == 3);
    REQUIRE(f.domain_size() == 2);

    const Vec w = {0.4, -0.2, 0.3};
    const FirstOrderInfo info = f.eval(w, 0); // support {0,2}, both positive except none
    const double s = 0.4 * 0.4 + 0.3 * 0.3;
    const double root = std::sqrt(s);
    REQUIRE(info.value ==
            Catch::Approx(0.5 * root + gamma * (0.4 - (-0.2) / 4.0 + 0.3)));
    REQUIRE(info.gradient[0] == Catch::Approx(0.4 / (2.0 * root) + gamma));
    REQUIRE(info.gradient[1] == Catch::Approx(-gamma / 4.0));
    REQUIRE(info.gradient[2] == Catch::Approx(0.3 / (2.0 * root) + gamma));

    // margin is the smallest |w_i| over the support
    REQUIRE(f.smooth_margin(w, 0) == Catch::Approx(0.3));
    REQUIRE(f.smooth_margin(w, 1) == Catch::Approx(0.2));

    // at w = 0 the square-root term contributes nothing
    const FirstOrderInfo at0 = f.eval(Vec(3, 0.0), 1);
    REQUIRE(at0.value == 0.0);
    REQUIRE(at0.gradient[0] == Catch::Approx(-gamma / 4.0));
    REQUIRE(at0.gradient[1] == Catch::Approx(gamma));
}

TEST_CASE("two-step bias demo reports the documented structure") {
    const int m = 4, d = 128;
    const double gamma = 1.0 / (2.0 * std::sqrt(double(d)));
    const BiasDemoResult r = amir_bias_demo(m, d, gamma, 5000, 1234);
    REQUIRE(r.w2_sign_property);
    REQUIRE(r.all_zero_coords > 0);
    REQUIRE_FALSE(r.flagged);
    REQUIRE(r.gap > 0.0);

    // deterministic given the seed
    const BiasDemoResult r2 = amir_bias_demo(m, d, gamma, 5000, 1234);
    REQUIRE(r.gap == r2.gap);
    REQUIRE(r.all_zero_coords == r2.all_zero_coords);
}

TEST_CASE("property checks pass on correct functions and catch broken ones") {
    QuadraticTestbed good;
    REQUIRE(check_gradients(good, Rng(1)).pass);
    REQUIRE(check_convexity(good, Rng(2), 2000).pass);
    REQUIRE(check_lipschitz(good, Rng(3), 500).pass);

    // negative control: value of the testbed with a wrong gradient
    class WrongGradient : public StochasticConvexFunction {
    public:
        int dim() const override { return inner_.dim(); }
        int domain_size() const override { return inner_.domain_size(); }
        double lipschitz() const override { return inner_.lipschitz(); }
        FirstOrderInfo eval(const Vec& w, int x) const override {
            FirstOrderInfo info = inner_.eval(w, x);
            info.gradient[0] += 0.5;
            return info;
        }

    private:
        QuadraticTestbed inner_;
    } wrong;
    REQUIRE_FALSE(check_gradients(wrong, Rng(4)).pass);

    // negative control: concave function
    class Concave : public StochasticConvexFunction {
    public:
        int dim() const override { return 2; }
        int domain_size() const override { return 1; }
        double lipschitz() const override { return 2.0; }
        FirstOrderInfo eval(const Vec& w, int) const override {
            FirstOrderInfo info;
            info.value = -dot(w, w);
            info.gradient = w;
            scale(info.gradient, -2.0);
            return info;
        }
    } concave;
    REQUIRE_FALSE(check_convexity(concave, Rng(5), 2000).pass);

    // negative control: floor violated
    REQUIRE_FALSE(check_floor(good, 1.0, Rng(6), 200).pass);
}
