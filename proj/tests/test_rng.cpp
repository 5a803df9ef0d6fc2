#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "adalab/rng.hpp"

using namespace adalab;

TEST_CASE("same seed reproduces the same stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int equal = 0;
    for (int i = 0; i < 100; ++i)
        if (a.next_u64() == b.next_u64()) ++equal;
    REQUIRE(equal == 0);
}

TEST_CASE("split is const and label-sensitive") {
    const Rng root(7);
    Rng a = root.split("alpha");
    Rng a2 = root.split("alpha");
    Rng b = root.split("beta");
    REQUIRE(a.next_u64() == a2.next_u64());
    REQUIRE(a.next_u64() != b.next_u64());

    // numeric labels too
    Rng c = root.split(std::uint64_t{3});
    Rng d = root.split(std::uint64_t{4});
    REQUIRE(c.next_u64() != d.next_u64());
}

TEST_CASE("split streams do not collide with the parent") {
    Rng root(99);
    Rng child = root.split("child");
    std::set<std::uint64_t> parent_vals;
    for (int i = 0; i < 1000; ++i) parent_vals.insert(root.next_u64());
    for (int i = 0; i < 1000; ++i) REQUIRE(parent_vals.count(child.next_u64()) == 0);
}

TEST_CASE("next_double lies in [0,1) and is roughly uniform") {
    Rng rng(5);
    double sum = 0.0;
    const int N = 20000;
    for (int i = 0; i < N; ++i) {
        const double u = rng.next_double();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    REQUIRE(std::abs(sum / N - 0.5) < 0.01);
}

TEST_CASE("uniform respects its interval") {
    Rng rng(6);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(-3.0, 2.0);
        REQUIRE(u >= -3.0);
        REQUIRE(u < 2.0);
    }
}

TEST_CASE("next_below is in range and hits every residue") {
    Rng rng(8);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const auto v = rng.next_below(7);
        REQUIRE(v < 7);
        ++counts[static_cast<int>(v)];
    }
    for (const int c : counts) REQUIRE(c > 700); // expectation 1000
}

TEST_CASE("coin and sign take only their two values") {
    Rng rng(9);
    int heads = 0;
    for (int i = 0; i < 2000; ++i) {
        const int c = rng.coin();
        REQUIRE((c == 0 || c == 1));
        heads += c;
        const double s = rng.sign();
        REQUIRE((s == 1.0 || s == -1.0));
    }
    REQUIRE(heads > 800);
    REQUIRE(heads < 1200);
}

TEST_CASE("normal has approximately standard moments") {
    Rng rng(10);
    const int N = 40000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < N; ++i) {
        const double z = rng.normal();
        sum += z;
        sum2 += z * z;
    }
    REQUIRE(std::abs(sum / N) < 0.02);
    REQUIRE(std::abs(sum2 / N - 1.0) < 0.03);
}

TEST_CASE("fnv1a matches its reference constants") {
    // offset basis for the empty string, and stability of a known label
    REQUIRE(Rng::fnv1a("") == 0xcbf29ce484222325ULL);
    REQUIRE(Rng::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    REQUIRE(Rng::fnv1a("sample") == Rng::fnv1a(std::string_view("sample")));
}
