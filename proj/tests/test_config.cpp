#include <catch2/catch_amalgamated.hpp>

#include "qdprobe/config.hpp"
#include "qdprobe/fitting.hpp"
#include "qdprobe/rng.hpp"

using namespace qdprobe;

TEST_CASE("config parses sections, keys, comments", "[config]") {
    const char* text = R"(
# a comment
[wafer]
die_count = 58
seed = 7

[wafer.disorder]
random_sigma_vt = 0.058
; another comment
name = paper 50nm
)";
    Config cfg = Config::parse_string(text);
    REQUIRE(cfg.get_int("wafer", "die_count") == 58);
    REQUIRE(cfg.get_u64("wafer", "seed", 0) == 7);
    REQUIRE(cfg.get_double("wafer.disorder", "random_sigma_vt") == Catch::Approx(0.058));
    REQUIRE(cfg.get_string("wafer.disorder", "name") == "paper 50nm");
    REQUIRE(cfg.get_int("wafer", "absent", 4) == 4);
    REQUIRE_FALSE(cfg.has("wafer", "absent"));
}

TEST_CASE("config rejects malformed input", "[config]") {
    REQUIRE_THROWS_AS(Config::parse_string("[unterminated\n"), validation_error);
    REQUIRE_THROWS_AS(Config::parse_string("no equals sign\n"), validation_error);
    REQUIRE_THROWS_AS(Config::parse_string("= value\n"), validation_error);
    Config cfg = Config::parse_string("[a]\nx = notanumber\n");
    REQUIRE_THROWS_AS(cfg.get_double("a", "x"), validation_error);
    REQUIRE_THROWS_AS(cfg.get_string("a", "missing"), validation_error);
}

TEST_CASE("config round-trips through canonical text", "[config]") {
    Config cfg;
    cfg.set_int("b", "k2", -3);
    cfg.set_double("a.sub", "x", 0.1234567890123456789);
    cfg.set("a", "k", "v");
    Config again = Config::parse_string(cfg.to_string());
    REQUIRE(again.to_string() == cfg.to_string());
    REQUIRE(again.hash() == cfg.hash());
    REQUIRE(again.get_double("a.sub", "x") == cfg.get_double("a.sub", "x"));
}

TEST_CASE("stream determinism and normal moments", "[rng]") {
    Stream a(mix_key(7, "device", 1, 2, 3));
    Stream b(mix_key(7, "device", 1, 2, 3));
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

    Stream c(mix_key(7, "device", 1, 2, 4));
    REQUIRE(Stream(mix_key(7, "device", 1, 2, 3)).next_u64() != c.next_u64());

    Stream s(42);
    double sum = 0, sum2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double x = s.normal();
        sum += x;
        sum2 += x * x;
    }
    double mean = sum / n;
    double var = sum2 / n - mean * mean;
    REQUIRE(std::fabs(mean) < 0.01);
    REQUIRE(var == Catch::Approx(1.0).margin(0.02));
}

TEST_CASE("levmar recovers a logistic product from its own family", "[fitting]") {
    auto logistic = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    const double c1 = 0.62, c2 = 0.58, w = 0.03, amp = 4e-8, off = 1e-10;
    std::vector<double> xs, ys, zs;
    for (int i = 0; i < 21; ++i)
        for (int j = 0; j < 21; ++j) {
            double v1 = 0.47 + 0.015 * i, v2 = 0.43 + 0.015 * j;
            xs.push_back(v1);
            ys.push_back(v2);
            zs.push_back(amp * logistic((v1 - c1) / w) * logistic((v2 - c2) / w) + off);
        }
    auto resid = [&](const std::vector<double>& p, std::vector<double>& r) {
        for (size_t k = 0; k < zs.size(); ++k) {
            double m = p[0] * logistic((xs[k] - p[1]) / p[4]) * logistic((ys[k] - p[2]) / p[5]) +
                       p[3];
            r[k] = m - zs[k];
        }
    };
    auto fit = levmar_fit(resid, zs.size(), {3e-8, 0.6, 0.6, 0.0, 0.02, 0.02});
    REQUIRE(fit.params[1] == Catch::Approx(c1).margin(1e-6));
    REQUIRE(fit.params[2] == Catch::Approx(c2).margin(1e-6));
    REQUIRE(fit.rms_residual < 1e-12);
}
