#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "graphrd/experiments.hpp"
#include "graphrd/oracle.hpp"

using namespace graphrd;

namespace {

ConstraintFamily two_color_family() {
    ConstraintFamily f;
    f.alphabet = Alphabet({"a", "b"});
    f.sigma = ColorMeasure(2);
    f.sigma.w = {0.5, 0.5};
    f.pi = PairMeasure(2);
    f.pi.set(0, 1, 0.5);
    f.pi.set(0, 0, 0.25);
    f.pi.set(1, 1, 0.25);
    return f;
}

ConstraintFamily thirds_family() {
    ConstraintFamily f;
    f.alphabet = Alphabet({"a", "b", "c"});
    f.sigma = ColorMeasure(3);
    f.sigma.w = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    f.pi = PairMeasure(3);
    f.pi.set(0, 1, 0.4);
    return f;
}

GraphConstraint mono(std::size_t n, double pi_aa) {
    ColorMeasure s(1);
    s.w = {1.0};
    PairMeasure pi(1);
    pi.set(0, 0, pi_aa);
    return validate_constraint(n, s, pi);
}

}  // namespace

TEST_CASE("rounding distributes remainders deterministically") {
    const GraphConstraint c = round_constraint(thirds_family(), 8);
    // Equal remainders 2/3 break ties by color index.
    REQUIRE(c.color_count == std::vector<std::int64_t>{3, 3, 2});
    std::int64_t total = 0;
    for (auto k : c.color_count) total += k;
    REQUIRE(total == 8);
    // pi(a,b) = 0.4 rounds to nearest count: 8 * 0.4 = 3.2 -> 3.
    REQUIRE(c.edges(0, 1) == 3);
    REQUIRE(c.sigma.w[0] == 3.0 / 8.0);
    REQUIRE(c.pi(0, 1) == 3.0 / 8.0);
}

TEST_CASE("rounding is exact when the family is integral") {
    const GraphConstraint c = round_constraint(two_color_family(), 16);
    REQUIRE(c.color_count == std::vector<std::int64_t>{8, 8});
    REQUIRE(c.edges(0, 1) == 8);
    REQUIRE(c.edges(0, 0) == 2);
    REQUIRE(c.edges(1, 1) == 2);
    REQUIRE(c.sigma.w == std::vector<double>{0.5, 0.5});
    REQUIRE(c.pi(0, 1) == 0.5);
}

TEST_CASE("rounded edge demands respect capacity") {
    ConstraintFamily f;
    f.alphabet = Alphabet({"a"});
    f.sigma = ColorMeasure(1);
    f.sigma.w = {1.0};
    f.pi = PairMeasure(1);
    f.pi.set(0, 0, 2.5);  // at n=3 wants 3.75 edges, capacity is 3
    const GraphConstraint c = round_constraint(f, 3);
    REQUIRE(c.edges(0, 0) <= c.pair_capacity(0, 0));
}

TEST_CASE("monte carlo estimate brackets the exact oracle") {
    const GraphConstraint c = mono(4, 1.0);
    const ColoredGraph x(1, {0, 0, 0, 0}, {{0, 1}, {1, 2}});
    const DistortionFn rho = DistortionFn::ball_hamming();
    for (double d : {0.0, 0.25, 0.5}) {
        const double exact =
            static_cast<double>(exact_match_probability(x, rho, d, c).convert_to<double>());
        const EstimateRow row = estimate_match_probability(x, rho, d, c, 100000, 2024);
        const double sigma = std::sqrt(exact * (1.0 - exact) / 100000.0);
        REQUIRE(std::abs(row.p_hat - exact) <= 3.0 * sigma + 1e-12);
    }
}

TEST_CASE("shard partitioning does not change the count") {
    const GraphConstraint c = mono(6, 1.0);
    const ColoredGraph x = sample_graph(c, 3);
    const DistortionFn rho = DistortionFn::ball_hamming();
    const EstimateRow one = estimate_match_probability(x, rho, 0.5, c, 5000, 7, 1);
    const EstimateRow three = estimate_match_probability(x, rho, 0.5, c, 5000, 7, 3);
    const EstimateRow four = estimate_match_probability(x, rho, 0.5, c, 5000, 7, 4);
    REQUIRE(one.hits == three.hits);
    REQUIRE(one.hits == four.hits);
}

TEST_CASE("estimates are reproducible") {
    const GraphConstraint c = mono(6, 1.0);
    const ColoredGraph x = sample_graph(c, 3);
    const DistortionFn rho = DistortionFn::ball_hamming();
    const EstimateRow r1 = estimate_match_probability(x, rho, 0.4, c, 20000, 99);
    const EstimateRow r2 = estimate_match_probability(x, rho, 0.4, c, 20000, 99);
    REQUIRE(r1.hits == r2.hits);
    REQUIRE(r1.p_hat == r2.p_hat);
}

TEST_CASE("zero hits produce the rule of three bound") {
    const GraphConstraint c = mono(6, 1.0);
    const ColoredGraph x = sample_graph(c, 3);
    const DistortionFn rho = DistortionFn::ball_hamming();
    // Negative budget is unattainable since rho >= 0.
    const EstimateRow row = estimate_match_probability(x, rho, -0.5, c, 1000, 5);
    REQUIRE(row.hits == 0);
    REQUIRE(row.p_hat == 0.0);
    REQUIRE(row.neg_log_rate == kInf);
    REQUIRE(row.zero_hit_bound.has_value());
    REQUIRE(*row.zero_hit_bound == 3.0 / 1000.0);
}

TEST_CASE("saturated budget accepts every sample") {
    const GraphConstraint c = mono(6, 1.0);
    const ColoredGraph x = sample_graph(c, 3);
    const EstimateRow row =
        estimate_match_probability(x, DistortionFn::ball_hamming(), 1.0, c, 2000, 5);
    REQUIRE(row.hits == 2000);
    REQUIRE(row.p_hat == 1.0);
    REQUIRE(row.neg_log_rate == 0.0);
}

TEST_CASE("normal intervals cover the truth near nominal rate") {
    const GraphConstraint c = mono(4, 1.0);
    const ColoredGraph x(1, {0, 0, 0, 0}, {{0, 1}, {1, 2}});
    const DistortionFn rho = DistortionFn::ball_hamming();
    const double exact =
        exact_match_probability(x, rho, 0.25, c).convert_to<double>();
    const std::int64_t m = 500;
    int covered = 0;
    const int reps = 1000;
    for (int r = 0; r < reps; ++r) {
        const EstimateRow row = estimate_match_probability(
            x, rho, 0.25, c, m, derive_seed(31337, static_cast<std::uint64_t>(r)));
        if (std::abs(row.p_hat - exact) <= 1.96 * row.stderr_) ++covered;
    }
    const double rate = static_cast<double>(covered) / reps;
    REQUIRE(rate > 0.90);
    REQUIRE(rate < 0.99);
}

TEST_CASE("aep experiment shape and reference rate") {
    ExperimentConfig cfg;
    cfg.family = two_color_family();
    cfg.rho = DistortionFn::ball_hamming();
    cfg.n_list = {8, 16};
    cfg.d_values = {0.5625};
    cfg.samples = 4000;
    cfg.seed = 17;
    cfg.source_seeds = 3;
    const AepResult result = aep_convergence(cfg);
    REQUIRE(result.rows.size() == 6);
    REQUIRE(result.gaps.size() == 2);
    REQUIRE(result.gaps[0].first == 8);
    REQUIRE(result.warning.empty());
    const Kernel K = build_kernel(cfg.family.sigma, cfg.family.pi, cfg.tail_tol,
                                  cfg.family.alphabet);
    const RateResult ref = rate_distortion(K, cfg.rho, 0.5625);
    REQUIRE(result.R_ref == ref.R);
    for (const auto& row : result.rows) {
        REQUIRE(row.samples == 4000);
        REQUIRE(row.d == 0.5625);
    }
    // Deterministic rerun.
    const AepResult again = aep_convergence(cfg);
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        REQUIRE(result.rows[i].hits == again.rows[i].hits);
    }
}

TEST_CASE("aep warns outside the informative band") {
    ExperimentConfig cfg;
    cfg.family = two_color_family();
    cfg.rho = DistortionFn::ball_hamming();
    cfg.n_list = {8};
    cfg.d_values = {0.99};
    cfg.samples = 100;
    const AepResult result = aep_convergence(cfg);
    REQUIRE_FALSE(result.warning.empty());
}

TEST_CASE("coupling experiment aggregates per pair") {
    ExperimentConfig cfg;
    cfg.family = two_color_family();
    cfg.n_list = {16, 32};
    cfg.reps = 200;
    cfg.eps = 0.05;
    cfg.seed = 5;
    const CouplingResult result = coupling_experiment(cfg);
    REQUIRE(result.rows.size() == 6);  // three active pairs per n
    for (const auto& row : result.rows) {
        REQUIRE(row.reps == 200);
        REQUIRE(row.mean_B >= 0.0);
        REQUIRE(row.exceed_frac >= 0.0);
        REQUIRE(row.exceed_frac <= 1.0);
    }
}

TEST_CASE("lln rows shrink with n in this draw") {
    ExperimentConfig cfg;
    cfg.family = two_color_family();
    cfg.n_list = {32, 256};
    cfg.source_seeds = 5;
    cfg.seed = 23;
    const auto rows = lln_experiment(cfg);
    REQUIRE(rows.size() == 10);
    double small_sum = 0.0, large_sum = 0.0;
    for (const auto& row : rows) {
        REQUIRE(row.tv >= 0.0);
        REQUIRE(row.tv <= 1.0);
        (row.n == 32 ? small_sum : large_sum) += row.tv;
    }
    REQUIRE(large_sum < small_sum);
}
