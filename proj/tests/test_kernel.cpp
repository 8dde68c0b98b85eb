#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "graphrd/constraint.hpp"
#include "graphrd/errors.hpp"
#include "graphrd/kernel.hpp"
#include "graphrd/measure.hpp"
#include "graphrd/sampler.hpp"

using namespace graphrd;

namespace {

Kernel poisson1() {
    ColorMeasure s(1);
    s.w = {1.0};
    PairMeasure pi(1);
    pi.set(0, 0, 1.0);
    return build_kernel(s, pi, 1e-12);
}

// Two colors, no edges: two zero-degree atoms of mass 1/2. Under the color
// (equivalently ball) Hamming distortion this is the binary uniform source.
Kernel binary_uniform() {
    ColorMeasure s(2);
    s.w = {0.5, 0.5};
    PairMeasure pi(2);
    return build_kernel(s, pi, 1e-12);
}

Kernel two_color_sparse() {
    ColorMeasure s(2);
    s.w = {0.5, 0.5};
    PairMeasure pi(2);
    pi.set(0, 1, 0.5);
    pi.set(0, 0, 0.25);
    pi.set(1, 1, 0.25);
    return build_kernel(s, pi, 1e-12);
}

double binary_entropy(double d) { return -d * std::log(d) - (1.0 - d) * std::log(1.0 - d); }

}  // namespace

TEST_CASE("poisson kernel atoms") {
    const Kernel K = poisson1();
    const Ball zero(0, DegreeVector({0}));
    const Ball one(0, DegreeVector({1}));
    REQUIRE(K.prob(zero) == Catch::Approx(std::exp(-1.0)).epsilon(1e-10));
    REQUIRE(K.prob(zero) == K.prob(one));  // e^-1 / 0! == e^-1 / 1!
    REQUIRE(K.truncation_mass < 1e-12);
    REQUIRE(K.L_max >= 8);
    double mass = 0.0;
    for (const auto& [b, p] : K.atoms) mass += p;
    REQUIRE(mass == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("edgeless kernel degenerates to the color law") {
    const Kernel K = binary_uniform();
    REQUIRE(K.L_max == 0);
    REQUIRE(K.truncation_mass == 0.0);
    REQUIRE(K.atoms.size() == 2);
    REQUIRE(K.prob(Ball(0, DegreeVector(2))) == 0.5);
}

TEST_CASE("kernel mean identity recovers pi") {
    ColorMeasure s(2);
    s.w = {0.3, 0.7};
    PairMeasure pi(2);
    pi.set(0, 0, 0.2);
    pi.set(0, 1, 0.4);
    pi.set(1, 1, 0.6);
    const Kernel K = build_kernel(s, pi, 1e-12);
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t b = 0; b < 2; ++b) {
            double mean = 0.0;
            for (const auto& [ball, p] : K.atoms) {
                if (static_cast<std::size_t>(ball.color) == a) mean += p * ball.deg.counts[b];
            }
            REQUIRE(mean == Catch::Approx(pi(a, b)).margin(1e-10));
        }
    }
}

TEST_CASE("zero mass colors must carry no intensity") {
    ColorMeasure s(2);
    s.w = {1.0, 0.0};
    PairMeasure ok(2);
    ok.set(0, 0, 1.0);
    const Kernel K = build_kernel(s, ok, 1e-12);
    for (const auto& [ball, p] : K.atoms) REQUIRE(ball.color == 0);
    PairMeasure bad(2);
    bad.set(0, 1, 0.5);
    REQUIRE_THROWS_AS(build_kernel(s, bad, 1e-12), ValidationError);
}

TEST_CASE("log mgf matches the binary closed form") {
    const LogMgf lm(binary_uniform(), DistortionFn::color_hamming());
    REQUIRE(std::abs(lm.lambda(0.0)) <= 1e-12);
    for (double t = -20.0; t <= 5.0; t += 0.25) {
        const double closed = std::log(0.5 + 0.5 * std::exp(t));
        REQUIRE(lm.lambda(t) == Catch::Approx(closed).margin(1e-12));
    }
    // Convexity via second differences on a coarse grid.
    const double h = 0.25;
    for (double t = -20.0; t <= 4.5; t += h) {
        const double dd = lm.lambda(t + h) - 2.0 * lm.lambda(t) + lm.lambda(t - h);
        REQUIRE(dd >= -1e-9);
    }
    REQUIRE(lm.d_av() == Catch::Approx(0.5).margin(1e-12));
    REQUIRE(lm.d_min() == 0.0);
    REQUIRE(lm.d_max() == 1.0);
}

TEST_CASE("average distortion of the poisson pair") {
    // E (X - Y)^2 = 2 Var = 2 for X, Y iid Poisson(1), up to truncation.
    const LogMgf lm(poisson1(), DistortionFn::squared_degree_diff());
    REQUIRE(lm.d_av() == Catch::Approx(2.0).margin(1e-6));
}

TEST_CASE("tilted coupling invariants") {
    const Kernel K = poisson1();
    const DistortionFn rho = DistortionFn::squared_degree_diff();
    const LogMgf lm(K, rho);
    const TiltedCoupling nu = tilted_coupling(K, rho, -1.0);
    // First marginal is the kernel itself.
    const BallMeasure m1 = ball_marginal(nu.atoms, 0);
    for (const auto& [ball, p] : K.atoms) {
        REQUIRE(m1.prob(ball) == Catch::Approx(p).margin(1e-10));
    }
    // Entropy identity at the tilt.
    const double want = -1.0 * lm.lambda_prime(-1.0) - lm.lambda(-1.0);
    REQUIRE(nu.entropy == Catch::Approx(want).margin(1e-9));
    // Mean distortion is increasing in t and equals d_av at t = 0.
    const TiltedCoupling n0 = tilted_coupling(K, rho, 0.0);
    REQUIRE(n0.entropy == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(n0.mean_distortion == Catch::Approx(lm.d_av()).margin(1e-12));
    REQUIRE(nu.mean_distortion < n0.mean_distortion);
    REQUIRE(tilted_coupling(K, rho, -2.0).mean_distortion < nu.mean_distortion);
}

TEST_CASE("binary rate distortion closed form") {
    const Kernel K = binary_uniform();
    const DistortionFn rho = DistortionFn::color_hamming();
    for (double d : {0.1, 0.25, 0.4}) {
        const RateResult r = rate_distortion(K, rho, d);
        REQUIRE(r.status == RateStatus::exact);
        REQUIRE(r.R == Catch::Approx(std::log(2.0) - binary_entropy(d)).margin(1e-8));
    }
}

TEST_CASE("rate status logic") {
    const Kernel K = binary_uniform();
    const DistortionFn rho = DistortionFn::color_hamming();
    const RateResult below = rate_distortion(K, rho, -0.25);
    REQUIRE(below.status == RateStatus::infinite);
    REQUIRE(below.R == kInf);
    const RateResult at_min = rate_distortion(K, rho, 0.0);
    REQUIRE(at_min.status == RateStatus::boundary);
    REQUIRE(at_min.R == Catch::Approx(std::log(2.0)).margin(1e-12));
    REQUIRE(at_min.at_dmin_diagnostic);
    const RateResult high = rate_distortion(K, rho, 0.5);
    REQUIRE(high.status == RateStatus::clamped_zero);
    REQUIRE(high.R == 0.0);
    const RateResult mid = rate_distortion(K, rho, 0.3);
    REQUIRE(mid.status == RateStatus::exact);
    REQUIRE_FALSE(mid.at_dmin_diagnostic);
    REQUIRE(mid.root_gap <= 1e-10);
    REQUIRE(mid.t_star < 0.0);
}

TEST_CASE("distortion ldp rate") {
    const Kernel K = binary_uniform();
    const DistortionFn rho = DistortionFn::color_hamming();
    const LogMgf lm(K, rho);
    REQUIRE(distortion_ldp_rate_with(lm, 0.5) == Catch::Approx(0.0).margin(1e-10));
    REQUIRE(distortion_ldp_rate_with(lm, 1.25) == kInf);
    REQUIRE(distortion_ldp_rate_with(lm, -0.1) == kInf);
    REQUIRE(distortion_ldp_rate_with(lm, 1.0) == Catch::Approx(std::log(2.0)).margin(1e-12));
    // Symmetry of the binary conjugate around 1/2.
    const double upper = distortion_ldp_rate_with(lm, 0.75);
    const double lower = rate_distortion(K, rho, 0.25).R;
    REQUIRE(upper == Catch::Approx(lower).margin(1e-8));
}

TEST_CASE("eval_I1 vanishes on the product and prices the tilt") {
    const Kernel K = binary_uniform();
    JointBallMeasure prod;
    for (const auto& [x, px] : K.atoms) {
        for (const auto& [y, py] : K.atoms) prod.add({x, y}, px * py);
    }
    REQUIRE(eval_I1(prod, K, 1e-9) == 0.0);
    REQUIRE(eval_I1(prod, K, 1e-9, MarginalMode::full_ball) == 0.0);

    const DistortionFn rho = DistortionFn::color_hamming();
    const TiltedCoupling nu = tilted_coupling(K, rho, -1.0);
    const double i1 = eval_I1(nu.atoms, K, 1e-9);
    REQUIRE(i1 == Catch::Approx(nu.entropy).margin(1e-9));
}

TEST_CASE("eval_I1 fails soft on broken marginals and consistency") {
    const Kernel K = binary_uniform();
    JointBallMeasure skew;
    const Ball a(0, DegreeVector(2)), b(1, DegreeVector(2));
    skew.add({a, a}, 1.0);
    REQUIRE(eval_I1(skew, K, 1e-9) == kInf);
    REQUIRE(eval_I1(skew, K, 1e-9, MarginalMode::full_ball) == kInf);

    const Kernel K2 = two_color_sparse();
    JointBallMeasure folded;
    const Ball za(0, DegreeVector(2)), zb(1, DegreeVector(2));
    DegreeVector db(2);
    db.counts = {0, 1};
    folded.add({Ball(0, db), za}, 0.5);  // a reports a b-neighbor
    folded.add({zb, zb}, 0.5);           // no b vertex reports an a-neighbor
    REQUIRE(eval_I1(folded, K2, 1e-9) == kInf);
}

TEST_CASE("eval_I1 rejects balls outside the truncated box") {
    ColorMeasure s(1);
    s.w = {1.0};
    PairMeasure pi(1);
    pi.set(0, 0, 1.0);
    const Kernel K = build_kernel(s, pi, 1e-3);  // small box on purpose
    JointBallMeasure nu;
    DegreeVector big(1);
    big.counts = {static_cast<std::int32_t>(K.L_max + 1)};
    nu.add({Ball(0, big), Ball(0, DegreeVector(1))}, 1.0);
    REQUIRE_THROWS_AS(eval_I1(nu, K, 1e-9), TruncationError);
}

TEST_CASE("eval_I2 after reshuffle equals eval_I1 bit for bit") {
    const Kernel K = binary_uniform();
    const DistortionFn rho = DistortionFn::color_hamming();
    const TiltedCoupling nu = tilted_coupling(K, rho, -0.7);
    const double i1 = eval_I1(nu.atoms, K, 1e-9);
    const double i2 = eval_I2(reshuffle(nu.atoms), K, 1e-9);
    REQUIRE(i1 == i2);

    // Graph-derived joints exercise nonzero degrees.
    const Kernel K2 = two_color_sparse();
    ColorMeasure s(2);
    s.w = {0.5, 0.5};
    PairMeasure pim(2);
    pim.set(0, 1, 0.5);
    pim.set(0, 0, 0.25);
    pim.set(1, 1, 0.25);
    const GraphConstraint c = validate_constraint(16, s, pim);
    const ColoredGraph x = sample_graph(c, 11);
    const ColoredGraph y = sample_graph(c, 12);
    const JointBallMeasure joint = joint_ball_measure(x, y);
    // Sampled degrees stay inside the box for this seed.
    for (const auto& [pair, v] : joint.atoms) {
        for (auto cnt : pair.first.deg.counts) REQUIRE(cnt <= K2.L_max);
        for (auto cnt : pair.second.deg.counts) REQUIRE(cnt <= K2.L_max);
    }
    const double j1 = eval_I1(joint, K2, 0.5);  // loose tol: empirical marginals
    const double j2 = eval_I2(reshuffle(joint), K2, 0.5);
    REQUIRE(j1 == j2);
    REQUIRE(std::isfinite(j1));
}

TEST_CASE("explosion guards trip on absurd boxes") {
    ColorMeasure s(4);
    s.w = {0.25, 0.25, 0.25, 0.25};
    PairMeasure pi(4);
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = a; b < 4; ++b) pi.set(a, b, 30.0);
    }
    try {
        const Kernel K = build_kernel(s, pi, 1e-12, std::nullopt, 4096, 100000);
        FAIL("expected ExplosionError");
    } catch (const ExplosionError& e) {
        REQUIRE(e.estimated_size() > 100000);
    }
}
