#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "graphrd/ball.hpp"
#include "graphrd/errors.hpp"
#include "graphrd/graph.hpp"

namespace graphrd {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Sparse probability measure over a totally ordered atom type. Measures built
// from samples additionally retain exact integer counts (numerators over a
// common denominator) so that counting identities can be checked exactly.
template <class Atom>
struct SparseMeasure {
    std::map<Atom, double> atoms;
    std::map<Atom, std::int64_t> counts;  // populated iff denom > 0
    std::int64_t denom = 0;

    bool has_counts() const noexcept { return denom > 0; }
    std::size_t size() const noexcept { return atoms.size(); }

    double prob(const Atom& a) const {
        auto it = atoms.find(a);
        return it == atoms.end() ? 0.0 : it->second;
    }

    double mass() const noexcept {
        double s = 0.0;
        for (const auto& [k, v] : atoms) s += v;
        return s;
    }

    void add(const Atom& a, double w) { atoms[a] += w; }
    void add_count(const Atom& a, std::int64_t c = 1) { counts[a] += c; }

    // Turns accumulated counts into probabilities with one division per atom.
    void finalize_counts(std::int64_t total) {
        if (total <= 0) throw ValidationError("measure denominator must be positive");
        denom = total;
        atoms.clear();
        for (const auto& [k, c] : counts) {
            atoms[k] = static_cast<double>(c) / static_cast<double>(total);
        }
    }

    void require_probability(double tol = 1e-12) const {
        for (const auto& [k, v] : atoms) {
            if (!(v >= 0.0)) throw ValidationError("measure has a negative mass");
        }
        if (std::abs(mass() - 1.0) > tol) throw ValidationError("measure mass is not 1");
    }

    bool operator==(const SparseMeasure& other) const { return atoms == other.atoms; }
};

using BallMeasure = SparseMeasure<Ball>;
using JointBallMeasure = SparseMeasure<std::pair<Ball, Ball>>;

// Empirical neighborhood measure of a graph. With a cap, degree counts are
// saturated at `cap` and each reduced entry is reported through *clamp_events.
inline BallMeasure ball_measure(const ColoredGraph& g, std::int32_t cap = kNoCap,
                                std::size_t* clamp_events = nullptr) {
    BallMeasure out;
    const auto rows = ball_degrees(g);
    for (std::size_t v = 0; v < g.n(); ++v) {
        DegreeVector deg = (cap == kNoCap) ? rows[v] : rows[v].clamped(cap, clamp_events);
        out.add_count(Ball(g.color(v), std::move(deg)));
    }
    out.finalize_counts(static_cast<std::int64_t>(g.n()));
    return out;
}

inline JointBallMeasure joint_ball_measure(const ColoredGraph& x, const ColoredGraph& y) {
    if (x.n() != y.n()) throw ValidationError("joint ball measure needs equal vertex counts");
    if (x.num_colors() != y.num_colors()) {
        throw ValidationError("joint ball measure needs a common alphabet");
    }
    JointBallMeasure out;
    const auto rx = ball_degrees(x);
    const auto ry = ball_degrees(y);
    for (std::size_t v = 0; v < x.n(); ++v) {
        out.add_count({Ball(x.color(v), rx[v]), Ball(y.color(v), ry[v])});
    }
    out.finalize_counts(static_cast<std::int64_t>(x.n()));
    return out;
}

// Coordinate marginal of a joint measure; i is 0 or 1. Exact counts carry over.
inline BallMeasure ball_marginal(const JointBallMeasure& nu, int i) {
    if (i != 0 && i != 1) throw ValidationError("marginal coordinate must be 0 or 1");
    BallMeasure out;
    if (nu.has_counts()) {
        for (const auto& [pair, c] : nu.counts) {
            out.add_count(i == 0 ? pair.first : pair.second, c);
        }
        out.finalize_counts(nu.denom);
    } else {
        for (const auto& [pair, w] : nu.atoms) {
            out.add(i == 0 ? pair.first : pair.second, w);
        }
    }
    return out;
}

// H(nu || mu) = sum nu log(nu/mu), with 0 log 0 = 0 and +inf off the support
// of mu.
template <class Atom>
double relative_entropy(const SparseMeasure<Atom>& nu, const SparseMeasure<Atom>& mu) {
    for (const auto& [k, v] : nu.atoms) {
        if (!(v >= 0.0)) throw ValidationError("relative entropy: negative mass in nu");
    }
    for (const auto& [k, v] : mu.atoms) {
        if (!(v >= 0.0)) throw ValidationError("relative entropy: negative mass in mu");
    }
    double h = 0.0;
    for (const auto& [k, v] : nu.atoms) {
        if (v == 0.0) continue;
        const double q = mu.prob(k);
        if (q == 0.0) return kInf;
        h += v * std::log(v / q);
    }
    return h;
}

template <class Atom>
double total_variation(const SparseMeasure<Atom>& nu, const SparseMeasure<Atom>& mu) {
    double s = 0.0;
    for (const auto& [k, v] : nu.atoms) s += std::abs(v - mu.prob(k));
    for (const auto& [k, v] : mu.atoms) {
        if (nu.atoms.find(k) == nu.atoms.end()) s += std::abs(v);
    }
    return 0.5 * s;
}

// Phi projects a ball measure onto its (color, pair-intensity) statistics:
// sigma(a) = sum_l L(a,l) and pi(a,b) = sum_l l(b) L(a,l). When L carries
// exact counts, the same integer numerators as color_measure/pair_measure are
// formed and divided once, so the graph identity holds bit for bit.
inline std::pair<ColorMeasure, PairMeasure> phi_statistics(const BallMeasure& L) {
    if (L.atoms.empty()) throw ValidationError("phi_statistics needs a nonempty measure");
    const std::size_t m = L.atoms.begin()->first.deg.size();
    for (const auto& [ball, w] : L.atoms) {
        if (ball.deg.size() != m) throw ValidationError("mixed degree-vector sizes");
    }
    ColorMeasure sigma(m);
    PairMeasure pi(m);
    if (L.has_counts()) {
        std::vector<std::int64_t> snum(m, 0);
        std::vector<std::int64_t> pnum(m * m, 0);
        for (const auto& [ball, c] : L.counts) {
            const auto a = static_cast<std::size_t>(ball.color);
            snum[a] += c;
            for (std::size_t b = 0; b < m; ++b) pnum[a * m + b] += c * ball.deg.counts[b];
        }
        const double den = static_cast<double>(L.denom);
        for (std::size_t a = 0; a < m; ++a) sigma.w[a] = static_cast<double>(snum[a]) / den;
        for (std::size_t i = 0; i < m * m; ++i) pi.w[i] = static_cast<double>(pnum[i]) / den;
    } else {
        for (const auto& [ball, w] : L.atoms) {
            const auto a = static_cast<std::size_t>(ball.color);
            sigma.w[a] += w;
            for (std::size_t b = 0; b < m; ++b) pi.w[a * m + b] += w * ball.deg.counts[b];
        }
    }
    return {sigma, pi};
}

// Atom of the reshuffled representation: colors grouped first, degree vectors
// second. The map is a bijection on atoms.
struct ReshuffledAtom {
    std::pair<std::int32_t, std::int32_t> colors;
    std::pair<DegreeVector, DegreeVector> degrees;

    bool operator==(const ReshuffledAtom& other) const {
        return colors == other.colors && degrees.first == other.degrees.first &&
               degrees.second == other.degrees.second;
    }
    bool operator<(const ReshuffledAtom& other) const {
        if (colors != other.colors) return colors < other.colors;
        if (!(degrees.first == other.degrees.first)) return degrees.first < other.degrees.first;
        return degrees.second < other.degrees.second;
    }
};

using ReshuffledMeasure = SparseMeasure<ReshuffledAtom>;

inline ReshuffledAtom reshuffle_atom(const std::pair<Ball, Ball>& p) {
    return ReshuffledAtom{{p.first.color, p.second.color}, {p.first.deg, p.second.deg}};
}

inline std::pair<Ball, Ball> unreshuffle_atom(const ReshuffledAtom& a) {
    return {Ball(a.colors.first, a.degrees.first), Ball(a.colors.second, a.degrees.second)};
}

inline ReshuffledMeasure reshuffle(const JointBallMeasure& nu) {
    ReshuffledMeasure out;
    for (const auto& [k, w] : nu.atoms) out.atoms[reshuffle_atom(k)] = w;
    for (const auto& [k, c] : nu.counts) out.counts[reshuffle_atom(k)] = c;
    out.denom = nu.denom;
    return out;
}

inline JointBallMeasure unreshuffle(const ReshuffledMeasure& omega) {
    JointBallMeasure out;
    for (const auto& [k, w] : omega.atoms) out.atoms[unreshuffle_atom(k)] = w;
    for (const auto& [k, c] : omega.counts) out.counts[unreshuffle_atom(k)] = c;
    out.denom = omega.denom;
    return out;
}

struct ConsistencyReport {
    bool consistent = true;
    double worst_gap = 0.0;   // largest |flow(a,b) - flow(b,a)| over both coordinates
    int coordinate = 0;       // coordinate achieving the worst gap
    std::size_t a = 0, b = 0;
};

// A joint ball measure is consistent when, in each coordinate, the induced
// color-pair flow flow_i(a,b) = sum_l l(b) * nu_i(a,l) is symmetric in (a,b).
// Graph-derived measures satisfy this exactly (edges are counted from both
// endpoints).
inline ConsistencyReport is_consistent(const JointBallMeasure& nu, double tol) {
    ConsistencyReport report;
    for (int i = 0; i < 2; ++i) {
        const BallMeasure mi = ball_marginal(nu, i);
        const auto [sigma, flow] = phi_statistics(mi);
        const std::size_t m = flow.m;
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = a + 1; b < m; ++b) {
                const double gap = std::abs(flow.w[a * m + b] - flow.w[b * m + a]);
                if (gap > report.worst_gap) {
                    report.worst_gap = gap;
                    report.coordinate = i;
                    report.a = a;
                    report.b = b;
                }
            }
        }
    }
    report.consistent = report.worst_gap <= tol;
    return report;
}

}  // namespace graphrd
