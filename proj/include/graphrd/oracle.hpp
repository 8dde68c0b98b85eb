#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "graphrd/constraint.hpp"
#include "graphrd/distortion.hpp"
#include "graphrd/errors.hpp"
#include "graphrd/graph.hpp"
#include "graphrd/kernel.hpp"
#include "graphrd/measure.hpp"
#include "graphrd/sampler.hpp"

namespace graphrd {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// Law with exact rational masses, keyed by canonical serializations.
struct ExactLaw {
    std::map<std::string, BigRat> atoms;

    bool sums_to_one() const {
        BigRat s = 0;
        for (const auto& [k, p] : atoms) s += p;
        return s == 1;
    }
};

namespace detail {

inline BigInt factorial(std::int64_t k) {
    BigInt f = 1;
    for (std::int64_t i = 2; i <= k; ++i) f *= i;
    return f;
}

inline BigInt binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return 0;
    BigInt out = 1;
    for (std::int64_t i = 0; i < k; ++i) {
        out *= n - i;
        out /= i + 1;
    }
    return out;
}

// n! / prod parts_i! for parts summing to n.
inline BigInt multinomial(std::int64_t n, const std::vector<std::int64_t>& parts) {
    BigInt out = factorial(n);
    for (auto p : parts) out /= factorial(p);
    return out;
}

}  // namespace detail

// Canonical graph key: colors in vertex order, then the sorted edge list.
inline std::string graph_key(const ColoredGraph& g, const Alphabet& alphabet) {
    std::string key = "colors=";
    for (std::size_t v = 0; v < g.n(); ++v) {
        if (v) key += ',';
        key += alphabet.name(static_cast<std::size_t>(g.color(v)));
    }
    key += ";edges=";
    bool first = true;
    for (const auto& [u, v] : g.edges()) {
        if (!first) key += ',';
        first = false;
        key += std::to_string(u) + "-" + std::to_string(v);
    }
    return key;
}

// Canonical occupancy key: sorted atoms with exact counts.
inline std::string occupancy_key(const BallMeasure& nu, const Alphabet& alphabet) {
    if (!nu.has_counts()) throw ValidationError("occupancy key needs exact counts");
    std::string key;
    bool first = true;
    for (const auto& [ball, c] : nu.counts) {
        if (!first) key += ';';
        first = false;
        key += format_ball(ball, alphabet) + "x" + std::to_string(c);
    }
    return key;
}

// Exact number of admissible graphs: colorings times per-pair subset counts.
inline BigInt admissible_graph_count(const GraphConstraint& c) {
    BigInt total = detail::factorial(static_cast<std::int64_t>(c.n));
    for (std::size_t a = 0; a < c.num_colors(); ++a) {
        total /= detail::factorial(c.color_count[a]);
    }
    for (std::size_t a = 0; a < c.num_colors(); ++a) {
        for (std::size_t b = a; b < c.num_colors(); ++b) {
            if (c.edges(a, b) > 0) {
                total *= detail::binomial(c.pair_capacity(a, b), c.edges(a, b));
            }
        }
    }
    return total;
}

namespace detail {

// Visits every admissible graph exactly once: all distinct color
// arrangements, and for each one all combinations of edge subsets per pair.
inline void for_each_admissible_graph(const GraphConstraint& c, double guard,
                                      const std::function<void(const ColoredGraph&)>& fn) {
    const BigInt total = admissible_graph_count(c);
    const double estimate = total.convert_to<double>();
    if (estimate > guard) {
        throw ExplosionError("admissible set holds about " + std::to_string(estimate) +
                                 " graphs (guard " + std::to_string(guard) + ")",
                             estimate);
    }
    const std::size_t m = c.num_colors();
    std::vector<std::int32_t> colors;
    for (std::size_t a = 0; a < m; ++a) {
        colors.insert(colors.end(), static_cast<std::size_t>(c.color_count[a]),
                      static_cast<std::int32_t>(a));
    }

    struct PairTask {
        std::size_t a, b;
        std::int64_t want, pool;
    };
    std::vector<PairTask> tasks;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            if (c.edges(a, b) > 0) tasks.push_back({a, b, c.edges(a, b), c.pair_capacity(a, b)});
        }
    }

    std::vector<std::vector<std::int32_t>> classes(m);
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;

    std::function<void(std::size_t)> recurse = [&](std::size_t depth) {
        if (depth == tasks.size()) {
            fn(ColoredGraph(m, colors, edges));
            return;
        }
        const auto& task = tasks[depth];
        const auto& va = classes[task.a];
        const auto& vb = classes[task.b];
        const auto nb = static_cast<std::int64_t>(vb.size());
        // Lexicographic combinations of {0..pool-1} of size `want`.
        std::vector<std::int64_t> idx(static_cast<std::size_t>(task.want));
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::int64_t>(i);
        for (;;) {
            const std::size_t base = edges.size();
            for (const std::int64_t id : idx) {
                if (task.a == task.b) {
                    const auto [i, j] = unrank_within(id, static_cast<std::int64_t>(va.size()));
                    edges.emplace_back(va[static_cast<std::size_t>(i)],
                                       va[static_cast<std::size_t>(j)]);
                } else {
                    edges.emplace_back(va[static_cast<std::size_t>(id / nb)],
                                       vb[static_cast<std::size_t>(id % nb)]);
                }
            }
            recurse(depth + 1);
            edges.resize(base);
            // Advance the combination.
            std::size_t i = idx.size();
            while (i > 0 &&
                   idx[i - 1] == task.pool - static_cast<std::int64_t>(idx.size() - (i - 1))) {
                --i;
            }
            if (i == 0) break;
            idx[i - 1] += 1;
            for (std::size_t j = i; j < idx.size(); ++j) idx[j] = idx[j - 1] + 1;
        }
    };

    // next_permutation over the ascending multiset enumerates each distinct
    // coloring once.
    do {
        for (auto& cls : classes) cls.clear();
        for (std::size_t v = 0; v < colors.size(); ++v) {
            classes[static_cast<std::size_t>(colors[v])].push_back(static_cast<std::int32_t>(v));
        }
        recurse(0);
    } while (std::next_permutation(colors.begin(), colors.end()));
}

}  // namespace detail

// Uniform law over the admissible set, exhaustively enumerated.
inline ExactLaw enumerate_graphs(const GraphConstraint& c, const Alphabet& alphabet,
                                 double guard = 1e7) {
    ExactLaw law;
    const BigInt total = admissible_graph_count(c);
    detail::for_each_admissible_graph(
        c, guard, [&](const ColoredGraph& g) { law.atoms[graph_key(g, alphabet)] = BigRat(1, total); });
    return law;
}

// Q_n(B(x,d)) = #{y admissible : distortion(x,y) <= d} / #admissible, exact.
inline BigRat exact_match_probability(const ColoredGraph& x, const DistortionFn& rho, double d,
                                      const GraphConstraint& c, double guard = 1e7) {
    if (x.n() != c.n) throw ValidationError("source graph size does not match the constraint");
    BigInt hits = 0;
    BigInt total = 0;
    detail::for_each_admissible_graph(c, guard, [&](const ColoredGraph& y) {
        total += 1;
        if (distortion(x, y, rho) <= d) hits += 1;
    });
    return BigRat(hits, total);
}

struct AllocationLawEntry {
    std::string key;
    BallMeasure occupancy;
    BigRat prob;
};

// Exact law of the occupancy measure by enumerating every pick sequence with
// uniform weight. The coloring is fixed to the canonical ascending
// arrangement; the law of the occupancy measure does not depend on it.
inline std::vector<AllocationLawEntry> allocation_law_detailed(const GraphConstraint& c,
                                                               const Alphabet& alphabet,
                                                               double guard = 1e7) {
    const std::size_t m = c.num_colors();
    double estimate = 1.0;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            const double picks = static_cast<double>(c.color_count[a]) *
                                 static_cast<double>(c.color_count[b]);
            for (std::int64_t k = 0; k < c.edges(a, b); ++k) estimate *= picks;
        }
    }
    if (estimate > guard) {
        throw ExplosionError("allocation law would enumerate about " + std::to_string(estimate) +
                                 " pick sequences (guard " + std::to_string(guard) + ")",
                             estimate);
    }

    std::vector<std::int32_t> colors;
    std::vector<std::vector<std::int32_t>> classes(m);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::int64_t i = 0; i < c.color_count[a]; ++i) {
            classes[a].push_back(static_cast<std::int32_t>(colors.size()));
            colors.push_back(static_cast<std::int32_t>(a));
        }
    }

    struct Step {
        std::size_t a, b;
    };
    std::vector<Step> steps;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            for (std::int64_t k = 0; k < c.edges(a, b); ++k) steps.push_back({a, b});
        }
    }

    std::vector<DegreeVector> bins(c.n, DegreeVector(m));
    std::map<std::string, std::pair<BallMeasure, BigInt>> acc;
    BigInt sequences = 0;

    std::function<void(std::size_t)> recurse = [&](std::size_t depth) {
        if (depth == steps.size()) {
            AllocationState alloc{m, colors, bins};
            BallMeasure occ = occupancy_measure(alloc);
            auto& slot = acc[occupancy_key(occ, alphabet)];
            if (slot.second == 0) slot.first = std::move(occ);
            slot.second += 1;
            sequences += 1;
            return;
        }
        const auto [a, b] = steps[depth];
        for (const auto v1 : classes[a]) {
            for (const auto v2 : classes[b]) {
                bins[static_cast<std::size_t>(v1)].counts[b] += 1;
                bins[static_cast<std::size_t>(v2)].counts[a] += 1;
                recurse(depth + 1);
                bins[static_cast<std::size_t>(v1)].counts[b] -= 1;
                bins[static_cast<std::size_t>(v2)].counts[a] -= 1;
            }
        }
    };
    recurse(0);

    std::vector<AllocationLawEntry> out;
    out.reserve(acc.size());
    for (auto& [key, slot] : acc) {
        out.push_back({key, std::move(slot.first), BigRat(slot.second, sequences)});
    }
    return out;
}

inline ExactLaw allocation_law_exact(const GraphConstraint& c, const Alphabet& alphabet,
                                     double guard = 1e7) {
    ExactLaw law;
    for (auto& entry : allocation_law_detailed(c, alphabet, guard)) {
        law.atoms[entry.key] = entry.prob;
    }
    return law;
}

// Probability of an occupancy class: per color a multinomial over bins, and
// per ordered pair (a,b) the number of orderings of the dropped b-balls over
// uniform bin picks,
//   prod_a C(N_a; {n nu(a,l)}) * prod_(a,b) (n pi(a,b))! / prod_l (l(b)!)^{n nu(a,l)}
//        * (1/N_a)^{n pi(a,b)}.
inline BigRat tclass_probability_exact(const BallMeasure& nu, const GraphConstraint& c) {
    const std::size_t m = c.num_colors();
    // Exact integer counts n*nu per atom.
    std::map<Ball, std::int64_t> counts;
    if (nu.has_counts() && nu.denom == static_cast<std::int64_t>(c.n)) {
        for (const auto& [ball, cnt] : nu.counts) counts[ball] = cnt;
    } else {
        for (const auto& [ball, w] : nu.atoms) {
            const double exact = w * static_cast<double>(c.n);
            const double rounded = std::nearbyint(exact);
            if (std::abs(exact - rounded) > 1e-9) {
                throw ValidationError("occupancy measure has non-integral counts");
            }
            counts[ball] = static_cast<std::int64_t>(rounded);
        }
    }
    for (const auto& [ball, cnt] : counts) {
        if (ball.deg.size() != m) throw ValidationError("occupancy arity mismatch");
    }

    // Per-color totals must reproduce the color counts, and per ordered pair
    // (a,b) the b-ball totals must reproduce n*pi(a,b); otherwise the class is
    // impossible.
    std::vector<std::int64_t> color_total(m, 0);
    std::vector<std::int64_t> ball_total(m * m, 0);
    for (const auto& [ball, cnt] : counts) {
        if (cnt < 0) throw ValidationError("occupancy counts must be nonnegative");
        const auto a = static_cast<std::size_t>(ball.color);
        color_total[a] += cnt;
        for (std::size_t b = 0; b < m; ++b) ball_total[a * m + b] += cnt * ball.deg.counts[b];
    }
    for (std::size_t a = 0; a < m; ++a) {
        if (color_total[a] != c.color_count[a]) return BigRat(0);
        for (std::size_t b = 0; b < m; ++b) {
            const std::int64_t want = c.edges(a, b) * (a == b ? 2 : 1);
            if (ball_total[a * m + b] != want) return BigRat(0);
        }
    }

    BigRat prob = 1;
    for (std::size_t a = 0; a < m; ++a) {
        if (c.color_count[a] == 0) continue;
        std::vector<std::int64_t> parts;
        for (const auto& [ball, cnt] : counts) {
            if (static_cast<std::size_t>(ball.color) == a && cnt > 0) parts.push_back(cnt);
        }
        prob *= detail::multinomial(c.color_count[a], parts);
        for (std::size_t b = 0; b < m; ++b) {
            const std::int64_t dropped = c.edges(a, b) * (a == b ? 2 : 1);
            if (dropped == 0) continue;
            BigInt orderings = detail::factorial(dropped);
            for (const auto& [ball, cnt] : counts) {
                if (static_cast<std::size_t>(ball.color) != a || cnt == 0) continue;
                const BigInt f = detail::factorial(ball.deg.counts[b]);
                for (std::int64_t r = 0; r < cnt; ++r) orderings /= f;
            }
            prob *= orderings;
            BigInt denom = 1;
            for (std::int64_t r = 0; r < dropped; ++r) denom *= c.color_count[a];
            prob /= denom;
        }
    }
    return prob;
}

inline double tclass_probability(const BallMeasure& nu, const GraphConstraint& c) {
    return tclass_probability_exact(nu, c).convert_to<double>();
}

// Primal grid estimate of R(d): smallest H(nu_t || K (x) K) over grid tilts
// whose mean distortion does not exceed d + slack. Sums run directly over the
// support (per-row shift only), independent of the Legendre route. The slack
// admits tilts whose mean sits at d up to root-finding error; it perturbs the
// value by at most |t| * slack.
inline double rate_bruteforce(const Kernel& K, const DistortionFn& rho, double d,
                              const std::vector<double>& t_grid, double slack = 1e-9) {
    const std::size_t A = K.support.size();
    if (A == 0) throw ValidationError("kernel has empty support");
    std::vector<double> rmat(A * A);
    for (std::size_t x = 0; x < A; ++x) {
        for (std::size_t y = 0; y < A; ++y) {
            rmat[x * A + y] = rho(K.support[x], K.support[y]);
        }
    }
    double best = kInf;
    std::vector<double> w(A);
    for (const double t : t_grid) {
        double mean = 0.0;
        double h = 0.0;
        for (std::size_t x = 0; x < A; ++x) {
            double rmin = rmat[x * A];
            for (std::size_t y = 1; y < A; ++y) rmin = std::min(rmin, rmat[x * A + y]);
            double z = 0.0;
            for (std::size_t y = 0; y < A; ++y) {
                w[y] = K.probs[y] * std::exp(t * (rmat[x * A + y] - rmin));
                z += w[y];
            }
            const double logz = std::log(z);
            for (std::size_t y = 0; y < A; ++y) {
                const double v = K.probs[x] * w[y] / z;
                if (v <= 0.0) continue;
                mean += v * rmat[x * A + y];
                h += v * (t * (rmat[x * A + y] - rmin) - logz);
            }
        }
        if (mean <= d + slack) best = std::min(best, h);
    }
    return best;
}

inline void write_exact_law_csv(std::ostream& os, const ExactLaw& law) {
    os << "key,numerator,denominator\n";
    for (const auto& [key, p] : law.atoms) {
        os << '"' << key << "\"," << boost::multiprecision::numerator(p).str() << ','
           << boost::multiprecision::denominator(p).str() << '\n';
    }
}

}  // namespace graphrd
