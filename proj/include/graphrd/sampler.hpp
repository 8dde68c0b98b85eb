#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "graphrd/constraint.hpp"
#include "graphrd/errors.hpp"
#include "graphrd/graph.hpp"
#include "graphrd/measure.hpp"
#include "graphrd/rng.hpp"

namespace graphrd {

namespace detail {

// Lays out the fixed color multiset in ascending order, shuffles it, and
// rebuilds the per-color vertex lists. This is the first consumer of the
// random stream for every sampling routine.
inline void sample_colors(const GraphConstraint& c, Rng& rng, std::vector<std::int32_t>& colors,
                          std::vector<std::vector<std::int32_t>>& classes) {
    colors.clear();
    colors.reserve(c.n);
    for (std::size_t a = 0; a < c.num_colors(); ++a) {
        colors.insert(colors.end(), static_cast<std::size_t>(c.color_count[a]),
                      static_cast<std::int32_t>(a));
    }
    rng.shuffle(colors);
    classes.resize(c.num_colors());
    for (auto& cls : classes) cls.clear();
    for (std::size_t v = 0; v < colors.size(); ++v) {
        classes[static_cast<std::size_t>(colors[v])].push_back(static_cast<std::int32_t>(v));
    }
}

// Rank of the pair (i,j), i<j, in the lexicographic list of all 2-subsets of
// {0..na-1}.
inline std::int64_t rank_within(std::int64_t i, std::int64_t j, std::int64_t na) {
    return i * na - i * (i + 1) / 2 + (j - i - 1);
}

inline std::pair<std::int64_t, std::int64_t> unrank_within(std::int64_t idx, std::int64_t na) {
    std::int64_t i = 0;
    std::int64_t row = na - 1;
    while (idx >= row) {
        idx -= row;
        ++i;
        --row;
    }
    return {i, i + 1 + idx};
}

// Floyd's uniform m-subset of {0..pool-1}; indices are appended to `out` in
// the order they are generated.
inline void floyd_subset(Rng& rng, std::int64_t pool, std::int64_t m,
                         std::unordered_set<std::int64_t>& chosen,
                         std::vector<std::int64_t>& out) {
    chosen.clear();
    out.clear();
    for (std::int64_t j = pool - m; j < pool; ++j) {
        const auto t =
            static_cast<std::int64_t>(rng.uniform_below(static_cast<std::uint64_t>(j + 1)));
        if (chosen.insert(t).second) {
            out.push_back(t);
        } else {
            chosen.insert(j);
            out.push_back(j);
        }
    }
}

}  // namespace detail

// Samples graphs subject to one constraint, reusing internal buffers across
// samples. Instances are not safe to share between threads; each thread keeps
// its own.
class GraphSampler {
public:
    explicit GraphSampler(const GraphConstraint& c) : c_(&c) {
        chosen_.reserve(static_cast<std::size_t>(2 * c.total_edges() + 8));
    }

    // Colors plus the edge list, written into the reusable buffers.
    void sample_raw(std::uint64_t seed) {
        Rng rng(seed);
        detail::sample_colors(*c_, rng, colors_, classes_);
        edges_.clear();
        const std::size_t m = c_->num_colors();
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = a; b < m; ++b) {
                const std::int64_t want = c_->edges(a, b);
                if (want == 0) continue;
                detail::floyd_subset(rng, c_->pair_capacity(a, b), want, chosen_, picks_);
                const auto& va = classes_[a];
                const auto& vb = classes_[b];
                for (const std::int64_t idx : picks_) {
                    if (a == b) {
                        const auto [i, j] =
                            detail::unrank_within(idx, static_cast<std::int64_t>(va.size()));
                        edges_.emplace_back(va[static_cast<std::size_t>(i)],
                                            va[static_cast<std::size_t>(j)]);
                    } else {
                        const auto nb = static_cast<std::int64_t>(vb.size());
                        edges_.emplace_back(va[static_cast<std::size_t>(idx / nb)],
                                            vb[static_cast<std::size_t>(idx % nb)]);
                    }
                }
            }
        }
    }

    ColoredGraph sample(std::uint64_t seed) {
        sample_raw(seed);
        return ColoredGraph(c_->num_colors(), colors_, edges_);
    }

    // Per-vertex degree rows (n x num_colors, row-major) for the same sample
    // that sample(seed) would return, without building a graph object.
    void sample_balls(std::uint64_t seed, std::vector<std::int32_t>& colors,
                      std::vector<std::int32_t>& degree_rows) {
        sample_raw(seed);
        const std::size_t m = c_->num_colors();
        colors = colors_;
        degree_rows.assign(c_->n * m, 0);
        for (const auto& [u, v] : edges_) {
            degree_rows[static_cast<std::size_t>(u) * m +
                        static_cast<std::size_t>(colors_[static_cast<std::size_t>(v)])] += 1;
            degree_rows[static_cast<std::size_t>(v) * m +
                        static_cast<std::size_t>(colors_[static_cast<std::size_t>(u)])] += 1;
        }
    }

private:
    const GraphConstraint* c_;
    std::vector<std::int32_t> colors_;
    std::vector<std::vector<std::int32_t>> classes_;
    std::vector<std::pair<std::int32_t, std::int32_t>> edges_;
    std::unordered_set<std::int64_t> chosen_;
    std::vector<std::int64_t> picks_;
};

// Uniform draw from the admissible set: a uniform arrangement of the color
// multiset and, independently per color pair, a uniform m(a,b)-subset of the
// pair pool.
inline ColoredGraph sample_graph(const GraphConstraint& c, std::uint64_t seed) {
    return GraphSampler(c).sample(seed);
}

// Balls-in-bins state: every vertex is a bin, bins[v](b) counts the b-colored
// balls dropped into v.
struct AllocationState {
    std::size_t num_colors = 0;
    std::vector<std::int32_t> colors;
    std::vector<DegreeVector> bins;
};

inline BallMeasure occupancy_measure(const AllocationState& alloc) {
    BallMeasure out;
    for (std::size_t v = 0; v < alloc.bins.size(); ++v) {
        out.add_count(Ball(alloc.colors[v], alloc.bins[v]));
    }
    out.finalize_counts(static_cast<std::int64_t>(alloc.bins.size()));
    return out;
}

// With-replacement model: for each pair {a,b} and each of the m(a,b) steps,
// draw V1 uniform in V(a) and V2 uniform in V(b) independently, then drop a
// b-ball into V1 and an a-ball into V2.
inline AllocationState sample_allocation(const GraphConstraint& c, std::uint64_t seed) {
    Rng rng(seed);
    AllocationState alloc;
    alloc.num_colors = c.num_colors();
    std::vector<std::vector<std::int32_t>> classes;
    detail::sample_colors(c, rng, alloc.colors, classes);
    alloc.bins.assign(c.n, DegreeVector(c.num_colors()));
    const std::size_t m = c.num_colors();
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            const std::int64_t steps = c.edges(a, b);
            const auto& va = classes[a];
            const auto& vb = classes[b];
            for (std::int64_t k = 0; k < steps; ++k) {
                const auto v1 = va[rng.uniform_below(va.size())];
                const auto v2 = vb[rng.uniform_below(vb.size())];
                alloc.bins[static_cast<std::size_t>(v1)].counts[b] += 1;
                alloc.bins[static_cast<std::size_t>(v2)].counts[a] += 1;
            }
        }
    }
    return alloc;
}

struct CouplingReport {
    ColoredGraph graph;
    AllocationState allocation;
    // Mismatch counters per color pair (a <= b); zero entries are kept for
    // every pair with m(a,b) > 0.
    std::map<std::pair<std::int32_t, std::int32_t>, std::int64_t> mismatch;
    double tv = 0.0;

    std::int64_t total_mismatch() const noexcept {
        std::int64_t s = 0;
        for (const auto& [k, v] : mismatch) s += v;
        return s;
    }
};

// Joint construction: the allocation consumes every drawn pair; the graph
// reuses the pair as an edge unless it is degenerate (V1 = V2) or already
// present, in which case a uniformly random fresh admissible edge replaces it
// and the mismatch counter B(a,b) increments. Redraws use rejection while the
// pool is at most half used and explicit enumeration of the free pool beyond
// that.
inline CouplingReport sample_coupled(const GraphConstraint& c, std::uint64_t seed) {
    Rng rng(seed);
    CouplingReport report;
    report.allocation.num_colors = c.num_colors();
    std::vector<std::vector<std::int32_t>> classes;
    detail::sample_colors(c, rng, report.allocation.colors, classes);
    report.allocation.bins.assign(c.n, DegreeVector(c.num_colors()));

    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    edges.reserve(static_cast<std::size_t>(c.total_edges()));
    std::unordered_set<std::int64_t> used;
    std::vector<std::int64_t> free_pool;

    const std::size_t m = c.num_colors();
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            const std::int64_t steps = c.edges(a, b);
            if (steps == 0) continue;
            auto& counter = report.mismatch[{static_cast<std::int32_t>(a),
                                             static_cast<std::int32_t>(b)}];
            const auto& va = classes[a];
            const auto& vb = classes[b];
            const auto na = static_cast<std::int64_t>(va.size());
            const auto nb = static_cast<std::int64_t>(vb.size());
            const std::int64_t pool = c.pair_capacity(a, b);
            used.clear();
            for (std::int64_t k = 0; k < steps; ++k) {
                const auto r1 = static_cast<std::int64_t>(
                    rng.uniform_below(static_cast<std::uint64_t>(na)));
                const auto r2 = static_cast<std::int64_t>(
                    rng.uniform_below(static_cast<std::uint64_t>(nb)));
                const auto v1 = va[static_cast<std::size_t>(r1)];
                const auto v2 = vb[static_cast<std::size_t>(r2)];
                report.allocation.bins[static_cast<std::size_t>(v1)].counts[b] += 1;
                report.allocation.bins[static_cast<std::size_t>(v2)].counts[a] += 1;

                std::int64_t idx = -1;
                if (a == b) {
                    if (r1 != r2) {
                        idx = detail::rank_within(std::min(r1, r2), std::max(r1, r2), na);
                    }
                } else {
                    idx = r1 * nb + r2;
                }
                if (idx < 0 || used.count(idx)) {
                    counter += 1;
                    if (static_cast<std::int64_t>(used.size()) * 2 <= pool) {
                        do {
                            idx = static_cast<std::int64_t>(
                                rng.uniform_below(static_cast<std::uint64_t>(pool)));
                        } while (used.count(idx));
                    } else {
                        free_pool.clear();
                        for (std::int64_t j = 0; j < pool; ++j) {
                            if (!used.count(j)) free_pool.push_back(j);
                        }
                        idx = free_pool[rng.uniform_below(free_pool.size())];
                    }
                }
                used.insert(idx);
                if (a == b) {
                    const auto [i, j] = detail::unrank_within(idx, na);
                    edges.emplace_back(va[static_cast<std::size_t>(i)],
                                       va[static_cast<std::size_t>(j)]);
                } else {
                    edges.emplace_back(va[static_cast<std::size_t>(idx / nb)],
                                       vb[static_cast<std::size_t>(idx % nb)]);
                }
            }
        }
    }

    report.graph =
        ColoredGraph(c.num_colors(), report.allocation.colors, std::move(edges));
    report.tv = total_variation(ball_measure(report.graph), occupancy_measure(report.allocation));
    return report;
}

// Collision probability p_[k] of the k-th step for a pair with m edges, as
// displayed: p_[k] = (1/m) 1{diag} + (1 - (1/m) 1{diag}) (k-1)/m^2.
inline double mismatch_prob(std::int64_t k, std::int64_t m, bool diagonal) {
    if (k < 1 || k > m) throw ValidationError("step index k must satisfy 1 <= k <= m");
    const double md = static_cast<double>(m);
    const double diag = diagonal ? 1.0 / md : 0.0;
    return diag + (1.0 - diag) * static_cast<double>(k - 1) / (md * md);
}

inline double bennett_e(double t) {
    if (!(t >= 0.0)) throw ValidationError("bennett_e requires t >= 0");
    if (t == 0.0) return 0.0;
    return (1.0 + t) * std::log1p(t) - t;
}

// Upper tail bound exp(-m*var_rate*e(delta/(m*var_rate))) for a sum of m
// bounded centered terms whose variance proxy is m*var_rate; delta is the
// absolute deviation of the sum.
inline double bennett_tail(std::int64_t m, double var_rate, double delta) {
    if (m < 1) throw ValidationError("bennett_tail requires m >= 1");
    if (!(var_rate > 0.0)) throw ValidationError("bennett_tail requires var_rate > 0");
    if (!(delta >= 0.0)) throw ValidationError("bennett_tail requires delta >= 0");
    const double v = static_cast<double>(m) * var_rate;
    return std::exp(-v * bennett_e(delta / v));
}

}  // namespace graphrd
