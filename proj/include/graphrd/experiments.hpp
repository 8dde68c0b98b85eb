#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "graphrd/constraint.hpp"
#include "graphrd/distortion.hpp"
#include "graphrd/errors.hpp"
#include "graphrd/io.hpp"
#include "graphrd/kernel.hpp"
#include "graphrd/measure.hpp"
#include "graphrd/rng.hpp"
#include "graphrd/sampler.hpp"

namespace graphrd {

// Stream tags for derived seeds. Fixed constants: changing them changes every
// artifact, so they are part of the output contract.
namespace stream {
inline constexpr std::uint64_t kSource = 1;
inline constexpr std::uint64_t kCodeword = 2;
inline constexpr std::uint64_t kCoupling = 3;
inline constexpr std::uint64_t kLln = 4;
inline constexpr std::uint64_t kGen = 5;
}  // namespace stream

struct ConstraintFamily {
    Alphabet alphabet;
    ColorMeasure sigma;
    PairMeasure pi;
};

// Nearest feasible integer tables at a given n. Color counts by largest
// remainder (so they sum to n exactly), then edge counts rounded to nearest
// and capped by the capacity the rounded counts allow. The returned constraint
// carries the realized (sigma_n, pi_n).
inline GraphConstraint round_constraint(const ConstraintFamily& family, std::size_t n) {
    family.sigma.require_probability(1e-12);
    family.pi.require_valid();
    const std::size_t m = family.sigma.size();
    if (m != family.pi.m) throw ValidationError("sigma and pi disagree on the number of colors");
    if (n < 1) throw ValidationError("vertex count must be at least 1");

    GraphConstraint c;
    c.n = n;
    c.color_count.assign(m, 0);
    c.edge_count.assign(m * m, 0);

    std::int64_t assigned = 0;
    std::vector<std::pair<double, std::size_t>> remainders;
    for (std::size_t a = 0; a < m; ++a) {
        const double target = static_cast<double>(n) * family.sigma(a);
        const double base = std::floor(target);
        c.color_count[a] = static_cast<std::int64_t>(base);
        assigned += c.color_count[a];
        remainders.emplace_back(target - base, a);
    }
    // Largest remainder first; ties resolved by color index.
    std::sort(remainders.begin(), remainders.end(), [](const auto& lhs, const auto& rhs) {
        if (lhs.first != rhs.first) return lhs.first > rhs.first;
        return lhs.second < rhs.second;
    });
    const std::int64_t deficit = static_cast<std::int64_t>(n) - assigned;
    for (std::int64_t k = 0; k < deficit; ++k) {
        c.color_count[remainders[static_cast<std::size_t>(k) % m].second] += 1;
    }

    c.sigma = ColorMeasure(m);
    for (std::size_t a = 0; a < m; ++a) {
        c.sigma.w[a] = static_cast<double>(c.color_count[a]) / static_cast<double>(n);
    }

    c.pi = PairMeasure(m);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            const double divisor = (a == b) ? 2.0 : 1.0;
            const double target = static_cast<double>(n) * family.pi(a, b) / divisor;
            std::int64_t cnt = static_cast<std::int64_t>(std::nearbyint(target));
            cnt = std::max<std::int64_t>(0, std::min(cnt, c.pair_capacity(a, b)));
            c.edge_count[a * m + b] = cnt;
            c.edge_count[b * m + a] = cnt;
            const double realized =
                static_cast<double>(cnt) * divisor / static_cast<double>(n);
            c.pi.w[a * m + b] = realized;
            c.pi.w[b * m + a] = realized;
        }
    }
    return c;
}

struct EstimateRow {
    std::size_t n = 0;
    double d = 0.0;
    std::int64_t hits = 0;
    std::int64_t samples = 0;
    double p_hat = 0.0;
    double stderr_ = 0.0;
    double neg_log_rate = 0.0;  // -(1/n) log p_hat; +inf when hits = 0
    std::optional<double> zero_hit_bound;  // rule of three, present iff hits = 0
};

namespace detail {

inline void require_matches_constraint(const ColoredGraph& x, const GraphConstraint& c) {
    if (x.n() != c.n || x.num_colors() != c.num_colors()) {
        throw ValidationError("source graph shape does not match the constraint");
    }
    const std::size_t m = c.num_colors();
    std::vector<std::int64_t> cc(m, 0);
    for (auto col : x.colors()) cc[static_cast<std::size_t>(col)] += 1;
    for (std::size_t a = 0; a < m; ++a) {
        if (cc[a] != c.color_count[a]) {
            throw ValidationError("source graph color counts do not match the constraint");
        }
    }
    std::vector<std::int64_t> ec(m * m, 0);
    for (const auto& [u, v] : x.edges()) {
        const auto a = static_cast<std::size_t>(x.color(u));
        const auto b = static_cast<std::size_t>(x.color(v));
        ec[std::min(a, b) * m + std::max(a, b)] += 1;
    }
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            if (ec[a * m + b] != c.edges(a, b)) {
                throw ValidationError("source graph edge counts do not match the constraint");
            }
        }
    }
}

// Counts d-matches over the sample index range [lo, hi). Per-sample seeds are
// derived from the estimate seed and the global sample index, so any partition
// of the range yields the same total.
inline std::int64_t count_matches_range(const ColoredGraph& x, const DistortionFn& rho, double d,
                                        const GraphConstraint& c, std::uint64_t estimate_seed,
                                        std::int64_t lo, std::int64_t hi) {
    const std::size_t n = c.n;
    const std::size_t m = c.num_colors();
    const double nd = static_cast<double>(n);

    const auto x_rows = ball_degrees(x);
    std::vector<std::int32_t> xflat(n * m);
    std::vector<double> xtot(n);
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t b = 0; b < m; ++b) xflat[v * m + b] = x_rows[v].counts[b];
        xtot[v] = static_cast<double>(x_rows[v].total());
    }
    const auto& xcolors = x.colors();

    GraphSampler sampler(c);
    std::vector<std::int32_t> ycolors;
    std::vector<std::int32_t> yrows;
    std::int64_t hits = 0;

    for (std::int64_t i = lo; i < hi; ++i) {
        sampler.sample_balls(derive_seed(estimate_seed, static_cast<std::uint64_t>(i)), ycolors,
                             yrows);
        double s = 0.0;
        bool miss = false;
        for (std::size_t v = 0; v < n; ++v) {
            double term;
            switch (rho.kind()) {
                case DistortionKind::ball_hamming: {
                    bool eq = xcolors[v] == ycolors[v];
                    for (std::size_t b = 0; eq && b < m; ++b) {
                        eq = xflat[v * m + b] == yrows[v * m + b];
                    }
                    term = eq ? 0.0 : 1.0;
                    break;
                }
                case DistortionKind::color_hamming:
                    term = xcolors[v] == ycolors[v] ? 0.0 : 1.0;
                    break;
                case DistortionKind::squared_degree_diff: {
                    std::int64_t yt = 0;
                    for (std::size_t b = 0; b < m; ++b) yt += yrows[v * m + b];
                    const double diff = xtot[v] - static_cast<double>(yt);
                    term = diff * diff;
                    break;
                }
                default: {
                    DegreeVector dx(m), dy(m);
                    for (std::size_t b = 0; b < m; ++b) {
                        dx.counts[b] = xflat[v * m + b];
                        dy.counts[b] = yrows[v * m + b];
                    }
                    term = rho(Ball(xcolors[v], std::move(dx)), Ball(ycolors[v], std::move(dy)));
                }
            }
            s += term;
            if (s > d * nd && s / nd > d) {
                miss = true;
                break;
            }
        }
        if (!miss && s / nd <= d) ++hits;
    }
    return hits;
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) throw ValidationError("median of an empty sequence");
    std::sort(xs.begin(), xs.end());
    const std::size_t k = xs.size() / 2;
    if (xs.size() % 2 == 1) return xs[k];
    return 0.5 * (xs[k - 1] + xs[k]);
}

}  // namespace detail

// Direct Monte Carlo estimate of the d-match probability against `samples`
// independent codewords. Shards split the index range; hit counts are summed,
// so the result does not depend on the shard count.
inline EstimateRow estimate_match_probability(const ColoredGraph& x, const DistortionFn& rho,
                                              double d, const GraphConstraint& c,
                                              std::int64_t samples, std::uint64_t seed,
                                              int shards = 1) {
    if (samples < 1) throw ValidationError("samples must be at least 1");
    if (shards < 1) throw ValidationError("shard count must be at least 1");
    detail::require_matches_constraint(x, c);

    std::int64_t hits = 0;
    if (shards == 1) {
        hits = detail::count_matches_range(x, rho, d, c, seed, 0, samples);
    } else {
        const auto ns = static_cast<std::int64_t>(shards);
        std::vector<std::int64_t> partial(static_cast<std::size_t>(ns), 0);
        std::vector<std::thread> workers;
        const std::int64_t q = samples / ns;
        const std::int64_t r = samples % ns;
        std::int64_t lo = 0;
        for (std::int64_t k = 0; k < ns; ++k) {
            const std::int64_t hi = lo + q + (k < r ? 1 : 0);
            workers.emplace_back([&, k, lo, hi] {
                partial[static_cast<std::size_t>(k)] =
                    detail::count_matches_range(x, rho, d, c, seed, lo, hi);
            });
            lo = hi;
        }
        for (auto& w : workers) w.join();
        for (auto h : partial) hits += h;
    }

    EstimateRow row;
    row.n = c.n;
    row.d = d;
    row.hits = hits;
    row.samples = samples;
    row.p_hat = static_cast<double>(hits) / static_cast<double>(samples);
    row.stderr_ = std::sqrt(row.p_hat * (1.0 - row.p_hat) / static_cast<double>(samples));
    row.neg_log_rate =
        hits > 0 ? -std::log(row.p_hat) / static_cast<double>(c.n) : kInf;
    if (hits == 0) row.zero_hit_bound = 3.0 / static_cast<double>(samples);
    return row;
}

struct ExperimentConfig {
    ConstraintFamily family;
    DistortionFn rho;
    std::vector<std::size_t> n_list;
    std::vector<double> d_values;
    std::int64_t samples = 10000;
    std::uint64_t seed = 1;
    int shards = 1;
    int source_seeds = 1;
    double eps = 0.05;       // coupling exceedance threshold
    std::int64_t reps = 1000;  // coupled runs per n
    double tail_tol = 1e-12;
};

struct AepResult {
    double d = 0.0;
    double R_ref = 0.0;
    RateStatus R_status = RateStatus::exact;
    double d_min = 0.0;
    double d_av = 0.0;
    std::string warning;  // nonempty when d falls outside (d_min, d_av)
    std::vector<EstimateRow> rows;  // n-major, source-seed-minor
    std::vector<std::pair<std::size_t, double>> gaps;  // per n: median |nlr - R_ref|
};

// One source graph per (n, source seed); codeword estimates against the
// rounded constraint; gap medians against the limiting-kernel R(d).
inline AepResult aep_convergence(const ExperimentConfig& cfg) {
    if (cfg.n_list.empty()) throw ValidationError("aep experiment needs at least one n");
    if (cfg.d_values.empty()) throw ValidationError("aep experiment needs a distortion level");
    if (cfg.source_seeds < 1) throw ValidationError("source_seeds must be at least 1");
    const double d = cfg.d_values.front();

    const Kernel K =
        build_kernel(cfg.family.sigma, cfg.family.pi, cfg.tail_tol, cfg.family.alphabet);
    const LogMgf lm(K, cfg.rho);
    const RateResult rr = rate_distortion_with(lm, K.truncation_mass, d);

    AepResult out;
    out.d = d;
    out.R_ref = rr.R;
    out.R_status = rr.status;
    out.d_min = lm.d_min();
    out.d_av = lm.d_av();
    if (!(d > out.d_min && d < out.d_av)) {
        out.warning = "d lies outside (d_min, d_av); estimates still computed";
    }

    for (const std::size_t n : cfg.n_list) {
        const GraphConstraint c = round_constraint(cfg.family, n);
        GraphSampler source_sampler(c);
        std::vector<double> gaps_n;
        for (int j = 0; j < cfg.source_seeds; ++j) {
            const ColoredGraph x = source_sampler.sample(
                derive_seed(cfg.seed, stream::kSource, n, static_cast<std::uint64_t>(j)));
            EstimateRow row = estimate_match_probability(
                x, cfg.rho, d, c, cfg.samples,
                derive_seed(cfg.seed, stream::kCodeword, n, static_cast<std::uint64_t>(j)),
                cfg.shards);
            gaps_n.push_back(std::abs(row.neg_log_rate - rr.R));
            out.rows.push_back(std::move(row));
        }
        out.gaps.emplace_back(n, detail::median(std::move(gaps_n)));
    }
    return out;
}

struct CouplingRow {
    std::size_t n = 0;
    std::int32_t a = 0, b = 0;
    std::int64_t reps = 0;
    double mean_B = 0.0;
    double stderr_B = 0.0;
    double exceed_frac = 0.0;  // fraction of runs with tv >= eps
};

struct CouplingResult {
    double eps = 0.0;
    std::vector<CouplingRow> rows;
};

inline CouplingResult coupling_experiment(const ExperimentConfig& cfg) {
    if (cfg.n_list.empty()) throw ValidationError("coupling experiment needs at least one n");
    if (cfg.reps < 1) throw ValidationError("reps must be at least 1");
    CouplingResult out;
    out.eps = cfg.eps;
    for (const std::size_t n : cfg.n_list) {
        const GraphConstraint c = round_constraint(cfg.family, n);
        std::map<std::pair<std::int32_t, std::int32_t>, std::pair<double, double>> acc;
        std::int64_t exceed = 0;
        for (std::int64_t r = 0; r < cfg.reps; ++r) {
            const CouplingReport rep = sample_coupled(
                c, derive_seed(cfg.seed, stream::kCoupling, n, static_cast<std::uint64_t>(r)));
            for (const auto& [pair, B] : rep.mismatch) {
                auto& [sum, sumsq] = acc[pair];
                sum += static_cast<double>(B);
                sumsq += static_cast<double>(B) * static_cast<double>(B);
            }
            if (rep.tv >= cfg.eps) ++exceed;
        }
        const double reps = static_cast<double>(cfg.reps);
        for (const auto& [pair, stats] : acc) {
            CouplingRow row;
            row.n = n;
            row.a = pair.first;
            row.b = pair.second;
            row.reps = cfg.reps;
            row.mean_B = stats.first / reps;
            const double var = std::max(0.0, stats.second / reps - row.mean_B * row.mean_B);
            row.stderr_B = std::sqrt(var / reps);
            row.exceed_frac = static_cast<double>(exceed) / reps;
            out.rows.push_back(row);
        }
    }
    return out;
}

struct LlnRow {
    std::size_t n = 0;
    int seed_index = 0;
    double tv = 0.0;
};

// TV between a sampled graph's ball measure and the truncated kernel, per
// (n, seed).
inline std::vector<LlnRow> lln_experiment(const ExperimentConfig& cfg) {
    if (cfg.n_list.empty()) throw ValidationError("lln experiment needs at least one n");
    const Kernel K =
        build_kernel(cfg.family.sigma, cfg.family.pi, cfg.tail_tol, cfg.family.alphabet);
    const BallMeasure ref = kernel_measure(K);
    std::vector<LlnRow> out;
    for (const std::size_t n : cfg.n_list) {
        const GraphConstraint c = round_constraint(cfg.family, n);
        GraphSampler sampler(c);
        for (int j = 0; j < cfg.source_seeds; ++j) {
            const ColoredGraph g = sampler.sample(
                derive_seed(cfg.seed, stream::kLln, n, static_cast<std::uint64_t>(j)));
            out.push_back({n, j, total_variation(ball_measure(g), ref)});
        }
    }
    return out;
}

// CSV emitters. Headers are part of the output contract.

inline void write_aep_csv(std::ostream& os, const AepResult& result) {
    os << "n,d,hits,samples,p_hat,stderr,neg_log_rate,R_ref\n";
    for (const auto& row : result.rows) {
        os << row.n << ',' << format_double(row.d) << ',' << row.hits << ',' << row.samples << ','
           << format_double(row.p_hat) << ',' << format_double(row.stderr_) << ','
           << format_double(row.neg_log_rate) << ',' << format_double(result.R_ref) << '\n';
    }
}

inline void write_gap_csv(std::ostream& os, const AepResult& result) {
    os << "n,gap\n";
    for (const auto& [n, gap] : result.gaps) {
        os << n << ',' << format_double(gap) << '\n';
    }
}

inline void write_coupling_csv(std::ostream& os, const CouplingResult& result,
                               const Alphabet& alphabet) {
    os << "n,a,b,reps,mean_B,stderr_B,frac_tv_ge_eps\n";
    for (const auto& row : result.rows) {
        os << row.n << ',' << alphabet.name(static_cast<std::size_t>(row.a)) << ','
           << alphabet.name(static_cast<std::size_t>(row.b)) << ',' << row.reps << ','
           << format_double(row.mean_B) << ',' << format_double(row.stderr_B) << ','
           << format_double(row.exceed_frac) << '\n';
    }
}

inline void write_lln_csv(std::ostream& os, const std::vector<LlnRow>& rows) {
    os << "n,seed,tv\n";
    for (const auto& row : rows) {
        os << row.n << ',' << row.seed_index << ',' << format_double(row.tv) << '\n';
    }
}

// Flat record per color pair of one coupled run.
inline void write_coupling_report_csv(std::ostream& os, const CouplingReport& report,
                                      const Alphabet& alphabet) {
    os << "n,a,b,B,tv\n";
    for (const auto& [pair, B] : report.mismatch) {
        os << report.graph.n() << ',' << alphabet.name(static_cast<std::size_t>(pair.first))
           << ',' << alphabet.name(static_cast<std::size_t>(pair.second)) << ',' << B << ','
           << format_double(report.tv) << '\n';
    }
}

}  // namespace graphrd
