#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "graphrd/alphabet.hpp"
#include "graphrd/ball.hpp"
#include "graphrd/errors.hpp"

namespace graphrd {

// Simple undirected graph with colored vertices. Edges are kept canonical:
// endpoints ordered within each edge, edge list sorted, no loops, no
// duplicates.
class ColoredGraph {
public:
    ColoredGraph() = default;

    ColoredGraph(std::size_t num_colors, std::vector<std::int32_t> colors,
                 std::vector<std::pair<std::int32_t, std::int32_t>> edges)
        : num_colors_(num_colors), colors_(std::move(colors)), edges_(std::move(edges)) {
        if (colors_.empty()) throw ValidationError("graph must have at least one vertex");
        const auto n = static_cast<std::int32_t>(colors_.size());
        for (auto c : colors_) {
            if (c < 0 || static_cast<std::size_t>(c) >= num_colors_) {
                throw ValidationError("vertex color index out of range");
            }
        }
        for (auto& [u, v] : edges_) {
            if (u < 0 || v < 0 || u >= n || v >= n) {
                throw ValidationError("edge endpoint out of range");
            }
            if (u == v) throw ValidationError("self-loops are not allowed");
            if (u > v) std::swap(u, v);
        }
        std::sort(edges_.begin(), edges_.end());
        if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
            throw ValidationError("duplicate edge");
        }
    }

    std::size_t n() const noexcept { return colors_.size(); }
    std::size_t num_colors() const noexcept { return num_colors_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    std::int32_t color(std::size_t v) const { return colors_.at(v); }
    const std::vector<std::int32_t>& colors() const noexcept { return colors_; }
    const std::vector<std::pair<std::int32_t, std::int32_t>>& edges() const noexcept {
        return edges_;
    }

    bool operator==(const ColoredGraph& other) const noexcept {
        return num_colors_ == other.num_colors_ && colors_ == other.colors_ &&
               edges_ == other.edges_;
    }
    bool operator<(const ColoredGraph& other) const noexcept {
        if (colors_ != other.colors_) return colors_ < other.colors_;
        return edges_ < other.edges_;
    }

private:
    std::size_t num_colors_ = 0;
    std::vector<std::int32_t> colors_;
    std::vector<std::pair<std::int32_t, std::int32_t>> edges_;
};

// Neighbor counts by color for every vertex. Row v is the degree vector of v.
inline std::vector<DegreeVector> ball_degrees(const ColoredGraph& g) {
    std::vector<DegreeVector> rows(g.n(), DegreeVector(g.num_colors()));
    for (const auto& [u, v] : g.edges()) {
        rows[static_cast<std::size_t>(u)].counts[static_cast<std::size_t>(g.color(v))] += 1;
        rows[static_cast<std::size_t>(v)].counts[static_cast<std::size_t>(g.color(u))] += 1;
    }
    return rows;
}

inline Ball ball_of(const ColoredGraph& g, std::size_t v) {
    if (v >= g.n()) throw ValidationError("vertex index out of range");
    DegreeVector deg(g.num_colors());
    for (const auto& [a, b] : g.edges()) {
        if (static_cast<std::size_t>(a) == v) {
            deg.counts[static_cast<std::size_t>(g.color(b))] += 1;
        } else if (static_cast<std::size_t>(b) == v) {
            deg.counts[static_cast<std::size_t>(g.color(a))] += 1;
        }
    }
    return Ball(g.color(v), std::move(deg));
}

// Empirical color frequencies: sigma_n(a) = |{v : color(v) = a}| / n.
// Integer counts with one final division, so downstream identities that
// recompute the same integers reproduce these values bit for bit.
inline ColorMeasure color_measure(const ColoredGraph& g) {
    std::vector<std::int64_t> cnt(g.num_colors(), 0);
    for (auto c : g.colors()) cnt[static_cast<std::size_t>(c)] += 1;
    ColorMeasure sigma(g.num_colors());
    for (std::size_t a = 0; a < cnt.size(); ++a) {
        sigma.w[a] = static_cast<double>(cnt[a]) / static_cast<double>(g.n());
    }
    return sigma;
}

// Empirical edge intensities: pi_n(a,b) = (1/n) sum_v 1{color(v)=a} l_v(b).
// Off-diagonal entries equal e(a,b)/n; each a-a edge contributes 2 to the
// numerator of pi_n(a,a).
inline PairMeasure pair_measure(const ColoredGraph& g) {
    const std::size_t m = g.num_colors();
    std::vector<std::int64_t> num(m * m, 0);
    for (const auto& [u, v] : g.edges()) {
        const auto a = static_cast<std::size_t>(g.color(u));
        const auto b = static_cast<std::size_t>(g.color(v));
        num[a * m + b] += 1;
        num[b * m + a] += 1;
    }
    PairMeasure pi(m);
    for (std::size_t i = 0; i < num.size(); ++i) {
        pi.w[i] = static_cast<double>(num[i]) / static_cast<double>(g.n());
    }
    return pi;
}

// Text form:
//   line 1: "<n> <num_edges>"
//   next n lines: "<vertex> <color-name>"
//   next num_edges lines: "<u> <v>" with u < v, sorted
// Writing then reading reproduces the graph exactly.
inline void write_graph(std::ostream& os, const ColoredGraph& g, const Alphabet& alphabet) {
    os << g.n() << ' ' << g.edge_count() << '\n';
    for (std::size_t v = 0; v < g.n(); ++v) {
        os << v << ' ' << alphabet.name(static_cast<std::size_t>(g.color(v))) << '\n';
    }
    for (const auto& [u, v] : g.edges()) os << u << ' ' << v << '\n';
}

inline ColoredGraph read_graph(std::istream& is, const Alphabet& alphabet) {
    std::size_t n = 0;
    std::size_t num_edges = 0;
    if (!(is >> n >> num_edges)) throw ValidationError("graph header must be '<n> <edges>'");
    if (n == 0) throw ValidationError("graph must have at least one vertex");
    std::vector<std::int32_t> colors(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t v = 0;
        std::string name;
        if (!(is >> v >> name)) throw ValidationError("truncated vertex section");
        if (v >= n) throw ValidationError("vertex index out of range");
        if (colors[v] != -1) throw ValidationError("vertex listed twice");
        colors[v] = static_cast<std::int32_t>(alphabet.index_of(name));
    }
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    edges.reserve(num_edges);
    for (std::size_t i = 0; i < num_edges; ++i) {
        std::int64_t u = 0;
        std::int64_t v = 0;
        if (!(is >> u >> v)) throw ValidationError("truncated edge section");
        edges.emplace_back(static_cast<std::int32_t>(u), static_cast<std::int32_t>(v));
    }
    return ColoredGraph(alphabet.size(), std::move(colors), std::move(edges));
}

inline std::string graph_to_string(const ColoredGraph& g, const Alphabet& alphabet) {
    std::ostringstream os;
    write_graph(os, g, alphabet);
    return os.str();
}

inline ColoredGraph graph_from_string(const std::string& text, const Alphabet& alphabet) {
    std::istringstream is(text);
    return read_graph(is, alphabet);
}

}  // namespace graphrd
