#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphrd/ball.hpp"
#include "graphrd/errors.hpp"
#include "graphrd/graph.hpp"

namespace graphrd {

enum class DistortionKind { ball_hamming, color_hamming, squared_degree_diff, table };

// Single-letter distortion on balls. Built-in kinds are defined everywhere;
// table distortions must cover every queried pair unless a default is given.
class DistortionFn {
public:
    DistortionFn() : kind_(DistortionKind::ball_hamming) {}

    static DistortionFn ball_hamming() { return DistortionFn(DistortionKind::ball_hamming); }
    static DistortionFn color_hamming() { return DistortionFn(DistortionKind::color_hamming); }
    static DistortionFn squared_degree_diff() {
        return DistortionFn(DistortionKind::squared_degree_diff);
    }

    static DistortionFn table(std::map<std::pair<Ball, Ball>, double> entries,
                              std::optional<double> default_value = std::nullopt) {
        DistortionFn fn(DistortionKind::table);
        for (const auto& [k, v] : entries) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw ValidationError("distortion table entries must be finite and nonnegative");
            }
        }
        if (default_value && (!(*default_value >= 0.0) || !std::isfinite(*default_value))) {
            throw ValidationError("distortion default must be finite and nonnegative");
        }
        fn.table_ = std::move(entries);
        fn.default_ = default_value;
        return fn;
    }

    DistortionKind kind() const noexcept { return kind_; }

    const std::string& kind_name() const {
        static const std::string names[] = {"ball_hamming", "color_hamming",
                                            "squared_degree_diff", "table"};
        return names[static_cast<int>(kind_)];
    }

    double operator()(const Ball& x, const Ball& y) const {
        switch (kind_) {
            case DistortionKind::ball_hamming:
                return x == y ? 0.0 : 1.0;
            case DistortionKind::color_hamming:
                return x.color == y.color ? 0.0 : 1.0;
            case DistortionKind::squared_degree_diff: {
                const double d = static_cast<double>(x.deg.total() - y.deg.total());
                return d * d;
            }
            case DistortionKind::table: {
                auto it = table_.find({x, y});
                if (it != table_.end()) return it->second;
                if (default_) return *default_;
                throw ValidationError("distortion table has no entry for a queried ball pair");
            }
        }
        return 0.0;
    }

    // Supremum over the given working support (all ordered pairs).
    double bound_on(const std::vector<Ball>& support) const {
        double m = 0.0;
        for (const auto& x : support) {
            for (const auto& y : support) m = std::max(m, (*this)(x, y));
        }
        return m;
    }

private:
    explicit DistortionFn(DistortionKind k) : kind_(k) {}

    DistortionKind kind_;
    std::map<std::pair<Ball, Ball>, double> table_;
    std::optional<double> default_;
};

// Average per-vertex distortion between two graphs on the same vertex set.
inline double distortion(const ColoredGraph& x, const ColoredGraph& y, const DistortionFn& rho) {
    if (x.n() != y.n()) throw ValidationError("distortion needs equal vertex counts");
    const auto rx = ball_degrees(x);
    const auto ry = ball_degrees(y);
    double s = 0.0;
    for (std::size_t v = 0; v < x.n(); ++v) {
        s += rho(Ball(x.color(v), rx[v]), Ball(y.color(v), ry[v]));
    }
    return s / static_cast<double>(x.n());
}

}  // namespace graphrd
