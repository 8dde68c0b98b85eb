#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "graphrd/alphabet.hpp"
#include "graphrd/errors.hpp"

namespace graphrd {

// Validated finite-n constraint: exact integer color counts N(a) = n*sigma(a)
// and edge counts m(a,b) = n*pi(a,b)/(1+1{a==b}).
struct GraphConstraint {
    std::size_t n = 0;
    ColorMeasure sigma;
    PairMeasure pi;
    std::vector<std::int64_t> color_count;  // per color
    std::vector<std::int64_t> edge_count;   // dense num_colors^2, symmetric

    std::size_t num_colors() const noexcept { return color_count.size(); }

    std::int64_t edges(std::size_t a, std::size_t b) const {
        return edge_count.at(a * num_colors() + b);
    }

    std::int64_t total_edges() const noexcept {
        std::int64_t s = 0;
        const std::size_t m = num_colors();
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = a; b < m; ++b) s += edge_count[a * m + b];
        }
        return s;
    }

    // Number of admissible vertex pairs for the color pair {a,b}.
    std::int64_t pair_capacity(std::size_t a, std::size_t b) const {
        const std::int64_t na = color_count.at(a);
        const std::int64_t nb = color_count.at(b);
        return a == b ? na * (na - 1) / 2 : na * nb;
    }
};

inline GraphConstraint validate_constraint(std::size_t n, const ColorMeasure& sigma,
                                           const PairMeasure& pi,
                                           const Alphabet* names = nullptr) {
    if (n < 1) throw ValidationError("vertex count must be at least 1");
    sigma.require_probability(1e-12);
    pi.require_valid();
    if (sigma.size() != pi.m) {
        throw ValidationError("sigma and pi disagree on the number of colors");
    }
    const std::size_t m = sigma.size();
    auto label = [&](std::size_t a) {
        return names ? names->name(a) : std::to_string(a);
    };

    GraphConstraint c;
    c.n = n;
    c.sigma = sigma;
    c.pi = pi;
    c.color_count.resize(m);
    c.edge_count.assign(m * m, 0);

    constexpr double kIntTol = 1e-9;
    for (std::size_t a = 0; a < m; ++a) {
        const double exact = static_cast<double>(n) * sigma(a);
        const double rounded = std::nearbyint(exact);
        if (std::abs(exact - rounded) > kIntTol) {
            throw ValidationError("n*sigma(" + label(a) + ") = " + std::to_string(exact) +
                                  " is not an integer");
        }
        c.color_count[a] = static_cast<std::int64_t>(rounded);
    }

    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            const double divisor = (a == b) ? 2.0 : 1.0;
            const double exact = static_cast<double>(n) * pi(a, b) / divisor;
            const double rounded = std::nearbyint(exact);
            if (std::abs(exact - rounded) > kIntTol) {
                throw ValidationError("edge count m(" + label(a) + "," + label(b) + ") = " +
                                      std::to_string(exact) + " is not an integer");
            }
            const auto cnt = static_cast<std::int64_t>(rounded);
            c.edge_count[a * m + b] = cnt;
            c.edge_count[b * m + a] = cnt;
            if (cnt > c.pair_capacity(a, b)) {
                throw ValidationError("edge count m(" + label(a) + "," + label(b) + ") = " +
                                      std::to_string(cnt) + " exceeds capacity " +
                                      std::to_string(c.pair_capacity(a, b)));
            }
        }
    }
    return c;
}

}  // namespace graphrd
