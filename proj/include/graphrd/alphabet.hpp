#pragma once

#include <cstddef>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "graphrd/errors.hpp"

namespace graphrd {

// Finite color alphabet. Colors are identified by their index; names are kept
// for parsing and reporting only.
class Alphabet {
public:
    Alphabet() = default;

    explicit Alphabet(std::vector<std::string> names) : names_(std::move(names)) {
        if (names_.empty()) throw ValidationError("alphabet must contain at least one color");
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (names_[i].empty()) throw ValidationError("alphabet contains an empty color name");
            if (!index_.emplace(names_[i], i).second) {
                throw ValidationError("alphabet contains duplicate color '" + names_[i] + "'");
            }
        }
    }

    std::size_t size() const noexcept { return names_.size(); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    const std::vector<std::string>& names() const noexcept { return names_; }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    std::size_t index_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw ValidationError("unknown color '" + name + "'");
        return it->second;
    }

    bool operator==(const Alphabet& other) const noexcept { return names_ == other.names_; }

private:
    std::vector<std::string> names_;
    std::map<std::string, std::size_t> index_;
};

// Probability weights on colors. Stored densely; callers decide when the
// weights must form a probability vector.
struct ColorMeasure {
    std::vector<double> w;

    ColorMeasure() = default;
    explicit ColorMeasure(std::vector<double> weights) : w(std::move(weights)) {}
    explicit ColorMeasure(std::size_t m) : w(m, 0.0) {}

    std::size_t size() const noexcept { return w.size(); }
    double operator()(std::size_t a) const { return w.at(a); }
    double& at(std::size_t a) { return w.at(a); }

    double mass() const noexcept {
        double s = 0.0;
        for (double x : w) s += x;
        return s;
    }

    void require_probability(double tol = 1e-12) const {
        for (double x : w) {
            if (!(x >= 0.0)) throw ValidationError("color measure has a negative weight");
        }
        if (std::abs(mass() - 1.0) > tol) {
            throw ValidationError("color weights do not sum to 1");
        }
    }

    bool operator==(const ColorMeasure& other) const noexcept { return w == other.w; }
};

// Symmetric edge-intensity matrix pi(a,b) over color pairs.
struct PairMeasure {
    std::size_t m = 0;
    std::vector<double> w;  // dense m*m, row-major, kept symmetric

    PairMeasure() = default;
    explicit PairMeasure(std::size_t colors) : m(colors), w(colors * colors, 0.0) {}

    double operator()(std::size_t a, std::size_t b) const { return w.at(a * m + b); }

    void set(std::size_t a, std::size_t b, double value) {
        w.at(a * m + b) = value;
        w.at(b * m + a) = value;
    }

    void require_valid() const {
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b < m; ++b) {
                const double x = (*this)(a, b);
                if (!(x >= 0.0) || !std::isfinite(x)) {
                    throw ValidationError("pair intensities must be finite and nonnegative");
                }
                if (x != (*this)(b, a)) throw ValidationError("pair intensities must be symmetric");
            }
        }
    }

    bool operator==(const PairMeasure& other) const noexcept {
        return m == other.m && w == other.w;
    }
};

}  // namespace graphrd
