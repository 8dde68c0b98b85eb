#pragma once

#include <cstdint>
#include <cstddef>
#include <string>
#include <vector>

#include "graphrd/alphabet.hpp"

namespace graphrd {

inline constexpr std::int32_t kNoCap = -1;

// Per-color neighbor counts of a vertex. An optional saturation cap records
// that counts were clamped; the cap is an annotation and takes no part in
// equality or ordering.
struct DegreeVector {
    std::vector<std::int32_t> counts;
    std::int32_t cap = kNoCap;

    DegreeVector() = default;
    explicit DegreeVector(std::size_t m) : counts(m, 0) {}
    explicit DegreeVector(std::vector<std::int32_t> c, std::int32_t cap_ = kNoCap)
        : counts(std::move(c)), cap(cap_) {}
    // Keeps brace lists on the counts path; without this, a one-element list
    // binds to the size overload.
    DegreeVector(std::initializer_list<std::int32_t> c) : counts(c) {}

    std::size_t size() const noexcept { return counts.size(); }
    std::int32_t operator()(std::size_t b) const { return counts.at(b); }

    std::int64_t total() const noexcept {
        std::int64_t s = 0;
        for (auto c : counts) s += c;
        return s;
    }

    // Saturates counts at `cap`; increments *events per reduced entry.
    DegreeVector clamped(std::int32_t cap_, std::size_t* events = nullptr) const {
        DegreeVector out(counts, cap_);
        for (auto& c : out.counts) {
            if (c > cap_) {
                c = cap_;
                if (events) ++*events;
            }
        }
        return out;
    }

    bool operator==(const DegreeVector& other) const noexcept { return counts == other.counts; }
    bool operator!=(const DegreeVector& other) const noexcept { return counts != other.counts; }
    bool operator<(const DegreeVector& other) const noexcept { return counts < other.counts; }
};

// Depth-1 neighborhood statistic of a vertex: own color plus neighbor counts
// by color.
struct Ball {
    std::int32_t color = 0;
    DegreeVector deg;

    Ball() = default;
    Ball(std::int32_t c, DegreeVector d) : color(c), deg(std::move(d)) {}

    bool operator==(const Ball& other) const noexcept {
        return color == other.color && deg == other.deg;
    }
    bool operator!=(const Ball& other) const noexcept { return !(*this == other); }
    bool operator<(const Ball& other) const noexcept {
        if (color != other.color) return color < other.color;
        return deg < other.deg;
    }
};

inline std::string format_degrees(const DegreeVector& d) {
    std::string out;
    for (std::size_t b = 0; b < d.size(); ++b) {
        if (b) out += ',';
        out += std::to_string(d.counts[b]);
    }
    return out;
}

inline std::string format_ball(const Ball& ball, const Alphabet& alphabet) {
    return alphabet.name(static_cast<std::size_t>(ball.color)) + "|" + format_degrees(ball.deg);
}

}  // namespace graphrd
