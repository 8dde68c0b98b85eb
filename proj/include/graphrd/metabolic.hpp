#pragma once

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "graphrd/alphabet.hpp"
#include "graphrd/distortion.hpp"
#include "graphrd/errors.hpp"
#include "graphrd/graph.hpp"
#include "graphrd/kernel.hpp"

namespace graphrd {

inline const std::vector<std::string>& metabolic_type_names() {
    static const std::vector<std::string> names = {"substrate", "product"};
    return names;
}

// Distortion budget thresholds for the two-color substrate/product network.
// T keeps the displayed inequality verbatim, including its repeated cross
// term; T_variant is the deduplicated reading. Both are reported, neither is
// silently corrected.
inline std::pair<double, double> metabolic_threshold(const PairMeasure& pi,
                                                     const Alphabet& alphabet) {
    if (alphabet.size() != 2 || !alphabet.contains("substrate") ||
        !alphabet.contains("product")) {
        throw ValidationError("metabolic thresholds need the alphabet {substrate, product}");
    }
    if (pi.m != 2) throw ValidationError("metabolic thresholds need a two-color pair measure");
    const std::size_t s = alphabet.index_of("substrate");
    const std::size_t p = alphabet.index_of("product");
    const double cross = pi(s, p);
    const double t_variant = 2.0 * cross + pi(s, s) + pi(p, p);
    const double t = t_variant + 2.0 * cross;
    return {t, t_variant};
}

struct IngestReport {
    Alphabet alphabet;  // fixed order: substrate, product
    ColoredGraph graph;
    ColorMeasure sigma_n;
    PairMeasure pi_n;
    std::int64_t self_loops_dropped = 0;
    std::int64_t duplicate_edges_dropped = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

// Splits one CSV line into exactly two fields.
inline std::pair<std::string, std::string> split2(const std::string& line,
                                                  const std::string& file, std::size_t lineno) {
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
        throw ValidationError(file + ":" + std::to_string(lineno) +
                              ": expected exactly two comma-separated fields");
    }
    return {trim(line.substr(0, comma)), trim(line.substr(comma + 1))};
}

}  // namespace detail

// Reads a two-file network: nodes as `id,type` with type in
// {substrate, product}, edges as `u,v` over node ids. Self-loops and duplicate
// edges are dropped and counted. Optional header lines are skipped.
inline IngestReport ingest_network(const std::string& nodes_file, const std::string& edges_file) {
    IngestReport report;
    report.alphabet = Alphabet(metabolic_type_names());

    std::ifstream nodes(nodes_file);
    if (!nodes) throw ValidationError("cannot open nodes file '" + nodes_file + "'");
    std::map<std::string, std::int32_t> index;
    std::vector<std::int32_t> colors;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(nodes, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (lineno == 1 && t == "id,type") continue;
        auto [id, type] = detail::split2(t, nodes_file, lineno);
        if (id.empty()) {
            throw ValidationError(nodes_file + ":" + std::to_string(lineno) + ": empty node id");
        }
        if (!report.alphabet.contains(type)) {
            throw ValidationError(nodes_file + ":" + std::to_string(lineno) +
                                  ": unknown type label '" + type + "'");
        }
        if (index.count(id)) {
            throw ValidationError(nodes_file + ":" + std::to_string(lineno) +
                                  ": duplicate node id '" + id + "'");
        }
        index[id] = static_cast<std::int32_t>(colors.size());
        colors.push_back(static_cast<std::int32_t>(report.alphabet.index_of(type)));
    }
    if (colors.empty()) throw ValidationError("nodes file '" + nodes_file + "' holds no nodes");

    std::ifstream edges(edges_file);
    if (!edges) throw ValidationError("cannot open edges file '" + edges_file + "'");
    std::set<std::pair<std::int32_t, std::int32_t>> seen;
    std::vector<std::pair<std::int32_t, std::int32_t>> edge_list;
    lineno = 0;
    bool any_row = false;
    while (std::getline(edges, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (lineno == 1 && t == "u,v") continue;
        any_row = true;
        auto [us, vs] = detail::split2(t, edges_file, lineno);
        const auto iu = index.find(us);
        if (iu == index.end()) {
            throw ValidationError(edges_file + ":" + std::to_string(lineno) +
                                  ": unknown node id '" + us + "'");
        }
        const auto iv = index.find(vs);
        if (iv == index.end()) {
            throw ValidationError(edges_file + ":" + std::to_string(lineno) +
                                  ": unknown node id '" + vs + "'");
        }
        std::int32_t u = iu->second;
        std::int32_t v = iv->second;
        if (u == v) {
            report.self_loops_dropped += 1;
            continue;
        }
        if (u > v) std::swap(u, v);
        if (!seen.insert({u, v}).second) {
            report.duplicate_edges_dropped += 1;
            continue;
        }
        edge_list.emplace_back(u, v);
    }
    if (!any_row) throw ValidationError("edges file '" + edges_file + "' holds no edges");

    report.graph = ColoredGraph(2, std::move(colors), std::move(edge_list));
    report.sigma_n = color_measure(report.graph);
    report.pi_n = pair_measure(report.graph);
    return report;
}

struct MetabolicVerdict {
    double D = 0.0;
    bool rate_zero = false;  // per the displayed rule: R = 0 iff D >= T
};

struct MetabolicReport {
    ColorMeasure sigma_n;
    PairMeasure pi_n;
    double T = 0.0;
    double T_variant = 0.0;
    std::vector<MetabolicVerdict> verdicts;
    // Reference curve from the kernel machinery under the squared-degree
    // reading of the distortion.
    std::vector<RateResult> curve;
    double d_min = 0.0;
    double d_av = 0.0;
    std::int64_t self_loops_dropped = 0;
    std::int64_t duplicate_edges_dropped = 0;
};

inline MetabolicReport metabolic_report(const IngestReport& ingest,
                                        const std::vector<double>& d_values, double tail_tol) {
    MetabolicReport report;
    report.sigma_n = ingest.sigma_n;
    report.pi_n = ingest.pi_n;
    report.self_loops_dropped = ingest.self_loops_dropped;
    report.duplicate_edges_dropped = ingest.duplicate_edges_dropped;
    const auto [t, tv] = metabolic_threshold(ingest.pi_n, ingest.alphabet);
    report.T = t;
    report.T_variant = tv;

    const Kernel K = build_kernel(ingest.sigma_n, ingest.pi_n, tail_tol, ingest.alphabet);
    const DistortionFn rho = DistortionFn::squared_degree_diff();
    const LogMgf lm(K, rho);
    report.d_min = lm.d_min();
    report.d_av = lm.d_av();

    std::vector<double> ds = d_values;
    if (ds.empty()) {
        // Default 21-point sweep across the informative range.
        for (int i = 0; i <= 20; ++i) {
            ds.push_back(report.d_min +
                         (report.d_av - report.d_min) * static_cast<double>(i) / 20.0);
        }
    }
    for (const double d : ds) {
        report.verdicts.push_back({d, d >= report.T});
        report.curve.push_back(rate_distortion_with(lm, K.truncation_mass, d));
    }
    return report;
}

}  // namespace graphrd
