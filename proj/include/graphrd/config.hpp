#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "graphrd/alphabet.hpp"
#include "graphrd/ball.hpp"
#include "graphrd/distortion.hpp"
#include "graphrd/errors.hpp"
#include "graphrd/experiments.hpp"

namespace graphrd {

// Declarative distortion spec, kept separate from DistortionFn so configs can
// be re-emitted exactly as parsed.
struct RhoSpec {
    DistortionKind kind = DistortionKind::ball_hamming;
    std::optional<double> default_value;
    std::vector<std::tuple<Ball, Ball, double>> entries;

    DistortionFn build() const {
        switch (kind) {
            case DistortionKind::ball_hamming: return DistortionFn::ball_hamming();
            case DistortionKind::color_hamming: return DistortionFn::color_hamming();
            case DistortionKind::squared_degree_diff:
                return DistortionFn::squared_degree_diff();
            case DistortionKind::table: {
                std::map<std::pair<Ball, Ball>, double> table;
                for (const auto& [x, y, v] : entries) table[{x, y}] = v;
                return DistortionFn::table(std::move(table), default_value);
            }
        }
        return DistortionFn::ball_hamming();
    }
};

struct ExperimentSettings {
    std::vector<std::size_t> n_list;
    std::vector<double> d_values;
    std::int64_t samples = 10000;
    int shards = 1;
    int source_seeds = 1;
    double eps = 0.05;
    std::int64_t reps = 1000;
    std::string nodes_file;
    std::string edges_file;
    double oracle_guard = 1e7;
};

struct RunConfig {
    Alphabet alphabet;
    ColorMeasure sigma;
    PairMeasure pi;
    RhoSpec rho;
    double tail_tol = 1e-12;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    ExperimentSettings experiment;

    ConstraintFamily family() const { return {alphabet, sigma, pi}; }

    ExperimentConfig experiment_config() const {
        ExperimentConfig cfg;
        cfg.family = family();
        cfg.rho = rho.build();
        cfg.n_list = experiment.n_list;
        cfg.d_values = experiment.d_values;
        cfg.samples = experiment.samples;
        cfg.seed = seed;
        cfg.shards = experiment.shards;
        cfg.source_seeds = experiment.source_seeds;
        cfg.eps = experiment.eps;
        cfg.reps = experiment.reps;
        cfg.tail_tol = tail_tol;
        return cfg;
    }
};

namespace detail {

inline void require_keys(const nlohmann::json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ValidationError(where + " must be a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* key : allowed) {
            if (it.key() == key) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ValidationError("unknown key '" + it.key() + "' in " + where);
    }
}

// "lo:hi:count" inclusive grid, "a,b,c" list, or a single number.
inline std::vector<double> parse_d_string(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        double lo = 0.0, hi = 0.0;
        long count = 0;
        char c1 = 0, c2 = 0;
        std::istringstream is(text);
        if (!(is >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || count < 2 ||
            !(is >> std::ws).eof()) {
            throw ValidationError("distortion grid must look like 'lo:hi:count' with count >= 2");
        }
        for (long i = 0; i < count; ++i) {
            out.push_back(lo + (hi - lo) * static_cast<double>(i) /
                                   static_cast<double>(count - 1));
        }
        return out;
    }
    std::istringstream is(text);
    std::string part;
    while (std::getline(is, part, ',')) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(part, &pos);
            if (pos != part.size()) throw std::invalid_argument(part);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ValidationError("cannot parse distortion value '" + part + "'");
        }
    }
    if (out.empty()) throw ValidationError("empty distortion list");
    return out;
}

inline std::vector<double> parse_d_json(const nlohmann::json& j) {
    if (j.is_number()) return {j.get<double>()};
    if (j.is_string()) return parse_d_string(j.get<std::string>());
    if (j.is_array()) {
        std::vector<double> out;
        for (const auto& v : j) {
            if (!v.is_number()) throw ValidationError("'d' array entries must be numbers");
            out.push_back(v.get<double>());
        }
        return out;
    }
    throw ValidationError("'d' must be a number, an array, or a 'lo:hi:count' string");
}

inline std::vector<std::size_t> parse_n_json(const nlohmann::json& j) {
    auto one = [](const nlohmann::json& v) {
        if (!v.is_number_unsigned() && !v.is_number_integer()) {
            throw ValidationError("'n' entries must be positive integers");
        }
        const auto n = v.get<std::int64_t>();
        if (n < 1) throw ValidationError("'n' entries must be positive integers");
        return static_cast<std::size_t>(n);
    };
    std::vector<std::size_t> out;
    if (j.is_array()) {
        for (const auto& v : j) out.push_back(one(v));
    } else {
        out.push_back(one(j));
    }
    return out;
}

inline Ball parse_ball_json(const nlohmann::json& j, const Alphabet& alphabet) {
    require_keys(j, "ball", {"color", "deg"});
    if (!j.contains("color") || !j.contains("deg")) {
        throw ValidationError("ball needs 'color' and 'deg'");
    }
    const auto color = alphabet.index_of(j.at("color").get<std::string>());
    const auto& deg = j.at("deg");
    if (!deg.is_array() || deg.size() != alphabet.size()) {
        throw ValidationError("ball 'deg' must list one count per color");
    }
    DegreeVector d(alphabet.size());
    for (std::size_t b = 0; b < alphabet.size(); ++b) {
        const auto c = deg.at(b).get<std::int64_t>();
        if (c < 0) throw ValidationError("ball counts must be nonnegative");
        d.counts[b] = static_cast<std::int32_t>(c);
    }
    return Ball(static_cast<std::int32_t>(color), std::move(d));
}

inline nlohmann::json ball_to_json(const Ball& ball, const Alphabet& alphabet) {
    nlohmann::json j;
    j["color"] = alphabet.name(static_cast<std::size_t>(ball.color));
    j["deg"] = ball.deg.counts;
    return j;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    detail::require_keys(j, "config",
                         {"alphabet", "sigma", "pi", "rho", "tail_tol", "seed", "out_dir",
                          "experiment"});
    if (!j.contains("alphabet") || !j.contains("sigma") || !j.contains("pi")) {
        throw ValidationError("config needs 'alphabet', 'sigma', and 'pi'");
    }
    RunConfig cfg;

    const auto& al = j.at("alphabet");
    if (!al.is_array() || al.empty()) {
        throw ValidationError("'alphabet' must be a nonempty array of color names");
    }
    std::vector<std::string> names;
    for (const auto& v : al) names.push_back(v.get<std::string>());
    cfg.alphabet = Alphabet(names);
    const std::size_t m = cfg.alphabet.size();

    const auto& sj = j.at("sigma");
    if (!sj.is_object()) throw ValidationError("'sigma' must map color names to weights");
    cfg.sigma = ColorMeasure(m);
    for (auto it = sj.begin(); it != sj.end(); ++it) {
        cfg.sigma.w[cfg.alphabet.index_of(it.key())] = it.value().get<double>();
    }
    if (sj.size() != m) throw ValidationError("'sigma' must list every color exactly once");

    const auto& pj = j.at("pi");
    if (!pj.is_object()) throw ValidationError("'pi' must map 'a,b' pairs to intensities");
    cfg.pi = PairMeasure(m);
    std::map<std::pair<std::size_t, std::size_t>, double> seen;
    for (auto it = pj.begin(); it != pj.end(); ++it) {
        const auto comma = it.key().find(',');
        if (comma == std::string::npos) {
            throw ValidationError("'pi' keys must look like 'a,b'");
        }
        const std::size_t a = cfg.alphabet.index_of(it.key().substr(0, comma));
        const std::size_t b = cfg.alphabet.index_of(it.key().substr(comma + 1));
        const double v = it.value().get<double>();
        const auto canon = std::make_pair(std::min(a, b), std::max(a, b));
        const auto prev = seen.find(canon);
        if (prev != seen.end() && prev->second != v) {
            throw ValidationError("'pi' lists conflicting values for the pair '" + it.key() +
                                  "'");
        }
        seen[canon] = v;
        cfg.pi.set(a, b, v);
    }

    if (j.contains("rho")) {
        const auto& rj = j.at("rho");
        detail::require_keys(rj, "rho", {"kind", "default", "entries"});
        if (!rj.contains("kind")) throw ValidationError("'rho' needs a 'kind'");
        const auto kind = rj.at("kind").get<std::string>();
        if (kind == "ball_hamming") {
            cfg.rho.kind = DistortionKind::ball_hamming;
        } else if (kind == "color_hamming") {
            cfg.rho.kind = DistortionKind::color_hamming;
        } else if (kind == "squared_degree_diff") {
            cfg.rho.kind = DistortionKind::squared_degree_diff;
        } else if (kind == "table") {
            cfg.rho.kind = DistortionKind::table;
        } else {
            throw ValidationError("unknown distortion kind '" + kind + "'");
        }
        if (cfg.rho.kind != DistortionKind::table &&
            (rj.contains("default") || rj.contains("entries"))) {
            throw ValidationError("'default'/'entries' only apply to table distortions");
        }
        if (rj.contains("default")) cfg.rho.default_value = rj.at("default").get<double>();
        if (rj.contains("entries")) {
            for (const auto& e : rj.at("entries")) {
                detail::require_keys(e, "rho entry", {"x", "y", "value"});
                if (!e.contains("x") || !e.contains("y") || !e.contains("value")) {
                    throw ValidationError("rho entries need 'x', 'y', and 'value'");
                }
                cfg.rho.entries.emplace_back(detail::parse_ball_json(e.at("x"), cfg.alphabet),
                                             detail::parse_ball_json(e.at("y"), cfg.alphabet),
                                             e.at("value").get<double>());
            }
        }
    }

    if (j.contains("tail_tol")) cfg.tail_tol = j.at("tail_tol").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();

    if (j.contains("experiment")) {
        const auto& ej = j.at("experiment");
        detail::require_keys(ej, "experiment",
                             {"n", "d", "samples", "shards", "source_seeds", "eps", "reps",
                              "nodes_file", "edges_file", "oracle_guard"});
        auto& ex = cfg.experiment;
        if (ej.contains("n")) ex.n_list = detail::parse_n_json(ej.at("n"));
        if (ej.contains("d")) ex.d_values = detail::parse_d_json(ej.at("d"));
        if (ej.contains("samples")) ex.samples = ej.at("samples").get<std::int64_t>();
        if (ej.contains("shards")) ex.shards = ej.at("shards").get<int>();
        if (ej.contains("source_seeds")) ex.source_seeds = ej.at("source_seeds").get<int>();
        if (ej.contains("eps")) ex.eps = ej.at("eps").get<double>();
        if (ej.contains("reps")) ex.reps = ej.at("reps").get<std::int64_t>();
        if (ej.contains("nodes_file")) ex.nodes_file = ej.at("nodes_file").get<std::string>();
        if (ej.contains("edges_file")) ex.edges_file = ej.at("edges_file").get<std::string>();
        if (ej.contains("oracle_guard")) ex.oracle_guard = ej.at("oracle_guard").get<double>();
        if (ex.samples < 1) throw ValidationError("'samples' must be at least 1");
        if (ex.shards < 1) throw ValidationError("'shards' must be at least 1");
        if (ex.source_seeds < 1) throw ValidationError("'source_seeds' must be at least 1");
        if (ex.reps < 1) throw ValidationError("'reps' must be at least 1");
    }

    // Fail early on inconsistent measures.
    cfg.sigma.require_probability(1e-12);
    cfg.pi.require_valid();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        return parse_config(j);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config file '" + path + "': " + e.what());
    }
}

// Fully resolved form; parsing it back yields an equivalent RunConfig.
inline nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["alphabet"] = cfg.alphabet.names();
    nlohmann::json sj;
    for (std::size_t a = 0; a < cfg.alphabet.size(); ++a) {
        sj[cfg.alphabet.name(a)] = cfg.sigma(a);
    }
    j["sigma"] = sj;
    nlohmann::json pj;
    for (std::size_t a = 0; a < cfg.alphabet.size(); ++a) {
        for (std::size_t b = a; b < cfg.alphabet.size(); ++b) {
            pj[cfg.alphabet.name(a) + "," + cfg.alphabet.name(b)] = cfg.pi(a, b);
        }
    }
    j["pi"] = pj;
    nlohmann::json rj;
    switch (cfg.rho.kind) {
        case DistortionKind::ball_hamming: rj["kind"] = "ball_hamming"; break;
        case DistortionKind::color_hamming: rj["kind"] = "color_hamming"; break;
        case DistortionKind::squared_degree_diff: rj["kind"] = "squared_degree_diff"; break;
        case DistortionKind::table: rj["kind"] = "table"; break;
    }
    if (cfg.rho.kind == DistortionKind::table) {
        if (cfg.rho.default_value) rj["default"] = *cfg.rho.default_value;
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& [x, y, v] : cfg.rho.entries) {
            nlohmann::json e;
            e["x"] = detail::ball_to_json(x, cfg.alphabet);
            e["y"] = detail::ball_to_json(y, cfg.alphabet);
            e["value"] = v;
            entries.push_back(e);
        }
        rj["entries"] = entries;
    }
    j["rho"] = rj;
    j["tail_tol"] = cfg.tail_tol;
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    nlohmann::json ej;
    ej["n"] = cfg.experiment.n_list;
    ej["d"] = cfg.experiment.d_values;
    ej["samples"] = cfg.experiment.samples;
    ej["shards"] = cfg.experiment.shards;
    ej["source_seeds"] = cfg.experiment.source_seeds;
    ej["eps"] = cfg.experiment.eps;
    ej["reps"] = cfg.experiment.reps;
    ej["nodes_file"] = cfg.experiment.nodes_file;
    ej["edges_file"] = cfg.experiment.edges_file;
    ej["oracle_guard"] = cfg.experiment.oracle_guard;
    j["experiment"] = ej;
    return j;
}

}  // namespace graphrd
