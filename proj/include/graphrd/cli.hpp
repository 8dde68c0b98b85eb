#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "graphrd/config.hpp"
#include "graphrd/errors.hpp"
#include "graphrd/experiments.hpp"
#include "graphrd/io.hpp"
#include "graphrd/kernel.hpp"
#include "graphrd/metabolic.hpp"
#include "graphrd/oracle.hpp"
#include "graphrd/sampler.hpp"

namespace graphrd {

namespace detail {

inline std::ofstream open_artifact(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot write '" + path.string() + "'");
    return os;
}

inline void write_resolved_config(const RunConfig& cfg, const std::filesystem::path& dir) {
    auto os = open_artifact(dir / "resolved_config.json");
    os << config_to_json(cfg).dump(2) << '\n';
}

inline void write_rate_rows(std::ostream& os, const std::vector<RateResult>& rows) {
    os << "d,R_nats,t_star,status,truncation_mass\n";
    for (const auto& r : rows) {
        os << format_double(r.d) << ',' << format_double(r.R) << ',' << format_double(r.t_star)
           << ',' << rate_status_name(r.status) << ',' << format_double(r.truncation_mass)
           << '\n';
    }
}

inline nlohmann::json measure_json(const ColorMeasure& s, const Alphabet& alphabet) {
    nlohmann::json j;
    for (std::size_t a = 0; a < alphabet.size(); ++a) j[alphabet.name(a)] = s(a);
    return j;
}

inline nlohmann::json pair_json(const PairMeasure& p, const Alphabet& alphabet) {
    nlohmann::json j;
    for (std::size_t a = 0; a < alphabet.size(); ++a) {
        for (std::size_t b = a; b < alphabet.size(); ++b) {
            j[alphabet.name(a) + "," + alphabet.name(b)] = p(a, b);
        }
    }
    return j;
}

inline std::vector<double> default_d_grid(double lo, double hi) {
    std::vector<double> ds;
    for (int i = 0; i <= 20; ++i) ds.push_back(lo + (hi - lo) * static_cast<double>(i) / 20.0);
    return ds;
}

inline int run_gen(const RunConfig& cfg, const std::filesystem::path& dir) {
    if (cfg.experiment.n_list.empty()) throw ValidationError("gen needs at least one n");
    for (const std::size_t n : cfg.experiment.n_list) {
        const GraphConstraint c = round_constraint(cfg.family(), n);
        const ColoredGraph g = sample_graph(c, derive_seed(cfg.seed, stream::kGen, n));
        const auto path = dir / ("graph_n" + std::to_string(n) + ".txt");
        auto os = open_artifact(path);
        write_graph(os, g, cfg.alphabet);
        std::cout << "wrote " << path.string() << " (" << g.edge_count() << " edges)\n";
    }
    return 0;
}

inline int run_kernel(const RunConfig& cfg, const std::filesystem::path& dir) {
    const Kernel K = build_kernel(cfg.sigma, cfg.pi, cfg.tail_tol, cfg.alphabet);
    {
        auto os = open_artifact(dir / "kernel.csv");
        os << "ball,probability\n";
        for (const auto& [ball, p] : K.atoms) {
            os << '"' << format_ball(ball, K.alphabet) << "\"," << format_double(p) << '\n';
        }
    }
    nlohmann::json j;
    j["L_max"] = K.L_max;
    j["atoms"] = K.atoms.size();
    j["truncation_mass"] = K.truncation_mass;
    j["tail_tol"] = K.tail_tol;
    {
        auto os = open_artifact(dir / "kernel.json");
        os << j.dump(2) << '\n';
    }
    std::cout << "kernel: " << K.atoms.size() << " atoms, L_max=" << K.L_max
              << ", truncation_mass=" << format_double(K.truncation_mass) << '\n';
    return 0;
}

inline int run_rate(const RunConfig& cfg, const std::filesystem::path& dir) {
    const Kernel K = build_kernel(cfg.sigma, cfg.pi, cfg.tail_tol, cfg.alphabet);
    const LogMgf lm(K, cfg.rho.build());
    std::vector<double> ds = cfg.experiment.d_values;
    if (ds.empty()) ds = default_d_grid(lm.d_min(), lm.d_av());
    std::vector<RateResult> rows;
    bool near_dmin = false;
    for (const double d : ds) {
        rows.push_back(rate_distortion_with(lm, K.truncation_mass, d));
        near_dmin = near_dmin || rows.back().at_dmin_diagnostic;
    }
    {
        auto os = open_artifact(dir / "rd.csv");
        write_rate_rows(os, rows);
    }
    std::cout << "d_min=" << format_double(lm.d_min()) << " d_av=" << format_double(lm.d_av())
              << " d_max=" << format_double(lm.d_max()) << '\n';
    if (near_dmin) {
        std::cout << "note: some d values sit at the d_min boundary; R there is the limiting "
                     "value R(d_min+)\n";
    }
    return 0;
}

inline int run_irho(const RunConfig& cfg, const std::filesystem::path& dir) {
    const Kernel K = build_kernel(cfg.sigma, cfg.pi, cfg.tail_tol, cfg.alphabet);
    const LogMgf lm(K, cfg.rho.build());
    std::vector<double> zs = cfg.experiment.d_values;
    if (zs.empty()) zs = default_d_grid(lm.d_min(), lm.d_max());
    auto os = open_artifact(dir / "irho.csv");
    os << "z,I_nats\n";
    for (const double z : zs) {
        os << format_double(z) << ',' << format_double(distortion_ldp_rate_with(lm, z)) << '\n';
    }
    std::cout << "irho: " << zs.size() << " points over [" << format_double(lm.d_min()) << ", "
              << format_double(lm.d_max()) << "]\n";
    return 0;
}

inline int run_aep(const RunConfig& cfg, const std::filesystem::path& dir) {
    const AepResult result = aep_convergence(cfg.experiment_config());
    {
        auto os = open_artifact(dir / "aep.csv");
        write_aep_csv(os, result);
    }
    {
        auto os = open_artifact(dir / "gap.csv");
        write_gap_csv(os, result);
    }
    nlohmann::json j;
    j["d"] = result.d;
    j["R_ref"] = result.R_ref;
    j["R_status"] = rate_status_name(result.R_status);
    j["d_min"] = result.d_min;
    j["d_av"] = result.d_av;
    j["warning"] = result.warning;
    nlohmann::json rounds = nlohmann::json::array();
    for (const std::size_t n : cfg.experiment.n_list) {
        const GraphConstraint c = round_constraint(cfg.family(), n);
        nlohmann::json r;
        r["n"] = n;
        r["color_count"] = c.color_count;
        r["sigma_n"] = measure_json(c.sigma, cfg.alphabet);
        r["pi_n"] = pair_json(c.pi, cfg.alphabet);
        rounds.push_back(r);
    }
    j["rounded_constraints"] = rounds;
    {
        auto os = open_artifact(dir / "aep_summary.json");
        os << j.dump(2) << '\n';
    }
    if (!result.warning.empty()) std::cout << "warning: " << result.warning << '\n';
    for (const auto& [n, gap] : result.gaps) {
        std::cout << "n=" << n << " median |rate - R_ref| = " << format_double(gap) << '\n';
    }
    return 0;
}

inline int run_couple(const RunConfig& cfg, const std::filesystem::path& dir) {
    const CouplingResult result = coupling_experiment(cfg.experiment_config());
    {
        auto os = open_artifact(dir / "coupling.csv");
        write_coupling_csv(os, result, cfg.alphabet);
    }
    // One fully detailed run at the largest n for inspection.
    const std::size_t n = cfg.experiment.n_list.back();
    const GraphConstraint c = round_constraint(cfg.family(), n);
    const CouplingReport report = sample_coupled(c, derive_seed(cfg.seed, stream::kCoupling, n, 0));
    {
        auto os = open_artifact(dir / "coupling_report.csv");
        write_coupling_report_csv(os, report, cfg.alphabet);
    }
    for (const auto& row : result.rows) {
        std::cout << "n=" << row.n << " pair=" << cfg.alphabet.name(row.a) << ','
                  << cfg.alphabet.name(row.b) << " mean_B=" << format_double(row.mean_B)
                  << " frac_tv_ge_eps=" << format_double(row.exceed_frac) << '\n';
    }
    return 0;
}

inline int run_lln(const RunConfig& cfg, const std::filesystem::path& dir) {
    const auto rows = lln_experiment(cfg.experiment_config());
    auto os = open_artifact(dir / "lln.csv");
    write_lln_csv(os, rows);
    std::cout << "lln: " << rows.size() << " rows\n";
    return 0;
}

inline int run_oracle(const RunConfig& cfg, const std::filesystem::path& dir) {
    if (cfg.experiment.n_list.empty()) throw ValidationError("oracle needs an n");
    const std::size_t n = cfg.experiment.n_list.front();
    const GraphConstraint c = round_constraint(cfg.family(), n);
    const double guard = cfg.experiment.oracle_guard;
    const ExactLaw graph_law = enumerate_graphs(c, cfg.alphabet, guard);
    {
        auto os = open_artifact(dir / "graph_law.csv");
        write_exact_law_csv(os, graph_law);
    }
    const ExactLaw alloc_law = allocation_law_exact(c, cfg.alphabet, guard);
    {
        auto os = open_artifact(dir / "allocation_law.csv");
        write_exact_law_csv(os, alloc_law);
    }
    std::cout << "graph law: " << graph_law.atoms.size()
              << " atoms, sums to one: " << (graph_law.sums_to_one() ? "yes" : "no") << '\n';
    std::cout << "allocation law: " << alloc_law.atoms.size()
              << " atoms, sums to one: " << (alloc_law.sums_to_one() ? "yes" : "no") << '\n';
    return 0;
}

inline int run_metabolic(const RunConfig& cfg, const std::filesystem::path& dir) {
    if (cfg.experiment.nodes_file.empty() || cfg.experiment.edges_file.empty()) {
        throw ValidationError("metabolic needs 'nodes_file' and 'edges_file'");
    }
    const IngestReport ingest =
        ingest_network(cfg.experiment.nodes_file, cfg.experiment.edges_file);
    const MetabolicReport report =
        metabolic_report(ingest, cfg.experiment.d_values, cfg.tail_tol);
    nlohmann::json j;
    j["n"] = ingest.graph.n();
    j["sigma_n"] = measure_json(report.sigma_n, ingest.alphabet);
    j["pi_n"] = pair_json(report.pi_n, ingest.alphabet);
    j["T"] = report.T;
    j["T_variant"] = report.T_variant;
    j["d_min"] = report.d_min;
    j["d_av"] = report.d_av;
    j["self_loops_dropped"] = report.self_loops_dropped;
    j["duplicate_edges_dropped"] = report.duplicate_edges_dropped;
    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& v : report.verdicts) {
        nlohmann::json vj;
        vj["D"] = v.D;
        vj["rate_zero"] = v.rate_zero;
        verdicts.push_back(vj);
    }
    j["verdicts"] = verdicts;
    {
        auto os = open_artifact(dir / "metabolic_report.json");
        os << j.dump(2) << '\n';
    }
    {
        auto os = open_artifact(dir / "metabolic_rd.csv");
        write_rate_rows(os, report.curve);
    }
    std::cout << "T=" << format_double(report.T)
              << " T_variant=" << format_double(report.T_variant) << '\n';
    for (const auto& v : report.verdicts) {
        std::cout << "D=" << format_double(v.D) << " rate_zero=" << (v.rate_zero ? "yes" : "no")
                  << '\n';
    }
    return 0;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"conditioned colored-graph sampling and rate-distortion laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_override;
    std::string n_override;
    std::string d_override;
    std::uint64_t seed_override = 0;
    std::int64_t samples_override = 0;
    app.add_option("--config", config_path, "JSON configuration file")->required();
    auto* opt_seed = app.add_option("--seed", seed_override, "override the config seed");
    auto* opt_out = app.add_option("--out", out_override, "override the output directory");
    auto* opt_samples =
        app.add_option("--samples", samples_override, "override the sample count");
    auto* opt_n = app.add_option("--n", n_override, "override the n list, e.g. '8,32'");
    auto* opt_d =
        app.add_option("--d", d_override, "override distortion levels: number, list, or lo:hi:count");

    app.add_subcommand("gen", "sample conditioned graphs and write them as text");
    app.add_subcommand("kernel", "build the truncated limiting kernel");
    app.add_subcommand("rate", "tabulate the rate-distortion function R(d)");
    app.add_subcommand("irho", "tabulate the distortion LDP rate I_rho(z)");
    app.add_subcommand("aep", "run the lossy AEP convergence experiment");
    app.add_subcommand("couple", "run the allocation coupling experiment");
    app.add_subcommand("lln", "run the empirical-measure convergence experiment");
    app.add_subcommand("oracle", "enumerate exact small-instance laws");
    app.add_subcommand("metabolic", "ingest a two-type network and report the threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        RunConfig cfg = load_config(config_path);
        if (*opt_seed) cfg.seed = seed_override;
        if (*opt_out) cfg.out_dir = out_override;
        if (*opt_samples) {
            if (samples_override < 1) throw ValidationError("'samples' must be at least 1");
            cfg.experiment.samples = samples_override;
        }
        if (*opt_n) {
            cfg.experiment.n_list.clear();
            for (const double v : detail::parse_d_string(n_override)) {
                if (v < 1.0 || v != std::floor(v)) {
                    throw ValidationError("'--n' entries must be positive integers");
                }
                cfg.experiment.n_list.push_back(static_cast<std::size_t>(v));
            }
        }
        if (*opt_d) cfg.experiment.d_values = detail::parse_d_string(d_override);

        const std::filesystem::path dir(cfg.out_dir);
        std::filesystem::create_directories(dir);
        detail::write_resolved_config(cfg, dir);

        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "gen") return detail::run_gen(cfg, dir);
        if (cmd == "kernel") return detail::run_kernel(cfg, dir);
        if (cmd == "rate") return detail::run_rate(cfg, dir);
        if (cmd == "irho") return detail::run_irho(cfg, dir);
        if (cmd == "aep") return detail::run_aep(cfg, dir);
        if (cmd == "couple") return detail::run_couple(cfg, dir);
        if (cmd == "lln") return detail::run_lln(cfg, dir);
        if (cmd == "oracle") return detail::run_oracle(cfg, dir);
        if (cmd == "metabolic") return detail::run_metabolic(cfg, dir);
        throw ValidationError("unknown subcommand '" + cmd + "'");
    } catch (const ExplosionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const TruncationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

inline int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("graphrd");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace graphrd
