#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ppcon/ppcon.hpp"

namespace fs = std::filesystem;
using namespace ppcon;

namespace {

struct RunManifest {
    std::string command;
    std::string graph_path;
    std::string config_path;
    std::string output_dir = "out";
    std::optional<std::uint64_t> seed_override;
    bool force = false;
    int jobs = 1;
};

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int exit_code_for(const Error& e) {
    if (dynamic_cast<const MaxBlocksExceeded*>(&e)) return 3;
    if (dynamic_cast<const RoundCapExceeded*>(&e)) return 4;
    return 2;
}

FileConfig load_config(const RunManifest& manifest) {
    if (manifest.config_path.empty()) return {};
    return parse_config(read_text_file(manifest.config_path));
}

Graph load_graph(const RunManifest& manifest) {
    if (manifest.graph_path.empty()) throw ConfigError("a graph file is required (--graph)");
    return parse_graph(read_text_file(manifest.graph_path));
}

std::uint64_t pick_seed(const RunManifest& manifest, const FileConfig& cfg) {
    if (manifest.seed_override) return *manifest.seed_override;
    if (cfg.seed) return *cfg.seed;
    return 0;
}

void refuse_overwrite(const fs::path& dir, const std::vector<std::string>& files, bool force) {
    if (force) return;
    for (const std::string& f : files)
        if (fs::exists(dir / f))
            throw ConfigError("refusing to overwrite " + (dir / f).string() +
                              " (pass --force to allow)");
}

std::string key_to_string(const std::vector<int>& elements) {
    std::string out = "(";
    for (std::size_t i = 0; i < elements.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(elements[i]);
    }
    return out + ")";
}

std::vector<double> draw_initial_states(std::uint64_t seed, int n) {
    std::vector<double> x0(n);
    for (int i = 1; i <= n; ++i) {
        RngStream rng = derive_stream(seed, StreamPurpose::initial_states,
                                      static_cast<std::uint64_t>(i));
        x0[i - 1] = rng.next_real(0.0, 100.0);
    }
    return x0;
}

SecurityDegree degrees_from_config(const FileConfig& cfg, int n) {
    if (!cfg.security_degrees)
        throw ConfigError("config must set security_degrees for this command");
    if (static_cast<int>(cfg.security_degrees->size()) != n)
        throw ConfigError("security_degrees count differs from node count");
    return SecurityDegree(*cfg.security_degrees);
}

std::vector<Edge> parse_edge_list_flag(const std::string& text) {
    std::vector<Edge> edges;
    std::string compact;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
    std::size_t pos = 0;
    while (pos < compact.size()) {
        if (compact[pos] == ',') { ++pos; continue; }
        if (compact[pos] != '(') throw ParseError("expected '(' in edge list '" + text + "'");
        const std::size_t close = compact.find(')', pos);
        if (close == std::string::npos) throw ParseError("unbalanced '(' in edge list");
        const std::string pair = compact.substr(pos + 1, close - pos - 1);
        const std::size_t comma = pair.find(',');
        if (comma == std::string::npos) throw ParseError("expected 'i,j' in edge '" + pair + "'");
        try {
            edges.push_back(make_edge(std::stoi(pair.substr(0, comma)),
                                      std::stoi(pair.substr(comma + 1))));
        } catch (const std::exception&) {
            throw ParseError("bad node index in edge '" + pair + "'");
        }
        pos = close + 1;
    }
    if (edges.empty()) throw ParseError("empty edge list '" + text + "'");
    return edges;
}

// Run one job per seed (seed, seed+1, ...); with jobs > 1 each seed writes
// under out/seed_<s>/ and summaries print in seed order.
int run_seed_batch(const RunManifest& manifest, std::uint64_t base_seed,
                   const std::function<std::string(std::uint64_t, const fs::path&)>& cell) {
    if (manifest.jobs <= 1) {
        std::cout << cell(base_seed, manifest.output_dir);
        return 0;
    }
    std::vector<std::string> reports(manifest.jobs);
    std::vector<std::thread> threads;
    std::mutex error_mutex;
    std::optional<int> first_error;
    std::string first_error_message;
    for (int j = 0; j < manifest.jobs; ++j) {
        threads.emplace_back([&, j] {
            const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(j);
            const fs::path dir = fs::path(manifest.output_dir) / ("seed_" + std::to_string(seed));
            try {
                reports[j] = cell(seed, dir);
            } catch (const Error& e) {
                std::lock_guard lock(error_mutex);
                if (!first_error) {
                    first_error = exit_code_for(e);
                    first_error_message = e.what();
                }
            }
        });
    }
    for (std::thread& t : threads) t.join();
    for (const std::string& r : reports) std::cout << r;
    if (first_error) {
        std::cerr << "error: " << first_error_message << "\n";
        return *first_error;
    }
    return 0;
}

int cmd_keydist(const RunManifest& manifest, int bar_p_flag, int kappa_flag, int n_bound_flag) {
    const FileConfig cfg = load_config(manifest);
    const Graph g = load_graph(manifest);
    if (!is_connected(g)) throw NotConnected("keydist requires a connected graph");

    KeyDistConfig kd;
    if (cfg.security_degrees) kd.bar_p = SecurityDegree(*cfg.security_degrees).bar_p();
    if (bar_p_flag > 0) kd.bar_p = bar_p_flag;
    kd.kappa = kappa_flag > 0 ? kappa_flag : cfg.kappa.value_or(20);
    kd.n_bound = n_bound_flag > 0 ? n_bound_flag : g.node_count();
    kd.lambda = std::clamp(spectral_gap(metropolis_weights(g)), 1e-12, 1.0 - 1e-12);
    kd.validate();

    const int rounds_per_block = rounds_needed(kd.lambda, kd.delta, kd.kappa, kd.n_bound);
    return run_seed_batch(manifest, pick_seed(manifest, cfg),
                          [&](std::uint64_t seed, const fs::path& dir) {
        refuse_overwrite(dir, {"keydist.csv"}, manifest.force);
        const KeyDistResult result = run_key_distribution(g, kd, seed);
        export_keydist(result, dir, rounds_per_block);
        std::ostringstream out;
        out << "seed: " << seed << "\n";
        out << "key: " << key_to_string(result.key.elements()) << "\n";
        out << "iterations: " << result.total_rounds << " (" << result.blocks << " blocks of "
            << rounds_per_block << " rounds)\n";
        out << "block deviations:";
        for (double d : result.block_deviations) out << " " << format_real(d);
        out << "\n";
        return out.str();
    });
}

ExperimentConfig experiment_config(const FileConfig& cfg, double alpha_flag,
                                   const std::string& update_flag,
                                   const std::string& keydist_flag, std::uint64_t seed) {
    ExperimentConfig ec;
    ec.seed = seed;
    ec.alpha = alpha_flag > 0.0 ? alpha_flag : cfg.alpha.value_or(0.0);
    ec.epsilon = cfg.epsilon.value_or(1e-6);
    ec.round_cap = cfg.round_cap.value_or(100'000);
    ec.kappa = cfg.kappa.value_or(20);
    if (cfg.default_key) ec.default_key = *cfg.default_key;
    ec.keydist_auto = cfg.keydist_auto;
    if (update_flag == "nonaverage") ec.update = UpdateRule::nonaverage;
    else if (update_flag != "average" && !update_flag.empty())
        throw ConfigError("--update must be 'average' or 'nonaverage'");
    if (keydist_flag == "auto") ec.keydist_auto = true;
    else if (keydist_flag == "default") ec.keydist_auto = false;
    else if (!keydist_flag.empty())
        throw ConfigError("--keydist must be 'default' or 'auto'");
    return ec;
}

std::string consensus_report(const Trace& trace, std::uint64_t seed) {
    const std::vector<double>& final_states = trace.rounds.back().states;
    const double consensus_value = mean(final_states);
    const double initial_mean = mean(trace.x0);
    std::ostringstream out;
    out << "seed: " << seed << "\n";
    out << "nodes: " << trace.graph.node_count() << ", alpha: " << format_real(trace.config.alpha)
        << ", key: " << key_to_string(trace.key.elements()) << "\n";
    if (trace.keydist)
        out << "key distribution: " << trace.keydist->total_rounds << " iterations, "
            << trace.keydist->blocks << " blocks\n";
    out << "converged at round: " << trace.converged_round << " (of " << trace.rounds.size() - 1
        << " executed)\n";
    out << "consensus value: " << format_real(consensus_value) << "\n";
    out << "mean(x0): " << format_real(initial_mean) << "\n";
    out << "difference: " << format_real(consensus_value - initial_mean);
    if (trace.config.update == UpdateRule::nonaverage)
        out << " [NON-AVERAGE update: consensus need not equal mean(x0)]";
    out << "\n";
    return out.str();
}

int cmd_consensus(const RunManifest& manifest, double alpha_flag, const std::string& update_flag,
                  const std::string& keydist_flag) {
    const FileConfig cfg = load_config(manifest);
    const Graph g = load_graph(manifest);
    const SecurityDegree p = degrees_from_config(cfg, g.node_count());

    return run_seed_batch(manifest, pick_seed(manifest, cfg),
                          [&](std::uint64_t seed, const fs::path& dir) {
        ExperimentConfig ec = experiment_config(cfg, alpha_flag, update_flag, keydist_flag,
                                                seed);
        std::vector<std::string> outputs = {"states.csv", "channel_sums.csv"};
        refuse_overwrite(dir, outputs, manifest.force);
        const std::vector<double> x0 = draw_initial_states(seed, g.node_count());
        const Trace trace = run_experiment(g, p, x0, ec);
        refuse_overwrite(dir, {"buffers_channel_" +
                               std::to_string(trace.key.elements()[0]) + ".csv"},
                         manifest.force);
        export_trace(trace, dir);
        return consensus_report(trace, seed);
    });
}

int cmd_attack(const RunManifest& manifest, double alpha_flag, const std::string& update_flag,
               const std::string& keydist_flag, const std::string& collude_flag,
               const std::string& eavesdrop_flag, int target, bool knows_key) {
    const FileConfig cfg = load_config(manifest);
    const Graph g = load_graph(manifest);
    const SecurityDegree p = degrees_from_config(cfg, g.node_count());

    if (collude_flag.empty() == eavesdrop_flag.empty())
        throw InvalidSpec("exactly one of --collude and --eavesdrop-edges is required");
    if (target < 1 || target > g.node_count())
        throw InvalidSpec("--target must name a node in [1, " +
                          std::to_string(g.node_count()) + "]");

    AdversarySpec spec;
    spec.target = target;
    spec.knows_key = knows_key;
    if (!collude_flag.empty()) {
        spec.mode = AdversarySpec::Mode::collusion;
        spec.colluders = parse_int_list(collude_flag);
    } else {
        spec.mode = AdversarySpec::Mode::eavesdrop;
        spec.tapped_edges = parse_edge_list_flag(eavesdrop_flag);
    }

    return run_seed_batch(manifest, pick_seed(manifest, cfg),
                          [&](std::uint64_t seed, const fs::path& dir) {
        ExperimentConfig ec = experiment_config(cfg, alpha_flag, update_flag, keydist_flag,
                                                seed);
        refuse_overwrite(dir, {"adversary.csv"}, manifest.force);
        const std::vector<double> x0 = draw_initial_states(seed, g.node_count());
        const Trace trace = run_experiment(g, p, x0, ec);
        const AdversaryView view =
            spec.mode == AdversarySpec::Mode::collusion
                ? collude(spec, trace, trace.key, p.of(spec.target))
                : eavesdrop(spec, trace);
        export_adversary(view, dir);

        long first_determined = -1;
        long determined_count = 0;
        for (const RoundVerdict& v : view.verdicts) {
            if (!v.determined) continue;
            ++determined_count;
            if (first_determined < 0) first_determined = v.round;
        }
        std::ostringstream out;
        out << "seed: " << seed << "\n";
        out << "mode: "
            << (spec.mode == AdversarySpec::Mode::collusion ? "collusion" : "eavesdrop")
            << ", target: " << spec.target << " (p_target = " << p.of(spec.target) << ")\n";
        out << "rounds analyzed: " << view.verdicts.size() << ", determined: "
            << determined_count << "\n";
        if (first_determined >= 0) {
            out << "first determined round: " << first_determined << " (value "
                << format_real(view.verdicts[first_determined - 1].value) << ")\n";
        } else {
            out << "first determined round: none\n";
        }
        out << "convergence round: " << trace.converged_round << "\n";
        return out.str();
    });
}

int cmd_spectral(const RunManifest& manifest, int kappa_flag, int n_bound_flag) {
    const FileConfig cfg = load_config(manifest);
    const Graph g = load_graph(manifest);
    if (!is_connected(g)) throw NotConnected("spectral analysis requires a connected graph");
    const int n = g.node_count();
    const int n_for_bound = n_bound_flag > 0 ? n_bound_flag : n;
    const int kappa = kappa_flag > 0 ? kappa_flag : cfg.kappa.value_or(20);

    const double gamma = spectral_gap(metropolis_weights(g), pick_seed(manifest, cfg));
    const double bound = 1.0 - 1.0 / (71.0 * static_cast<double>(n_for_bound) *
                                      static_cast<double>(n_for_bound));
    const double lambda = std::clamp(gamma, 1e-12, 1.0 - 1e-12);
    std::cout << "nodes: " << n << ", edges: " << g.edges().size() << "\n";
    std::cout << "gamma (Metropolis): " << format_real(gamma) << "\n";
    std::cout << "bound 1 - 1/(71 N^2) with N = " << n_for_bound << ": " << format_real(bound)
              << "\n";
    std::cout << "rounds_needed(gamma, delta=0.1, kappa=" << kappa << ", n=" << n_for_bound
              << "): " << rounds_needed(lambda, 0.1, kappa, n_for_bound) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Privacy-preserving average consensus simulator"};
    app.require_subcommand(1);

    RunManifest manifest;
    double alpha_flag = 0.0;
    std::string update_flag, keydist_flag, collude_flag, eavesdrop_flag;
    int target = 0, bar_p_flag = 0, kappa_flag = 0, n_bound_flag = 0;
    bool knows_key = false;

    auto add_common = [&](CLI::App* cmd, bool needs_out) {
        cmd->add_option("--graph", manifest.graph_path, "edge-list file")->required();
        cmd->add_option("--config", manifest.config_path, "key = value config file");
        cmd->add_option("--seed", manifest.seed_override, "seed override");
        if (needs_out) {
            cmd->add_option("--out", manifest.output_dir, "output directory");
            cmd->add_flag("--force", manifest.force, "allow overwriting existing outputs");
            cmd->add_option("--jobs", manifest.jobs, "independent seeds run in parallel")
                ->check(CLI::Range(1, 64));
        }
    };

    CLI::App* keydist_cmd = app.add_subcommand("keydist", "distribute a common key sequence");
    add_common(keydist_cmd, true);
    keydist_cmd->add_option("--bar-p", bar_p_flag, "number of channels");
    keydist_cmd->add_option("--kappa", kappa_flag, "maximal key value");
    keydist_cmd->add_option("--n-bound", n_bound_flag, "upper bound on node count");

    CLI::App* consensus_cmd = app.add_subcommand("consensus", "run the consensus protocol");
    add_common(consensus_cmd, true);
    consensus_cmd->add_option("--alpha", alpha_flag, "step size (default 0.9/max degree)");
    consensus_cmd->add_option("--update", update_flag, "average | nonaverage");
    consensus_cmd->add_option("--keydist", keydist_flag, "default | auto");

    CLI::App* attack_cmd = app.add_subcommand("attack", "run an adversary against a trace");
    add_common(attack_cmd, true);
    attack_cmd->add_option("--alpha", alpha_flag, "step size (default 0.9/max degree)");
    attack_cmd->add_option("--update", update_flag, "average | nonaverage");
    attack_cmd->add_option("--keydist", keydist_flag, "default | auto");
    attack_cmd->add_option("--collude", collude_flag, "comma-separated colluding neighbors");
    attack_cmd->add_option("--eavesdrop-edges", eavesdrop_flag, "tapped edges, e.g. \"(1,2),(1,5)\"");
    attack_cmd->add_option("--target", target, "node under attack");
    attack_cmd->add_flag("--knows-key", knows_key, "eavesdropper knows the key sequence");

    CLI::App* spectral_cmd = app.add_subcommand("spectral", "Metropolis spectral report");
    add_common(spectral_cmd, false);
    spectral_cmd->add_option("--kappa", kappa_flag, "maximal key value");
    spectral_cmd->add_option("--n-bound", n_bound_flag, "compute the bound from this N");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(keydist_cmd))
            return cmd_keydist(manifest, bar_p_flag, kappa_flag, n_bound_flag);
        if (app.got_subcommand(consensus_cmd))
            return cmd_consensus(manifest, alpha_flag, update_flag, keydist_flag);
        if (app.got_subcommand(attack_cmd))
            return cmd_attack(manifest, alpha_flag, update_flag, keydist_flag, collude_flag,
                              eavesdrop_flag, target, knows_key);
        if (app.got_subcommand(spectral_cmd))
            return cmd_spectral(manifest, kappa_flag, n_bound_flag);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
