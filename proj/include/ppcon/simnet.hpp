#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ppcon/errors.hpp"
#include "ppcon/graph.hpp"
#include "ppcon/keydist.hpp"
#include "ppcon/protocol.hpp"
#include "ppcon/rng.hpp"
#include "ppcon/shamir.hpp"

namespace ppcon {

enum class UpdateRule { average, nonaverage };

// Everything a single experiment run needs beyond graph, degrees and x0.
struct ExperimentConfig {
    double alpha = 0.0;   // 0 = auto: 0.9 / max degree
    double epsilon = 1e-6;
    long round_cap = 100'000;
    int convergence_streak = 5;
    std::uint64_t seed = 0;
    UpdateRule update = UpdateRule::average;
    int kappa = 20;
    std::vector<int> default_key; // empty = S = (1, 2, ..., bar_p)
    bool keydist_auto = false;    // synchronize the key by consensus first
    // Testing seam: overrides the handshake-derived assignment of round 1.
    std::optional<ChannelAssignment> forced_first_assignment;
};

// On-the-wire unit. Channels travel as labels (indices into S), never as
// the abscissas themselves.
struct Message {
    enum class Kind { handshake, buffer };
    Kind kind = Kind::buffer;
    int from = 0;
    int to = 0;
    long round = 0;
    double bid = 0.0;        // handshake
    int channel_label = -1;  // handshake: sender's preferred channel
    double value = 0.0;      // buffer: sender's r(c_ij) for the edge's channel
};

struct RoundRecord {
    long round = 0;                 // 0 = initial snapshot, no messages
    Matrix buffers;                 // N x bar_p, columns in key order
    std::vector<double> states;     // reconstructed x_i
    ChannelAssignment assignment;   // empty at round 0
    std::vector<Message> messages;  // empty at round 0
    std::vector<double> channel_sums; // sum_i r_i(k), key order
    std::vector<double> lyapunov;     // Phi_k, key order
    bool within_epsilon = false;      // max_i |x_i - mean| < epsilon at this round
};

struct Trace {
    Graph graph;
    SecurityDegree degrees;
    KeySequence key;
    ExperimentConfig config;
    std::vector<double> x0;
    std::vector<double> channel_means; // invariant per-channel averages (round 0)
    std::vector<RoundRecord> rounds;
    long converged_round = -1; // first round of the completed epsilon streak
    std::optional<KeyDistResult> keydist;

    Trace(Graph g, SecurityDegree p, KeySequence k, ExperimentConfig c, std::vector<double> x)
        : graph(std::move(g)), degrees(std::move(p)), key(std::move(k)), config(std::move(c)),
          x0(std::move(x)) {}
};

namespace detail {

inline Matrix snapshot_buffers(const std::vector<NodeState>& nodes, const KeySequence& key) {
    Matrix m(nodes.size(), key.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        std::size_t c = 0;
        for (int k : key.elements()) m(i, c++) = nodes[i].buffers.at(k);
    }
    return m;
}

inline std::vector<double> channel_sums(const Matrix& buffers) {
    std::vector<double> sums(buffers.cols(), 0.0);
    for (std::size_t i = 0; i < buffers.rows(); ++i)
        for (std::size_t c = 0; c < buffers.cols(); ++c) sums[c] += buffers(i, c);
    return sums;
}

inline std::vector<double> lyapunov_values(const Matrix& buffers,
                                           const std::vector<double>& channel_means) {
    std::vector<double> phi(buffers.cols(), 0.0);
    for (std::size_t c = 0; c < buffers.cols(); ++c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < buffers.rows(); ++i) {
            const double d = buffers(i, c) - channel_means[c];
            acc += d * d;
        }
        phi[c] = acc;
    }
    return phi;
}

} // namespace detail

struct RoundOutcome {
    ChannelAssignment assignment;
    std::vector<Message> messages;
};

// One synchronous round of the secret-sharing consensus: handshake,
// channel-wise buffer updates from the pre-round snapshot, then state
// reconstruction. Deterministic given (seed, round).
inline RoundOutcome run_round(std::vector<NodeState>& nodes, const Graph& g,
                              const KeySequence& key, double alpha, std::uint64_t seed,
                              long round, UpdateRule rule = UpdateRule::average,
                              const ChannelAssignment* forced_assignment = nullptr) {
    RoundOutcome out;

    if (forced_assignment != nullptr) {
        for (const Edge& e : g.edges())
            if (!forced_assignment->has(e.first, e.second))
                throw MissingAssignment("forced assignment misses edge (" +
                                        std::to_string(e.first) + "," +
                                        std::to_string(e.second) + ")");
        out.assignment = *forced_assignment;
    } else {
        for (NodeState& node : nodes) {
            RngStream rng = derive_stream(seed, StreamPurpose::handshake,
                                          static_cast<std::uint64_t>(node.id),
                                          static_cast<std::uint64_t>(round));
            draw_handshake(node, g.neighbors(node.id), key, rng);
        }
        for (const Edge& e : g.edges()) {
            const HandshakePair& pi = nodes[e.first - 1].pending_handshakes.at(e.second);
            const HandshakePair& pj = nodes[e.second - 1].pending_handshakes.at(e.first);
            out.messages.push_back({Message::Kind::handshake, e.first, e.second, round, pi.bid,
                                    static_cast<int>(key.index_of(pi.preferred_channel)), 0.0});
            out.messages.push_back({Message::Kind::handshake, e.second, e.first, round, pj.bid,
                                    static_cast<int>(key.index_of(pj.preferred_channel)), 0.0});
            out.assignment.assign(e.first, e.second,
                                  resolve_channel(pi, pj, e.first, e.second));
        }
    }

    // Pre-round buffer values are what travels this round.
    for (const Edge& e : g.edges()) {
        const int channel = out.assignment.channel(e.first, e.second);
        const int label = static_cast<int>(key.index_of(channel));
        out.messages.push_back({Message::Kind::buffer, e.first, e.second, round, 0.0, label,
                                nodes[e.first - 1].buffers.at(channel)});
        out.messages.push_back({Message::Kind::buffer, e.second, e.first, round, 0.0, label,
                                nodes[e.second - 1].buffers.at(channel)});
    }

    // Double-buffered update: every read targets the pre-round snapshot.
    std::vector<std::map<int, double>> next(nodes.size());
    for (const NodeState& node : nodes) {
        for (int k : key.elements()) {
            std::vector<std::pair<int, double>> incoming;
            for (int j : g.neighbors(node.id)) {
                if (out.assignment.channel(node.id, j) != k) continue;
                incoming.push_back({j, nodes[j - 1].buffers.at(k)});
            }
            next[node.id - 1][k] = rule == UpdateRule::average
                                       ? channel_update(node, k, incoming, alpha)
                                       : channel_update_nonaverage(node, k, incoming);
        }
    }
    for (NodeState& node : nodes) node.buffers = std::move(next[node.id - 1]);
    for (NodeState& node : nodes) node.state = reconstruct_state(node, key);
    return out;
}

// Full orchestration: optional key distribution, node initialization,
// synchronous rounds until the states sit within epsilon of their mean for
// `convergence_streak` consecutive rounds (the reported convergence round
// is the first of that streak), or until the round cap trips.
inline Trace run_experiment(const Graph& g, const SecurityDegree& p,
                            const std::vector<double>& x0, const ExperimentConfig& cfg) {
    const int n = g.node_count();
    if (static_cast<int>(p.node_count()) != n)
        throw ValidationError("security degree count differs from node count");
    if (static_cast<int>(x0.size()) != n)
        throw ValidationError("initial state count differs from node count");
    if (!is_connected(g)) throw NotConnected("experiment requires a connected graph");
    if (cfg.round_cap < 1) throw ConfigError("round cap must be >= 1");
    if (cfg.epsilon <= 0.0) throw ConfigError("epsilon must be positive");

    const int max_deg = g.max_degree();
    double alpha = cfg.alpha;
    if (alpha == 0.0) alpha = max_deg > 0 ? 0.9 / max_deg : 0.9;
    if (alpha <= 0.0) throw ConfigError("alpha must be positive");
    if (max_deg > 0 && alpha >= 1.0 / max_deg)
        throw StepSizeTooLarge("alpha must be below 1/max_degree = " +
                               std::to_string(1.0 / max_deg));

    const int bar_p = p.bar_p();
    std::optional<KeyDistResult> keydist;
    std::vector<int> key_elements = cfg.default_key;
    if (cfg.keydist_auto) {
        KeyDistConfig kd;
        kd.bar_p = bar_p;
        kd.kappa = cfg.kappa;
        kd.n_bound = n;
        kd.lambda = std::clamp(spectral_gap(metropolis_weights(g), cfg.seed), 1e-12, 1.0 - 1e-12);
        keydist = run_key_distribution(g, kd, cfg.seed);
        key_elements = keydist->key.elements();
    } else if (key_elements.empty()) {
        for (int k = 1; k <= bar_p; ++k) key_elements.push_back(k);
    }
    KeySequence key(key_elements, std::max(cfg.kappa, *std::max_element(key_elements.begin(),
                                                                        key_elements.end())));
    if (static_cast<int>(key.size()) < bar_p)
        throw ConfigError("key provides fewer channels than the maximal security degree");

    std::vector<NodeState> nodes;
    nodes.reserve(n);
    for (int i = 1; i <= n; ++i) {
        RngStream rng = derive_stream(cfg.seed, StreamPurpose::node_init,
                                      static_cast<std::uint64_t>(i));
        nodes.push_back(init_node(i, x0[i - 1], p.of(i), key, rng));
    }

    ExperimentConfig recorded = cfg;
    recorded.alpha = alpha;
    Trace trace(g, p, key, recorded, x0);
    trace.keydist = keydist;

    auto record_round = [&](long round, ChannelAssignment assignment,
                            std::vector<Message> messages) {
        RoundRecord rec;
        rec.round = round;
        rec.buffers = detail::snapshot_buffers(nodes, key);
        rec.states.reserve(nodes.size());
        for (const NodeState& node : nodes) rec.states.push_back(node.state);
        rec.assignment = std::move(assignment);
        rec.messages = std::move(messages);
        rec.channel_sums = detail::channel_sums(rec.buffers);
        if (trace.channel_means.empty())
            for (double s : rec.channel_sums) trace.channel_means.push_back(s / n);
        rec.lyapunov = detail::lyapunov_values(rec.buffers, trace.channel_means);
        const double m = mean(rec.states);
        double dev = 0.0;
        for (double x : rec.states) dev = std::max(dev, std::abs(x - m));
        rec.within_epsilon = dev < cfg.epsilon;
        trace.rounds.push_back(std::move(rec));
    };

    record_round(0, ChannelAssignment{}, {});

    int streak = trace.rounds.back().within_epsilon ? 1 : 0;
    if (streak >= cfg.convergence_streak) {
        trace.converged_round = 0;
        return trace;
    }
    for (long round = 1; round <= cfg.round_cap; ++round) {
        const ChannelAssignment* forced =
            round == 1 && cfg.forced_first_assignment ? &*cfg.forced_first_assignment : nullptr;
        RoundOutcome out = run_round(nodes, g, key, alpha, cfg.seed, round, cfg.update, forced);
        record_round(round, std::move(out.assignment), std::move(out.messages));
        streak = trace.rounds.back().within_epsilon ? streak + 1 : 0;
        if (streak >= cfg.convergence_streak) {
            trace.converged_round = round - (cfg.convergence_streak - 1);
            return trace;
        }
    }
    throw RoundCapExceeded("no convergence within " + std::to_string(cfg.round_cap) +
                           " rounds");
}

// ---------------------------------------------------------------------------
// Adversaries (passive): neighbor collusion and edge eavesdropping.

struct AdversarySpec {
    enum class Mode { collusion, eavesdrop };
    Mode mode = Mode::collusion;
    int target = 0;
    std::vector<int> colluders;     // collusion: subset of the target's neighbors
    std::vector<Edge> tapped_edges; // eavesdrop: edges incident to the target
    bool knows_key = true;          // eavesdrop only; colluders always know S
};

struct Observation {
    long round = 0;
    int channel_label = -1; // wire label
    int channel_point = 0;  // abscissa, 0 when unknown
    double value = 0.0;
    Edge provenance{0, 0};
};

struct RoundVerdict {
    long round = 0;
    bool determined = false;
    int free_dim = 0;    // affine freedom when underdetermined
    double value = 0.0;  // recovered constant when determined
};

struct AdversaryView {
    AdversarySpec spec;
    std::vector<Observation> observations;
    std::vector<RoundVerdict> verdicts; // one per executed round
};

namespace detail {

inline RoundVerdict certify(long round, const std::vector<Share>& shares, int degree) {
    const Certificate cert = underdetermination_certificate(shares, degree);
    RoundVerdict v;
    v.round = round;
    v.determined = cert.determined;
    v.free_dim = cert.determined ? 0 : cert.free_dimension;
    v.value = cert.determined ? cert.constant : 0.0;
    return v;
}

// Two admissible abscissa assignments for a set of wire labels. Any pair
// of distinct-integer hypotheses that disagree on reconstruction proves
// the constant term unidentifiable without the key. Shifted (not scaled)
// hypotheses: Lagrange weights at zero are invariant under scaling every
// abscissa, so scaled pairs would always agree.
inline std::vector<int> hypothesis_points(const std::vector<int>& labels, int offset) {
    std::vector<int> pts;
    pts.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        pts.push_back(static_cast<int>(i) + offset);
    return pts;
}

} // namespace detail

// Pool everything the colluders legitimately received from the target and
// test, round by round, whether their Vandermonde system pins the
// target's constant term.
inline AdversaryView collude(const AdversarySpec& spec, const Trace& trace,
                             const KeySequence& key, int p_target) {
    if (spec.mode != AdversarySpec::Mode::collusion)
        throw InvalidSpec("collude requires a collusion-mode spec");
    if (spec.target < 1 || spec.target > trace.graph.node_count())
        throw InvalidSpec("collusion target out of range");
    std::set<int> colluders(spec.colluders.begin(), spec.colluders.end());
    if (colluders.count(spec.target)) throw InvalidSpec("target cannot collude against itself");
    for (int c : colluders)
        if (!trace.graph.has_edge(c, spec.target))
            throw InvalidSpec("colluder " + std::to_string(c) + " is not a neighbor of node " +
                              std::to_string(spec.target));

    AdversaryView view;
    view.spec = spec;
    for (const RoundRecord& rec : trace.rounds) {
        if (rec.round == 0) continue;
        std::map<int, double> by_point; // distinct channels only
        for (const Message& msg : rec.messages) {
            if (msg.kind != Message::Kind::buffer) continue;
            if (msg.from != spec.target || !colluders.count(msg.to)) continue;
            const int point = key.elements()[msg.channel_label];
            by_point.emplace(point, msg.value);
            view.observations.push_back(
                {rec.round, msg.channel_label, point, msg.value, make_edge(msg.from, msg.to)});
        }
        std::vector<Share> shares;
        for (const auto& [point, value] : by_point) shares.push_back({point, value});
        view.verdicts.push_back(detail::certify(rec.round, shares, p_target - 1));
    }
    return view;
}

// Wiretap on a fixed edge set: the adversary sees handshakes and buffer
// values, resolves channel labels, and (when it knows the key) maps labels
// to abscissas. Without the key the verdict stays underdetermined unless
// every admissible key hypothesis reconstructs the same constant.
inline AdversaryView eavesdrop(const AdversarySpec& spec, const Trace& trace) {
    if (spec.mode != AdversarySpec::Mode::eavesdrop)
        throw InvalidSpec("eavesdrop requires an eavesdrop-mode spec");
    if (spec.target < 1 || spec.target > trace.graph.node_count())
        throw InvalidSpec("eavesdrop target out of range");
    std::set<Edge> taps;
    for (const Edge& e : spec.tapped_edges) {
        const Edge norm = make_edge(e.first, e.second);
        if (norm.first != spec.target && norm.second != spec.target)
            throw InvalidSpec("tapped edge (" + std::to_string(norm.first) + "," +
                              std::to_string(norm.second) + ") is not incident to the target");
        if (!trace.graph.has_edge(norm.first, norm.second))
            throw InvalidSpec("tapped edge (" + std::to_string(norm.first) + "," +
                              std::to_string(norm.second) + ") is not in the graph");
        taps.insert(norm);
    }

    const int p_target = trace.degrees.of(spec.target);
    AdversaryView view;
    view.spec = spec;
    for (const RoundRecord& rec : trace.rounds) {
        if (rec.round == 0) continue;
        std::map<int, double> by_label; // target-originated value per wire label
        for (const Message& msg : rec.messages) {
            if (msg.kind != Message::Kind::buffer) continue;
            if (!taps.count(make_edge(msg.from, msg.to))) continue;
            const int point = spec.knows_key ? trace.key.elements()[msg.channel_label] : 0;
            view.observations.push_back(
                {rec.round, msg.channel_label, point, msg.value, make_edge(msg.from, msg.to)});
            if (msg.from == spec.target) by_label.emplace(msg.channel_label, msg.value);
        }
        if (spec.knows_key) {
            std::vector<Share> shares;
            for (const auto& [label, value] : by_label)
                shares.push_back({trace.key.elements()[label], value});
            view.verdicts.push_back(detail::certify(rec.round, shares, p_target - 1));
            continue;
        }
        std::vector<int> labels;
        std::vector<double> values;
        for (const auto& [label, value] : by_label) {
            labels.push_back(label);
            values.push_back(value);
        }
        const std::vector<int> pts_a = detail::hypothesis_points(labels, 1);
        const std::vector<int> pts_b = detail::hypothesis_points(labels, 2); // shifted by one
        std::vector<Share> shares_a, shares_b;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            shares_a.push_back({pts_a[i], values[i]});
            shares_b.push_back({pts_b[i], values[i]});
        }
        const RoundVerdict va = detail::certify(rec.round, shares_a, p_target - 1);
        const RoundVerdict vb = detail::certify(rec.round, shares_b, p_target - 1);
        RoundVerdict v = va;
        const double scale = std::max({1.0, std::abs(va.value), std::abs(vb.value)});
        if (!(va.determined && vb.determined && std::abs(va.value - vb.value) <= 1e-9 * scale)) {
            v.determined = false;
            v.free_dim = std::max(va.determined ? 1 : va.free_dim, vb.determined ? 1 : vb.free_dim);
            v.value = 0.0;
        }
        view.verdicts.push_back(v);
    }
    return view;
}

} // namespace ppcon
