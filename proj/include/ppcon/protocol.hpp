#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ppcon/errors.hpp"
#include "ppcon/rng.hpp"
#include "ppcon/shamir.hpp"

namespace ppcon {

// Per-node thresholds p_i: fewer than p_i colluding neighbors (or tapped
// incident edges) must not determine node i's state.
class SecurityDegree {
public:
    explicit SecurityDegree(std::vector<int> degrees) : degrees_(std::move(degrees)) {
        if (degrees_.empty()) throw ValidationError("security degree list must be nonempty");
        for (int p : degrees_)
            if (p < 1) throw ValidationError("every security degree must be >= 1");
    }

    const std::vector<int>& degrees() const { return degrees_; }
    int of(int node) const { return degrees_[node - 1]; }
    std::size_t node_count() const { return degrees_.size(); }

    int bar_p() const {
        int m = 1;
        for (int p : degrees_) m = std::max(m, p);
        return m;
    }

private:
    std::vector<int> degrees_;
};

// One round's (bid, preferred channel) draw for a single edge.
struct HandshakePair {
    double bid = 0.0;          // in [-1,1]
    int preferred_channel = 0; // a key element
};

struct NodeState {
    int id = 0;
    double state = 0.0;    // x_i(t), refreshed by reconstruct_state
    SecretPolynomial poly; // constant = x_i(0), coefficients private
    std::map<int, double> buffers; // key element -> r_i(k)
    std::map<int, HandshakePair> pending_handshakes; // neighbor -> pair
};

// Initialization: draw p_i - 1 masking coefficients from [-1,1] and fill
// every channel buffer with f_i(k, 0).
inline NodeState init_node(int id, double x0, int p_i, const KeySequence& key, RngStream& rng) {
    if (p_i < 1) throw ValidationError("security degree must be >= 1");
    if (static_cast<std::size_t>(p_i) > key.size())
        throw DegreeExceedsChannels("node " + std::to_string(id) + " has degree " +
                                    std::to_string(p_i) + " but only " +
                                    std::to_string(key.size()) + " channels exist");
    NodeState node;
    node.id = id;
    node.state = x0;
    node.poly.constant_term = x0;
    node.poly.coefficients.resize(p_i - 1);
    for (double& a : node.poly.coefficients) a = rng.next_real(-1.0, 1.0);
    for (int k : key.elements()) node.buffers[k] = eval_poly(node.poly, k);
    return node;
}

// Draw one handshake pair per neighbor: bid ~ U([-1,1]), preferred
// channel ~ U(S). Neighbors are visited in sorted order so a given stream
// always produces the same pairs.
inline std::map<int, HandshakePair> draw_handshake(NodeState& node,
                                                   const std::vector<int>& neighbors,
                                                   const KeySequence& key, RngStream& rng) {
    node.pending_handshakes.clear();
    for (int j : neighbors) {
        HandshakePair pair;
        pair.bid = rng.next_real(-1.0, 1.0);
        pair.preferred_channel = key.elements()[rng.next_index(key.size())];
        node.pending_handshakes[j] = pair;
    }
    return node.pending_handshakes;
}

// The higher bid's preference wins; exact ties go to the lower-indexed
// node so both endpoints resolve identically.
inline int resolve_channel(const HandshakePair& pair_i, const HandshakePair& pair_j, int i,
                           int j) {
    if (pair_i.bid > pair_j.bid) return pair_i.preferred_channel;
    if (pair_j.bid > pair_i.bid) return pair_j.preferred_channel;
    return i < j ? pair_i.preferred_channel : pair_j.preferred_channel;
}

// Channel-wise consensus step for one buffer:
//   r_i(k) + alpha * sum_j (r_j(k) - r_i(k))
// over the neighbors whose edge carries channel k this round. Pure: the
// caller applies the result after computing the whole round from the
// pre-round snapshot.
inline double channel_update(const NodeState& node, int k,
                             const std::vector<std::pair<int, double>>& incoming,
                             double alpha) {
    const double own = node.buffers.at(k);
    double acc = 0.0;
    for (const auto& [neighbor, value] : incoming) {
        (void)neighbor;
        acc += value - own;
    }
    return own + alpha * acc;
}

// Degree-normalized variant: alpha_i * (r_i(k) + sum_j r_j(k)) with
// alpha_i = 1/(1 + #incoming). Reaches consensus but not necessarily the
// average of the initial states.
inline double channel_update_nonaverage(const NodeState& node, int k,
                                        const std::vector<std::pair<int, double>>& incoming) {
    const double own = node.buffers.at(k);
    double acc = own;
    for (const auto& [neighbor, value] : incoming) {
        (void)neighbor;
        acc += value;
    }
    return acc / (1.0 + static_cast<double>(incoming.size()));
}

// State reconstruction from the channel buffers via the cached Lagrange
// weights at zero.
inline double reconstruct_state(const NodeState& node, const KeySequence& key) {
    const std::vector<double>& weights = key.lagrange_weights();
    double acc = 0.0;
    std::size_t idx = 0;
    for (int k : key.elements()) acc += node.buffers.at(k) * weights[idx++];
    return acc;
}

} // namespace ppcon
