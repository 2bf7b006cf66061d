#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ppcon/errors.hpp"
#include "ppcon/linalg.hpp"
#include "ppcon/rng.hpp"

namespace ppcon {

// Nodes are 1-based everywhere in the public API (matching the edge-list
// file format); matrix rows/columns are 0-based, row i-1 for node i.
using Edge = std::pair<int, int>;

inline Edge make_edge(int i, int j) { return {std::min(i, j), std::max(i, j)}; }

class Graph {
public:
    Graph(int node_count, std::vector<Edge> edges) : node_count_(node_count) {
        if (node_count_ < 1) throw ValidationError("node count must be >= 1");
        std::set<Edge> unique;
        for (Edge e : edges) {
            e = make_edge(e.first, e.second);
            if (e.first == e.second)
                throw ValidationError("self-loop at node " + std::to_string(e.first));
            if (e.first < 1 || e.second > node_count_)
                throw ValidationError("edge (" + std::to_string(e.first) + "," +
                                      std::to_string(e.second) + ") endpoint out of range");
            if (!unique.insert(e).second)
                throw ValidationError("duplicate edge (" + std::to_string(e.first) + "," +
                                      std::to_string(e.second) + ")");
        }
        edges_.assign(unique.begin(), unique.end());
        neighbors_.assign(node_count_ + 1, {});
        for (const Edge& e : edges_) {
            neighbors_[e.first].push_back(e.second);
            neighbors_[e.second].push_back(e.first);
        }
        for (auto& adj : neighbors_) std::sort(adj.begin(), adj.end());
    }

    int node_count() const { return node_count_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int node) const { return neighbors_[node]; }
    int degree(int node) const { return static_cast<int>(neighbors_[node].size()); }

    int max_degree() const {
        int d = 0;
        for (int i = 1; i <= node_count_; ++i) d = std::max(d, degree(i));
        return d;
    }

    bool has_edge(int i, int j) const {
        return std::binary_search(edges_.begin(), edges_.end(), make_edge(i, j));
    }

    bool operator==(const Graph& other) const {
        return node_count_ == other.node_count_ && edges_ == other.edges_;
    }

private:
    int node_count_;
    std::vector<Edge> edges_;                // normalized (min,max), sorted
    std::vector<std::vector<int>> neighbors_;
};

// Edge-list format: first line N, then "i j" per edge; '#' starts a
// comment; blank lines allowed.
inline Graph parse_graph(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    bool have_count = false;
    int node_count = 0;
    std::vector<Edge> edges;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream fields(line);
        if (!have_count) {
            if (!(fields >> node_count)) {
                std::string leftover;
                if (fields.clear(), fields >> leftover)
                    throw ParseError("line " + std::to_string(line_no) + ": expected node count");
                continue; // blank/comment line before the header
            }
            std::string extra;
            if (fields >> extra)
                throw ParseError("line " + std::to_string(line_no) + ": trailing tokens after node count");
            have_count = true;
            continue;
        }
        int i = 0, j = 0;
        if (!(fields >> i)) {
            std::string leftover;
            if (fields.clear(), fields >> leftover)
                throw ParseError("line " + std::to_string(line_no) + ": expected node index");
            continue; // blank line
        }
        if (!(fields >> j))
            throw ParseError("line " + std::to_string(line_no) + ": expected two node indices");
        std::string extra;
        if (fields >> extra)
            throw ParseError("line " + std::to_string(line_no) + ": trailing tokens after edge");
        edges.push_back({i, j});
    }
    if (!have_count) throw ParseError("missing node-count header line");
    return Graph(node_count, std::move(edges));
}

// Canonical writer; parse(write(g)) == g and write is byte-stable.
inline std::string write_graph(const Graph& g) {
    std::ostringstream out;
    out << g.node_count() << "\n";
    for (const Edge& e : g.edges()) out << e.first << " " << e.second << "\n";
    return out.str();
}

inline bool is_connected(const Graph& g) {
    std::vector<char> seen(g.node_count() + 1, 0);
    std::queue<int> frontier;
    frontier.push(1);
    seen[1] = 1;
    int reached = 1;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : g.neighbors(u)) {
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                frontier.push(v);
            }
        }
    }
    return reached == g.node_count();
}

// Per-round symmetric map edge -> channel (a key element). Entries are
// stored under normalized edges, so (i,j) and (j,i) always agree.
class ChannelAssignment {
public:
    void assign(int i, int j, int channel) { entries_[make_edge(i, j)] = channel; }

    bool has(int i, int j) const { return entries_.count(make_edge(i, j)) > 0; }

    int channel(int i, int j) const {
        auto it = entries_.find(make_edge(i, j));
        if (it == entries_.end())
            throw MissingAssignment("edge (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") has no channel assigned");
        return it->second;
    }

    const std::map<Edge, int>& entries() const { return entries_; }

    bool operator==(const ChannelAssignment& other) const = default;

private:
    std::map<Edge, int> entries_;
};

// Integer Laplacian of the subgraph formed by the edges assigned one
// channel. Integer entries keep the kernel checks exact.
class ChannelLaplacian {
public:
    explicit ChannelLaplacian(int node_count)
        : node_count_(node_count), entries_(static_cast<std::size_t>(node_count) * node_count, 0) {}

    int node_count() const { return node_count_; }

    long long& at(int i, int j) { return entries_[idx(i, j)]; }
    long long at(int i, int j) const { return entries_[idx(i, j)]; }

    long long row_sum(int i) const {
        long long acc = 0;
        for (int j = 1; j <= node_count_; ++j) acc += at(i, j);
        return acc;
    }

    Matrix as_matrix() const {
        Matrix m(node_count_, node_count_);
        for (int i = 1; i <= node_count_; ++i)
            for (int j = 1; j <= node_count_; ++j)
                m(i - 1, j - 1) = static_cast<double>(at(i, j));
        return m;
    }

    bool operator==(const ChannelLaplacian& other) const = default;

private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i - 1) * node_count_ + (j - 1);
    }
    int node_count_;
    std::vector<long long> entries_;
};

// Off-diagonal -1 on edges assigned channel k, diagonal = per-node count
// of incident channel-k edges. The assignment must cover every edge.
inline ChannelLaplacian channel_laplacian(const Graph& g, const ChannelAssignment& assignment,
                                          int k) {
    for (const Edge& e : g.edges())
        if (!assignment.has(e.first, e.second))
            throw MissingAssignment("edge (" + std::to_string(e.first) + "," +
                                    std::to_string(e.second) + ") has no channel assigned");
    ChannelLaplacian lap(g.node_count());
    for (const Edge& e : g.edges()) {
        if (assignment.channel(e.first, e.second) != k) continue;
        lap.at(e.first, e.second) = -1;
        lap.at(e.second, e.first) = -1;
        lap.at(e.first, e.first) += 1;
        lap.at(e.second, e.second) += 1;
    }
    return lap;
}

// Metropolis rule: w_ij = 1/(2 max(d_i, d_j)) on edges, diagonal fills the
// row to 1. Symmetric and doubly stochastic by construction.
inline Matrix metropolis_weights(const Graph& g) {
    if (!is_connected(g)) throw NotConnected("Metropolis weights require a connected graph");
    const int n = g.node_count();
    Matrix w(n, n);
    for (int i = 1; i <= n; ++i) {
        double off = 0.0;
        for (int j : g.neighbors(i)) {
            const double wij = 1.0 / (2.0 * std::max(g.degree(i), g.degree(j)));
            w(i - 1, j - 1) = wij;
            off += wij;
        }
        w(i - 1, i - 1) = 1.0 - off;
    }
    return w;
}

inline constexpr double kSpectralGapTol = 1e-10;
inline constexpr int kSpectralGapMaxIters = 100'000;

// Largest singular value of W - (1/N) 11^T by power iteration on
// (W-J)^T (W-J). Start vector drawn from the given seed so runs are
// reproducible.
inline double spectral_gap(const Matrix& w, std::uint64_t seed = 0) {
    const std::size_t n = w.rows();
    if (n == 0 || w.cols() != n) throw DimensionMismatch("spectral_gap requires a square matrix");
    const Matrix deviation = w - Matrix::average_projector(n);
    const Matrix m = deviation.transposed() * deviation;

    RngStream rng = derive_stream(seed, StreamPurpose::spectral);
    std::vector<double> v(n);
    for (double& x : v) x = rng.next_real(-1.0, 1.0);
    const double v0 = norm2(v);
    if (v0 == 0.0) v[0] = 1.0;
    else
        for (double& x : v) x /= v0;

    double gamma = 0.0;
    for (int iter = 0; iter < kSpectralGapMaxIters; ++iter) {
        std::vector<double> mv = m.apply(v);
        const double rayleigh = dot(v, mv);
        const double next = rayleigh > 0.0 ? std::sqrt(rayleigh) : 0.0;
        const double nrm = norm2(mv);
        if (nrm == 0.0) return 0.0; // deviation matrix annihilates v (e.g. W = J)
        for (std::size_t i = 0; i < n; ++i) v[i] = mv[i] / nrm;
        if (std::abs(next - gamma) <= kSpectralGapTol * next + 1e-30) return next;
        gamma = next;
    }
    throw NoConvergence("power iteration did not converge within " +
                        std::to_string(kSpectralGapMaxIters) + " iterations");
}

} // namespace ppcon
