#pragma once

// Shared helpers for the unit and acceptance suites: seeded random
// connected graphs (Erdos-Renyi with connectivity rejection) and small
// combinatorial utilities.

#include <cstdint>
#include <vector>

#include "ppcon/graph.hpp"
#include "ppcon/rng.hpp"

namespace ppcon::testing {

inline Graph random_connected_graph(RngStream& rng, int max_nodes, double edge_prob = 0.5) {
    const int n = static_cast<int>(rng.next_int(2, max_nodes));
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<Edge> edges;
        for (int i = 1; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j)
                if (rng.next_unit() < edge_prob) edges.push_back({i, j});
        Graph g(n, edges);
        if (is_connected(g)) return g;
    }
    // Rejection practically never exhausts; fall back to a path.
    std::vector<Edge> path;
    for (int i = 1; i < n; ++i) path.push_back({i, i + 1});
    return Graph(n, path);
}

inline Graph cycle_graph(int n) {
    std::vector<Edge> edges;
    for (int i = 1; i < n; ++i) edges.push_back({i, i + 1});
    edges.push_back({n, 1});
    return Graph(n, edges);
}

// All k-subsets of {0, ..., n-1} as index lists.
inline std::vector<std::vector<std::size_t>> subsets_of_size(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> current;
    auto recurse = [&](auto&& self, std::size_t start) -> void {
        if (current.size() == k) {
            out.push_back(current);
            return;
        }
        for (std::size_t i = start; i + (k - current.size()) <= n; ++i) {
            current.push_back(i);
            self(self, i + 1);
            current.pop_back();
        }
    };
    recurse(recurse, 0);
    return out;
}

// Distinct random integers in [1, kappa].
inline std::vector<int> random_distinct_points(RngStream& rng, std::size_t count, int kappa) {
    std::vector<int> points;
    while (points.size() < count) {
        const int candidate = static_cast<int>(rng.next_int(1, kappa));
        bool fresh = true;
        for (int p : points) fresh = fresh && p != candidate;
        if (fresh) points.push_back(candidate);
    }
    return points;
}

} // namespace ppcon::testing
