#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ppcon/errors.hpp"
#include "ppcon/graph.hpp"
#include "ppcon/linalg.hpp"
#include "ppcon/rng.hpp"
#include "ppcon/shamir.hpp"

namespace ppcon {

// Node key vectors stacked as a matrix: row i-1 holds node i's vector
// S_i(t) of length bar_p.
using KeyVectors = Matrix;

struct KeyDistConfig {
    int bar_p = 4;
    int kappa = 20;    // maximal key, kappa >= 4 * bar_p
    int n_bound = 0;   // upper bound on the node count
    double lambda = 0.5;
    double delta = 0.1;
    int max_blocks = 100;

    void validate() const {
        if (bar_p < 1 || bar_p > kMaxChannels)
            throw ConfigError("bar_p must lie in [1, " + std::to_string(kMaxChannels) + "]");
        if (kappa < 4 * bar_p)
            throw ConfigError("kappa must be at least 4 * bar_p (kappa >> bar_p)");
        if (kappa > kMaxKappa)
            throw ConfigError("kappa must be <= " + std::to_string(kMaxKappa));
        if (n_bound < 1) throw ConfigError("node-count bound must be >= 1");
        if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("lambda must lie in (0,1)");
        if (!(delta > 0.0 && delta < 0.5)) throw ConfigError("delta must lie in (0, 0.5)");
        if (max_blocks < 1) throw ConfigError("block cap must be >= 1");
    }
};

// Rounds after which every node is within delta (sup-norm) of the
// component averages: ceil(log_lambda(delta / (kappa sqrt(n)))), at least 0.
inline int rounds_needed(double lambda, double delta, int kappa, int n) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidLambda("lambda must lie in (0,1)");
    if (!(delta > 0.0)) throw ValidationError("delta must be positive");
    if (kappa < 1 || n < 1) throw ValidationError("kappa and n must be >= 1");
    const double ratio = std::log(delta / (static_cast<double>(kappa) * std::sqrt(n))) /
                         std::log(lambda);
    if (ratio <= 0.0) return 0;
    return static_cast<int>(std::ceil(ratio));
}

// One synchronous averaging step S(t+1) = W S(t), applied componentwise.
inline KeyVectors consensus_round(const Matrix& w, const KeyVectors& keys) {
    if (w.rows() != w.cols() || w.rows() != keys.rows())
        throw DimensionMismatch("weight matrix and key vectors disagree on node count");
    return w * keys;
}

// Componentwise network averages (length bar_p).
inline std::vector<double> component_averages(const KeyVectors& keys) {
    std::vector<double> avg(keys.cols(), 0.0);
    for (std::size_t i = 0; i < keys.rows(); ++i)
        for (std::size_t l = 0; l < keys.cols(); ++l) avg[l] += keys(i, l);
    for (double& a : avg) a /= static_cast<double>(keys.rows());
    return avg;
}

// max_i max_l |S_il - avg_l|
inline double max_deviation(const KeyVectors& keys) {
    const std::vector<double> avg = component_averages(keys);
    double dev = 0.0;
    for (std::size_t i = 0; i < keys.rows(); ++i)
        for (std::size_t l = 0; l < keys.cols(); ++l)
            dev = std::max(dev, std::abs(keys(i, l) - avg[l]));
    return dev;
}

struct NodeKeyVerdict {
    bool accept = false;
    std::vector<std::size_t> resample_indices; // flagged element positions
    std::vector<int> floors;                   // the integer key when accepted
};

// Per-node decimal/distinctness check. Element l is flagged when its
// fractional part falls within 0.1 of an integer, or when its floor
// collides (distance < 0.5) with the floor of an earlier element.
inline std::vector<NodeKeyVerdict> validate_keys(const KeyVectors& keys) {
    std::vector<NodeKeyVerdict> verdicts(keys.rows());
    for (std::size_t i = 0; i < keys.rows(); ++i) {
        NodeKeyVerdict& v = verdicts[i];
        v.floors.resize(keys.cols());
        for (std::size_t l = 0; l < keys.cols(); ++l) {
            const double value = keys(i, l);
            const double floor = std::floor(value);
            v.floors[l] = static_cast<int>(floor);
            const double delta1 = value - floor;
            double delta2 = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < l; ++j)
                delta2 = std::min(delta2, std::abs(floor - std::floor(keys(i, j))));
            if (delta1 <= 0.1 || delta1 >= 0.9 || delta2 < 0.5) v.resample_indices.push_back(l);
        }
        v.accept = v.resample_indices.empty();
    }
    return verdicts;
}

// True iff all nodes hold elementwise-identical integer keys.
inline bool agreement_check(const std::vector<std::vector<int>>& rounded_keys) {
    for (std::size_t i = 1; i < rounded_keys.size(); ++i)
        if (rounded_keys[i] != rounded_keys[0]) return false;
    return true;
}

struct KeyDistResult {
    KeySequence key;
    int total_rounds = 0;
    int blocks = 0;
    std::vector<double> block_deviations; // max deviation after each block's rounds
};

// Finite-step key distribution: blocks of averaging rounds followed by the
// decimal/distinctness check, resampling flagged elements to fresh random
// integers, until every node accepts the same integer key. Unflagged
// elements keep their real values between blocks; rounding to the integer
// key happens at acceptance.
inline KeyDistResult run_key_distribution(const Graph& g, const KeyDistConfig& cfg,
                                          std::uint64_t seed) {
    cfg.validate();
    const int n = g.node_count();
    if (cfg.n_bound < n)
        throw ConfigError("node-count bound " + std::to_string(cfg.n_bound) +
                          " below actual node count " + std::to_string(n));
    const Matrix w = metropolis_weights(g); // throws NotConnected on disconnected input

    KeyVectors keys(n, cfg.bar_p);
    for (int i = 1; i <= n; ++i) {
        RngStream rng = derive_stream(seed, StreamPurpose::keydist_init, i);
        for (int l = 0; l < cfg.bar_p; ++l)
            keys(i - 1, l) = rng.next_real(1.0, static_cast<double>(cfg.kappa));
    }

    const int rounds_per_block = rounds_needed(cfg.lambda, cfg.delta, cfg.kappa, cfg.n_bound);

    KeyDistResult result{KeySequence(std::vector<int>{1}, 1), 0, 0, {}};
    for (int block = 1; block <= cfg.max_blocks; ++block) {
        for (int t = 0; t < rounds_per_block; ++t) {
            keys = consensus_round(w, keys);
            ++result.total_rounds;
        }
        result.blocks = block;
        result.block_deviations.push_back(max_deviation(keys));

        const std::vector<NodeKeyVerdict> verdicts = validate_keys(keys);
        bool all_accept = true;
        for (const NodeKeyVerdict& v : verdicts) all_accept = all_accept && v.accept;

        if (all_accept) {
            std::vector<std::vector<int>> rounded(n);
            for (int i = 0; i < n; ++i) rounded[i] = verdicts[i].floors;
            if (agreement_check(rounded))
                return KeyDistResult{KeySequence(rounded[0], cfg.kappa), result.total_rounds,
                                     result.blocks, result.block_deviations};
            // Floors disagree across nodes despite per-node acceptance:
            // restart the affected state wholesale.
            for (int i = 1; i <= n; ++i) {
                RngStream rng = derive_stream(seed, StreamPurpose::keydist_resample, i,
                                              static_cast<std::uint64_t>(block));
                for (int l = 0; l < cfg.bar_p; ++l)
                    keys(i - 1, l) = static_cast<double>(rng.next_int(1, cfg.kappa));
            }
            continue;
        }

        for (int i = 1; i <= n; ++i) {
            const NodeKeyVerdict& v = verdicts[i - 1];
            if (v.accept) continue;
            RngStream rng = derive_stream(seed, StreamPurpose::keydist_resample, i,
                                          static_cast<std::uint64_t>(block));
            for (std::size_t idx : v.resample_indices)
                keys(i - 1, idx) = static_cast<double>(rng.next_int(1, cfg.kappa));
        }
    }
    throw MaxBlocksExceeded("key distribution did not terminate within " +
                            std::to_string(cfg.max_blocks) + " blocks");
}

} // namespace ppcon
