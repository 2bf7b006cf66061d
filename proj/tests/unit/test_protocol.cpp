#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "ppcon/protocol.hpp"
#include "support/test_support.hpp"

using namespace ppcon;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("security degrees") {
    const SecurityDegree p({2, 3, 4, 2, 3});
    REQUIRE(p.bar_p() == 4);
    REQUIRE(p.of(3) == 4);
    REQUIRE_THROWS_AS(SecurityDegree({2, 0, 3}), ValidationError);
    REQUIRE_THROWS_AS(SecurityDegree({}), ValidationError);
}

TEST_CASE("node initialization") {
    const KeySequence key({4, 7, 15, 3}, 20);

    SECTION("degree one means no masking: every buffer equals the state") {
        RngStream rng(31);
        const NodeState node = init_node(1, 42.5, 1, key, rng);
        REQUIRE(node.poly.coefficients.empty());
        REQUIRE(node.buffers.size() == key.size());
        for (int k : key.elements()) REQUIRE(node.buffers.at(k) == 42.5);
    }

    SECTION("buffers hold f_i(k, 0) for every key element") {
        RngStream rng(32);
        for (int p_i = 1; p_i <= 4; ++p_i) {
            const NodeState node = init_node(p_i, 10.0 * p_i, p_i, key, rng);
            REQUIRE(node.poly.coefficients.size() == static_cast<std::size_t>(p_i - 1));
            for (double a : node.poly.coefficients) {
                REQUIRE(a >= -1.0);
                REQUIRE(a <= 1.0);
            }
            for (int k : key.elements())
                REQUIRE(node.buffers.at(k) == eval_poly(node.poly, k));
        }
    }

    SECTION("degree above the channel count is rejected") {
        RngStream rng(33);
        REQUIRE_THROWS_AS(init_node(1, 0.0, 5, key, rng), DegreeExceedsChannels);
    }
}

TEST_CASE("handshake draws") {
    const KeySequence key({4, 7, 15, 3}, 20);

    SECTION("same stream, same pairs") {
        NodeState a, b;
        a.id = b.id = 1;
        RngStream r1 = derive_stream(99, StreamPurpose::handshake, 1, 5);
        RngStream r2 = derive_stream(99, StreamPurpose::handshake, 1, 5);
        const auto pa = draw_handshake(a, {2, 5}, key, r1);
        const auto pb = draw_handshake(b, {2, 5}, key, r2);
        REQUIRE(pa.size() == 2);
        for (const auto& [j, pair] : pa) {
            REQUIRE(pair.bid == pb.at(j).bid);
            REQUIRE(pair.preferred_channel == pb.at(j).preferred_channel);
            REQUIRE(pair.bid >= -1.0);
            REQUIRE(pair.bid <= 1.0);
            REQUIRE(key.contains(pair.preferred_channel));
        }
    }

    SECTION("isolated node draws nothing") {
        NodeState node;
        RngStream rng(34);
        REQUIRE(draw_handshake(node, {}, key, rng).empty());
    }

    SECTION("preferred channels are close to uniform over 10^4 draws") {
        NodeState node;
        RngStream rng(35);
        std::map<int, int> counts;
        const int draws = 10'000;
        for (int t = 0; t < draws; ++t) {
            const auto pairs = draw_handshake(node, {2}, key, rng);
            counts[pairs.at(2).preferred_channel]++;
        }
        for (int k : key.elements())
            REQUIRE_THAT(counts[k] / static_cast<double>(draws),
                         WithinAbs(1.0 / static_cast<double>(key.size()), 0.02));
    }
}

TEST_CASE("channel resolution") {
    REQUIRE(resolve_channel({0.7, 4}, {0.2, 15}, 1, 2) == 4);
    REQUIRE(resolve_channel({0.2, 4}, {0.7, 15}, 1, 2) == 15);
    // exact tie: the lower-indexed node's preference wins
    REQUIRE(resolve_channel({0.5, 7}, {0.5, 3}, 2, 5) == 7);
    REQUIRE(resolve_channel({0.5, 3}, {0.5, 7}, 5, 2) == 7);

    SECTION("argument order never changes the outcome") {
        RngStream rng(36);
        const std::vector<int> channels = {4, 7, 15, 3};
        for (int trial = 0; trial < 200; ++trial) {
            HandshakePair pi{rng.next_real(-1, 1), channels[rng.next_index(4)]};
            HandshakePair pj{rng.next_real(-1, 1), channels[rng.next_index(4)]};
            if (trial % 5 == 0) pj.bid = pi.bid; // force ties regularly
            const int i = 1 + static_cast<int>(rng.next_index(9));
            int j = 1 + static_cast<int>(rng.next_index(9));
            if (j == i) j = i + 1;
            REQUIRE(resolve_channel(pi, pj, i, j) == resolve_channel(pj, pi, j, i));
        }
    }
}

TEST_CASE("channel update") {
    const KeySequence key({4, 7, 15, 3}, 20);
    NodeState node;
    node.buffers = {{4, 0.0}, {7, 2.0}, {15, -1.0}, {3, 5.0}};

    REQUIRE(channel_update(node, 7, {}, 0.25) == 2.0);
    REQUIRE_THAT(channel_update(node, 4, {{2, 1.0}}, 0.25), WithinAbs(0.25, 1e-15));

    SECTION("synchronous full round conserves every channel sum") {
        // Hand-rolled round over the 5-cycle with a fixed assignment,
        // reading only pre-round values.
        const Graph c5 = testing::cycle_graph(5);
        RngStream rng(37);
        std::vector<NodeState> nodes;
        for (int i = 1; i <= 5; ++i)
            nodes.push_back(init_node(i, rng.next_real(0, 100), (i % 2) ? 2 : 3, key, rng));
        ChannelAssignment assignment;
        const std::vector<int> channels = {4, 7, 15, 3};
        for (const Edge& e : c5.edges())
            assignment.assign(e.first, e.second, channels[rng.next_index(4)]);

        std::map<int, double> sums_before;
        for (int k : key.elements())
            for (const NodeState& n : nodes) sums_before[k] += n.buffers.at(k);

        const double alpha = 0.9 / 2.0;
        std::vector<std::map<int, double>> next(5);
        for (const NodeState& n : nodes) {
            for (int k : key.elements()) {
                std::vector<std::pair<int, double>> incoming;
                for (int j : c5.neighbors(n.id))
                    if (assignment.channel(n.id, j) == k)
                        incoming.push_back({j, nodes[j - 1].buffers.at(k)});
                next[n.id - 1][k] = channel_update(n, k, incoming, alpha);
            }
        }
        for (NodeState& n : nodes) n.buffers = next[n.id - 1];

        for (int k : key.elements()) {
            double sum_after = 0.0;
            for (const NodeState& n : nodes) sum_after += n.buffers.at(k);
            REQUIRE_THAT(sum_after, WithinRel(sums_before[k], 1e-9) ||
                                        WithinAbs(sums_before[k], 1e-9));
        }
    }
}

TEST_CASE("non-average channel update") {
    const KeySequence key({4, 7}, 20);
    NodeState node;
    node.buffers = {{4, 0.0}, {7, 3.0}};
    REQUIRE(channel_update_nonaverage(node, 4, {}) == 0.0);
    REQUIRE_THAT(channel_update_nonaverage(node, 4, {{2, 1.0}}), WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(channel_update_nonaverage(node, 7, {{2, 3.0}, {5, 3.0}}),
                 WithinAbs(3.0, 1e-15));
}

TEST_CASE("state reconstruction") {
    const KeySequence key({4, 7, 15, 3}, 20);

    SECTION("at t=0 the reconstruction equals the initial state") {
        RngStream rng(38);
        for (int trial = 0; trial < 50; ++trial) {
            const double x0 = rng.next_real(-1000, 1000);
            const int p_i = 1 + static_cast<int>(rng.next_index(4));
            const NodeState node = init_node(1, x0, p_i, key, rng);
            REQUIRE_THAT(reconstruct_state(node, key),
                         WithinRel(x0, 1e-9) || WithinAbs(x0, 1e-9));
        }
    }

    SECTION("equal buffers reconstruct to that constant") {
        NodeState node;
        for (int k : key.elements()) node.buffers[k] = 6.25;
        REQUIRE_THAT(reconstruct_state(node, key), WithinAbs(6.25, 1e-9));
    }
}
