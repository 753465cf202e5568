#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "markovprune/adjustment.hpp"
#include "markovprune/projection.hpp"
#include "markovprune/reduce.hpp"
#include "markovprune/rng.hpp"
#include "support/fixtures.hpp"
#include "support/oracle_dsep.hpp"
#include "support/random_graphs.hpp"

using namespace markovprune;

namespace {

std::vector<NodeSet> member_sets(const std::vector<AdjustmentSet>& sets) {
    std::vector<NodeSet> out;
    for (const auto& s : sets) out.push_back(s.members);
    return out;
}

CausalGraph cause_pruned(const CausalGraph& g, const std::string& cause) {
    CausalGraph pruned;
    for (const auto& n : g.nodes()) pruned.add_node(n, g.is_latent(n));
    for (const auto& [t, h] : g.directed_edges())
        if (t != cause) pruned.add_directed_edge(t, h);
    for (const auto& [a, b] : g.bidirected_edges()) pruned.add_bidirected_edge(a, b);
    return pruned;
}

}  // namespace

TEST_CASE("projection collapses a mediated chain") {
    auto m = parse_or_throw("X -> M\nM -> Y");
    auto p = project(m.graph, {"X", "Y"});
    CHECK(p.nodes() == std::vector<std::string>{"X", "Y"});
    CHECK(p.directed_edges() == std::vector<Edge>{{"X", "Y"}});
    CHECK(p.bidirected_edges().empty());
}

TEST_CASE("projection of the confounded fixture yields a bidirected edge") {
    auto m = testfx::load("ex4.dgp");
    auto p = project(m.graph, {"S", "C", "R"});
    CHECK(p.has_bidirected_edge("S", "C"));
    CHECK(p.has_directed_edge("S", "R"));
    CHECK(p.has_directed_edge("C", "R"));
    CHECK(p.directed_edges().size() == 2);
    CHECK(p.bidirected_edges().size() == 1);
}

TEST_CASE("projection onto all observed nodes of a latent-free graph is the identity") {
    auto m = testfx::load("ex2i.dgp");
    auto p = project_observed(m.graph);
    CHECK(p == m.graph);
}

TEST_CASE("projection validates its inputs") {
    auto m = testfx::load("ex4.dgp");
    CHECK_THROWS_AS((void)project(m.graph, {}), Error);
    CHECK_THROWS_AS((void)project(m.graph, {"S", "U"}), Error);
    CHECK_THROWS_AS((void)project(m.graph, {"S", "nope"}), Error);
}

TEST_CASE("projection preserves separation statements among kept nodes") {
    Rng rng(8080);
    for (int trial = 0; trial < 80; ++trial) {
        auto g = testgen::random_admg(rng);
        auto observed = g.observed_nodes();
        if (observed.size() < 3) continue;
        // Keep a strict subset of the observed nodes.
        NodeSet keep(observed.begin(), observed.end());
        keep.erase(observed[static_cast<std::size_t>(rng.uniform() * observed.size())]);
        if (keep.size() < 2) continue;
        auto p = project(g, keep);

        std::vector<std::string> kept(keep.begin(), keep.end());
        for (const auto& x : kept)
            for (const auto& y : kept) {
                if (x == y) continue;
                std::vector<std::string> pool;
                for (const auto& o : kept)
                    if (o != x && o != y) pool.push_back(o);
                std::vector<NodeSet> zs{{}};
                for (std::size_t i = 0; i < pool.size(); ++i) {
                    zs.push_back({pool[i]});
                    for (std::size_t j = i + 1; j < pool.size(); ++j)
                        zs.push_back({pool[i], pool[j]});
                }
                for (const auto& z : zs)
                    CHECK(d_separated(g, {x}, {y}, z) == d_separated(p, {x}, {y}, z));
            }
    }
}

TEST_CASE("adjustment sets on the worked fixtures") {
    CHECK(member_sets(adjustment_sets(testfx::load("ex1.dgp").graph, "X", "Y")) ==
          std::vector<NodeSet>{{"C"}});
    CHECK(member_sets(adjustment_sets(testfx::load("ex2i.dgp").graph, "X", "Y")) ==
          std::vector<NodeSet>{{"K"}, {"P", "R"}});
    CHECK(member_sets(adjustment_sets(testfx::load("ex3i.dgp").graph, "C", "M")) ==
          std::vector<NodeSet>{{"S"}});
    CHECK(member_sets(adjustment_sets(testfx::load("ex4.dgp").graph, "S", "R")) ==
          std::vector<NodeSet>{{"C"}});
}

TEST_CASE("randomized treatment needs no adjustment at all") {
    // Covariates X feed the outcome only; treatment T is unconfounded.
    auto m = parse_or_throw("X -> Y\nT -> Y");
    auto sets = adjustment_sets(m.graph, "T", "Y");
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].members.empty());
}

TEST_CASE("adjustment sets validate inputs") {
    auto m = testfx::load("ex4.dgp");
    CHECK_THROWS_AS((void)adjustment_sets(m.graph, "S", "S"), Error);
    CHECK_THROWS_AS((void)adjustment_sets(m.graph, "U", "R"), Error);
    CHECK_THROWS_AS((void)adjustment_sets(m.graph, "S", "nope"), Error);
}

TEST_CASE("every returned set is valid and minimal; backdoor property holds") {
    Rng rng(616);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        auto g = testgen::random_admg(rng, 7, 0.3, 2, 0.1);
        auto observed = g.observed_nodes();
        for (const auto& cause : observed)
            for (const auto& outcome : observed) {
                if (cause == outcome) continue;
                auto sets = adjustment_sets(g, cause, outcome);
                auto pruned = cause_pruned(g, cause);
                auto desc = descendants(g, {cause});
                for (const auto& s : sets) {
                    ++checked;
                    for (const auto& z : s.members) CHECK_FALSE(desc.count(z));
                    CHECK(d_separated(pruned, {cause}, {outcome}, s.members));
                    // Minimality: dropping any single member breaks blocking.
                    for (const auto& z : s.members) {
                        NodeSet smaller = s.members;
                        smaller.erase(z);
                        CHECK_FALSE(d_separated(pruned, {cause}, {outcome}, smaller));
                    }
                }
            }
    }
    CHECK(checked > 100);
}

TEST_CASE("golden reductions match the worked examples") {
    SUBCASE("mediated treatment, total effect") {
        auto r = reduce(testfx::load("ex1.dgp"));
        CHECK(plan_text(r) == "Y ~ X + C\n");
        CHECK(r.graph.directed_edges() == std::vector<Edge>{{"X", "Y"}, {"C", "Y"}});
        CHECK(r.dropped == NodeSet{"A", "M"});
    }
    SUBCASE("structured controls, total effect") {
        auto r = reduce(testfx::load("ex2i.dgp"));
        CHECK(plan_text(r) == "Y ~ X + K\n");
        CHECK(r.graph.directed_edges() == std::vector<Edge>{{"X", "Y"}, {"K", "Y"}});
        CHECK(r.dropped == NodeSet{"A", "H", "M", "N", "P", "R"});
    }
    SUBCASE("structured controls, mediation") {
        auto r = reduce(testfx::load("ex2ii.dgp"));
        CHECK(plan_text(r) == "M ~ X\nY ~ M + K\n");
        CHECK(r.dropped == NodeSet{"A", "H", "N", "P", "R"});
    }
    SUBCASE("colliding controls, total effect") {
        auto r = reduce(testfx::load("ex3i.dgp"));
        CHECK(plan_text(r) == "M ~ C + S\n");
        CHECK(r.graph.directed_edges() == std::vector<Edge>{{"C", "M"}, {"S", "M"}});
        CHECK(r.dropped == NodeSet{"A", "H", "L", "Q"});
    }
    SUBCASE("colliding controls, partial mediation") {
        auto r = reduce(testfx::load("ex3ii.dgp"));
        CHECK(plan_text(r) == "H ~ C\nM ~ C + H + S\n");
        CHECK(r.dropped == NodeSet{"A", "L", "Q"});
    }
    SUBCASE("unobserved confounding") {
        auto r = reduce(testfx::load("ex4.dgp"));
        CHECK(plan_text(r) == "R ~ S + C\n");
        CHECK(r.graph.directed_edges() == std::vector<Edge>{{"S", "R"}, {"C", "R"}});
        CHECK(r.dropped.empty());
    }
    SUBCASE("synthetic two-chain") {
        auto r = reduce(testfx::load("chain2.dgp"));
        CHECK(plan_text(r) == "B3 ~ A1\n");
        CHECK(r.dropped == NodeSet{"A2", "A3", "B1", "B2"});
    }
}

TEST_CASE("reduced regressions sit in topological order with parent predictors") {
    for (const char* name : {"ex1.dgp", "ex2ii.dgp", "ex3ii.dgp", "ex4.dgp"}) {
        auto r = reduce(testfx::load(name));
        auto order = topological_order(r.graph);
        std::size_t last = 0;
        for (const auto& reg : r.regressions) {
            auto pos = std::find(order.begin(), order.end(), reg.outcome) - order.begin();
            CHECK(static_cast<std::size_t>(pos) >= last);
            last = pos;
            for (const auto& p : reg.predictors) CHECK(r.graph.has_directed_edge(p, reg.outcome));
            CHECK(reg.predictors.size() ==
                  static_cast<std::size_t>(std::count_if(
                      r.graph.directed_edges().begin(), r.graph.directed_edges().end(),
                      [&](const Edge& e) { return e.second == reg.outcome; })));
        }
    }
}

TEST_CASE("reduce never emits latents; stage adjustments avoid stage descendants") {
    for (const char* name : {"ex1.dgp", "ex2i.dgp", "ex2ii.dgp", "ex3i.dgp", "ex3ii.dgp",
                             "ex4.dgp", "chain2.dgp"}) {
        auto model = testfx::load(name);
        auto r = reduce(model);
        for (const auto& node : r.graph.nodes()) CHECK_FALSE(model.graph.is_latent(node));
        for (const auto& t : r.targets) {
            // Re-derive the per-equation stages and check each chosen set
            // against the descendants of its own stage cause.
            std::vector<std::pair<std::string, std::string>> stages;
            if (t.kind == TargetEffect::Kind::total) {
                stages.emplace_back(t.cause, t.outcome);
            } else {
                std::vector<std::string> chain{t.cause};
                chain.insert(chain.end(), t.mediators.begin(), t.mediators.end());
                chain.push_back(t.outcome);
                for (std::size_t i = 0; i + 1 < chain.size(); ++i)
                    stages.emplace_back(chain[i], chain[i + 1]);
                if (t.partial) stages.emplace_back(t.cause, t.outcome);
            }
            for (const auto& [tail, head] : stages) {
                auto sets = adjustment_sets(model.graph, tail, head);
                REQUIRE_FALSE(sets.empty());
                auto desc = descendants(model.graph, {tail});
                for (const auto& z : sets.front().members) CHECK_FALSE(desc.count(z));
            }
        }
        // dropped + kept + latents partition the original nodes
        std::size_t latents = model.graph.latent_nodes().size();
        CHECK(r.dropped.size() + r.graph.node_count() + latents ==
              model.graph.node_count());
    }
}

TEST_CASE("unidentifiable and degenerate inputs raise") {
    auto confounded = parse_or_throw("X -> Y\nX <-> Y\ntarget total(X, Y)");
    CHECK_THROWS_WITH_AS((void)reduce(confounded),
                         doctest::Contains("not identifiable"), Error);

    auto no_targets = parse_or_throw("X -> Y");
    CHECK_THROWS_AS((void)reduce(no_targets), Error);

    // Latent confounder with no observed blocker behaves the same way.
    auto latent = parse_or_throw("latent U\nU -> X\nU -> Y\nX -> Y\ntarget total(X, Y)");
    CHECK_THROWS_AS((void)reduce(latent), Error);
}

TEST_CASE("subset enumeration respects the configurable node cap") {
    // 65-node chain: everything downstream of the cause, so the candidate
    // pool is empty and only the cap decides whether the call runs.
    CausalGraph big;
    for (int i = 0; i < 65; ++i) big.add_node("n" + std::to_string(i));
    for (int i = 0; i + 1 < 65; ++i)
        big.add_directed_edge("n" + std::to_string(i), "n" + std::to_string(i + 1));
    CHECK_THROWS_AS((void)adjustment_sets(big, "n0", "n64"), Error);
    auto sets = adjustment_sets(big, "n0", "n64", 70);
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].members.empty());

    auto m = testfx::load("ex1.dgp");
    ReduceOptions tight;
    tight.max_nodes = 3;
    CHECK_THROWS_AS((void)reduce(m, tight), Error);
}

TEST_CASE("keep_precision retains helpful outcome parents") {
    ReduceOptions options;
    options.keep_precision = true;
    auto r = reduce(testfx::load("ex2i.dgp"), options);
    CHECK(plan_text(r) == "Y ~ X + K + P + R\n");
    CHECK(r.dropped == NodeSet{"A", "H", "M", "N"});
}
