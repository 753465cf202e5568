#pragma once

// Backdoor adjustment-set search. A candidate set Z is valid for (cause,
// outcome) when Z contains no descendant of the cause and Z m-separates cause
// from outcome in the graph with the cause's outgoing directed edges removed.
// The search is an exhaustive subset enumeration over observed non-descendant
// candidates, returning exactly the minimal valid sets, ordered by size then
// lexicographically by member names.

#include <cstdint>
#include <string>
#include <vector>

#include "markovprune/graph.hpp"
#include "markovprune/separation.hpp"

namespace markovprune {

struct AdjustmentSet {
    NodeSet members;
    bool minimal = true;
};

// Soft cap on graph size for subset-enumeration operations. The search is
// exponential in the candidate count; the intended use is small theory graphs.
inline constexpr std::size_t kDefaultMaxNodes = 64;

inline std::vector<AdjustmentSet> adjustment_sets(const CausalGraph& g,
                                                  const std::string& cause,
                                                  const std::string& outcome,
                                                  std::size_t max_nodes = kDefaultMaxNodes) {
    detail::require_valid(g);
    g.index_of(cause);
    g.index_of(outcome);
    if (cause == outcome)
        throw Error(Errc::invalid_set, "cause and outcome must differ");
    if (g.is_latent(cause) || g.is_latent(outcome))
        throw Error(Errc::latent_misuse, "cause and outcome must be observed");
    if (g.node_count() > max_nodes)
        throw Error(Errc::bad_argument,
                    "graph exceeds the subset-enumeration cap (" +
                        std::to_string(max_nodes) + " nodes)");

    // Graph with the cause's outgoing directed edges removed; bidirected
    // edges stay (they carry an arrowhead into the cause).
    CausalGraph pruned;
    for (const auto& name : g.nodes()) pruned.add_node(name, g.is_latent(name));
    for (const auto& [t, h] : g.directed_edges())
        if (t != cause) pruned.add_directed_edge(t, h);
    for (const auto& [a, b] : g.bidirected_edges()) pruned.add_bidirected_edge(a, b);
    auto dag = detail::augment(pruned);

    NodeSet cause_desc = descendants(g, {cause});
    std::vector<std::string> candidates;
    for (const auto& name : g.observed_nodes())
        if (name != cause && name != outcome && !cause_desc.count(name))
            candidates.push_back(name);

    auto a_mask = detail::mask(pruned, dag.n, {cause});
    auto b_mask = detail::mask(pruned, dag.n, {outcome});

    auto blocked_given = [&](std::uint64_t subset) {
        std::vector<bool> z(dag.n, false);
        for (std::size_t i = 0; i < candidates.size(); ++i)
            if (subset & (std::uint64_t{1} << i)) z[pruned.index_of(candidates[i])] = true;
        return !detail::ball_reaches(dag, a_mask, b_mask, z);
    };

    // Submasks precede their supersets numerically, so any set that survives
    // the containment filter and tests valid is minimal. If the empty set is
    // valid it is the only minimal set and the search ends immediately.
    std::vector<std::uint64_t> minimal_masks;
    std::uint64_t total = std::uint64_t{1} << candidates.size();
    for (std::uint64_t subset = 0; subset < total; ++subset) {
        bool dominated = false;
        for (std::uint64_t m : minimal_masks)
            if ((subset & m) == m) { dominated = true; break; }
        if (dominated) continue;
        if (blocked_given(subset)) {
            minimal_masks.push_back(subset);
            if (subset == 0) break;
        }
    }

    std::vector<AdjustmentSet> out;
    for (std::uint64_t m : minimal_masks) {
        AdjustmentSet s;
        for (std::size_t i = 0; i < candidates.size(); ++i)
            if (m & (std::uint64_t{1} << i)) s.members.insert(candidates[i]);
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const AdjustmentSet& x, const AdjustmentSet& y) {
        if (x.members.size() != y.members.size()) return x.members.size() < y.members.size();
        return x.members < y.members;
    });
    return out;
}

}  // namespace markovprune
