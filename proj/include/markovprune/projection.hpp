#pragma once

// Latent projection: marginalize nodes out of a mixed graph while preserving
// every separation statement among the kept nodes. A directed edge a -> b
// survives iff a directed path runs a -> ... -> b through removed nodes only;
// a bidirected edge a <-> b appears iff some removed node reaches both a and b
// through removed nodes (a trek with its apex outside the kept set).

#include <set>
#include <string>
#include <vector>

#include "markovprune/graph.hpp"
#include "markovprune/separation.hpp"

namespace markovprune {

inline CausalGraph project(const CausalGraph& g, const NodeSet& keep) {
    detail::require_valid(g);
    if (keep.empty())
        throw Error(Errc::invalid_set, "projection requires a non-empty keep set");
    for (const auto& name : keep) {
        g.index_of(name);  // throws on unknown node
        if (g.is_latent(name))
            throw Error(Errc::latent_misuse,
                        "cannot keep latent node '" + name + "' in a projection");
    }

    auto dag = detail::augment(g);
    std::vector<bool> kept(dag.n, false);
    for (const auto& name : keep) kept[g.index_of(name)] = true;

    // Kept nodes reachable from `start`'s children via removed nodes only.
    auto reach_kept = [&](int start) {
        std::set<int> hits;
        std::vector<bool> seen(dag.n, false);
        std::vector<int> stack{start};
        seen[start] = true;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int c : dag.children[v]) {
                if (kept[c]) {
                    hits.insert(c);
                } else if (!seen[c]) {
                    seen[c] = true;
                    stack.push_back(c);
                }
            }
        }
        return hits;
    };

    CausalGraph out;
    std::vector<int> keep_order;  // original declaration order
    for (int v = 0; v < dag.n_original; ++v)
        if (kept[v]) {
            out.add_node(g.nodes()[v]);
            keep_order.push_back(v);
        }

    for (int a : keep_order)
        for (int b : reach_kept(a)) out.add_directed_edge(g.nodes()[a], g.nodes()[b]);

    std::set<std::pair<int, int>> confounded;
    for (int v = 0; v < dag.n; ++v) {
        if (v < dag.n_original && kept[v]) continue;
        auto hits = reach_kept(v);
        for (auto it = hits.begin(); it != hits.end(); ++it)
            for (auto jt = std::next(it); jt != hits.end(); ++jt)
                confounded.insert({*it, *jt});
    }
    for (const auto& [a, b] : confounded)
        out.add_bidirected_edge(g.nodes()[a], g.nodes()[b]);
    return out;
}

// Convenience: marginalize every latent node away.
inline CausalGraph project_observed(const CausalGraph& g) {
    NodeSet keep;
    for (const auto& name : g.observed_nodes()) keep.insert(name);
    return project(g, keep);
}

}  // namespace markovprune
