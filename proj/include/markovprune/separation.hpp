#pragma once

// Separation queries on the mixed graph. Bidirected edges are expanded into
// a fresh latent common parent (a <-> b becomes a <- u -> b), after which
// plain d-separation on the augmented DAG gives m-separation semantics for
// the original graph. Reachability is decided with the linear-time
// "Bayes-ball" traversal over (node, direction) states.

#include <string>
#include <vector>

#include "markovprune/graph.hpp"

namespace markovprune {

struct CiStatement {
    NodeSet left;
    NodeSet right;
    NodeSet given;
    bool independent = true;
};

namespace detail {

// Original nodes keep their indices; each bidirected edge appends one
// synthetic source node with edges into both endpoints.
struct AugmentedDag {
    int n = 0;          // total node count, synthetic included
    int n_original = 0; // indices >= n_original are synthetic
    std::vector<std::vector<int>> parents;
    std::vector<std::vector<int>> children;
};

inline AugmentedDag augment(const CausalGraph& g) {
    AugmentedDag d;
    d.n_original = static_cast<int>(g.node_count());
    d.n = d.n_original + static_cast<int>(g.bidirected_edges().size());
    d.parents.resize(d.n);
    d.children.resize(d.n);
    for (const auto& [t, h] : g.directed_edges()) {
        int ti = g.index_of(t), hi = g.index_of(h);
        d.children[ti].push_back(hi);
        d.parents[hi].push_back(ti);
    }
    int synth = d.n_original;
    for (const auto& [a, b] : g.bidirected_edges()) {
        int ai = g.index_of(a), bi = g.index_of(b);
        d.children[synth] = {ai, bi};
        d.parents[ai].push_back(synth);
        d.parents[bi].push_back(synth);
        ++synth;
    }
    return d;
}

// True when some node of `b` is d-connected to `a` given `z` (index masks
// over the augmented DAG; synthetic nodes never appear in the masks).
inline bool ball_reaches(const AugmentedDag& d, const std::vector<bool>& a,
                         const std::vector<bool>& b, const std::vector<bool>& z) {
    // Nodes with a descendant in z (z itself included) open colliders.
    std::vector<bool> opens_collider(d.n, false);
    {
        std::vector<int> stack;
        for (int v = 0; v < d.n; ++v)
            if (z[v]) {
                opens_collider[v] = true;
                stack.push_back(v);
            }
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int p : d.parents[v])
                if (!opens_collider[p]) {
                    opens_collider[p] = true;
                    stack.push_back(p);
                }
        }
    }

    enum Dir { from_child = 0, from_parent = 1 };
    std::vector<bool> visited[2] = {std::vector<bool>(d.n, false),
                                    std::vector<bool>(d.n, false)};
    std::vector<std::pair<int, int>> stack;
    for (int v = 0; v < d.n; ++v)
        if (a[v]) {
            visited[from_child][v] = true;
            stack.emplace_back(v, from_child);
        }

    while (!stack.empty()) {
        auto [v, dir] = stack.back();
        stack.pop_back();
        if (b[v]) return true;

        auto push = [&](int w, int wdir) {
            if (!visited[wdir][w]) {
                visited[wdir][w] = true;
                stack.emplace_back(w, wdir);
            }
        };

        if (dir == from_child) {
            if (!z[v]) {
                for (int p : d.parents[v]) push(p, from_child);
                for (int c : d.children[v]) push(c, from_parent);
            }
        } else {  // entered along an edge into v: v is a potential collider
            if (!z[v])
                for (int c : d.children[v]) push(c, from_parent);
            if (opens_collider[v])
                for (int p : d.parents[v]) push(p, from_child);
        }
    }
    return false;
}

inline std::vector<bool> mask(const CausalGraph& g, int n_total, const NodeSet& s) {
    std::vector<bool> m(n_total, false);
    for (const auto& name : s) m[g.index_of(name)] = true;
    return m;
}

}  // namespace detail

// m-separation of node sets a and b given z. Latents may appear in a/b but
// never in z (conditioning on an unobservable has no operational meaning).
inline bool d_separated(const CausalGraph& g, const NodeSet& a, const NodeSet& b,
                        const NodeSet& z) {
    detail::require_valid(g);
    if (a.empty() || b.empty())
        throw Error(Errc::invalid_set, "separation query requires non-empty node sets");
    for (const auto& name : z)
        if (g.is_latent(name))
            throw Error(Errc::latent_misuse,
                        "cannot condition on latent node '" + name + "'");
    auto overlaps = [](const NodeSet& x, const NodeSet& y) {
        for (const auto& n : x)
            if (y.count(n)) return true;
        return false;
    };
    if (overlaps(a, b) || overlaps(a, z) || overlaps(b, z))
        throw Error(Errc::invalid_set, "separation query sets must be pairwise disjoint");

    auto dag = detail::augment(g);
    return !detail::ball_reaches(dag, detail::mask(g, dag.n, a), detail::mask(g, dag.n, b),
                                 detail::mask(g, dag.n, z));
}

// Every pairwise statement X _||_ Y | Z over observed nodes with
// |Z| <= max_conditioning that the graph implies, in a canonical order:
// pairs by declaration order, conditioning sets by size then position.
inline std::vector<CiStatement> implied_independencies(const CausalGraph& g,
                                                       int max_conditioning) {
    detail::require_valid(g);
    auto observed = g.observed_nodes();
    auto dag = detail::augment(g);

    std::vector<CiStatement> out;
    int m = static_cast<int>(observed.size());
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            std::vector<std::string> pool;
            for (int k = 0; k < m; ++k)
                if (k != i && k != j) pool.push_back(observed[k]);

            int limit = std::min<int>(max_conditioning, static_cast<int>(pool.size()));
            for (int size = 0; size <= limit; ++size) {
                std::vector<int> combo(size);
                for (int t = 0; t < size; ++t) combo[t] = t;
                for (;;) {
                    NodeSet given;
                    for (int t = 0; t < size; ++t) given.insert(pool[combo[t]]);
                    NodeSet a{observed[i]}, b{observed[j]};
                    if (!detail::ball_reaches(dag, detail::mask(g, dag.n, a),
                                              detail::mask(g, dag.n, b),
                                              detail::mask(g, dag.n, given)))
                        out.push_back({std::move(a), std::move(b), std::move(given), true});
                    // next combination
                    int t = size - 1;
                    while (t >= 0 && combo[t] == static_cast<int>(pool.size()) - size + t) --t;
                    if (t < 0) break;
                    ++combo[t];
                    for (int u = t + 1; u < size; ++u) combo[u] = combo[u - 1] + 1;
                }
            }
        }
    }
    return out;
}

// Markov blanket of a node set: parents, children and children's co-parents,
// minus the set itself. Defined only for fully observed DAGs; project latents
// away first.
inline NodeSet markov_blanket(const CausalGraph& g, const NodeSet& s) {
    detail::require_valid(g);
    if (!g.latent_nodes().empty())
        throw Error(Errc::latent_misuse,
                    "markov_blanket requires a fully observed graph; project latents first");
    if (!g.bidirected_edges().empty())
        throw Error(Errc::latent_misuse,
                    "markov_blanket requires a graph without bidirected edges");
    auto adj = detail::compile(g);
    std::vector<bool> in_s(adj.n, false);
    for (const auto& name : s) in_s[g.index_of(name)] = true;

    NodeSet blanket;
    auto add = [&](int v) {
        if (!in_s[v]) blanket.insert(g.nodes()[v]);
    };
    for (const auto& name : s) {
        int v = g.index_of(name);
        for (int p : adj.parents[v]) add(p);
        for (int c : adj.children[v]) {
            add(c);
            for (int cp : adj.parents[c]) add(cp);
        }
    }
    return blanket;
}

}  // namespace markovprune
