#pragma once

// Acyclic directed mixed graph (ADMG) over named nodes: directed edges plus
// optional bidirected (correlated-error) edges, with an observed/latent flag
// per node. Graphs are value types; construction is additive and validation
// reports violations as data rather than throwing. Structural queries demand
// a valid graph and are pure, so a constructed graph can be shared freely
// across threads.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "markovprune/error.hpp"

namespace markovprune {

using NodeSet = std::set<std::string>;
using Edge = std::pair<std::string, std::string>;

enum class ViolationKind {
    CycleDetected,
    UnknownNode,
    DuplicateEdge,
    SelfLoop,
    BadName,
};

struct Violation {
    ViolationKind kind;
    std::string detail;
};

inline const char* violation_code(ViolationKind k) {
    switch (k) {
        case ViolationKind::CycleDetected: return "CycleDetected";
        case ViolationKind::UnknownNode: return "UnknownNode";
        case ViolationKind::DuplicateEdge: return "DuplicateEdge";
        case ViolationKind::SelfLoop: return "SelfLoop";
        case ViolationKind::BadName: return "BadName";
    }
    return "?";
}

class CausalGraph {
public:
    // Declares a node; re-declaring an existing node merges the latent flag.
    void add_node(const std::string& name, bool latent = false) {
        auto it = index_.find(name);
        if (it == index_.end()) {
            index_.emplace(name, names_.size());
            names_.push_back(name);
            latent_.push_back(latent);
        } else if (latent) {
            latent_[it->second] = true;
        }
    }

    void mark_latent(const std::string& name) { add_node(name, true); }

    // Edges are recorded verbatim; endpoint existence, duplicates and
    // self-loops are reported by validate(), not rejected here.
    void add_directed_edge(const std::string& tail, const std::string& head) {
        directed_.emplace_back(tail, head);
    }

    void add_bidirected_edge(const std::string& a, const std::string& b) {
        bidirected_.emplace_back(a, b);
    }

    const std::vector<std::string>& nodes() const { return names_; }

    std::size_t node_count() const { return names_.size(); }

    bool has_node(const std::string& name) const { return index_.count(name) != 0; }

    bool is_latent(const std::string& name) const {
        auto it = index_.find(name);
        return it != index_.end() && latent_[it->second];
    }

    std::vector<std::string> observed_nodes() const {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (!latent_[i]) out.push_back(names_[i]);
        return out;
    }

    std::vector<std::string> latent_nodes() const {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (latent_[i]) out.push_back(names_[i]);
        return out;
    }

    const std::vector<Edge>& directed_edges() const { return directed_; }
    const std::vector<Edge>& bidirected_edges() const { return bidirected_; }

    bool has_directed_edge(const std::string& tail, const std::string& head) const {
        return std::find(directed_.begin(), directed_.end(), Edge{tail, head}) != directed_.end();
    }

    bool has_bidirected_edge(const std::string& a, const std::string& b) const {
        return std::find(bidirected_.begin(), bidirected_.end(), Edge{a, b}) != bidirected_.end() ||
               std::find(bidirected_.begin(), bidirected_.end(), Edge{b, a}) != bidirected_.end();
    }

    bool operator==(const CausalGraph& other) const {
        if (node_set_with_flags() != other.node_set_with_flags()) return false;
        if (directed_set() != other.directed_set()) return false;
        return bidirected_set() == other.bidirected_set();
    }
    bool operator!=(const CausalGraph& other) const { return !(*this == other); }

    // -- internals shared by the algorithm headers ---------------------------

    int index_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end())
            throw Error(Errc::unknown_node, "unknown node '" + name + "'");
        return static_cast<int>(it->second);
    }

    bool latent_at(int i) const { return latent_[static_cast<std::size_t>(i)]; }
    const std::string& name_at(int i) const { return names_[static_cast<std::size_t>(i)]; }

private:
    std::set<std::pair<std::string, bool>> node_set_with_flags() const {
        std::set<std::pair<std::string, bool>> s;
        for (std::size_t i = 0; i < names_.size(); ++i) s.emplace(names_[i], latent_[i]);
        return s;
    }
    std::set<Edge> directed_set() const {
        return {directed_.begin(), directed_.end()};
    }
    std::set<Edge> bidirected_set() const {
        std::set<Edge> s;
        for (const auto& [a, b] : bidirected_)
            s.insert(a < b ? Edge{a, b} : Edge{b, a});
        return s;
    }

    std::vector<std::string> names_;
    std::map<std::string, std::size_t> index_;
    std::vector<bool> latent_;
    std::vector<Edge> directed_;
    std::vector<Edge> bidirected_;
};

namespace detail {

inline bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                  (c >= '0' && c <= '9') || c == '_';
        if (!ok) return false;
    }
    return true;
}

// Index-based view of a structurally valid graph, built once per query.
struct Adjacency {
    int n = 0;
    std::vector<std::vector<int>> parents;
    std::vector<std::vector<int>> children;
    std::vector<std::vector<int>> spouses;  // bidirected partners
};

inline Adjacency compile(const CausalGraph& g) {
    Adjacency a;
    a.n = static_cast<int>(g.node_count());
    a.parents.resize(a.n);
    a.children.resize(a.n);
    a.spouses.resize(a.n);
    for (const auto& [t, h] : g.directed_edges()) {
        int ti = g.index_of(t), hi = g.index_of(h);
        a.children[ti].push_back(hi);
        a.parents[hi].push_back(ti);
    }
    for (const auto& [x, y] : g.bidirected_edges()) {
        int xi = g.index_of(x), yi = g.index_of(y);
        a.spouses[xi].push_back(yi);
        a.spouses[yi].push_back(xi);
    }
    return a;
}

}  // namespace detail

inline std::vector<Violation> validate(const CausalGraph& g) {
    std::vector<Violation> out;
    for (const auto& name : g.nodes())
        if (!detail::valid_name(name))
            out.push_back({ViolationKind::BadName, "invalid node name '" + name + "'"});

    std::set<Edge> seen_directed;
    std::set<Edge> seen_bidirected;
    bool endpoints_ok = true;
    for (const auto& e : g.directed_edges()) {
        for (const auto& endpoint : {e.first, e.second})
            if (!g.has_node(endpoint)) {
                out.push_back({ViolationKind::UnknownNode,
                               "edge endpoint '" + endpoint + "' is not a declared node"});
                endpoints_ok = false;
            }
        if (e.first == e.second)
            out.push_back({ViolationKind::SelfLoop, "self-loop on '" + e.first + "'"});
        if (!seen_directed.insert(e).second)
            out.push_back({ViolationKind::DuplicateEdge,
                           "duplicate edge " + e.first + " -> " + e.second});
    }
    for (const auto& e : g.bidirected_edges()) {
        for (const auto& endpoint : {e.first, e.second})
            if (!g.has_node(endpoint)) {
                out.push_back({ViolationKind::UnknownNode,
                               "edge endpoint '" + endpoint + "' is not a declared node"});
                endpoints_ok = false;
            }
        if (e.first == e.second)
            out.push_back({ViolationKind::SelfLoop, "self-loop on '" + e.first + "'"});
        Edge norm = e.first < e.second ? e : Edge{e.second, e.first};
        if (!seen_bidirected.insert(norm).second)
            out.push_back({ViolationKind::DuplicateEdge,
                           "duplicate edge " + e.first + " <-> " + e.second});
    }

    // Cycle check (Kahn) only once endpoints resolve.
    if (endpoints_ok) {
        int n = static_cast<int>(g.node_count());
        std::vector<int> indegree(n, 0);
        auto adj = detail::compile(g);
        for (int v = 0; v < n; ++v) indegree[v] = static_cast<int>(adj.parents[v].size());
        std::vector<int> order;
        std::vector<bool> emitted(n, false);
        for (;;) {
            int next = -1;
            for (int v = 0; v < n; ++v)
                if (!emitted[v] && indegree[v] == 0) { next = v; break; }
            if (next < 0) break;
            emitted[next] = true;
            order.push_back(next);
            for (int c : adj.children[next]) --indegree[c];
        }
        if (order.size() != static_cast<std::size_t>(n)) {
            std::string stuck;
            for (int v = 0; v < n; ++v)
                if (!emitted[v]) stuck += (stuck.empty() ? "" : ", ") + g.nodes()[v];
            out.push_back({ViolationKind::CycleDetected,
                           "cycle among directed edges (" + stuck + ")"});
        }
    }
    return out;
}

namespace detail {

inline void require_valid(const CausalGraph& g) {
    auto violations = validate(g);
    if (violations.empty()) return;
    for (const auto& v : violations)
        if (v.kind == ViolationKind::CycleDetected) throw Error(Errc::cycle, v.detail);
    for (const auto& v : violations)
        if (v.kind == ViolationKind::UnknownNode) throw Error(Errc::unknown_node, v.detail);
    const auto& v = violations.front();
    Errc code = v.kind == ViolationKind::DuplicateEdge ? Errc::duplicate_edge
              : v.kind == ViolationKind::SelfLoop      ? Errc::self_loop
                                                       : Errc::semantic;
    throw Error(code, v.detail);
}

inline std::vector<int> to_indices(const CausalGraph& g, const NodeSet& s) {
    std::vector<int> out;
    out.reserve(s.size());
    for (const auto& name : s) out.push_back(g.index_of(name));
    return out;
}

// Reflexive-transitive closure along directed edges, by index.
inline std::vector<bool> closure(const Adjacency& adj, const std::vector<int>& start,
                                 bool downstream) {
    std::vector<bool> seen(adj.n, false);
    std::vector<int> stack = start;
    for (int v : stack) seen[v] = true;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        const auto& next = downstream ? adj.children[v] : adj.parents[v];
        for (int w : next)
            if (!seen[w]) {
                seen[w] = true;
                stack.push_back(w);
            }
    }
    return seen;
}

}  // namespace detail

inline NodeSet descendants(const CausalGraph& g, const NodeSet& s) {
    detail::require_valid(g);
    auto adj = detail::compile(g);
    auto seen = detail::closure(adj, detail::to_indices(g, s), /*downstream=*/true);
    NodeSet out;
    for (int v = 0; v < adj.n; ++v)
        if (seen[v]) out.insert(g.nodes()[v]);
    return out;
}

inline NodeSet ancestors(const CausalGraph& g, const NodeSet& s) {
    detail::require_valid(g);
    auto adj = detail::compile(g);
    auto seen = detail::closure(adj, detail::to_indices(g, s), /*downstream=*/false);
    NodeSet out;
    for (int v = 0; v < adj.n; ++v)
        if (seen[v]) out.insert(g.nodes()[v]);
    return out;
}

// Deterministic topological order: ties broken by declaration order.
inline std::vector<std::string> topological_order(const CausalGraph& g) {
    detail::require_valid(g);
    auto adj = detail::compile(g);
    int n = adj.n;
    std::vector<int> indegree(n, 0);
    for (int v = 0; v < n; ++v) indegree[v] = static_cast<int>(adj.parents[v].size());
    std::vector<bool> emitted(n, false);
    std::vector<std::string> order;
    order.reserve(n);
    for (int step = 0; step < n; ++step) {
        int next = -1;
        for (int v = 0; v < n; ++v)
            if (!emitted[v] && indegree[v] == 0) { next = v; break; }
        if (next < 0) throw Error(Errc::cycle, "cycle among directed edges");
        emitted[next] = true;
        order.push_back(g.nodes()[next]);
        for (int c : adj.children[next]) --indegree[c];
    }
    return order;
}

// All simple directed paths x -> ... -> y, ordered lexicographically by the
// node-name sequence (children explored in name order).
inline std::vector<std::vector<std::string>> directed_paths(const CausalGraph& g,
                                                            const std::string& x,
                                                            const std::string& y) {
    detail::require_valid(g);
    int xi = g.index_of(x), yi = g.index_of(y);
    auto adj = detail::compile(g);
    for (auto& kids : adj.children)
        std::sort(kids.begin(), kids.end(), [&](int a, int b) {
            return g.nodes()[a] < g.nodes()[b];
        });

    std::vector<std::vector<std::string>> paths;
    std::vector<int> current{xi};
    std::vector<bool> on_path(adj.n, false);
    on_path[xi] = true;

    struct Frame { int node; std::size_t next_child; };
    std::vector<Frame> stack{{xi, 0}};
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.node == yi && current.size() > 1) {
            std::vector<std::string> named;
            for (int v : current) named.push_back(g.nodes()[v]);
            paths.push_back(std::move(named));
            on_path[f.node] = false;
            current.pop_back();
            stack.pop_back();
            continue;
        }
        if (f.node == yi && current.size() == 1 && xi == yi) {
            // x == y: no nontrivial simple path.
            break;
        }
        if (f.next_child < adj.children[f.node].size()) {
            int c = adj.children[f.node][f.next_child++];
            if (!on_path[c]) {
                on_path[c] = true;
                current.push_back(c);
                stack.push_back({c, 0});
            }
        } else {
            on_path[f.node] = false;
            current.pop_back();
            stack.pop_back();
        }
    }
    return paths;
}

}  // namespace markovprune
