#pragma once

// Linear-Gaussian generative engine. Nodes are generated in topological order
// as a weighted sum of parents plus independent Gaussian noise; a bidirected
// edge contributes one shared standard-normal confounder per row, loaded onto
// both endpoints. Latent columns never reach the emitted dataset.

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "markovprune/dsl.hpp"
#include "markovprune/graph.hpp"
#include "markovprune/rng.hpp"

namespace markovprune {

struct CoefficientAssignment {
    std::map<Edge, double> coef;                    // one entry per directed edge
    std::map<Edge, std::pair<double, double>> confounder_loadings;  // per bidirected edge
    std::map<std::string, double> noise_sd;         // one entry per node, latents included
};

// Honors every user-specified coefficient and noise line; remaining
// coefficients are drawn uniformly from [-0.8,-0.3] u [0.3,0.8] and remaining
// noise sds default to 1. Draw order is fixed (directed edges, then bidirected
// loadings, in declaration order), so the result is a pure function of
// (model, seed).
inline CoefficientAssignment fill_coefficients(const ModelFile& model, std::uint64_t seed) {
    Rng rng(seed);
    auto draw = [&rng] {
        double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        return sign * (0.3 + 0.5 * rng.uniform());
    };

    CoefficientAssignment out;
    for (const auto& edge : model.graph.directed_edges()) {
        auto it = model.coefficients.find(edge);
        out.coef[edge] = it != model.coefficients.end() ? it->second : draw();
    }
    for (const auto& edge : model.graph.bidirected_edges()) {
        double first = draw();
        double second = draw();
        out.confounder_loadings[edge] = {first, second};
    }
    for (const auto& name : model.graph.nodes()) {
        auto it = model.noise_sd.find(name);
        out.noise_sd[name] = it != model.noise_sd.end() ? it->second : 1.0;
    }
    return out;
}

struct Dataset {
    std::vector<std::string> columns;
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<double> values;  // row-major n x p

    double at(std::size_t row, std::size_t col) const { return values[row * p + col]; }
    double& at(std::size_t row, std::size_t col) { return values[row * p + col]; }

    int column_index(const std::string& name) const {
        for (std::size_t j = 0; j < columns.size(); ++j)
            if (columns[j] == name) return static_cast<int>(j);
        return -1;
    }
};

inline Dataset simulate(const CausalGraph& g, const CoefficientAssignment& assignment,
                        std::size_t n, std::uint64_t seed) {
    detail::require_valid(g);
    if (n < 1) throw Error(Errc::bad_argument, "sample size must be at least 1");
    for (const auto& edge : g.directed_edges())
        if (!assignment.coef.count(edge))
            throw Error(Errc::bad_argument,
                        "assignment lacks coefficient for " + edge.first + " -> " + edge.second);
    for (const auto& name : g.nodes())
        if (!assignment.noise_sd.count(name))
            throw Error(Errc::bad_argument, "assignment lacks noise sd for '" + name + "'");
    for (const auto& edge : g.bidirected_edges())
        if (!assignment.confounder_loadings.count(edge))
            throw Error(Errc::bad_argument, "assignment lacks confounder loadings for " +
                                                edge.first + " <-> " + edge.second);

    auto topo = topological_order(g);
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < g.nodes().size(); ++i) index[g.nodes()[i]] = static_cast<int>(i);

    struct Term { int source; double weight; };
    std::vector<std::vector<Term>> terms(g.node_count());
    for (const auto& [t, h] : g.directed_edges())
        terms[index[h]].push_back({index[t], assignment.coef.at({t, h})});

    std::size_t n_conf = g.bidirected_edges().size();
    struct ConfTerm { int node; double weight; };
    std::vector<std::vector<ConfTerm>> conf_terms(n_conf);
    for (std::size_t e = 0; e < n_conf; ++e) {
        const auto& edge = g.bidirected_edges()[e];
        const auto& [wa, wb] = assignment.confounder_loadings.at(edge);
        conf_terms[e] = {{index[edge.first], wa}, {index[edge.second], wb}};
    }

    std::vector<double> sd(g.node_count());
    for (const auto& name : g.nodes()) sd[index[name]] = assignment.noise_sd.at(name);
    std::vector<int> topo_idx;
    for (const auto& name : topo) topo_idx.push_back(index[name]);

    Rng rng(seed);
    std::vector<double> row(g.node_count());
    std::vector<int> out_cols;
    Dataset ds;
    for (const auto& name : g.observed_nodes()) {
        ds.columns.push_back(name);
        out_cols.push_back(index[name]);
    }
    ds.n = n;
    ds.p = ds.columns.size();
    ds.values.resize(n * ds.p);

    for (std::size_t r = 0; r < n; ++r) {
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t e = 0; e < n_conf; ++e) {
            double shared = rng.normal();
            for (const auto& ct : conf_terms[e]) row[ct.node] += ct.weight * shared;
        }
        for (int v : topo_idx) {
            double value = row[v];  // confounder contributions so far
            for (const auto& term : terms[v]) value += term.weight * row[term.source];
            value += sd[v] * rng.normal();
            row[v] = value;
        }
        for (std::size_t j = 0; j < out_cols.size(); ++j)
            ds.at(r, j) = row[out_cols[j]];
    }
    return ds;
}

// Path-tracing ground truth. Total effects sum coefficient products over all
// directed paths; mediation effects multiply the declared stage coefficients
// and add the direct edge when the target is partial.
inline double true_effect(const CausalGraph& g, const CoefficientAssignment& assignment,
                          const TargetEffect& target) {
    detail::require_valid(g);
    g.index_of(target.cause);
    g.index_of(target.outcome);
    for (const auto& m : target.mediators) g.index_of(m);

    auto coef_or_zero = [&](const std::string& t, const std::string& h) {
        auto it = assignment.coef.find({t, h});
        return it != assignment.coef.end() ? it->second : 0.0;
    };

    if (target.kind == TargetEffect::Kind::total) {
        double total = 0.0;
        for (const auto& path : directed_paths(g, target.cause, target.outcome)) {
            double product = 1.0;
            for (std::size_t i = 0; i + 1 < path.size(); ++i)
                product *= assignment.coef.at({path[i], path[i + 1]});
            total += product;
        }
        return total;
    }

    std::vector<std::string> chain{target.cause};
    chain.insert(chain.end(), target.mediators.begin(), target.mediators.end());
    chain.push_back(target.outcome);
    double indirect = 1.0;
    for (std::size_t i = 0; i + 1 < chain.size(); ++i)
        indirect *= coef_or_zero(chain[i], chain[i + 1]);
    double direct = target.partial ? coef_or_zero(target.cause, target.outcome) : 0.0;
    return indirect + direct;
}

namespace detail {

inline std::string csv_number(double v) { return format_number(v); }

}  // namespace detail

inline void write_csv(const Dataset& ds, std::ostream& os) {
    for (std::size_t j = 0; j < ds.columns.size(); ++j)
        os << (j ? "," : "") << ds.columns[j];
    os << "\n";
    for (std::size_t r = 0; r < ds.n; ++r) {
        for (std::size_t j = 0; j < ds.p; ++j)
            os << (j ? "," : "") << detail::csv_number(ds.at(r, j));
        os << "\n";
    }
}

inline Dataset read_csv(std::istream& is) {
    Dataset ds;
    std::string line;
    if (!std::getline(is, line))
        throw Error(Errc::io, "empty dataset: missing CSV header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t start = 0;
    for (;;) {
        auto comma = line.find(',', start);
        ds.columns.push_back(line.substr(start, comma == std::string::npos
                                                    ? std::string::npos
                                                    : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    ds.p = ds.columns.size();

    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t field = 0, pos = 0;
        while (pos <= line.size()) {
            auto comma = line.find(',', pos);
            auto end = comma == std::string::npos ? line.size() : comma;
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + end, v);
            if (ec != std::errc{} || ptr != line.data() + end)
                throw Error(Errc::io, "CSV line " + std::to_string(line_no) +
                                          ": malformed number '" +
                                          line.substr(pos, end - pos) + "'");
            ds.values.push_back(v);
            ++field;
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (field != ds.p)
            throw Error(Errc::io, "CSV line " + std::to_string(line_no) + ": expected " +
                                      std::to_string(ds.p) + " fields, found " +
                                      std::to_string(field));
        ++ds.n;
    }
    return ds;
}

}  // namespace markovprune
