#pragma once

// Minimal-model synthesis. For each declared target the reducer picks one
// backdoor adjustment set per structural equation (total effects have one
// equation; mediation chains one per stage, plus one for the direct edge when
// the mediation is partial), assembles the reduced graph from the target
// edges and the adjustment predictors, and reports which original variables
// need not be collected at all.

#include <map>
#include <string>
#include <vector>

#include "markovprune/adjustment.hpp"
#include "markovprune/dsl.hpp"
#include "markovprune/graph.hpp"
#include "markovprune/projection.hpp"

namespace markovprune {

struct Regression {
    std::string outcome;
    std::vector<std::string> predictors;  // cause, chain parent, then adjustments
};

struct ReducedModel {
    CausalGraph graph;                      // observed nodes only
    std::vector<Regression> regressions;    // topological order of the reduced graph
    NodeSet dropped;                        // observed originals not needed at all
    std::vector<AdjustmentSet> chosen_sets; // one per target; stage union for mediation
    std::vector<TargetEffect> targets;
};

struct ReduceOptions {
    bool keep_precision = false;
    std::size_t max_nodes = kDefaultMaxNodes;
};

namespace detail {

struct Stage {
    std::string tail;
    std::string head;
    bool is_direct_cause;  // tail is the target's cause entering head's equation
};

inline std::vector<Stage> target_stages(const TargetEffect& t) {
    std::vector<Stage> stages;
    if (t.kind == TargetEffect::Kind::total) {
        stages.push_back({t.cause, t.outcome, true});
        return stages;
    }
    std::vector<std::string> chain{t.cause};
    chain.insert(chain.end(), t.mediators.begin(), t.mediators.end());
    chain.push_back(t.outcome);
    for (std::size_t i = 0; i + 1 < chain.size(); ++i)
        stages.push_back({chain[i], chain[i + 1], i == 0});
    if (t.partial) stages.push_back({t.cause, t.outcome, true});
    return stages;
}

}  // namespace detail

inline ReducedModel reduce(const ModelFile& model, const ReduceOptions& options = {}) {
    const CausalGraph& g = model.graph;
    detail::require_valid(g);
    if (model.targets.empty())
        throw Error(Errc::bad_argument, "model declares no targets to reduce for");

    // Per-equation predictor roles, merged across targets in declared order.
    struct EquationDraft {
        std::vector<std::string> leads;  // stage tails: cause first, then chain parents
        NodeSet adjustments;
    };
    std::map<std::string, EquationDraft> equations;
    ReducedModel out;
    out.targets = model.targets;

    for (const auto& target : model.targets) {
        AdjustmentSet combined;
        bool single_stage = target.kind == TargetEffect::Kind::total;
        for (const auto& stage : detail::target_stages(target)) {
            auto sets = adjustment_sets(g, stage.tail, stage.head, options.max_nodes);
            if (sets.empty())
                throw Error(Errc::not_identifiable,
                            "no observed backdoor adjustment set for " + stage.tail +
                                " -> " + stage.head + " (target " + target.describe() +
                                "); the effect is not identifiable by covariate adjustment");
            const AdjustmentSet& chosen = sets.front();

            auto& eq = equations[stage.head];
            auto& leads = eq.leads;
            auto insert_lead = [&](const std::string& name, bool front) {
                if (std::find(leads.begin(), leads.end(), name) != leads.end()) return;
                if (front)
                    leads.insert(leads.begin(), name);
                else
                    leads.push_back(name);
            };
            insert_lead(stage.tail, stage.is_direct_cause);
            for (const auto& z : chosen.members) {
                eq.adjustments.insert(z);
                combined.members.insert(z);
            }
        }
        combined.minimal = single_stage;
        out.chosen_sets.push_back(std::move(combined));
    }

    if (options.keep_precision) {
        NodeSet all_cause_desc;
        for (const auto& target : model.targets)
            for (const auto& d : descendants(g, {target.cause})) all_cause_desc.insert(d);
        for (const auto& target : model.targets) {
            auto& eq = equations[target.outcome];
            for (const auto& [tail, head] : g.directed_edges())
                if (head == target.outcome && !g.is_latent(tail) &&
                    !all_cause_desc.count(tail) &&
                    std::find(eq.leads.begin(), eq.leads.end(), tail) == eq.leads.end())
                    eq.adjustments.insert(tail);
        }
    }

    // Assemble the reduced graph; node declaration order follows the original.
    NodeSet kept;
    for (const auto& [outcome, eq] : equations) {
        kept.insert(outcome);
        for (const auto& l : eq.leads) kept.insert(l);
        for (const auto& z : eq.adjustments) kept.insert(z);
    }
    for (const auto& name : g.nodes())
        if (kept.count(name)) out.graph.add_node(name);
    for (const auto& name : g.nodes()) {
        auto it = equations.find(name);
        if (it == equations.end()) continue;
        for (const auto& p : it->second.leads) out.graph.add_directed_edge(p, name);
        for (const auto& z : it->second.adjustments)
            if (std::find(it->second.leads.begin(), it->second.leads.end(), z) ==
                it->second.leads.end())
                out.graph.add_directed_edge(z, name);
    }
    if (!validate(out.graph).empty())
        throw Error(Errc::semantic,
                    "declared targets induce conflicting structure in the reduced model");

    for (const auto& name : topological_order(out.graph)) {
        auto it = equations.find(name);
        if (it == equations.end()) continue;
        Regression r;
        r.outcome = name;
        r.predictors = it->second.leads;
        for (const auto& z : it->second.adjustments)
            if (std::find(r.predictors.begin(), r.predictors.end(), z) == r.predictors.end())
                r.predictors.push_back(z);
        out.regressions.push_back(std::move(r));
    }

    for (const auto& name : g.observed_nodes())
        if (!kept.count(name)) out.dropped.insert(name);
    return out;
}

// One line per regression, in the style of a model formula: "Y ~ X + C".
inline std::string plan_text(const ReducedModel& reduced) {
    std::string out;
    for (const auto& r : reduced.regressions) {
        out += r.outcome + " ~ ";
        for (std::size_t i = 0; i < r.predictors.size(); ++i)
            out += (i ? " + " : "") + r.predictors[i];
        out += "\n";
    }
    return out;
}

inline ModelFile to_model_file(const ReducedModel& reduced) {
    ModelFile m;
    m.graph = reduced.graph;
    m.targets = reduced.targets;
    return m;
}

}  // namespace markovprune
