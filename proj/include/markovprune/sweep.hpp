#pragma once

// Simulation protocol: sweep sample sizes, fit the full (observed-projected)
// and reduced models to fresh draws from the declared DGP, and aggregate fit
// and effect metrics per (n, variant, metric). Coefficients are filled once
// per sweep so the truth is fixed; replication r of the whole sweep simulates
// with seed base + 1 + r (the base itself seeds the coefficient fill), which
// makes rows reproducible and replications independent.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "markovprune/fit.hpp"
#include "markovprune/projection.hpp"
#include "markovprune/reduce.hpp"
#include "markovprune/simulate.hpp"

namespace markovprune {

enum class SweepVariant { full, reduced, both };

struct SweepSpec {
    ModelFile model;
    std::vector<int> n_grid;         // strictly increasing, each >= 10
    int reps = 100;
    std::uint64_t seed = 0;
    SweepVariant variants = SweepVariant::both;
    int threads = 1;
};

struct SweepRow {
    int n = 0;
    std::string variant;  // "full" or "reduced"
    std::string metric;   // cfi, chi2, mae, pvalue, rmsea
    double mean = 0.0;
    double sd = 0.0;
    int reps = 0;              // successful replications backing the row
    bool misspecified = false; // full variant lost bidirected components
};

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    if (spec.reps < 1) throw Error(Errc::bad_argument, "reps must be at least 1");
    if (spec.n_grid.empty()) throw Error(Errc::bad_argument, "empty n grid");
    for (std::size_t i = 0; i < spec.n_grid.size(); ++i) {
        if (spec.n_grid[i] < 10)
            throw Error(Errc::bad_argument, "sweep sample sizes must be at least 10");
        if (i > 0 && spec.n_grid[i] <= spec.n_grid[i - 1])
            throw Error(Errc::bad_argument, "n grid must be strictly increasing");
    }

    ReducedModel reduced = reduce(spec.model);  // also validates identifiability
    const TargetEffect& target = spec.model.targets.front();

    CausalGraph projected = project_observed(spec.model.graph);
    bool dropped_confounding = !projected.bidirected_edges().empty();
    CausalGraph full_graph;
    for (const auto& name : projected.nodes()) full_graph.add_node(name);
    for (const auto& [t, h] : projected.directed_edges()) full_graph.add_directed_edge(t, h);

    auto assignment = fill_coefficients(spec.model, spec.seed);
    double truth = true_effect(spec.model.graph, assignment, target);

    bool want_full = spec.variants != SweepVariant::reduced;
    bool want_reduced = spec.variants != SweepVariant::full;
    std::optional<PathModel> full_model;
    if (want_full) full_model.emplace(full_graph);
    std::optional<PathModel> reduced_model;
    if (want_reduced) reduced_model.emplace(reduced.graph);

    struct RepMetrics {
        bool ok = false;
        double chi2 = 0, cfi = 0, rmsea = 0, mae = 0, pvalue = 0;
    };
    std::size_t n_count = spec.n_grid.size();
    std::size_t reps = static_cast<std::size_t>(spec.reps);
    std::vector<RepMetrics> full_slots(n_count * reps), reduced_slots(n_count * reps);

    auto run_slot = [&](std::size_t slot) {
        std::size_t ni = slot / reps;
        std::uint64_t rep_seed = spec.seed + 1 + static_cast<std::uint64_t>(slot);
        Dataset data = simulate(spec.model.graph, assignment,
                                static_cast<std::size_t>(spec.n_grid[ni]), rep_seed);
        auto evaluate = [&](const PathModel& pm, RepMetrics& slot_out) {
            try {
                FitResult f = fit(pm, data);
                auto tm = target_metrics(f, target, truth);
                slot_out = {true, f.chi2, f.cfi, f.rmsea, tm.abs_error, tm.p_value};
            } catch (const Error&) {
                slot_out.ok = false;  // failed rep: kept out of the aggregates
            }
        };
        if (full_model) evaluate(*full_model, full_slots[slot]);
        if (reduced_model) evaluate(*reduced_model, reduced_slots[slot]);
    };

    std::size_t total_slots = n_count * reps;
    int workers = std::max(1, spec.threads);
    if (workers == 1) {
        for (std::size_t s = 0; s < total_slots; ++s) run_slot(s);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t s = static_cast<std::size_t>(w); s < total_slots;
                     s += static_cast<std::size_t>(workers))
                    run_slot(s);
            });
        for (auto& t : pool) t.join();
    }

    std::vector<SweepRow> rows;
    static const char* kMetrics[] = {"cfi", "chi2", "mae", "pvalue", "rmsea"};
    auto metric_value = [](const RepMetrics& m, const std::string& name) {
        if (name == "cfi") return m.cfi;
        if (name == "chi2") return m.chi2;
        if (name == "mae") return m.mae;
        if (name == "pvalue") return m.pvalue;
        return m.rmsea;
    };
    for (std::size_t ni = 0; ni < n_count; ++ni) {
        auto emit = [&](const char* variant, const std::vector<RepMetrics>& slots,
                        bool flagged) {
            for (const char* metric : kMetrics) {
                SweepRow row;
                row.n = spec.n_grid[ni];
                row.variant = variant;
                row.metric = metric;
                row.misspecified = flagged;
                double sum = 0.0;
                int ok = 0;
                for (std::size_t r = 0; r < reps; ++r) {
                    const auto& m = slots[ni * reps + r];
                    if (!m.ok) continue;
                    sum += metric_value(m, metric);
                    ++ok;
                }
                row.reps = ok;
                row.mean = ok > 0 ? sum / ok : std::nan("");
                double ss = 0.0;
                if (ok > 1) {
                    for (std::size_t r = 0; r < reps; ++r) {
                        const auto& m = slots[ni * reps + r];
                        if (!m.ok) continue;
                        double d = metric_value(m, metric) - row.mean;
                        ss += d * d;
                    }
                    row.sd = std::sqrt(ss / (ok - 1));
                }
                rows.push_back(std::move(row));
            }
        };
        if (want_full) emit("full", full_slots, dropped_confounding);
        if (want_reduced) emit("reduced", reduced_slots, false);
    }
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "n,variant,metric,mean,sd,reps\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n) + "," + r.variant + "," + r.metric + "," +
               detail::format_number(r.mean) + "," + detail::format_number(r.sd) + "," +
               std::to_string(r.reps) + "\n";
    }
    return out;
}

}  // namespace markovprune
