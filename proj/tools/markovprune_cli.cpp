// Command-line front end for .dgp model files: validation, implied
// independencies, Markov blankets, projection, reduction to the minimal
// model, simulation, path-model fitting and the benchmark sweep.
//
// Exit codes: 0 success, 1 domain error (stderr line "error[E0xx]: ..."),
// 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "markovprune/markovprune.hpp"

namespace mp = markovprune;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mp::Error(mp::Errc::io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw mp::Error(mp::Errc::io, "cannot write '" + path + "'");
    out << content;
}

mp::ModelFile load_model(const std::string& path) {
    auto result = mp::parse(read_file(path));
    if (result.ok()) return std::move(*result.model);
    const auto& d = result.diagnostics.front();
    std::string where = d.line > 0
                            ? path + ":" + std::to_string(d.line) + ":" +
                                  std::to_string(d.col) + ": "
                            : path + ": ";
    throw mp::Error(d.code, where + d.message);
}

std::vector<std::string> split_names(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string join(const mp::NodeSet& s, const char* sep = ",") {
    std::string out;
    for (const auto& name : s) out += (out.empty() ? "" : sep) + name;
    return out;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("MARKOVPRUNE_SEED")) {
        char* end = nullptr;
        auto v = std::strtoull(env, &end, 10);
        if (end && *end == '\0') return v;
        throw mp::Error(mp::Errc::bad_argument, "MARKOVPRUNE_SEED is not an integer");
    }
    return 0;
}

std::vector<int> parse_grid(const std::string& text) {
    // start:stop:step, inclusive of stop when the step lands on it
    int parts[3] = {0, 0, 0};
    std::size_t idx = 0, start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ':') {
            if (idx >= 3) throw mp::Error(mp::Errc::bad_argument, "bad n-grid '" + text + "'");
            try {
                parts[idx++] = std::stoi(text.substr(start, i - start));
            } catch (const std::exception&) {
                throw mp::Error(mp::Errc::bad_argument, "bad n-grid '" + text + "'");
            }
            start = i + 1;
        }
    }
    std::vector<int> grid;
    if (idx == 1) {
        grid.push_back(parts[0]);
    } else if (idx == 3) {
        if (parts[2] <= 0)
            throw mp::Error(mp::Errc::bad_argument, "n-grid step must be positive");
        for (int n = parts[0]; n <= parts[1]; n += parts[2]) grid.push_back(n);
    } else {
        throw mp::Error(mp::Errc::bad_argument,
                        "n-grid must be START:STOP:STEP or a single value");
    }
    return grid;
}

json fit_to_json(const mp::FitResult& fit) {
    json estimates = json::object(), se = json::object(), p = json::object();
    for (const auto& [edge, v] : fit.estimates) {
        std::string key = edge.first + "->" + edge.second;
        estimates[key] = v;
        se[key] = fit.std_errors.at(edge);
        p[key] = fit.p_values.at(edge);
    }
    return json{{"estimates", estimates}, {"se", se},     {"p", p},
                {"chi2", fit.chi2},       {"df", fit.df}, {"cfi", fit.cfi},
                {"rmsea", fit.rmsea},     {"n", fit.n}};
}

json reduced_to_json(const mp::ReducedModel& reduced) {
    json regressions = json::array();
    for (const auto& r : reduced.regressions)
        regressions.push_back({{"outcome", r.outcome}, {"predictors", r.predictors}});
    json sets = json::array();
    for (std::size_t i = 0; i < reduced.targets.size(); ++i)
        sets.push_back({{"target", reduced.targets[i].describe()},
                        {"members", reduced.chosen_sets[i].members},
                        {"minimal", reduced.chosen_sets[i].minimal}});
    json edges = json::array();
    for (const auto& [t, h] : reduced.graph.directed_edges())
        edges.push_back({t, h});
    return json{{"nodes", reduced.graph.nodes()},
                {"edges", edges},
                {"regressions", regressions},
                {"dropped", reduced.dropped},
                {"adjustment_sets", sets}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reduce structural causal models to the minimal sub-model and "
                 "regression plan for declared target effects"};
    app.require_subcommand(1);
    argv = app.ensure_utf8(argv);

    std::string file, out_path, data_path, cause, outcome, of_nodes, keep_nodes;
    std::string grid_text = "10:200:10";
    std::optional<std::uint64_t> seed_flag;
    int max_given = 3;
    std::size_t sim_n = 0;
    int reps = 100;
    int threads = 1;
    bool keep_precision = false, as_json = false;
    std::string variant_text = "both";

    auto* validate_cmd = app.add_subcommand("validate", "check a model file");
    validate_cmd->add_option("file", file)->required();

    auto* indep_cmd = app.add_subcommand("indep", "list implied conditional independencies");
    indep_cmd->add_option("file", file)->required();
    indep_cmd->add_option("--max-given", max_given, "largest conditioning set")
        ->check(CLI::NonNegativeNumber);

    auto* mblanket_cmd = app.add_subcommand("mblanket", "Markov blanket of a node set");
    mblanket_cmd->add_option("file", file)->required();
    mblanket_cmd->add_option("--of", of_nodes, "comma-separated node names")->required();

    auto* project_cmd = app.add_subcommand("project", "latent projection onto kept nodes");
    project_cmd->add_option("file", file)->required();
    project_cmd->add_option("--keep", keep_nodes, "comma-separated node names")->required();

    auto* adjust_cmd = app.add_subcommand("adjust", "minimal backdoor adjustment sets");
    adjust_cmd->add_option("file", file)->required();
    adjust_cmd->add_option("--cause", cause)->required();
    adjust_cmd->add_option("--outcome", outcome)->required();

    auto* reduce_cmd = app.add_subcommand("reduce", "minimal model and regression plan");
    reduce_cmd->add_option("file", file)->required();
    reduce_cmd->add_flag("--keep-precision", keep_precision,
                         "retain precision-improving outcome parents");
    reduce_cmd->add_option("-o,--output", out_path, "write reduced model DSL here");
    reduce_cmd->add_flag("--json", as_json);

    auto* simulate_cmd = app.add_subcommand("simulate", "draw a dataset from the model");
    simulate_cmd->add_option("file", file)->required();
    simulate_cmd->add_option("--n", sim_n, "sample size")->required();
    simulate_cmd->add_option("--seed", seed_flag);
    simulate_cmd->add_option("-o,--output", out_path, "write CSV here (default stdout)");

    auto* fit_cmd = app.add_subcommand("fit", "fit a path model to CSV data");
    fit_cmd->add_option("model", file)->required();
    fit_cmd->add_option("data", data_path)->required();
    fit_cmd->add_flag("--json", as_json);

    auto* sweep_cmd = app.add_subcommand("sweep", "sample-size sweep of full vs reduced fits");
    sweep_cmd->add_option("file", file)->required();
    sweep_cmd->add_option("--n-grid", grid_text, "START:STOP:STEP (inclusive)");
    sweep_cmd->add_option("--reps", reps);
    sweep_cmd->add_option("--seed", seed_flag);
    sweep_cmd->add_option("--variants", variant_text)
        ->check(CLI::IsMember({"full", "reduced", "both"}));
    sweep_cmd->add_option("--threads", threads)->check(CLI::PositiveNumber);
    sweep_cmd->add_option("-o,--output", out_path, "write CSV here (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return 2;
    }

    try {
        if (validate_cmd->parsed()) {
            auto result = mp::parse(read_file(file));
            if (!result.ok()) {
                for (const auto& d : result.diagnostics) {
                    std::cerr << "error[" << mp::errc_label(d.code) << "]: ";
                    if (d.line > 0) std::cerr << file << ":" << d.line << ":" << d.col << ": ";
                    std::cerr << d.message << "\n";
                }
                return 1;
            }
            std::cout << "OK\n";
        } else if (indep_cmd->parsed()) {
            auto model = load_model(file);
            for (const auto& st : mp::implied_independencies(model.graph, max_given)) {
                std::cout << *st.left.begin() << " _||_ " << *st.right.begin();
                if (!st.given.empty()) std::cout << " | " << join(st.given);
                std::cout << "\n";
            }
        } else if (mblanket_cmd->parsed()) {
            auto model = load_model(file);
            mp::CausalGraph graph = model.graph;
            if (!graph.latent_nodes().empty() || !graph.bidirected_edges().empty()) {
                graph = mp::project_observed(graph);
                std::cerr << "note: projected out latent structure before the blanket query\n";
            }
            mp::NodeSet of;
            for (const auto& name : split_names(of_nodes)) of.insert(name);
            if (of.empty()) throw mp::Error(mp::Errc::bad_argument, "--of names no nodes");
            std::cout << join(mp::markov_blanket(graph, of)) << "\n";
        } else if (project_cmd->parsed()) {
            auto model = load_model(file);
            mp::NodeSet keep;
            for (const auto& name : split_names(keep_nodes)) keep.insert(name);
            mp::ModelFile projected;
            projected.graph = mp::project(model.graph, keep);
            for (const auto& t : model.targets) {
                bool survives = keep.count(t.cause) && keep.count(t.outcome);
                for (const auto& m : t.mediators) survives = survives && keep.count(m);
                if (survives) projected.targets.push_back(t);
            }
            std::cout << mp::serialize(projected);
        } else if (adjust_cmd->parsed()) {
            auto model = load_model(file);
            for (const auto& s : mp::adjustment_sets(model.graph, cause, outcome))
                std::cout << (s.members.empty() ? "{}" : join(s.members)) << "\n";
        } else if (reduce_cmd->parsed()) {
            auto model = load_model(file);
            mp::ReduceOptions options;
            options.keep_precision = keep_precision;
            auto reduced = mp::reduce(model, options);
            if (as_json) {
                std::cout << reduced_to_json(reduced).dump(2) << "\n";
            } else {
                std::string dsl = mp::serialize(mp::to_model_file(reduced));
                std::string report = "# plan\n" + mp::plan_text(reduced);
                report += "# dropped: " +
                          (reduced.dropped.empty() ? "(none)" : join(reduced.dropped, ", ")) +
                          "\n";
                for (std::size_t i = 0; i < reduced.targets.size(); ++i)
                    report += "# adjustment " + reduced.targets[i].describe() + ": " +
                              (reduced.chosen_sets[i].members.empty()
                                   ? "{}"
                                   : join(reduced.chosen_sets[i].members, ", ")) +
                              "\n";
                if (!out_path.empty()) {
                    write_file(out_path, dsl);
                    std::cout << report;
                } else {
                    std::cout << dsl << "\n" << report;
                }
            }
        } else if (simulate_cmd->parsed()) {
            auto model = load_model(file);
            auto seed = resolve_seed(seed_flag);
            auto assignment = mp::fill_coefficients(model, seed);
            auto data = mp::simulate(model.graph, assignment, sim_n, seed);
            if (!out_path.empty()) {
                std::ostringstream ss;
                mp::write_csv(data, ss);
                write_file(out_path, ss.str());
            } else {
                mp::write_csv(data, std::cout);
            }
        } else if (fit_cmd->parsed()) {
            auto model = load_model(file);
            std::ifstream data_in(data_path, std::ios::binary);
            if (!data_in) throw mp::Error(mp::Errc::io, "cannot open '" + data_path + "'");
            auto data = mp::read_csv(data_in);
            auto fitted = mp::fit(mp::PathModel(model.graph), data);
            if (as_json)
                std::cout << fit_to_json(fitted).dump(2) << "\n";
            else
                std::cout << mp::fit_report(fitted);
        } else if (sweep_cmd->parsed()) {
            mp::SweepSpec spec;
            spec.model = load_model(file);
            spec.n_grid = parse_grid(grid_text);
            spec.reps = reps;
            spec.seed = resolve_seed(seed_flag);
            spec.threads = threads;
            spec.variants = variant_text == "full"      ? mp::SweepVariant::full
                            : variant_text == "reduced" ? mp::SweepVariant::reduced
                                                        : mp::SweepVariant::both;
            auto rows = mp::run_sweep(spec);
            for (const auto& row : rows)
                if (row.misspecified) {
                    std::cerr << "note: full-model rows drop the projection's bidirected "
                                 "(correlated-error) components; treat them as misspecified\n";
                    break;
                }
            auto csv = mp::sweep_csv(rows);
            if (!out_path.empty())
                write_file(out_path, csv);
            else
                std::cout << csv;
        }
    } catch (const mp::Error& e) {
        std::cerr << "error[" << mp::errc_label(e.code()) << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[E999]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
