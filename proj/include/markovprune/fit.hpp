#pragma once

// Recursive linear path-model estimation and covariance-structure fit
// statistics. Each endogenous equation is estimated by least squares on its
// parents, which is the maximum-likelihood estimator for recursive models
// with uncorrelated errors -- exactly the class the reducer emits. Residual
// variances use the ML denominator n, exogenous moments are free, and the
// discrepancy is the usual ML fit function with chi2 = (n - 1) * F.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "markovprune/dsl.hpp"
#include "markovprune/graph.hpp"
#include "markovprune/linalg.hpp"
#include "markovprune/simulate.hpp"

namespace markovprune {

// Structure of a fitted model: an observed, recursive graph. Correlated
// errors (bidirected edges) and latent nodes are out of scope for the
// estimator and are rejected up front.
struct PathModel {
    CausalGraph graph;

    explicit PathModel(CausalGraph g) : graph(std::move(g)) {
        detail::require_valid(graph);
        if (!graph.latent_nodes().empty())
            throw Error(Errc::latent_misuse, "path models must be fully observed");
        if (!graph.bidirected_edges().empty())
            throw Error(Errc::latent_misuse,
                        "path models cannot carry bidirected (correlated-error) edges");
    }
};

struct EquationFit {
    std::string outcome;
    std::vector<std::string> predictors;
    std::vector<double> beta;
    Mat beta_cov;  // classical OLS covariance of beta
};

struct FitResult {
    CausalGraph graph;
    std::map<Edge, double> estimates;
    std::map<Edge, double> std_errors;
    std::map<Edge, double> p_values;
    double chi2 = 0.0;
    int df = 0;
    double cfi = 1.0;
    double rmsea = 0.0;
    std::size_t n = 0;
    std::vector<std::string> cov_nodes;  // row/column order of implied_cov
    Mat implied_cov;
    std::vector<EquationFit> equations;
};

namespace detail {

inline double two_sided_p(double z) {
    return std::erfc(std::fabs(z) / 1.4142135623730951);
}

}  // namespace detail

inline FitResult fit(const PathModel& model, const Dataset& data) {
    const CausalGraph& g = model.graph;
    std::size_t p = g.node_count();
    if (p == 0) throw Error(Errc::bad_argument, "empty model");
    std::size_t n = data.n;
    if (n < 2) throw Error(Errc::sample_too_small, "need at least 2 rows");

    std::vector<int> col(p);
    for (std::size_t i = 0; i < p; ++i) {
        int c = data.column_index(g.nodes()[i]);
        if (c < 0)
            throw Error(Errc::bad_argument,
                        "dataset lacks column '" + g.nodes()[i] + "'");
        col[i] = c;
    }

    std::vector<double> mean(p, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t i = 0; i < p; ++i) mean[i] += data.at(r, col[i]);
    for (auto& m : mean) m /= static_cast<double>(n);

    // ML sample covariance (denominator n).
    Mat s(p, p);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t i = 0; i < p; ++i) {
            double di = data.at(r, col[i]) - mean[i];
            for (std::size_t j = i; j < p; ++j)
                s(i, j) += di * (data.at(r, col[j]) - mean[j]);
        }
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) {
            s(i, j) /= static_cast<double>(n);
            s(j, i) = s(i, j);
        }
    Mat s_chol = cholesky(s);  // throws if S is not positive definite

    std::map<std::string, int> index;
    for (std::size_t i = 0; i < p; ++i) index[g.nodes()[i]] = static_cast<int>(i);
    std::vector<std::vector<int>> parents(p);
    for (const auto& [t, h] : g.directed_edges())
        parents[index[h]].push_back(index[t]);

    FitResult out;
    out.graph = g;
    out.n = n;
    out.cov_nodes = g.nodes();

    Mat b(p, p);        // b(head, tail)
    Mat err_cov(p, p);  // psi diag over endogenous + phi block over exogenous
    std::vector<bool> endogenous(p, false);
    int n_endo = 0;

    for (std::size_t v = 0; v < p; ++v) {
        const auto& pa = parents[v];
        if (pa.empty()) continue;
        endogenous[v] = true;
        ++n_endo;
        std::size_t k = pa.size();
        if (n <= k + 1)
            throw Error(Errc::sample_too_small,
                        "n = " + std::to_string(n) + " too small for equation of '" +
                            g.nodes()[v] + "' with " + std::to_string(k) + " predictors");

        Mat spp(k, k);
        std::vector<double> spv(k);
        for (std::size_t i = 0; i < k; ++i) {
            spv[i] = s(pa[i], v);
            for (std::size_t j = 0; j < k; ++j) spp(i, j) = s(pa[i], pa[j]);
        }
        Mat spp_chol;
        try {
            spp_chol = cholesky(spp);
        } catch (const Error&) {
            throw Error(Errc::numerical, "singular predictor covariance in equation of '" +
                                             g.nodes()[v] + "'");
        }
        auto beta = chol_solve(spp_chol, spv);

        double resid = s(v, v);
        for (std::size_t i = 0; i < k; ++i) resid -= beta[i] * spv[i];
        if (!(resid > 0.0))
            throw Error(Errc::numerical, "degenerate residual variance in equation of '" +
                                             g.nodes()[v] + "'");
        err_cov(v, v) = resid;

        // Classical OLS covariance: s^2 (Xc'Xc)^{-1} with s^2 = RSS/(n-k-1),
        // i.e. resid_ml/(n-k-1) * S_PP^{-1} since Xc'Xc = n S_PP.
        Mat spp_inv = chol_inverse(spp_chol);
        double scale = resid / static_cast<double>(n - k - 1);
        EquationFit eq;
        eq.outcome = g.nodes()[v];
        eq.beta = beta;
        eq.beta_cov = Mat(k, k);
        for (std::size_t i = 0; i < k; ++i) {
            eq.predictors.push_back(g.nodes()[pa[i]]);
            for (std::size_t j = 0; j < k; ++j)
                eq.beta_cov(i, j) = scale * spp_inv(i, j);
        }
        for (std::size_t i = 0; i < k; ++i) {
            b(v, pa[i]) = beta[i];
            Edge e{g.nodes()[pa[i]], g.nodes()[v]};
            double se = std::sqrt(eq.beta_cov(i, i));
            out.estimates[e] = beta[i];
            out.std_errors[e] = se;
            out.p_values[e] = se > 0.0 ? detail::two_sided_p(beta[i] / se)
                                       : (beta[i] == 0.0 ? 1.0 : 0.0);
        }
        out.equations.push_back(std::move(eq));
    }

    // Free exogenous moments: the full sample block, covariances included.
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            if (!endogenous[i] && !endogenous[j]) err_cov(i, j) = s(i, j);

    Mat total = dag_total_effects(b);
    out.implied_cov = matmul(matmul(total, err_cov), transpose(total));

    int n_exo = static_cast<int>(p) - n_endo;
    int free_params = static_cast<int>(g.directed_edges().size()) + n_endo +
                      n_exo * (n_exo + 1) / 2;
    out.df = static_cast<int>(p * (p + 1) / 2) - free_params;

    Mat sigma_chol;
    try {
        sigma_chol = cholesky(out.implied_cov);
    } catch (const Error&) {
        throw Error(Errc::numerical, "implied covariance is not positive definite");
    }
    Mat sigma_inv = chol_inverse(sigma_chol);
    double trace = 0.0;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) trace += s(i, j) * sigma_inv(j, i);
    double discrepancy = chol_logdet(sigma_chol) + trace - chol_logdet(s_chol) -
                         static_cast<double>(p);
    discrepancy = std::max(discrepancy, 0.0);
    out.chi2 = static_cast<double>(n - 1) * discrepancy;

    out.rmsea = (out.df > 0 && out.chi2 > out.df)
                    ? std::sqrt((out.chi2 - out.df) /
                                (static_cast<double>(out.df) * static_cast<double>(n - 1)))
                    : 0.0;

    // Baseline for CFI: all variables uncorrelated, free variances.
    double base_f = 0.0;
    for (std::size_t i = 0; i < p; ++i) base_f += std::log(s(i, i));
    base_f -= chol_logdet(s_chol);
    base_f = std::max(base_f, 0.0);
    double base_chi2 = static_cast<double>(n - 1) * base_f;
    int base_df = static_cast<int>(p * (p + 1) / 2 - p);
    double denom = std::max({base_chi2 - base_df, out.chi2 - out.df, 0.0});
    double numer = std::max(out.chi2 - out.df, 0.0);
    out.cfi = denom > 0.0 ? 1.0 - numer / denom : 1.0;
    return out;
}

struct TargetMetrics {
    double estimate = 0.0;
    double abs_error = 0.0;
    double p_value = 1.0;
};

namespace detail {

// First-order delta-method variance of a differentiable function of the
// fitted coefficients. Within-equation covariances are exact (classical OLS);
// cross-equation covariances are zero for recursive models.
inline double delta_variance(const FitResult& fit, const std::map<Edge, double>& gradient) {
    double var = 0.0;
    for (const auto& eq : fit.equations) {
        std::vector<double> grad(eq.predictors.size(), 0.0);
        bool any = false;
        for (std::size_t i = 0; i < eq.predictors.size(); ++i) {
            auto it = gradient.find({eq.predictors[i], eq.outcome});
            if (it != gradient.end() && it->second != 0.0) {
                grad[i] = it->second;
                any = true;
            }
        }
        if (!any) continue;
        for (std::size_t i = 0; i < grad.size(); ++i)
            for (std::size_t j = 0; j < grad.size(); ++j)
                var += grad[i] * eq.beta_cov(i, j) * grad[j];
    }
    return var;
}

}  // namespace detail

// Estimate of the declared effect from a fitted model, its absolute error
// against a known truth, and a two-sided p-value. Total effects trace every
// directed path in the fitted graph (a single edge in reduced models);
// mediation effects multiply the declared stages, with a first-order
// delta-method test for the product.
inline TargetMetrics target_metrics(const FitResult& fit, const TargetEffect& target,
                                    double truth) {
    std::map<Edge, double> gradient;
    double estimate = 0.0;

    if (target.kind == TargetEffect::Kind::total) {
        auto paths = directed_paths(fit.graph, target.cause, target.outcome);
        for (const auto& path : paths) {
            double product = 1.0;
            for (std::size_t i = 0; i + 1 < path.size(); ++i)
                product *= fit.estimates.at({path[i], path[i + 1]});
            estimate += product;
            for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                Edge e{path[i], path[i + 1]};
                double others = 1.0;
                for (std::size_t j = 0; j + 1 < path.size(); ++j)
                    if (j != i) others *= fit.estimates.at({path[j], path[j + 1]});
                gradient[e] += others;
            }
        }
    } else {
        std::vector<std::string> chain{target.cause};
        chain.insert(chain.end(), target.mediators.begin(), target.mediators.end());
        chain.push_back(target.outcome);
        std::vector<Edge> stages;
        for (std::size_t i = 0; i + 1 < chain.size(); ++i)
            stages.push_back({chain[i], chain[i + 1]});

        double product = 1.0;
        for (const auto& e : stages) {
            auto it = fit.estimates.find(e);
            if (it == fit.estimates.end())
                throw Error(Errc::missing_edge, "fitted model lacks edge " + e.first +
                                                    " -> " + e.second);
            product *= it->second;
        }
        estimate = product;
        for (std::size_t i = 0; i < stages.size(); ++i) {
            double others = 1.0;
            for (std::size_t j = 0; j < stages.size(); ++j)
                if (j != i) others *= fit.estimates.at(stages[j]);
            gradient[stages[i]] += others;
        }
        if (target.partial) {
            Edge direct{target.cause, target.outcome};
            auto it = fit.estimates.find(direct);
            if (it == fit.estimates.end())
                throw Error(Errc::missing_edge, "fitted model lacks edge " + direct.first +
                                                    " -> " + direct.second);
            estimate += it->second;
            gradient[direct] += 1.0;
        }
    }

    TargetMetrics out;
    out.estimate = estimate;
    out.abs_error = std::fabs(estimate - truth);
    double var = detail::delta_variance(fit, gradient);
    if (var > 0.0)
        out.p_value = detail::two_sided_p(estimate / std::sqrt(var));
    else
        out.p_value = estimate == 0.0 ? 1.0 : 0.0;
    return out;
}

inline std::string fit_report(const FitResult& fit) {
    std::string out;
    out += "n = " + std::to_string(fit.n) + "\n";
    out += "chi2 = " + detail::format_number(fit.chi2) + "\n";
    out += "df = " + std::to_string(fit.df) + "\n";
    out += "cfi = " + detail::format_number(fit.cfi) + "\n";
    out += "rmsea = " + detail::format_number(fit.rmsea) + "\n";
    for (const auto& [edge, est] : fit.estimates) {
        std::string key = edge.first + " -> " + edge.second;
        out += "estimate " + key + " = " + detail::format_number(est) + "\n";
        out += "se " + key + " = " + detail::format_number(fit.std_errors.at(edge)) + "\n";
        out += "p " + key + " = " + detail::format_number(fit.p_values.at(edge)) + "\n";
    }
    return out;
}

}  // namespace markovprune
