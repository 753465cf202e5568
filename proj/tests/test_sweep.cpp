#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <string>
#include <vector>

#include "markovprune/sweep.hpp"
#include "support/fixtures.hpp"

using namespace markovprune;

namespace {

std::map<std::pair<std::string, std::string>, std::map<int, double>> by_key(
    const std::vector<SweepRow>& rows) {
    std::map<std::pair<std::string, std::string>, std::map<int, double>> out;
    for (const auto& r : rows) out[{r.variant, r.metric}][r.n] = r.mean;
    return out;
}

}  // namespace

TEST_CASE("sweep spec validation") {
    SweepSpec spec;
    spec.model = testfx::load("ex1.dgp");
    spec.n_grid = {5};
    CHECK_THROWS_AS((void)run_sweep(spec), Error);
    spec.n_grid = {50, 50};
    CHECK_THROWS_AS((void)run_sweep(spec), Error);
    spec.n_grid = {50};
    spec.reps = 0;
    CHECK_THROWS_AS((void)run_sweep(spec), Error);

    SweepSpec no_target;
    no_target.model = parse_or_throw("A -> B");
    no_target.n_grid = {50};
    CHECK_THROWS_AS((void)run_sweep(no_target), Error);
}

TEST_CASE("single-rep rows have zero sd and full row coverage") {
    SweepSpec spec;
    spec.model = testfx::load("ex1.dgp");
    spec.n_grid = {50, 100};
    spec.reps = 1;
    spec.seed = 3;
    auto rows = run_sweep(spec);
    CHECK(rows.size() == 2 * 2 * 5);  // n values x variants x metrics
    for (const auto& r : rows) {
        CHECK(r.sd == 0.0);
        CHECK(r.reps == 1);
    }
}

TEST_CASE("sweep output is deterministic and thread-count invariant") {
    SweepSpec spec;
    spec.model = testfx::load("ex2i.dgp");
    spec.n_grid = {50, 100};
    spec.reps = 8;
    spec.seed = 11;
    auto a = run_sweep(spec);
    auto b = run_sweep(spec);
    spec.threads = 3;
    auto c = run_sweep(spec);
    CHECK(sweep_csv(a) == sweep_csv(b));
    CHECK(sweep_csv(a) == sweep_csv(c));
}

TEST_CASE("row order is canonical: n, then variant, then metric") {
    SweepSpec spec;
    spec.model = testfx::load("ex1.dgp");
    spec.n_grid = {50, 100};
    spec.reps = 2;
    auto rows = run_sweep(spec);
    std::vector<std::string> metrics{"cfi", "chi2", "mae", "pvalue", "rmsea"};
    std::size_t i = 0;
    for (int n : {50, 100})
        for (const char* variant : {"full", "reduced"})
            for (const auto& metric : metrics) {
                REQUIRE(i < rows.size());
                CHECK(rows[i].n == n);
                CHECK(rows[i].variant == variant);
                CHECK(rows[i].metric == metric);
                ++i;
            }
    auto csv = sweep_csv(rows);
    CHECK(csv.rfind("n,variant,metric,mean,sd,reps\n", 0) == 0);
}

TEST_CASE("qualitative pattern on the structured-controls fixture") {
    SweepSpec spec;
    spec.model = testfx::load("ex2i.dgp");
    spec.n_grid = {50, 100};
    spec.reps = 60;
    spec.seed = 2;
    spec.threads = 2;
    auto rows = run_sweep(spec);
    auto m = by_key(rows);
    for (int n : {50, 100}) {
        CHECK(m[{"reduced", "chi2"}][n] <= m[{"full", "chi2"}][n]);
        CHECK(m[{"reduced", "rmsea"}][n] <= m[{"full", "rmsea"}][n]);
        CHECK(m[{"reduced", "pvalue"}][n] >= m[{"full", "pvalue"}][n]);
    }
    for (const auto& r : rows) CHECK_FALSE(r.misspecified);  // latent-free fixture
}

TEST_CASE("full-model rows are flagged when projection drops confounding") {
    SweepSpec spec;
    spec.model = testfx::load("ex4.dgp");
    spec.n_grid = {50};
    spec.reps = 3;
    auto rows = run_sweep(spec);
    for (const auto& r : rows)
        CHECK(r.misspecified == (r.variant == "full"));
}

TEST_CASE("variant selection restricts the rows") {
    SweepSpec spec;
    spec.model = testfx::load("ex1.dgp");
    spec.n_grid = {50};
    spec.reps = 2;
    spec.variants = SweepVariant::reduced;
    for (const auto& r : run_sweep(spec)) CHECK(r.variant == "reduced");
    spec.variants = SweepVariant::full;
    for (const auto& r : run_sweep(spec)) CHECK(r.variant == "full");
}

TEST_CASE("both variants are unbiased at large n") {
    SweepSpec spec;
    spec.model = testfx::load("ex2i.dgp");
    spec.n_grid = {20000};
    spec.reps = 30;
    spec.seed = 5;
    spec.threads = 2;
    auto rows = run_sweep(spec);
    // mae mean bounds the estimate bias from above
    auto m = by_key(rows);
    CHECK(m[{"full", "mae"}][20000] < 0.02);
    CHECK(m[{"reduced", "mae"}][20000] < 0.02);
}
