#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "markovprune/dsl.hpp"
#include "markovprune/rng.hpp"
#include "support/fixtures.hpp"
#include "support/random_graphs.hpp"

using namespace markovprune;

TEST_CASE("parse builds a plain chain") {
    auto r = parse("A -> B\nB -> C");
    REQUIRE(r.ok());
    CHECK(r.model->graph.nodes() == std::vector<std::string>{"A", "B", "C"});
    CHECK(r.model->graph.latent_nodes().empty());
    CHECK(r.model->targets.empty());
    CHECK(r.model->coefficients.empty());
}

TEST_CASE("parse handles the unobserved-confounding fixture text") {
    auto r = parse("latent U\nU -> S\nU -> C\nS -> R\nC -> R\ntarget total(S, R)");
    REQUIRE(r.ok());
    const auto& m = *r.model;
    CHECK(m.graph.latent_nodes() == std::vector<std::string>{"U"});
    CHECK(m.graph.directed_edges().size() == 4);
    REQUIRE(m.targets.size() == 1);
    CHECK(m.targets[0].kind == TargetEffect::Kind::total);
    CHECK(m.targets[0].cause == "S");
    CHECK(m.targets[0].outcome == "R");
}

TEST_CASE("duplicate edge is reported at its line") {
    auto r = parse("A -> B\nA -> B");
    REQUIRE_FALSE(r.ok());
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].line == 2);
    CHECK(r.diagnostics[0].code == Errc::duplicate_edge);
}

TEST_CASE("assorted malformed inputs produce located diagnostics") {
    CHECK_FALSE(parse("A -> ").ok());
    CHECK_FALSE(parse("A <- B").ok());
    CHECK_FALSE(parse("coef A -> B = xx").ok());
    CHECK_FALSE(parse("coef A -> B = 0.5").ok());  // coefficient without the edge
    CHECK_FALSE(parse("A -> B\nnoise A = 0").ok());
    CHECK_FALSE(parse("A -> B\nnoise Q = 1").ok());
    CHECK_FALSE(parse("A -> A").ok());
    CHECK_FALSE(parse("A -> B\ntarget total(A, A)").ok());
    CHECK_FALSE(parse("A -> B\ntarget mediation(A, B via A)").ok());
    CHECK_FALSE(parse("latent U\nA -> B\ntarget total(U, B)").ok());
    CHECK_FALSE(parse("A -> B\nB -> A").ok());  // cycle
    CHECK_FALSE(parse("target total(A, B)").ok());
    CHECK_FALSE(parse("A -> latent").ok());  // reserved word as node name
}

TEST_CASE("comments, blank lines, CRLF and tight spacing all parse") {
    auto r = parse("# header\r\n\r\nA->B # inline\r\n\tB ->\tC\r\ncoef A->B=0.25\r\n");
    REQUIRE(r.ok());
    CHECK(r.model->graph.directed_edges().size() == 2);
    CHECK(r.model->coefficients.at({"A", "B"}) == 0.25);
}

TEST_CASE("mediation targets parse with multiple mediators and partial flag") {
    auto r = parse("A -> M1\nM1 -> M2\nM2 -> Y\nA -> Y\n"
                   "target mediation(A, Y via M1, M2, partial)");
    REQUIRE(r.ok());
    REQUIRE(r.model->targets.size() == 1);
    const auto& t = r.model->targets[0];
    CHECK(t.kind == TargetEffect::Kind::mediation);
    CHECK(t.mediators == std::vector<std::string>{"M1", "M2"});
    CHECK(t.partial);
}

TEST_CASE("serializer emits canonical statements") {
    auto m = parse_or_throw("B -> C\nA -> B\ncoef A -> B = 0.5\nnoise C = 2");
    auto text = serialize(m);
    CHECK(text == "A -> B\nB -> C\ncoef A -> B = 0.5\nnoise C = 2\n");
}

TEST_CASE("serializer orders latents first and bidirected edges canonically") {
    auto m = parse_or_throw("S -> R\nlatent U\nU -> S\nC <-> S\nU -> C\nC -> R\n"
                            "target total(S, R)");
    auto text = serialize(m);
    auto skeleton = parse_or_throw(text);
    CHECK(skeleton == m);
    CHECK(text.find("latent U\n") == 0);
}

TEST_CASE("round-trip of every fixture") {
    for (const char* name : {"ex1.dgp", "ex2i.dgp", "ex2ii.dgp", "ex3i.dgp", "ex3ii.dgp",
                             "ex4.dgp", "chain2.dgp"}) {
        auto m = testfx::load(name);
        auto again = parse_or_throw(serialize(m));
        CHECK(again == m);
        // Canonical text is a fixed point.
        CHECK(serialize(again) == serialize(m));
    }
}

TEST_CASE("empty-target model serializes without target lines") {
    auto m = parse_or_throw("A -> B");
    CHECK(serialize(m).find("target") == std::string::npos);
}

TEST_CASE("empty and comment-only inputs are degenerate but well-formed models") {
    auto empty = parse("");
    REQUIRE(empty.ok());
    CHECK(empty.model->graph.node_count() == 0);
    auto comments = parse("# nothing here\n\n   # still nothing\n");
    REQUIRE(comments.ok());
    CHECK(serialize(*comments.model).empty());
}

TEST_CASE("property: parse after serialize is the identity on random models") {
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        auto m = testgen::random_model(rng);
        auto text = serialize(m);
        auto r = parse(text);
        REQUIRE_MESSAGE(r.ok(), "canonical text failed to parse:\n" << text);
        CHECK(*r.model == m);
    }
}

TEST_CASE("fuzz: arbitrary bytes never crash the parser") {
    Rng rng(4242);
    auto canonical = serialize(testfx::load("ex3ii.dgp"));
    for (int trial = 0; trial < 400; ++trial) {
        std::string s;
        if (trial % 2 == 0) {
            auto len = static_cast<std::size_t>(rng.uniform() * 160);
            for (std::size_t i = 0; i < len; ++i)
                s += static_cast<char>(rng.uniform() * 256);
        } else {
            s = canonical;
            auto flips = 1 + static_cast<std::size_t>(rng.uniform() * 8);
            for (std::size_t f = 0; f < flips && !s.empty(); ++f)
                s[static_cast<std::size_t>(rng.uniform() * s.size())] =
                    static_cast<char>(rng.uniform() * 256);
        }
        auto r = parse(s);
        CHECK((r.ok() || !r.diagnostics.empty()));
    }
}
