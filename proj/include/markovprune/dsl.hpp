#pragma once

// The .dgp model language. Line-oriented, '#' starts a comment, statements:
//
//   latent U V
//   A -> B          A <-> B
//   coef A -> B = 0.5
//   noise A = 1.5
//   target total(X, Y)
//   target mediation(X, Y via M1, M2, partial)
//
// Nodes are declared by appearing in a latent statement or as an edge
// endpoint, in order of first appearance. parse() never throws on bad input:
// it returns either a model or a list of line/column diagnostics. serialize()
// emits a canonical form whose re-parse is structurally identical.

#include <charconv>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "markovprune/graph.hpp"

namespace markovprune {

struct TargetEffect {
    enum class Kind { total, mediation };
    Kind kind = Kind::total;
    std::string cause;
    std::string outcome;
    std::vector<std::string> mediators;  // empty unless kind == mediation
    bool partial = false;                // mediation only

    bool operator==(const TargetEffect&) const = default;

    std::string describe() const {
        std::string s = kind == Kind::total ? "total(" : "mediation(";
        s += cause + ", " + outcome;
        if (kind == Kind::mediation) {
            s += " via ";
            for (std::size_t i = 0; i < mediators.size(); ++i)
                s += (i ? ", " : "") + mediators[i];
            if (partial) s += ", partial";
        }
        return s + ")";
    }
};

struct ModelFile {
    CausalGraph graph;
    std::map<Edge, double> coefficients;      // keyed by declared directed edges
    std::map<std::string, double> noise_sd;   // strictly positive
    std::vector<TargetEffect> targets;

    bool operator==(const ModelFile& o) const {
        return graph == o.graph && coefficients == o.coefficients &&
               noise_sd == o.noise_sd && targets == o.targets;
    }
};

struct Diagnostic {
    int line = 0;  // 1-based; 0 = whole file
    int col = 0;   // 1-based
    Errc code = Errc::syntax;
    std::string message;
};

struct ParseResult {
    std::optional<ModelFile> model;
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return model.has_value(); }
};

namespace detail {

inline bool reserved_word(const std::string& s) {
    static const std::set<std::string> words{"latent", "coef",  "noise",  "target",
                                             "total",  "mediation", "via", "partial"};
    return words.count(s) != 0;
}

struct Token {
    enum class Kind { ident, number, arrow, biarrow, equals, lparen, rparen, comma, junk };
    Kind kind;
    std::string text;
    int col;
    double value = 0.0;
};

inline bool tokenize_line(const std::string& line, int line_no,
                          std::vector<Token>& out, std::vector<Diagnostic>& diags) {
    out.clear();
    std::size_t i = 0;
    auto n = line.size();
    bool ok = true;
    while (i < n) {
        char c = line[i];
        if (c == '#') break;
        if (c == ' ' || c == '\t') { ++i; continue; }
        int col = static_cast<int>(i) + 1;
        if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_') {
            std::size_t j = i + 1;
            while (j < n && ((line[j] >= 'A' && line[j] <= 'Z') ||
                             (line[j] >= 'a' && line[j] <= 'z') ||
                             (line[j] >= '0' && line[j] <= '9') || line[j] == '_'))
                ++j;
            out.push_back({Token::Kind::ident, line.substr(i, j - i), col});
            i = j;
        } else if (c == '<') {
            if (i + 2 < n && line[i + 1] == '-' && line[i + 2] == '>') {
                out.push_back({Token::Kind::biarrow, "<->", col});
                i += 3;
            } else {
                diags.push_back({line_no, col, Errc::syntax, "expected '<->'"});
                ok = false;
                break;
            }
        } else if (c == '-' && i + 1 < n && line[i + 1] == '>') {
            out.push_back({Token::Kind::arrow, "->", col});
            i += 2;
        } else if (c == '=' ) {
            out.push_back({Token::Kind::equals, "=", col});
            ++i;
        } else if (c == '(') {
            out.push_back({Token::Kind::lparen, "(", col});
            ++i;
        } else if (c == ')') {
            out.push_back({Token::Kind::rparen, ")", col});
            ++i;
        } else if (c == ',') {
            out.push_back({Token::Kind::comma, ",", col});
            ++i;
        } else if ((c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+') {
            std::size_t j = i;
            if (line[j] == '-' || line[j] == '+') ++j;
            std::size_t digits_start = j;
            while (j < n && ((line[j] >= '0' && line[j] <= '9') || line[j] == '.')) ++j;
            if (j < n && (line[j] == 'e' || line[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < n && (line[k] == '-' || line[k] == '+')) ++k;
                std::size_t exp_start = k;
                while (k < n && line[k] >= '0' && line[k] <= '9') ++k;
                if (k > exp_start) j = k;
            }
            std::string text = line.substr(i, j - i);
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
            if (j == digits_start || ec != std::errc{} || ptr != text.data() + text.size()) {
                diags.push_back({line_no, col, Errc::syntax, "malformed number '" + text + "'"});
                ok = false;
                break;
            }
            out.push_back({Token::Kind::number, text, col, value});
            i = j;
        } else {
            diags.push_back({line_no, col, Errc::syntax,
                             std::string("unexpected character '") + c + "'"});
            ok = false;
            break;
        }
    }
    return ok;
}

}  // namespace detail

inline ParseResult parse(const std::string& text) {
    using detail::Token;
    ParseResult result;
    auto& diags = result.diagnostics;

    ModelFile model;
    struct PendingCoef { Edge edge; double value; int line; int col; };
    struct PendingNoise { std::string node; double value; int line; int col; };
    struct PendingTarget { TargetEffect target; int line; int col; };
    std::vector<PendingCoef> coefs;
    std::vector<PendingNoise> noises;
    std::vector<PendingTarget> targets;

    // Pass 1: line-by-line syntax + graph construction.
    std::vector<std::string> lines;
    {
        std::string cur;
        for (char c : text) {
            if (c == '\n') {
                if (!cur.empty() && cur.back() == '\r') cur.pop_back();
                lines.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty() && cur.back() == '\r') cur.pop_back();
        lines.push_back(cur);
    }

    std::vector<Token> toks;
    for (int ln = 1; ln <= static_cast<int>(lines.size()); ++ln) {
        if (!detail::tokenize_line(lines[ln - 1], ln, toks, diags)) continue;
        if (toks.empty()) continue;

        std::size_t pos = 0;
        auto at_end = [&] { return pos >= toks.size(); };
        auto peek_kind = [&] { return at_end() ? Token::Kind::junk : toks[pos].kind; };
        auto err = [&](int col, Errc code, const std::string& msg) {
            diags.push_back({ln, col, code, msg});
        };
        auto err_here = [&](Errc code, const std::string& msg) {
            int col = at_end() ? static_cast<int>(lines[ln - 1].size()) + 1 : toks[pos].col;
            err(col, code, msg);
        };
        auto take_node_name = [&](std::string& out_name) {
            if (peek_kind() != Token::Kind::ident) {
                err_here(Errc::syntax, "expected a node name");
                return false;
            }
            if (detail::reserved_word(toks[pos].text)) {
                err_here(Errc::syntax, "'" + toks[pos].text + "' is a reserved word");
                return false;
            }
            out_name = toks[pos].text;
            ++pos;
            return true;
        };
        auto expect = [&](Token::Kind k, const char* what) {
            if (peek_kind() != k) {
                err_here(Errc::syntax, std::string("expected ") + what);
                return false;
            }
            ++pos;
            return true;
        };

        if (toks[0].kind != Token::Kind::ident) {
            err(toks[0].col, Errc::syntax, "statement must start with a keyword or node name");
            continue;
        }
        const std::string& head = toks[0].text;

        if (head == "latent") {
            ++pos;
            if (at_end()) {
                err_here(Errc::syntax, "expected node name after 'latent'");
                continue;
            }
            bool line_ok = true;
            while (!at_end() && line_ok) {
                std::string name;
                line_ok = take_node_name(name);
                if (line_ok) model.graph.add_node(name, /*latent=*/true);
            }
        } else if (head == "coef") {
            ++pos;
            std::string tail, headn;
            if (!take_node_name(tail)) continue;
            if (!expect(Token::Kind::arrow, "'->'")) continue;
            if (!take_node_name(headn)) continue;
            if (!expect(Token::Kind::equals, "'='")) continue;
            if (peek_kind() != Token::Kind::number) {
                err_here(Errc::syntax, "expected a number");
                continue;
            }
            double value = toks[pos].value;
            int col = toks[pos].col;
            ++pos;
            if (!at_end()) { err_here(Errc::syntax, "unexpected trailing tokens"); continue; }
            coefs.push_back({{tail, headn}, value, ln, col});
        } else if (head == "noise") {
            ++pos;
            std::string node;
            if (!take_node_name(node)) continue;
            if (!expect(Token::Kind::equals, "'='")) continue;
            if (peek_kind() != Token::Kind::number) {
                err_here(Errc::syntax, "expected a number");
                continue;
            }
            double value = toks[pos].value;
            int col = toks[pos].col;
            ++pos;
            if (!at_end()) { err_here(Errc::syntax, "unexpected trailing tokens"); continue; }
            noises.push_back({node, value, ln, col});
        } else if (head == "target") {
            ++pos;
            if (peek_kind() != Token::Kind::ident) {
                err_here(Errc::syntax, "expected 'total' or 'mediation'");
                continue;
            }
            std::string kind = toks[pos].text;
            int kind_col = toks[pos].col;
            ++pos;
            TargetEffect t;
            if (kind == "total") {
                t.kind = TargetEffect::Kind::total;
                if (!expect(Token::Kind::lparen, "'('")) continue;
                if (!take_node_name(t.cause)) continue;
                if (!expect(Token::Kind::comma, "','")) continue;
                if (!take_node_name(t.outcome)) continue;
                if (!expect(Token::Kind::rparen, "')'")) continue;
            } else if (kind == "mediation") {
                t.kind = TargetEffect::Kind::mediation;
                if (!expect(Token::Kind::lparen, "'('")) continue;
                if (!take_node_name(t.cause)) continue;
                if (!expect(Token::Kind::comma, "','")) continue;
                if (!take_node_name(t.outcome)) continue;
                if (peek_kind() != Token::Kind::ident || toks[pos].text != "via") {
                    err_here(Errc::syntax, "expected 'via'");
                    continue;
                }
                ++pos;
                std::string med;
                if (!take_node_name(med)) continue;
                t.mediators.push_back(med);
                bool bad = false;
                while (peek_kind() == Token::Kind::comma) {
                    ++pos;
                    if (peek_kind() == Token::Kind::ident && toks[pos].text == "partial") {
                        t.partial = true;
                        ++pos;
                        break;
                    }
                    if (!take_node_name(med)) { bad = true; break; }
                    t.mediators.push_back(med);
                }
                if (bad) continue;
                if (!expect(Token::Kind::rparen, "')'")) continue;
            } else {
                err(kind_col, Errc::syntax, "expected 'total' or 'mediation'");
                continue;
            }
            if (!at_end()) { err_here(Errc::syntax, "unexpected trailing tokens"); continue; }
            targets.push_back({t, ln, toks[0].col});
        } else {
            // edge statement: ident -> ident  |  ident <-> ident
            std::string a;
            if (!take_node_name(a)) continue;
            bool bidirected;
            if (peek_kind() == Token::Kind::arrow) {
                bidirected = false;
            } else if (peek_kind() == Token::Kind::biarrow) {
                bidirected = true;
            } else {
                err_here(Errc::syntax, "expected '->' or '<->'");
                continue;
            }
            int op_col = toks[pos].col;
            ++pos;
            std::string b;
            if (!take_node_name(b)) continue;
            if (!at_end()) { err_here(Errc::syntax, "unexpected trailing tokens"); continue; }

            model.graph.add_node(a);
            model.graph.add_node(b);
            if (a == b) {
                err(op_col, Errc::self_loop, "self-loop on '" + a + "'");
                continue;
            }
            if (bidirected) {
                if (model.graph.has_bidirected_edge(a, b)) {
                    err(op_col, Errc::duplicate_edge, "duplicate edge " + a + " <-> " + b);
                    continue;
                }
                model.graph.add_bidirected_edge(a, b);
            } else {
                if (model.graph.has_directed_edge(a, b)) {
                    err(op_col, Errc::duplicate_edge, "duplicate edge " + a + " -> " + b);
                    continue;
                }
                model.graph.add_directed_edge(a, b);
            }
        }
    }

    // Pass 2: semantic checks against the finished graph.
    for (const auto& c : coefs) {
        if (!model.graph.has_directed_edge(c.edge.first, c.edge.second)) {
            diags.push_back({c.line, c.col, Errc::semantic,
                             "coefficient on missing edge " + c.edge.first + " -> " +
                                 c.edge.second});
            continue;
        }
        if (!model.coefficients.emplace(c.edge, c.value).second)
            diags.push_back({c.line, c.col, Errc::semantic,
                             "duplicate coefficient for " + c.edge.first + " -> " +
                                 c.edge.second});
    }
    for (const auto& nz : noises) {
        if (!model.graph.has_node(nz.node)) {
            diags.push_back({nz.line, nz.col, Errc::unknown_node,
                             "unknown node '" + nz.node + "'"});
            continue;
        }
        if (!(nz.value > 0.0)) {
            diags.push_back({nz.line, nz.col, Errc::semantic,
                             "noise sd must be strictly positive"});
            continue;
        }
        if (!model.noise_sd.emplace(nz.node, nz.value).second)
            diags.push_back({nz.line, nz.col, Errc::semantic,
                             "duplicate noise for '" + nz.node + "'"});
    }
    for (const auto& pt : targets) {
        const auto& t = pt.target;
        bool ok = true;
        std::vector<std::string> mentioned{t.cause, t.outcome};
        mentioned.insert(mentioned.end(), t.mediators.begin(), t.mediators.end());
        for (const auto& name : mentioned) {
            if (!model.graph.has_node(name)) {
                diags.push_back({pt.line, pt.col, Errc::unknown_node,
                                 "unknown node '" + name + "'"});
                ok = false;
            } else if (model.graph.is_latent(name)) {
                diags.push_back({pt.line, pt.col, Errc::semantic,
                                 "target references latent node '" + name + "'"});
                ok = false;
            }
        }
        if (ok && t.cause == t.outcome) {
            diags.push_back({pt.line, pt.col, Errc::semantic,
                             "target cause and outcome must differ"});
            ok = false;
        }
        if (ok) {
            std::set<std::string> meds(t.mediators.begin(), t.mediators.end());
            if (meds.size() != t.mediators.size() || meds.count(t.cause) ||
                meds.count(t.outcome)) {
                diags.push_back({pt.line, pt.col, Errc::semantic,
                                 "mediators must be distinct and exclude cause/outcome"});
                ok = false;
            }
        }
        if (ok) model.targets.push_back(t);
    }

    for (const auto& v : validate(model.graph)) {
        Errc code = v.kind == ViolationKind::CycleDetected ? Errc::cycle : Errc::semantic;
        diags.push_back({0, 0, code, v.detail});
    }

    if (diags.empty()) result.model = std::move(model);
    return result;
}

inline ModelFile parse_or_throw(const std::string& text) {
    auto result = parse(text);
    if (result.ok()) return std::move(*result.model);
    const auto& d = result.diagnostics.front();
    std::string where = d.line > 0 ? " (line " + std::to_string(d.line) + ")" : "";
    throw Error(d.code, d.message + where);
}

namespace detail {

inline std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

// Topological order with lexicographic tie-break: intrinsic to the graph
// structure, so the canonical text does not depend on declaration order.
inline std::vector<std::string> canonical_order(const CausalGraph& g) {
    auto adj = compile(g);
    int n = adj.n;
    std::vector<int> indegree(n, 0);
    for (int v = 0; v < n; ++v) indegree[v] = static_cast<int>(adj.parents[v].size());
    std::vector<bool> emitted(n, false);
    std::vector<std::string> order;
    order.reserve(n);
    for (int step = 0; step < n; ++step) {
        int next = -1;
        for (int v = 0; v < n; ++v) {
            if (emitted[v] || indegree[v] != 0) continue;
            if (next < 0 || g.nodes()[v] < g.nodes()[next]) next = v;
        }
        if (next < 0) throw Error(Errc::cycle, "cycle among directed edges");
        emitted[next] = true;
        order.push_back(g.nodes()[next]);
        for (int c : adj.children[next]) --indegree[c];
    }
    return order;
}

}  // namespace detail

// Canonical form: latent declarations, edges, coefficients, noise, targets;
// edges sorted by topological position of tail then head, bidirected edges
// oriented with the topologically earlier endpoint first.
inline std::string serialize(const ModelFile& m) {
    detail::require_valid(m.graph);
    auto topo = detail::canonical_order(m.graph);
    std::map<std::string, int> pos;
    for (int i = 0; i < static_cast<int>(topo.size()); ++i) pos[topo[i]] = i;

    std::string out;
    for (const auto& name : topo)
        if (m.graph.is_latent(name)) out += "latent " + name + "\n";

    struct Line { int t; int h; int bi; std::string text; };
    std::vector<Line> edges;
    for (const auto& [t, h] : m.graph.directed_edges())
        edges.push_back({pos[t], pos[h], 0, t + " -> " + h});
    for (const auto& [a, b] : m.graph.bidirected_edges()) {
        const std::string& first = pos[a] <= pos[b] ? a : b;
        const std::string& second = pos[a] <= pos[b] ? b : a;
        edges.push_back({pos[first], pos[second], 1, first + " <-> " + second});
    }
    std::sort(edges.begin(), edges.end(), [](const Line& x, const Line& y) {
        return std::tie(x.t, x.h, x.bi) < std::tie(y.t, y.h, y.bi);
    });
    for (const auto& e : edges) out += e.text + "\n";

    std::vector<std::pair<std::pair<int, int>, std::string>> coef_lines;
    for (const auto& [edge, value] : m.coefficients)
        coef_lines.push_back({{pos.at(edge.first), pos.at(edge.second)},
                              "coef " + edge.first + " -> " + edge.second + " = " +
                                  detail::format_number(value)});
    std::sort(coef_lines.begin(), coef_lines.end());
    for (const auto& [_, text] : coef_lines) out += text + "\n";

    std::vector<std::pair<int, std::string>> noise_lines;
    for (const auto& [node, value] : m.noise_sd)
        noise_lines.push_back({pos.at(node),
                               "noise " + node + " = " + detail::format_number(value)});
    std::sort(noise_lines.begin(), noise_lines.end());
    for (const auto& [_, text] : noise_lines) out += text + "\n";

    for (const auto& t : m.targets) out += "target " + t.describe() + "\n";
    return out;
}

}  // namespace markovprune
