#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "model.hpp"

namespace cdpta {

struct SourceSpan {
  std::size_t line = 1;    // 1-based
  std::size_t column = 1;  // 1-based
  std::size_t begin = 0;   // byte offsets, begin <= end
  std::size_t end = 0;
};

enum class ParseErrorKind { syntax, nonlinear_expr, unknown_ident, duplicate, bad_rational };

struct ParseError {
  SourceSpan span;
  ParseErrorKind kind = ParseErrorKind::syntax;
  std::string message;
};

inline std::string to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::syntax: return "SYNTAX";
    case ParseErrorKind::nonlinear_expr: return "NONLINEAR_EXPR";
    case ParseErrorKind::unknown_ident: return "UNKNOWN_IDENT";
    case ParseErrorKind::duplicate: return "DUPLICATE";
    case ParseErrorKind::bad_rational: return "BAD_RATIONAL";
  }
  return "SYNTAX";
}

struct ParseResult {
  std::optional<Cdpta> model;  // set iff errors empty
  std::vector<ParseError> errors;
};

namespace dsl_detail {

enum class Tok {
  ident,
  number,
  lbrace,
  rbrace,
  lparen,
  rparen,
  semi,
  andand,
  lt,
  le,
  gt,
  ge,
  plus,
  minus,
  star,
  slash,
  eof
};

struct Token {
  Tok kind = Tok::eof;
  std::string text;
  SourceSpan span;
};

inline std::vector<Token> lex(std::string_view src, std::vector<ParseError>& errors) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto make_span = [&](std::size_t b, std::size_t e, std::size_t l, std::size_t c) {
    return SourceSpan{l, c, b, e};
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      ++col;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    std::size_t b = i, l = line, co = col;
    auto push = [&](Tok k, std::size_t len) {
      out.push_back({k, std::string(src.substr(b, len)), make_span(b, b + len, l, co)});
      i += len;
      col += len;
    };
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      push(Tok::ident, j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      push(Tok::number, j - i);
      continue;
    }
    switch (c) {
      case '{': push(Tok::lbrace, 1); continue;
      case '}': push(Tok::rbrace, 1); continue;
      case '(': push(Tok::lparen, 1); continue;
      case ')': push(Tok::rparen, 1); continue;
      case ';': push(Tok::semi, 1); continue;
      case '+': push(Tok::plus, 1); continue;
      case '-': push(Tok::minus, 1); continue;
      case '*': push(Tok::star, 1); continue;
      case '/': push(Tok::slash, 1); continue;
      case '&':
        if (i + 1 < src.size() && src[i + 1] == '&') {
          push(Tok::andand, 2);
          continue;
        }
        break;
      case '<':
        if (i + 1 < src.size() && src[i + 1] == '=') {
          push(Tok::le, 2);
        } else {
          push(Tok::lt, 1);
        }
        continue;
      case '>':
        if (i + 1 < src.size() && src[i + 1] == '=') {
          push(Tok::ge, 2);
        } else {
          push(Tok::gt, 1);
        }
        continue;
      default: break;
    }
    errors.push_back({make_span(b, b + 1, l, co), ParseErrorKind::syntax,
                      std::string("unexpected character '") + c + "'"});
    ++i;
    ++col;
  }
  out.push_back({Tok::eof, "", make_span(src.size(), src.size(), line, col)});
  return out;
}

/// Linear polynomial over x with exact rational coefficients.
struct Lin {
  Rat c{0};
  Rat d{0};
  bool constant() const { return d == 0; }
};

class Parser {
public:
  Parser(std::string_view src, std::vector<ParseError>& errors)
      : errors_(errors), toks_(lex(src, errors)) {}

  Cdpta parse_model() {
    Cdpta m;
    std::vector<std::pair<std::string, SourceSpan>> initials;
    while (peek().kind != Tok::eof) {
      if (at_keyword("location")) {
        parse_location(m, initials);
      } else if (at_keyword("edge")) {
        parse_edge(m);
      } else {
        error(ParseErrorKind::syntax, peek().span, "expected 'location' or 'edge'");
        skip_to_item();
      }
    }
    // resolution pass: names, duplicates, exactly one initial
    for (const auto& e : m.edges) {
      if (!m.locations.count(e.source))
        error(ParseErrorKind::unknown_ident, edge_spans_[e.id],
              "edge " + e.id + " leaves undeclared location " + e.source);
      for (const auto& o : e.outcomes)
        if (!m.locations.count(o.target))
          error(ParseErrorKind::unknown_ident, edge_spans_[e.id],
                "edge " + e.id + " targets undeclared location " + o.target);
    }
    if (initials.empty()) {
      error(ParseErrorKind::syntax, toks_.back().span, "no location is marked initial");
    } else {
      m.initial = initials.front().first;
      for (std::size_t i = 1; i < initials.size(); ++i)
        error(ParseErrorKind::duplicate, initials[i].second, "more than one initial location");
    }
    std::sort(m.edges.begin(), m.edges.end(),
              [](const ProbEdge& a, const ProbEdge& b) { return a.id < b.id; });
    return m;
  }

private:
  std::vector<ParseError>& errors_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::map<std::string, SourceSpan> edge_spans_;

  const Token& peek(std::size_t off = 0) const {
    return toks_[std::min(pos_ + off, toks_.size() - 1)];
  }
  const Token& advance() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool at_keyword(std::string_view kw) const {
    return peek().kind == Tok::ident && peek().text == kw;
  }
  void error(ParseErrorKind kind, SourceSpan span, std::string msg) {
    errors_.push_back({span, kind, std::move(msg)});
  }

  struct Bail {};  // unwinds to the item level for recovery

  void skip_to_item() {
    int depth = 0;
    while (peek().kind != Tok::eof) {
      if (peek().kind == Tok::lbrace) ++depth;
      if (peek().kind == Tok::rbrace && depth > 0) --depth;
      if (depth == 0 && (at_keyword("location") || at_keyword("edge"))) return;
      advance();
    }
  }

  Token expect(Tok kind, const char* what) {
    if (peek().kind != kind) {
      error(ParseErrorKind::syntax, peek().span,
            std::string("expected ") + what + ", found '" + peek().text + "'");
      throw Bail{};
    }
    return advance();
  }

  Token expect_keyword(const char* kw) {
    if (!at_keyword(kw)) {
      error(ParseErrorKind::syntax, peek().span,
            std::string("expected '") + kw + "', found '" + peek().text + "'");
      throw Bail{};
    }
    return advance();
  }

  unsigned long long expect_nat() {
    Token t = expect(Tok::number, "a natural number");
    try {
      return std::stoull(t.text);
    } catch (const std::out_of_range&) {
      error(ParseErrorKind::bad_rational, t.span, "constant " + t.text + " is out of range");
      throw Bail{};
    }
  }

  void parse_location(Cdpta& m, std::vector<std::pair<std::string, SourceSpan>>& initials) {
    try {
      advance();  // location
      Token name = expect(Tok::ident, "a location name");
      if (m.locations.count(name.text))
        error(ParseErrorKind::duplicate, name.span, "duplicate location " + name.text);
      expect(Tok::lbrace, "'{'");
      expect_keyword("invariant");
      Token x = expect(Tok::ident, "'x'");
      if (x.text != "x") error(ParseErrorKind::syntax, x.span, "the only clock is 'x'");
      bool strict;
      if (peek().kind == Tok::lt) {
        strict = true;
        advance();
      } else if (peek().kind == Tok::le) {
        strict = false;
        advance();
      } else {
        error(ParseErrorKind::syntax, peek().span, "expected '<' or '<='");
        throw Bail{};
      }
      unsigned long long bound = expect_nat();
      expect(Tok::semi, "';'");
      if (at_keyword("initial")) {
        Token ini = advance();
        expect(Tok::semi, "';'");
        initials.push_back({name.text, ini.span});
      }
      expect(Tok::rbrace, "'}'");
      m.locations[name.text] = InvariantSpec{strict, bound};
    } catch (Bail) {
      skip_to_item();
    }
  }

  ClockConstraint parse_conj() {
    ClockConstraint g;
    if (at_keyword("true")) {
      advance();
      return g;
    }
    for (;;) {
      Token x = expect(Tok::ident, "'x'");
      if (x.text != "x") error(ParseErrorKind::syntax, x.span, "the only clock is 'x'");
      Rel rel;
      switch (peek().kind) {
        case Tok::lt: rel = Rel::lt; break;
        case Tok::le: rel = Rel::le; break;
        case Tok::gt: rel = Rel::gt; break;
        case Tok::ge: rel = Rel::ge; break;
        default:
          error(ParseErrorKind::syntax, peek().span, "expected a comparison operator");
          throw Bail{};
      }
      advance();
      g.atoms.push_back({rel, expect_nat()});
      if (peek().kind != Tok::andand) break;
      advance();
    }
    return g;
  }

  Lin parse_expr() {
    Lin acc = parse_term();
    while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
      bool minus = advance().kind == Tok::minus;
      Lin rhs = parse_term();
      if (minus) {
        acc.c -= rhs.c;
        acc.d -= rhs.d;
      } else {
        acc.c += rhs.c;
        acc.d += rhs.d;
      }
    }
    return acc;
  }

  Lin parse_term() {
    Lin acc = parse_factor();
    for (;;) {
      if (peek().kind == Tok::star) {
        Token op = advance();
        Lin rhs = parse_factor();
        if (!acc.constant() && !rhs.constant()) {
          error(ParseErrorKind::nonlinear_expr, op.span,
                "product of two clock-dependent terms is not linear");
          throw Bail{};
        }
        if (acc.constant()) {
          acc = Lin{acc.c * rhs.c, acc.c * rhs.d};
        } else {
          acc = Lin{acc.c * rhs.c, acc.d * rhs.c};
        }
      } else if (peek().kind == Tok::slash) {
        Token op = advance();
        Lin rhs = parse_factor();
        if (!rhs.constant()) {
          error(ParseErrorKind::nonlinear_expr, op.span, "division by a clock-dependent term");
          throw Bail{};
        }
        if (rhs.c == 0) {
          error(ParseErrorKind::bad_rational, op.span, "division by zero");
          throw Bail{};
        }
        acc.c /= rhs.c;
        acc.d /= rhs.c;
      } else {
        break;
      }
    }
    return acc;
  }

  Lin parse_factor() {
    switch (peek().kind) {
      case Tok::minus: {
        advance();
        Lin v = parse_factor();
        return Lin{-v.c, -v.d};
      }
      case Tok::plus: advance(); return parse_factor();
      case Tok::number: {
        Token t = advance();
        return Lin{Rat(BigInt(t.text)), Rat(0)};
      }
      case Tok::ident:
        if (peek().text == "x") {
          advance();
          return Lin{Rat(0), Rat(1)};
        }
        error(ParseErrorKind::syntax, peek().span,
              "unexpected identifier '" + peek().text + "' in expression");
        throw Bail{};
      case Tok::lparen: {
        advance();
        Lin v = parse_expr();
        expect(Tok::rparen, "')'");
        return v;
      }
      default:
        error(ParseErrorKind::syntax, peek().span, "expected an expression");
        throw Bail{};
    }
  }

  void parse_edge(Cdpta& m) {
    try {
      advance();  // edge
      Token name = expect(Tok::ident, "an edge name");
      for (const auto& e : m.edges)
        if (e.id == name.text)
          error(ParseErrorKind::duplicate, name.span, "duplicate edge " + name.text);
      edge_spans_[name.text] = name.span;
      expect_keyword("from");
      Token src = expect(Tok::ident, "a location name");
      expect_keyword("guard");
      ClockConstraint guard = parse_conj();
      expect(Tok::lbrace, "'{'");
      ProbEdge e{name.text, src.text, std::move(guard), {}};
      std::set<std::pair<bool, std::string>> seen;
      while (!(peek().kind == Tok::rbrace || peek().kind == Tok::eof)) {
        expect_keyword("to");
        Token tgt = expect(Tok::ident, "a location name");
        bool reset = false;
        if (at_keyword("reset")) {
          advance();
          reset = true;
        }
        expect_keyword("prob");
        Lin expr = parse_expr();
        expect(Tok::semi, "';'");
        if (!seen.insert({reset, tgt.text}).second)
          error(ParseErrorKind::duplicate, tgt.span,
                "duplicate outcome to " + tgt.text + " in edge " + e.id);
        else
          e.outcomes.push_back({reset, tgt.text, AffineExpr{expr.c, expr.d}});
      }
      expect(Tok::rbrace, "'}'");
      if (e.outcomes.empty())
        error(ParseErrorKind::syntax, name.span, "edge " + e.id + " has no outcomes");
      else
        m.edges.push_back(std::move(e));
    } catch (Bail) {
      skip_to_item();
    }
  }
};

}  // namespace dsl_detail

/// Parses the textual model format; either a structurally well-formed (still
/// unvalidated) Cdpta or the full list of errors.
inline ParseResult parse(std::string_view text) {
  ParseResult r;
  dsl_detail::Parser p(text, r.errors);
  Cdpta m = p.parse_model();
  if (r.errors.empty()) r.model = std::move(m);
  return r;
}

inline std::string render_affine(const AffineExpr& e) {
  if (e.d == 0) return rat_to_string(e.c);
  std::string dx = rat_to_string(e.d < 0 ? Rat(-e.d) : e.d) + "*x";
  if (e.c == 0) return (e.d < 0 ? "-" : "") + dx;
  return rat_to_string(e.c) + (e.d < 0 ? " - " : " + ") + dx;
}

inline std::string render_guard(const ClockConstraint& g) {
  if (g.atoms.empty()) return "true";
  std::string s;
  for (const auto& a : g.atoms) {
    if (!s.empty()) s += " && ";
    s += "x ";
    switch (a.rel) {
      case Rel::lt: s += "<"; break;
      case Rel::le: s += "<="; break;
      case Rel::ge: s += ">="; break;
      case Rel::gt: s += ">"; break;
    }
    s += " " + std::to_string(a.bound);
  }
  return s;
}

/// Canonical text form; parse(render(m)) reproduces m structurally.
inline std::string render(const Cdpta& m) {
  std::string out;
  for (const auto& [name, inv] : m.locations) {
    out += "location " + name + " {\n";
    out += std::string("  invariant x ") + (inv.strict ? "<" : "<=") + " " +
           std::to_string(inv.bound) + ";\n";
    if (name == m.initial) out += "  initial;\n";
    out += "}\n\n";
  }
  std::vector<const ProbEdge*> edges;
  for (const auto& e : m.edges) edges.push_back(&e);
  std::sort(edges.begin(), edges.end(),
            [](const ProbEdge* a, const ProbEdge* b) { return a->id < b->id; });
  for (const ProbEdge* e : edges) {
    out += "edge " + e->id + " from " + e->source + " guard " + render_guard(e->guard) + " {\n";
    for (const auto& o : e->outcomes)
      out += "  to " + o.target + (o.reset ? " reset" : "") + " prob " + render_affine(o.expr) +
             ";\n";
    out += "}\n\n";
  }
  return out;
}

}  // namespace cdpta
