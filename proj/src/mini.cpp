#include "ssg/mini.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "ssg/util.hpp"

namespace ssg::mini {

namespace {

enum class Tok { Int, Ident, Keyword, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

const std::set<std::string, std::less<>> kKeywords = {"if", "else", "while", "return", "break", "continue"};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (src.substr(i, 2) == "//") {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    const int l = line, cl = col;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::Int, std::string(src.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      std::string word(src.substr(i, j - i));
      out.push_back({kKeywords.contains(word) ? Tok::Keyword : Tok::Ident, word, l, cl});
      advance(j - i);
      continue;
    }
    static constexpr std::string_view two[] = {"<=", ">=", "==", "!=", "&&", "||"};
    bool matched = false;
    for (auto t : two)
      if (src.substr(i, 2) == t) {
        out.push_back({Tok::Punct, std::string(t), l, cl});
        advance(2);
        matched = true;
        break;
      }
    if (matched) continue;
    if (std::string_view("(){};=+-*/%<>!").find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), l, cl});
      advance(1);
      continue;
    }
    throw ParseError(l, cl, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<Stmt> program() {
    std::vector<Stmt> out;
    while (peek().kind != Tok::End) out.push_back(statement());
    return out;
  }

  int count() const { return next_id_; }

 private:
  const Token& peek() const { return toks_[pos_]; }
  bool at(std::string_view text) const {
    return (peek().kind == Tok::Punct || peek().kind == Tok::Keyword) && peek().text == text;
  }
  [[noreturn]] void fail(const std::string& expected) const {
    throw ParseError(peek().line, peek().column, "expected " + expected);
  }
  void expect(std::string_view text) {
    if (!at(text)) fail("'" + std::string(text) + "'");
    ++pos_;
  }

  Stmt statement() {
    Stmt s;
    s.line = peek().line;
    s.id = next_id_++;
    if (at("if")) {
      ++pos_;
      s.kind = StmtKind::If;
      expect("(");
      s.expr = expr();
      expect(")");
      s.body = block();
      if (at("else")) {
        ++pos_;
        s.has_else = true;
        s.else_body = block();
      }
    } else if (at("while")) {
      ++pos_;
      s.kind = StmtKind::While;
      expect("(");
      s.expr = expr();
      expect(")");
      s.body = block();
    } else if (at("return")) {
      ++pos_;
      s.kind = StmtKind::Return;
      if (!at(";")) s.expr = expr();
      expect(";");
    } else if (at("break")) {
      ++pos_;
      s.kind = StmtKind::Break;
      expect(";");
    } else if (at("continue")) {
      ++pos_;
      s.kind = StmtKind::Continue;
      expect(";");
    } else if (peek().kind == Tok::Ident) {
      s.kind = StmtKind::Assign;
      s.target = peek().text;
      ++pos_;
      expect("=");
      s.expr = expr();
      expect(";");
    } else {
      fail("statement");
    }
    return s;
  }

  std::vector<Stmt> block() {
    expect("{");
    std::vector<Stmt> out;
    while (!at("}")) {
      if (peek().kind == Tok::End) fail("'}'");
      out.push_back(statement());
    }
    ++pos_;
    return out;
  }

  Expr binary(std::string op, Expr l, Expr r) {
    Expr e;
    e.kind = ExprKind::Binary;
    e.op = std::move(op);
    e.args.push_back(std::move(l));
    e.args.push_back(std::move(r));
    return e;
  }

  Expr expr() { return logic_or(); }

  Expr logic_or() {
    auto l = logic_and();
    while (at("||")) {
      ++pos_;
      l = binary("||", std::move(l), logic_and());
    }
    return l;
  }
  Expr logic_and() {
    auto l = comparison();
    while (at("&&")) {
      ++pos_;
      l = binary("&&", std::move(l), comparison());
    }
    return l;
  }
  Expr comparison() {
    auto l = additive();
    while (at("<") || at("<=") || at(">") || at(">=") || at("==") || at("!=")) {
      auto op = peek().text;
      ++pos_;
      l = binary(op, std::move(l), additive());
    }
    return l;
  }
  Expr additive() {
    auto l = multiplicative();
    while (at("+") || at("-")) {
      auto op = peek().text;
      ++pos_;
      l = binary(op, std::move(l), multiplicative());
    }
    return l;
  }
  Expr multiplicative() {
    auto l = unary();
    while (at("*") || at("/") || at("%")) {
      auto op = peek().text;
      ++pos_;
      l = binary(op, std::move(l), unary());
    }
    return l;
  }
  Expr unary() {
    if (at("!") || at("-")) {
      Expr e;
      e.kind = ExprKind::Unary;
      e.op = peek().text;
      ++pos_;
      e.args.push_back(unary());
      return e;
    }
    return primary();
  }
  Expr primary() {
    const auto& t = peek();
    if (t.kind == Tok::Int) {
      Expr e;
      e.kind = ExprKind::Int;
      auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), e.value);
      if (ec != std::errc{}) throw ParseError(t.line, t.column, "integer literal in range");
      ++pos_;
      return e;
    }
    if (t.kind == Tok::Ident) {
      Expr e;
      e.kind = ExprKind::Var;
      e.name = t.text;
      ++pos_;
      return e;
    }
    if (at("(")) {
      ++pos_;
      auto e = expr();
      expect(")");
      return e;
    }
    fail("expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int next_id_ = 0;
};

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Int:
    case ExprKind::Var: return 7;
    case ExprKind::Unary: return 6;
    case ExprKind::Binary: break;
  }
  const auto& op = e.op;
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "+" || op == "-") return 4;
  if (op == "*" || op == "/" || op == "%") return 5;
  return 3;
}

void print_stmts(const std::vector<Stmt>& list, int depth, std::string& out);

void print_stmt(const Stmt& s, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  switch (s.kind) {
    case StmtKind::If:
      out += pad + "if (" + print_expr(*s.expr) + ") {\n";
      print_stmts(s.body, depth + 1, out);
      if (s.has_else) {
        out += pad + "} else {\n";
        print_stmts(s.else_body, depth + 1, out);
      }
      out += pad + "}\n";
      break;
    case StmtKind::While:
      out += pad + "while (" + print_expr(*s.expr) + ") {\n";
      print_stmts(s.body, depth + 1, out);
      out += pad + "}\n";
      break;
    default: out += pad + print_simple(s) + "\n";
  }
}

void print_stmts(const std::vector<Stmt>& list, int depth, std::string& out) {
  for (const auto& s : list) print_stmt(s, depth, out);
}

bool same_expr(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.value != b.value || a.name != b.name || a.op != b.op || a.args.size() != b.args.size())
    return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!same_expr(a.args[i], b.args[i])) return false;
  return true;
}

bool same_stmts(const std::vector<Stmt>& a, const std::vector<Stmt>& b);

bool same_stmt(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind || a.id != b.id || a.target != b.target || a.has_else != b.has_else ||
      a.expr.has_value() != b.expr.has_value())
    return false;
  if (a.expr && !same_expr(*a.expr, *b.expr)) return false;
  return same_stmts(a.body, b.body) && same_stmts(a.else_body, b.else_body);
}

bool same_stmts(const std::vector<Stmt>& a, const std::vector<Stmt>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_stmt(a[i], b[i])) return false;
  return true;
}

void collect_uses(const Expr& e, std::vector<std::string>& out) {
  if (e.kind == ExprKind::Var) {
    if (std::find(out.begin(), out.end(), e.name) == out.end()) out.push_back(e.name);
    return;
  }
  for (const auto& a : e.args) collect_uses(a, out);
}

// Random generation ---------------------------------------------------------

class Generator {
 public:
  Generator(std::mt19937_64& rng, const GenOptions& opt) : rng_(rng), opt_(opt) {}

  std::string program() {
    std::string out;
    auto emit_top = [&] {
      auto n = 1 + pick(opt_.max_block_len);
      for (int i = 0; i < n; ++i) out += statement(0, false, false);
    };
    emit_top();
    while (count_loc(out) < opt_.min_loc) emit_top();
    return out;
  }

 private:
  int pick(int n) { return n <= 0 ? 0 : static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  bool chance(int percent) { return pick(100) < percent; }

  const std::string& var() { return opt_.variables[static_cast<std::size_t>(pick(static_cast<int>(opt_.variables.size())))]; }

  std::string expr(int depth) {
    if (depth >= 2 || chance(35)) return chance(50) ? var() : std::to_string(pick(10));
    static const char* ops[] = {"+", "-", "*", "+", "-", "%", "/"};
    std::string op = ops[pick(7)];
    auto l = expr(depth + 1);
    auto r = expr(depth + 1);
    if (op == "/" || op == "%") r = std::to_string(1 + pick(5));
    return "(" + l + " " + op + " " + r + ")";
  }

  std::string condition() {
    static const char* cmps[] = {"<", "<=", ">", ">=", "==", "!="};
    auto c = var() + " " + cmps[pick(6)] + " " + expr(1);
    if (chance(20)) c = "!(" + c + ")";
    if (chance(20)) c += std::string(chance(50) ? " && " : " || ") + var() + " " + cmps[pick(6)] + " " + std::to_string(pick(10));
    return c;
  }

  std::string block(int depth, bool in_loop) {
    std::string out = "{\n";
    auto n = pick(opt_.max_block_len + 1);
    for (int i = 0; i < n; ++i) out += statement(depth + 1, in_loop, true);
    out += std::string(static_cast<std::size_t>(depth) * 2, ' ') + "}";
    return out;
  }

  std::string statement(int depth, bool in_loop, bool nested) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    int roll = pick(100);
    if (depth < opt_.max_depth) {
      if (roll < 18) {
        auto s = pad + "if (" + condition() + ") " + block(depth, in_loop);
        if (chance(50)) s += " else " + block(depth, in_loop);
        return s + "\n";
      }
      if (roll < 30) {
        if (chance(85)) {
          auto counter = "i" + std::to_string(counter_++);
          auto bound = std::to_string(1 + pick(4));
          std::string s = pad + counter + " = 0;\n";
          s += pad + "while (" + counter + " < " + bound + ") {\n";
          s += pad + "  " + counter + " = " + counter + " + 1;\n";
          auto body = block(depth, true);
          s += body.substr(2);  // drop the block's own "{\n"
          return s + "\n";
        }
        return pad + "while (" + condition() + ") " + block(depth, true) + "\n";
      }
    }
    if (in_loop && roll >= 30 && roll < 36) return pad + (chance(50) ? "break;\n" : "continue;\n");
    if (nested && roll >= 36 && roll < 39) return pad + "return " + expr(1) + ";\n";
    return pad + var() + " = " + expr(0) + ";\n";
  }

  std::mt19937_64& rng_;
  const GenOptions& opt_;
  int counter_ = 0;
};

}  // namespace

MiniProgram parse_mini(std::string_view source) {
  Parser p(lex(source));
  MiniProgram prog;
  prog.source = std::string(source);
  prog.body = p.program();
  prog.statement_count = p.count();
  return prog;
}

std::string print_expr(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Int: return std::to_string(e.value);
    case ExprKind::Var: return e.name;
    case ExprKind::Unary: {
      auto inner = print_expr(e.args[0]);
      if (precedence(e.args[0]) < 6) inner = "(" + inner + ")";
      return e.op + inner;
    }
    case ExprKind::Binary: break;
  }
  const int p = precedence(e);
  auto l = print_expr(e.args[0]);
  auto r = print_expr(e.args[1]);
  if (precedence(e.args[0]) < p) l = "(" + l + ")";
  if (precedence(e.args[1]) <= p) r = "(" + r + ")";
  return l + " " + e.op + " " + r;
}

std::string print_simple(const Stmt& s) {
  switch (s.kind) {
    case StmtKind::Assign: return s.target + " = " + print_expr(*s.expr) + ";";
    case StmtKind::Return: return s.expr ? "return " + print_expr(*s.expr) + ";" : std::string("return;");
    case StmtKind::Break: return "break;";
    case StmtKind::Continue: return "continue;";
    case StmtKind::If: return "if (" + print_expr(*s.expr) + ")";
    case StmtKind::While: return "while (" + print_expr(*s.expr) + ")";
  }
  return {};
}

std::string print_program(const MiniProgram& p) {
  std::string out;
  print_stmts(p.body, 0, out);
  return out;
}

bool same_ast(const MiniProgram& a, const MiniProgram& b) { return same_stmts(a.body, b.body); }

std::vector<std::string> expr_uses(const Expr& e) {
  std::vector<std::string> out;
  collect_uses(e, out);
  return out;
}

int count_loc(std::string_view source) {
  int n = 0;
  for (const auto& line : split_lines(source)) {
    auto t = trim(line);
    if (!t.empty() && t.substr(0, 2) != "//") ++n;
  }
  return n;
}

std::string random_program(std::mt19937_64& rng, const GenOptions& opt) { return Generator(rng, opt).program(); }

}  // namespace ssg::mini
