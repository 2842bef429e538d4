// A small imperative language: integers, variables, if/while, return,
// break and continue. Stand-in for the function bodies a CFG is built from.
//
//   program := stmt*
//   stmt    := IDENT "=" expr ";" | "if" "(" expr ")" block ("else" block)?
//            | "while" "(" expr ")" block | "return" expr? ";"
//            | "break" ";" | "continue" ";"
//   block   := "{" stmt* "}"
//   expr    := || over && over comparisons over + - over * / % over ! unary-
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ssg::mini {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, std::string expected)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + expected),
        line_(line),
        column_(column),
        expected_(std::move(expected)) {}
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& expected() const { return expected_; }

 private:
  int line_;
  int column_;
  std::string expected_;
};

enum class ExprKind { Int, Var, Unary, Binary };

struct Expr {
  ExprKind kind = ExprKind::Int;
  std::int64_t value = 0;  // Int
  std::string name;        // Var
  std::string op;          // Unary / Binary
  std::vector<Expr> args;  // 1 or 2 operands
};

enum class StmtKind { Assign, If, While, Return, Break, Continue };

struct Stmt {
  StmtKind kind = StmtKind::Assign;
  int id = 0;  // preorder index within the program
  int line = 0;
  std::string target;          // Assign
  std::optional<Expr> expr;    // Assign value, If/While condition, Return value
  std::vector<Stmt> body;      // If then-arm, While body
  std::vector<Stmt> else_body;
  bool has_else = false;
};

struct MiniProgram {
  std::string source;
  std::vector<Stmt> body;
  int statement_count = 0;
};

MiniProgram parse_mini(std::string_view source);

std::string print_expr(const Expr& e);
/// One statement per line, two-space indentation; parse_mini(print_program(p))
/// yields an AST equal to p under same_ast().
std::string print_program(const MiniProgram& p);
/// Single-line rendering used as block content ("x = y + 1;").
std::string print_simple(const Stmt& s);

bool same_ast(const MiniProgram& a, const MiniProgram& b);

/// Variables read by an expression, in first-occurrence order.
std::vector<std::string> expr_uses(const Expr& e);

/// Non-blank lines that are not pure `//` comments.
int count_loc(std::string_view source);

struct GenOptions {
  int max_depth = 3;
  int max_block_len = 5;
  int min_loc = 0;  // keep appending statements until LOC >= min_loc
  std::vector<std::string> variables = {"a", "b", "c", "x", "y"};
};

/// Random well-formed program source. Counter-driven loops terminate; a few
/// free loops may not (callers bound execution with fuel).
std::string random_program(std::mt19937_64& rng, const GenOptions& opt = {});

}  // namespace ssg::mini
