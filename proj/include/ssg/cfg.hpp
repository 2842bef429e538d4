// Control-flow graphs for mini-language programs, their scene-graph form,
// reaching-definitions data-flow edges and a trace-producing interpreter.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssg/graph.hpp"
#include "ssg/mini.hpp"

namespace ssg::cfg {

enum class BlockKind { Entry, Exit, Block, Branch };
enum class EdgeLabel { None, True, False };

std::string_view to_string(BlockKind k);

struct BasicBlock {
  int id = 0;
  BlockKind kind = BlockKind::Block;
  /// Straight-line statements (assign / return / break / continue).
  std::vector<mini::Stmt> statements;
  /// Branch blocks: the if/while statement whose condition this block tests.
  std::optional<mini::Stmt> header;
};

struct CfgEdge {
  int src = 0;
  int dst = 0;
  EdgeLabel label = EdgeLabel::None;
  auto operator<=>(const CfgEdge&) const = default;
};

/// Where each AST statement landed, indexed by Stmt::id. -1 = pruned.
/// For if: block = branch, first = then-entry, second = else-entry,
/// after = join. For while: block = header, first = body-entry,
/// after = loop exit.
struct StmtLocation {
  int block = -1;
  int first = -1;
  int second = -1;
  int after = -1;
};

struct Cfg {
  std::vector<BasicBlock> blocks;  // blocks[i].id == i; entry first, exit last
  std::vector<CfgEdge> edges;
  std::vector<StmtLocation> locations;

  int entry() const { return 0; }
  int exit() const { return static_cast<int>(blocks.size()) - 1; }
  std::vector<const CfgEdge*> successors(int block) const;
  const CfgEdge* find_edge(int src, int dst) const;
};

class SemanticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maximal basic blocks; every if/while opens a branch block holding only its
/// condition. Unreachable blocks are pruned.
Cfg build_cfg(const mini::MiniProgram& p);

/// Violations of the entry/exit/successor/reachability invariants.
std::vector<std::string> check_cfg(const Cfg& c);

/// Block content as shown in the scene graph.
std::string block_content(const BasicBlock& b);

SceneGraph cfg_to_ssg(const Cfg& c);

/// Adds inter-block def-use edges from a reaching-definitions fixpoint.
/// Idempotent; only data-flow edges are added.
SceneGraph add_defuse_edges(const SceneGraph& g, const Cfg& c);

// Interpreter ---------------------------------------------------------------

class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DivisionByZero : public RuntimeError {
 public:
  DivisionByZero() : RuntimeError("division by zero") {}
};
class FuelExhausted : public RuntimeError {
 public:
  FuelExhausted() : RuntimeError("fuel exhausted") {}
};
class UndefinedVariable : public RuntimeError {
 public:
  explicit UndefinedVariable(const std::string& name) : RuntimeError("undefined variable " + name) {}
};

using Env = std::map<std::string, std::int64_t>;

struct ExecResult {
  Env env;
  std::optional<std::int64_t> returned;
  /// Block ids in execution order, entry first and exit last.
  std::vector<int> trace;
  /// Outcome of each branch-block visit, in trace order.
  std::vector<bool> decisions;
};

/// Small-step execution over the AST. Each statement or condition costs one
/// unit of fuel. Arithmetic wraps on 64-bit overflow.
ExecResult interpret(const mini::MiniProgram& p, Env env, std::int64_t fuel);
ExecResult interpret(const mini::MiniProgram& p, const Cfg& c, Env env, std::int64_t fuel);

}  // namespace ssg::cfg
