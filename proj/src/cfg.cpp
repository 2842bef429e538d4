#include "ssg/cfg.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>

namespace ssg::cfg {

using mini::Expr;
using mini::ExprKind;
using mini::Stmt;
using mini::StmtKind;

std::string_view to_string(BlockKind k) {
  switch (k) {
    case BlockKind::Entry: return "entry";
    case BlockKind::Exit: return "exit";
    case BlockKind::Block: return "block";
    case BlockKind::Branch: return "branch";
  }
  return "block";
}

std::vector<const CfgEdge*> Cfg::successors(int block) const {
  std::vector<const CfgEdge*> out;
  for (const auto& e : edges)
    if (e.src == block) out.push_back(&e);
  return out;
}

const CfgEdge* Cfg::find_edge(int src, int dst) const {
  for (const auto& e : edges)
    if (e.src == src && e.dst == dst) return &e;
  return nullptr;
}

namespace {

class Builder {
 public:
  explicit Builder(int statement_count) : locs_(static_cast<std::size_t>(statement_count)) {}

  Cfg run(const std::vector<Stmt>& program) {
    entry_ = make(BlockKind::Entry);
    exit_ = make(BlockKind::Exit);
    cur_ = entry_;
    build(program);
    if (cur_ >= 0) link(cur_, exit_);
    return finish();
  }

 private:
  struct Loop {
    int header;
    int after;
  };

  int make(BlockKind k) {
    blocks_.push_back({static_cast<int>(blocks_.size()), k, {}, std::nullopt});
    return blocks_.back().id;
  }

  void link(int a, int b, EdgeLabel l = EdgeLabel::None) {
    CfgEdge e{a, b, l};
    if (std::find(edges_.begin(), edges_.end(), e) == edges_.end()) edges_.push_back(e);
  }

  // Current block, opening a fresh straight-line block when needed.
  int straight() {
    if (cur_ < 0) {
      cur_ = make(BlockKind::Block);
    } else if (blocks_[static_cast<std::size_t>(cur_)].kind != BlockKind::Block) {
      int b = make(BlockKind::Block);
      link(cur_, b);
      cur_ = b;
    }
    return cur_;
  }

  void build(const std::vector<Stmt>& list) {
    for (const auto& s : list) statement(s);
  }

  void statement(const Stmt& s) {
    auto& loc = locs_[static_cast<std::size_t>(s.id)];
    switch (s.kind) {
      case StmtKind::Assign: {
        loc.block = straight();
        blocks_[static_cast<std::size_t>(cur_)].statements.push_back(s);
        return;
      }
      case StmtKind::Return:
      case StmtKind::Break:
      case StmtKind::Continue: {
        int target = exit_;
        if (s.kind != StmtKind::Return) {
          if (loops_.empty())
            throw SemanticError(std::string(s.kind == StmtKind::Break ? "break" : "continue") +
                                " outside loop at line " + std::to_string(s.line));
          target = s.kind == StmtKind::Break ? loops_.back().after : loops_.back().header;
        }
        loc.block = straight();
        blocks_[static_cast<std::size_t>(cur_)].statements.push_back(s);
        link(cur_, target);
        cur_ = -1;
        return;
      }
      case StmtKind::If: {
        if (cur_ < 0) cur_ = make(BlockKind::Block);
        int br = make(BlockKind::Branch);
        blocks_[static_cast<std::size_t>(br)].header = header_of(s);
        link(cur_, br);
        int then_b = make(BlockKind::Block);
        link(br, then_b, EdgeLabel::True);
        cur_ = then_b;
        build(s.body);
        int then_end = cur_;
        int else_b = -1, else_end = -1;
        if (s.has_else) {
          else_b = make(BlockKind::Block);
          link(br, else_b, EdgeLabel::False);
          cur_ = else_b;
          build(s.else_body);
          else_end = cur_;
        }
        int join = make(BlockKind::Block);
        if (!s.has_else) link(br, join, EdgeLabel::False);
        if (then_end >= 0) link(then_end, join);
        if (else_end >= 0) link(else_end, join);
        cur_ = join;
        locs_[static_cast<std::size_t>(s.id)] = {br, then_b, else_b, join};
        return;
      }
      case StmtKind::While: {
        if (cur_ < 0) cur_ = make(BlockKind::Block);
        int hdr = make(BlockKind::Branch);
        blocks_[static_cast<std::size_t>(hdr)].header = header_of(s);
        link(cur_, hdr);
        int body = make(BlockKind::Block);
        link(hdr, body, EdgeLabel::True);
        int after = make(BlockKind::Block);
        loops_.push_back({hdr, after});
        cur_ = body;
        build(s.body);
        if (cur_ >= 0) link(cur_, hdr);
        loops_.pop_back();
        link(hdr, after, EdgeLabel::False);
        cur_ = after;
        locs_[static_cast<std::size_t>(s.id)] = {hdr, body, -1, after};
        return;
      }
    }
  }

  static Stmt header_of(const Stmt& s) {
    Stmt h = s;
    h.body.clear();
    h.else_body.clear();
    return h;
  }

  Cfg finish() {
    std::vector<bool> seen(blocks_.size(), false);
    std::deque<int> work{entry_};
    seen[static_cast<std::size_t>(entry_)] = true;
    while (!work.empty()) {
      int b = work.front();
      work.pop_front();
      for (const auto& e : edges_)
        if (e.src == b && !seen[static_cast<std::size_t>(e.dst)]) {
          seen[static_cast<std::size_t>(e.dst)] = true;
          work.push_back(e.dst);
        }
    }
    std::vector<int> order;
    for (const auto& b : blocks_)
      if (seen[static_cast<std::size_t>(b.id)] && b.id != exit_) order.push_back(b.id);
    order.push_back(exit_);
    std::vector<int> remap(blocks_.size(), -1);
    for (std::size_t i = 0; i < order.size(); ++i) remap[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    auto re = [&](int b) { return b < 0 ? -1 : remap[static_cast<std::size_t>(b)]; };

    Cfg c;
    for (int old : order) {
      auto b = std::move(blocks_[static_cast<std::size_t>(old)]);
      b.id = re(old);
      c.blocks.push_back(std::move(b));
    }
    for (const auto& e : edges_)
      if (re(e.src) >= 0 && re(e.dst) >= 0) c.edges.push_back({re(e.src), re(e.dst), e.label});
    for (auto& l : locs_) c.locations.push_back({re(l.block), re(l.first), re(l.second), re(l.after)});
    return c;
  }

  std::vector<BasicBlock> blocks_;
  std::vector<CfgEdge> edges_;
  std::vector<StmtLocation> locs_;
  std::vector<Loop> loops_;
  int entry_ = 0, exit_ = 0, cur_ = 0;
};

// Variables used before being defined in the block, and variables defined.
struct DefUse {
  std::set<std::string> upward_uses;
  std::set<std::string> defs;
};

DefUse def_use(const BasicBlock& b) {
  DefUse du;
  auto use = [&](const Expr& e) {
    for (const auto& v : mini::expr_uses(e))
      if (!du.defs.contains(v)) du.upward_uses.insert(v);
  };
  if (b.header) use(*b.header->expr);
  for (const auto& s : b.statements) {
    if (s.expr) use(*s.expr);
    if (s.kind == StmtKind::Assign) du.defs.insert(s.target);
  }
  return du;
}

std::uint64_t as_u(std::int64_t v) { return static_cast<std::uint64_t>(v); }
std::int64_t as_i(std::uint64_t v) { return static_cast<std::int64_t>(v); }

class Interpreter {
 public:
  Interpreter(const Cfg& c, Env env, std::int64_t fuel) : cfg_(c), fuel_(fuel) { result_.env = std::move(env); }

  ExecResult run(const std::vector<Stmt>& program) {
    enter(cfg_.entry());
    exec_list(program);
    enter(cfg_.exit());
    return std::move(result_);
  }

 private:
  enum class Flow { Normal, Break, Continue, Return };

  void enter(int block) {
    if (block < 0) throw std::logic_error("interpreter reached a pruned block");
    if (result_.trace.empty() || result_.trace.back() != block) result_.trace.push_back(block);
  }

  void tick() {
    if (fuel_-- <= 0) throw FuelExhausted();
  }

  const StmtLocation& loc(const Stmt& s) const { return cfg_.locations.at(static_cast<std::size_t>(s.id)); }

  Flow exec_list(const std::vector<Stmt>& list) {
    for (const auto& s : list)
      if (auto f = exec(s); f != Flow::Normal) return f;
    return Flow::Normal;
  }

  bool decide(const Stmt& s) {
    enter(loc(s).block);
    tick();
    bool v = eval(*s.expr) != 0;
    result_.decisions.push_back(v);
    return v;
  }

  Flow exec(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Assign:
        enter(loc(s).block);
        tick();
        result_.env[s.target] = eval(*s.expr);
        return Flow::Normal;
      case StmtKind::Return:
        enter(loc(s).block);
        tick();
        if (s.expr) result_.returned = eval(*s.expr);
        return Flow::Return;
      case StmtKind::Break:
      case StmtKind::Continue:
        enter(loc(s).block);
        tick();
        return s.kind == StmtKind::Break ? Flow::Break : Flow::Continue;
      case StmtKind::If: {
        Flow f = Flow::Normal;
        if (decide(s)) {
          enter(loc(s).first);
          f = exec_list(s.body);
        } else if (s.has_else) {
          enter(loc(s).second);
          f = exec_list(s.else_body);
        }
        if (f != Flow::Normal) return f;
        enter(loc(s).after);
        return Flow::Normal;
      }
      case StmtKind::While: {
        while (decide(s)) {
          enter(loc(s).first);
          auto f = exec_list(s.body);
          if (f == Flow::Break) break;
          if (f == Flow::Return) return f;
        }
        enter(loc(s).after);
        return Flow::Normal;
      }
    }
    return Flow::Normal;
  }

  std::int64_t eval(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Int: return e.value;
      case ExprKind::Var: {
        auto it = result_.env.find(e.name);
        if (it == result_.env.end()) throw UndefinedVariable(e.name);
        return it->second;
      }
      case ExprKind::Unary: {
        auto v = eval(e.args[0]);
        return e.op == "!" ? (v == 0 ? 1 : 0) : as_i(0 - as_u(v));
      }
      case ExprKind::Binary: break;
    }
    const auto& op = e.op;
    if (op == "&&") return eval(e.args[0]) != 0 && eval(e.args[1]) != 0 ? 1 : 0;
    if (op == "||") return eval(e.args[0]) != 0 || eval(e.args[1]) != 0 ? 1 : 0;
    auto l = eval(e.args[0]);
    auto r = eval(e.args[1]);
    if (op == "+") return as_i(as_u(l) + as_u(r));
    if (op == "-") return as_i(as_u(l) - as_u(r));
    if (op == "*") return as_i(as_u(l) * as_u(r));
    if (op == "/" || op == "%") {
      if (r == 0) throw DivisionByZero();
      if (l == std::numeric_limits<std::int64_t>::min() && r == -1) return op == "/" ? l : 0;
      return op == "/" ? l / r : l % r;
    }
    if (op == "<") return l < r;
    if (op == "<=") return l <= r;
    if (op == ">") return l > r;
    if (op == ">=") return l >= r;
    if (op == "==") return l == r;
    return l != r;
  }

  const Cfg& cfg_;
  std::int64_t fuel_;
  ExecResult result_;
};

}  // namespace

Cfg build_cfg(const mini::MiniProgram& p) { return Builder(p.statement_count).run(p.body); }

std::vector<std::string> check_cfg(const Cfg& c) {
  std::vector<std::string> out;
  if (c.blocks.size() < 2) return {"fewer than two blocks"};
  int entries = 0, exits = 0;
  for (const auto& b : c.blocks) {
    entries += b.kind == BlockKind::Entry;
    exits += b.kind == BlockKind::Exit;
  }
  if (entries != 1 || c.blocks.front().kind != BlockKind::Entry) out.push_back("entry block is not unique");
  if (exits != 1 || c.blocks.back().kind != BlockKind::Exit) out.push_back("exit block is not unique");
  for (const auto& e : c.edges) {
    if (e.dst == c.entry()) out.push_back("entry has a predecessor");
    if (e.src == c.exit()) out.push_back("exit has a successor");
  }
  for (const auto& b : c.blocks) {
    auto succ = c.successors(b.id);
    if (b.kind != BlockKind::Exit && succ.empty()) out.push_back("block " + std::to_string(b.id) + " has no successor");
    if (b.kind == BlockKind::Branch) {
      bool t = false, f = false;
      for (const auto* e : succ) {
        t |= e->label == EdgeLabel::True;
        f |= e->label == EdgeLabel::False;
      }
      if (succ.size() != 2 || !t || !f) out.push_back("branch " + std::to_string(b.id) + " lacks true/false successors");
    }
  }
  std::vector<bool> seen(c.blocks.size(), false);
  std::deque<int> work{c.entry()};
  seen[0] = true;
  while (!work.empty()) {
    int b = work.front();
    work.pop_front();
    for (const auto* e : c.successors(b))
      if (!seen[static_cast<std::size_t>(e->dst)]) {
        seen[static_cast<std::size_t>(e->dst)] = true;
        work.push_back(e->dst);
      }
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) out.push_back("block " + std::to_string(i) + " unreachable");
  return out;
}

std::string block_content(const BasicBlock& b) {
  if (b.header) return mini::print_simple(*b.header);
  std::string out;
  for (const auto& s : b.statements) {
    if (!out.empty()) out += '\n';
    out += mini::print_simple(s);
  }
  return out;
}

SceneGraph cfg_to_ssg(const Cfg& c) {
  SceneGraph g;
  auto id = [](int b) { return "b" + std::to_string(b); };
  for (const auto& b : c.blocks) g.add_node({id(b.id), std::string(to_string(b.kind)), block_content(b), std::nullopt});
  for (const auto& e : c.edges) {
    std::optional<std::string> label;
    if (e.label == EdgeLabel::True) label = "true";
    if (e.label == EdgeLabel::False) label = "false";
    g.add_edge({id(e.src), id(e.dst), RelationType::ControlFlow, label});
  }
  g.meta()["extractor"] = "cfg";
  return g;
}

SceneGraph add_defuse_edges(const SceneGraph& g, const Cfg& c) {
  const auto n = c.blocks.size();
  std::vector<DefUse> du;
  for (const auto& b : c.blocks) du.push_back(def_use(b));

  // Definition sites are (block, variable) pairs; a block's gen set is its
  // defined variables, and it kills every other block's defs of them.
  using Def = std::pair<int, std::string>;
  std::vector<std::set<Def>> in(n), out(n);
  std::vector<std::vector<int>> preds(n);
  for (const auto& e : c.edges) preds[static_cast<std::size_t>(e.dst)].push_back(e.src);

  std::deque<int> work;
  for (std::size_t i = 0; i < n; ++i) work.push_back(static_cast<int>(i));
  std::vector<bool> queued(n, true);
  while (!work.empty()) {
    auto b = static_cast<std::size_t>(work.front());
    work.pop_front();
    queued[b] = false;
    std::set<Def> new_in;
    for (int p : preds[b]) new_in.insert(out[static_cast<std::size_t>(p)].begin(), out[static_cast<std::size_t>(p)].end());
    std::set<Def> new_out;
    for (const auto& d : new_in)
      if (!du[b].defs.contains(d.second)) new_out.insert(d);
    for (const auto& v : du[b].defs) new_out.emplace(static_cast<int>(b), v);
    in[b] = std::move(new_in);
    if (new_out != out[b]) {
      out[b] = std::move(new_out);
      for (const auto& e : c.edges)
        if (e.src == static_cast<int>(b) && !queued[static_cast<std::size_t>(e.dst)]) {
          queued[static_cast<std::size_t>(e.dst)] = true;
          work.push_back(e.dst);
        }
    }
  }

  SceneGraph result = g;
  for (std::size_t b = 0; b < n; ++b)
    for (const auto& [d, v] : in[b])
      if (d != static_cast<int>(b) && du[b].upward_uses.contains(v))
        result.try_add_edge({"b" + std::to_string(d), "b" + std::to_string(b), RelationType::DataFlow, std::nullopt});
  return result;
}

ExecResult interpret(const mini::MiniProgram& p, const Cfg& c, Env env, std::int64_t fuel) {
  if (fuel <= 0) throw std::invalid_argument("interpret: fuel must be positive");
  return Interpreter(c, std::move(env), fuel).run(p.body);
}

ExecResult interpret(const mini::MiniProgram& p, Env env, std::int64_t fuel) {
  return interpret(p, build_cfg(p), std::move(env), fuel);
}

}  // namespace ssg::cfg
