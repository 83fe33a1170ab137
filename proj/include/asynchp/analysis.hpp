#pragma once

// Dead-posting detection.
//
// A method is effect-free when running it can neither change the global nor
// stop the program: it has no global assignment, no `provided`, no loop, no
// expression that can fault, lies on no run/post cycle, and everything it
// runs or posts is effect-free too. A `synch` whose target is effect-free
// and whose argument cannot fault is dead: deleting it leaves the final
// global and every assign-global event unchanged.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "asynchp/syntax.hpp"

namespace asynchp {

enum class EdgeKind : std::uint8_t { run, post };

struct PostEdge {
  std::string from;
  std::string to;
  EdgeKind kind;
  std::optional<Priority> priority;  // set for post edges
  Pos where;
};

struct PostGraph {
  std::vector<std::string> vertices;  // declaration order
  std::vector<PostEdge> edges;        // source order, one per run/synch
};

struct DeadPost {
  std::string in_method;  // method containing the synch
  std::string target;
  Pos where;
};

struct AnalysisReport {
  std::vector<std::string> effect_free;  // declaration order
  std::vector<DeadPost> dead_posts;
  PostGraph graph;
};

namespace detail {

template <class F>
void for_each_stmt(const Stmt& s, F&& f) {
  f(s);
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Seq>) {
          for (const auto& child : n.body) for_each_stmt(child, f);
        } else if constexpr (std::is_same_v<T, If>) {
          for_each_stmt(*n.then_branch, f);
          for_each_stmt(*n.else_branch, f);
        } else if constexpr (std::is_same_v<T, While>) {
          for_each_stmt(*n.body, f);
        }
      },
      s.node);
}

// Value range of an expression when every variable may hold any value.
// `faults` is set when some input makes evaluation raise.
struct Range {
  __int128 lo;
  __int128 hi;
  bool faults = false;
};

inline Range range_of(const Expr& e) {
  constexpr __int128 kMin = std::numeric_limits<std::int64_t>::min();
  constexpr __int128 kMax = std::numeric_limits<std::int64_t>::max();
  const Range bool_range{0, 1};
  return std::visit(
      [&](const auto& n) -> Range {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IntLit>) {
          return {n.value, n.value};
        } else if constexpr (std::is_same_v<T, Var>) {
          return {kMin, kMax};
        } else if constexpr (std::is_same_v<T, Unary>) {
          Range a = range_of(*n.operand);
          if (n.op == UnaryOp::logical_not) return {0, 1, a.faults};
          Range r{-a.hi, -a.lo, a.faults};
          r.faults |= r.lo < kMin || r.hi > kMax;
          return r;
        } else {
          Range a = range_of(*n.left);
          Range b = range_of(*n.right);
          bool faults = a.faults || b.faults;
          Range r{0, 1, faults};
          switch (n.op) {
            case BinaryOp::add:
              r = {a.lo + b.lo, a.hi + b.hi, faults};
              break;
            case BinaryOp::sub:
              r = {a.lo - b.hi, a.hi - b.lo, faults};
              break;
            case BinaryOp::mul: {
              // Operands are within 64 bits, so the products fit in 128.
              __int128 c[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
              r = {*std::min_element(std::begin(c), std::end(c)),
                   *std::max_element(std::begin(c), std::end(c)), faults};
              break;
            }
            case BinaryOp::div:
            case BinaryOp::mod: {
              if (b.lo <= 0 && b.hi >= 0) faults = true;
              if (a.lo == kMin && b.lo <= -1 && b.hi >= -1) faults = true;
              // |a / b| <= |a| and the sign may flip.
              __int128 mag = std::min(std::max(-a.lo, a.hi), kMax);
              r = {-mag, mag, faults};
              break;
            }
            default:
              return {bool_range.lo, bool_range.hi, faults};
          }
          r.faults |= r.lo < kMin || r.hi > kMax;
          if (r.lo < kMin) r.lo = kMin;
          if (r.hi > kMax) r.hi = kMax;
          return r;
        }
      },
      e.node);
}

inline bool may_fault(const Expr& e) { return range_of(e).faults; }

// Cycle membership over the run/post graph (Tarjan).
inline std::set<std::string> on_cycle(const PostGraph& g) {
  std::map<std::string, std::vector<std::string>> succ;
  std::set<std::string> self_loop;
  for (const auto& e : g.edges) {
    succ[e.from].push_back(e.to);
    if (e.from == e.to) self_loop.insert(e.from);
  }
  std::map<std::string, int> index, low;
  std::vector<std::string> stack;
  std::set<std::string> on_stack, result = self_loop;
  int counter = 0;

  auto strongconnect = [&](auto&& self, const std::string& v) -> void {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const auto& w : succ[v]) {
      if (!index.contains(w)) {
        self(self, w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.contains(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> component;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        component.push_back(w);
      } while (w != v);
      if (component.size() > 1) result.insert(component.begin(), component.end());
    }
  };
  for (const auto& v : g.vertices)
    if (!index.contains(v)) strongconnect(strongconnect, v);
  return result;
}

}  // namespace detail

inline PostGraph build_post_graph(const Program& p) {
  PostGraph g;
  for (const auto& m : p.methods) g.vertices.push_back(m.name);
  for (const auto& m : p.methods) {
    detail::for_each_stmt(m.body, [&](const Stmt& s) {
      if (auto* r = std::get_if<Run>(&s.node))
        g.edges.push_back({m.name, r->method, EdgeKind::run, std::nullopt, s.pos});
      else if (auto* y = std::get_if<Synch>(&s.node))
        g.edges.push_back({m.name, y->method, EdgeKind::post, y->priority, s.pos});
    });
  }
  return g;
}

// Local half of the effect-free test; callee propagation is done by the
// fixpoint below.
inline bool locally_effect_free(const Method& m) {
  bool ok = true;
  detail::for_each_stmt(m.body, [&](const Stmt& s) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, AssignGlobal> || std::is_same_v<T, Provided> ||
                        std::is_same_v<T, While>) {
            ok = false;
          } else if constexpr (std::is_same_v<T, AssignLocal>) {
            ok = ok && !detail::may_fault(*n.value);
          } else if constexpr (std::is_same_v<T, If>) {
            ok = ok && !detail::may_fault(*n.cond);
          } else if constexpr (std::is_same_v<T, Run> || std::is_same_v<T, Synch>) {
            ok = ok && !detail::may_fault(*n.arg);
          }
        },
        s.node);
  });
  return ok;
}

struct EffectFreeResult {
  std::set<std::string> methods;
  int rounds = 0;  // propagation rounds that removed at least one method
};

// Greatest set closed under "every run/post target is also in the set",
// starting from the locally effect-free methods off any cycle.
inline EffectFreeResult effect_free_fixpoint(const Program& p, const PostGraph& g) {
  EffectFreeResult r;
  const auto cyclic = detail::on_cycle(g);
  for (const auto& m : p.methods)
    if (locally_effect_free(m) && !cyclic.contains(m.name)) r.methods.insert(m.name);
  for (;;) {
    std::set<std::string> drop;
    for (const auto& e : g.edges)
      if (r.methods.contains(e.from) && !r.methods.contains(e.to)) drop.insert(e.from);
    if (drop.empty()) break;
    for (const auto& m : drop) r.methods.erase(m);
    ++r.rounds;
  }
  return r;
}

inline std::set<std::string> find_effect_free(const Program& p) {
  return effect_free_fixpoint(p, build_post_graph(p)).methods;
}

inline AnalysisReport dead_posts(const Program& p) {
  AnalysisReport report;
  report.graph = build_post_graph(p);
  const auto effect_free = effect_free_fixpoint(p, report.graph).methods;
  for (const auto& m : p.methods)
    if (effect_free.contains(m.name)) report.effect_free.push_back(m.name);
  for (const auto& m : p.methods) {
    detail::for_each_stmt(m.body, [&](const Stmt& s) {
      auto* y = std::get_if<Synch>(&s.node);
      if (y && effect_free.contains(y->method) && !detail::may_fault(*y->arg))
        report.dead_posts.push_back({m.name, y->method, s.pos});
    });
  }
  return report;
}

inline nlohmann::ordered_json to_json(const AnalysisReport& r) {
  nlohmann::ordered_json j;
  j["effect_free"] = r.effect_free;
  auto& dead = j["dead_posts"] = nlohmann::ordered_json::array();
  for (const auto& d : r.dead_posts) {
    nlohmann::ordered_json e;
    e["method"] = d.target;
    e["line"] = d.where.line;
    e["col"] = d.where.col;
    e["in"] = d.in_method;
    dead.push_back(std::move(e));
  }
  auto& edges = j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : r.graph.edges) {
    nlohmann::ordered_json x;
    x["from"] = e.from;
    x["to"] = e.to;
    x["kind"] = e.kind == EdgeKind::run ? "run" : "post";
    if (e.priority) x["priority"] = to_string(*e.priority);
    x["line"] = e.where.line;
    x["col"] = e.where.col;
    edges.push_back(std::move(x));
  }
  return j;
}

}  // namespace asynchp
