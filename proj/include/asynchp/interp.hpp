#pragma once

// Evaluator for prioritized asynchronous programs.
//
// Every declared method first runs once, in declaration order, with its
// local starting at 0. Then the post list is drained: the head call is
// removed, its captured argument is bound to the target's local, and the
// target's body runs. Calls posted meanwhile are queued by priority, so a
// fresh high post overtakes older medium and low ones.
//
// Statements run on an explicit control stack rather than the C++ stack, so
// deep `run` recursion is bounded only by the step budget.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "asynchp/postlist.hpp"
#include "asynchp/syntax.hpp"

namespace asynchp {

inline constexpr std::uint64_t kDefaultBudget = 1'000'000;

enum class FaultKind : std::uint8_t {
  provided_failed,
  division_by_zero,
  arith_overflow,
  step_budget_exhausted,
};

inline constexpr std::string_view to_string(FaultKind k) {
  switch (k) {
    case FaultKind::provided_failed: return "provided-failed";
    case FaultKind::division_by_zero: return "division-by-zero";
    case FaultKind::arith_overflow: return "arith-overflow";
    case FaultKind::step_budget_exhausted: return "step-budget-exhausted";
  }
  return "?";
}

class RuntimeFault : public std::runtime_error {
 public:
  RuntimeFault(FaultKind kind, Pos where)
      : std::runtime_error(to_string(where) + " " + std::string(to_string(kind))),
        kind_(kind),
        where_(where) {}

  FaultKind kind() const { return kind_; }
  Pos where() const { return where_; }

 private:
  FaultKind kind_;
  Pos where_;
};

// One cell for the global and one per declared method.
struct Store {
  std::int64_t global_value = 0;
  std::map<std::string, std::int64_t, std::less<>> locals;

  std::int64_t& local(std::string_view method) {
    auto it = locals.find(method);
    if (it == locals.end()) throw std::logic_error("no local cell for method " + std::string(method));
    return it->second;
  }
  std::int64_t local(std::string_view method) const {
    auto it = locals.find(method);
    if (it == locals.end()) throw std::logic_error("no local cell for method " + std::string(method));
    return it->second;
  }
};

class MethodStack {
 public:
  void push(std::string method) { frames_.push_back(std::move(method)); }
  void pop() {
    if (frames_.empty()) throw std::logic_error("pop from empty method stack");
    frames_.pop_back();
  }
  const std::string& peek() const {
    if (frames_.empty()) throw std::logic_error("no active method");
    return frames_.back();
  }
  bool empty() const { return frames_.empty(); }
  std::size_t size() const { return frames_.size(); }
  const std::vector<std::string>& frames() const { return frames_; }

 private:
  std::vector<std::string> frames_;
};

enum class EventKind : std::uint8_t {
  post,
  dispatch,
  run_call,
  ret,
  method_start,
  method_end,
  assign_global,
  provided_fail,
  error,
};

inline constexpr std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::post: return "post";
    case EventKind::dispatch: return "dispatch";
    case EventKind::run_call: return "run-call";
    case EventKind::ret: return "return";
    case EventKind::method_start: return "method-start";
    case EventKind::method_end: return "method-end";
    case EventKind::assign_global: return "assign-global";
    case EventKind::provided_fail: return "provided-fail";
    case EventKind::error: return "error";
  }
  return "?";
}

// Stack effect in a trace: method-start, run-call and dispatch push a frame;
// return and method-end pop one. Every frame is popped by exactly one event.
struct TraceEvent {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::error;
  std::optional<std::string> method;
  std::optional<std::int64_t> value;
  std::optional<Priority> priority;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

template <PostQueue Queue = AsynchList>
struct MachineState {
  Store store;
  Queue postlist;
  MethodStack stack;
  std::uint64_t step_count = 0;
  std::uint64_t budget = kDefaultBudget;
  std::uint64_t next_post_seq = 1;
  std::vector<TraceEvent> trace;

  void emit(EventKind kind, std::optional<std::string> method = std::nullopt,
            std::optional<std::int64_t> value = std::nullopt,
            std::optional<Priority> priority = std::nullopt) {
    trace.push_back({trace.size() + 1, kind, std::move(method), value, priority});
  }

  // One rule application. The count never exceeds the budget.
  void tick(Pos where) {
    if (step_count >= budget) throw RuntimeFault(FaultKind::step_budget_exhausted, where);
    ++step_count;
  }
};

// Initial state: global and every local at 0, empty list and stack.
template <PostQueue Queue = AsynchList>
MachineState<Queue> initial_state(const Program& p, std::uint64_t budget = kDefaultBudget) {
  MachineState<Queue> st;
  st.budget = budget;
  for (const auto& m : p.methods) st.store.locals.emplace(m.name, 0);
  return st;
}

// ---------------------------------------------------------------------------
// Expressions

namespace detail {

inline bool truthy(std::int64_t v) { return v != 0; }

inline std::int64_t arith(BinaryOp op, std::int64_t a, std::int64_t b, Pos at) {
  std::int64_t r = 0;
  switch (op) {
    case BinaryOp::add:
      if (__builtin_add_overflow(a, b, &r)) throw RuntimeFault(FaultKind::arith_overflow, at);
      return r;
    case BinaryOp::sub:
      if (__builtin_sub_overflow(a, b, &r)) throw RuntimeFault(FaultKind::arith_overflow, at);
      return r;
    case BinaryOp::mul:
      if (__builtin_mul_overflow(a, b, &r)) throw RuntimeFault(FaultKind::arith_overflow, at);
      return r;
    case BinaryOp::div:
    case BinaryOp::mod:
      if (b == 0) throw RuntimeFault(FaultKind::division_by_zero, at);
      if (a == std::numeric_limits<std::int64_t>::min() && b == -1) {
        if (op == BinaryOp::div) throw RuntimeFault(FaultKind::arith_overflow, at);
        return 0;
      }
      return op == BinaryOp::div ? a / b : a % b;
    case BinaryOp::eq: return a == b;
    case BinaryOp::ne: return a != b;
    case BinaryOp::lt: return a < b;
    case BinaryOp::le: return a <= b;
    case BinaryOp::gt: return a > b;
    case BinaryOp::ge: return a >= b;
    case BinaryOp::logical_and: return truthy(a) && truthy(b);
    case BinaryOp::logical_or: return truthy(a) || truthy(b);
  }
  return 0;
}

inline std::int64_t eval(const Expr& e, std::int64_t global_value, std::string_view global_name,
                         std::int64_t local_value) {
  return std::visit(
      [&](const auto& n) -> std::int64_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IntLit>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, Var>) {
          return n.name == global_name ? global_value : local_value;
        } else if constexpr (std::is_same_v<T, Unary>) {
          std::int64_t v = eval(*n.operand, global_value, global_name, local_value);
          if (n.op == UnaryOp::logical_not) return !truthy(v);
          if (v == std::numeric_limits<std::int64_t>::min())
            throw RuntimeFault(FaultKind::arith_overflow, e.pos);
          return -v;
        } else {
          // Both operands are always evaluated; and/or do not short-circuit.
          std::int64_t a = eval(*n.left, global_value, global_name, local_value);
          std::int64_t b = eval(*n.right, global_value, global_name, local_value);
          return arith(n.op, a, b, e.pos);
        }
      },
      e.node);
}

}  // namespace detail

// Evaluates `e` over the global and the local of method `active`. Names are
// assumed scope-valid: anything that is not the global reads the local.
inline std::int64_t eval_expr(const Expr& e, const Store& store, std::string_view global_name,
                              std::string_view active) {
  return detail::eval(e, store.global_value, global_name, store.local(active));
}

// ---------------------------------------------------------------------------
// Statements

enum class Control : std::uint8_t { next, returned };

namespace detail {

template <PostQueue Queue>
class Engine {
 public:
  Engine(MachineState<Queue>& st, const Program& p) : st_(st), program_(p) {}

  Control exec(const Stmt& root) {
    const std::size_t base = work_.size();
    work_.push_back(Exec{&root});
    while (work_.size() > base) {
      Frame f = work_.back();
      work_.pop_back();
      if (std::holds_alternative<Exec>(f)) {
        if (step(*std::get<Exec>(f).stmt) == Control::returned) {
          // Discard the rest of the current body up to its call boundary.
          while (work_.size() > base && !std::holds_alternative<Boundary>(work_.back()))
            work_.pop_back();
          if (work_.size() == base) return Control::returned;
          work_.pop_back();
        }
      } else if (auto* s = std::get_if<SeqNext>(&f)) {
        if (s->index < s->seq->body.size()) {
          work_.push_back(SeqNext{s->seq, s->index + 1});
          work_.push_back(Exec{&s->seq->body[s->index]});
        }
      } else if (auto* l = std::get_if<LoopCheck>(&f)) {
        st_.tick(l->at);
        if (truthy(value(*l->loop->cond))) {
          work_.push_back(*l);
          work_.push_back(Exec{l->loop->body.get()});
        }
      } else {
        // Body of a `run` finished without return(): implicit return.
        const auto& b = std::get<Boundary>(f);
        st_.stack.pop();
        st_.emit(EventKind::ret, b.method->name);
      }
    }
    return Control::next;
  }

 private:
  struct Exec {
    const Stmt* stmt;
  };
  struct SeqNext {
    const Seq* seq;
    std::size_t index;
  };
  struct LoopCheck {
    const While* loop;
    Pos at;
  };
  struct Boundary {
    const Method* method;
  };
  using Frame = std::variant<Exec, SeqNext, LoopCheck, Boundary>;

  std::int64_t value(const Expr& e) const {
    return eval_expr(e, st_.store, program_.global, st_.stack.peek());
  }

  const Method& lookup(const std::string& name) const {
    const Method* m = program_.find_method(name);
    if (!m) throw std::logic_error("call to undeclared method " + name);
    return *m;
  }

  Control step(const Stmt& s) {
    st_.tick(s.pos);
    return std::visit(
        [&](const auto& n) -> Control {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Seq>) {
            work_.push_back(SeqNext{&n, 0});
          } else if constexpr (std::is_same_v<T, AssignGlobal>) {
            st_.store.global_value = value(*n.value);
            st_.emit(EventKind::assign_global, st_.stack.peek(), st_.store.global_value);
          } else if constexpr (std::is_same_v<T, AssignLocal>) {
            std::int64_t v = value(*n.value);
            st_.store.local(st_.stack.peek()) = v;
          } else if constexpr (std::is_same_v<T, Provided>) {
            if (!truthy(value(*n.cond))) {
              st_.emit(EventKind::provided_fail, st_.stack.peek());
              throw RuntimeFault(FaultKind::provided_failed, s.pos);
            }
          } else if constexpr (std::is_same_v<T, If>) {
            work_.push_back(Exec{truthy(value(*n.cond)) ? n.then_branch.get() : n.else_branch.get()});
          } else if constexpr (std::is_same_v<T, While>) {
            work_.push_back(LoopCheck{&n, s.pos});
          } else if constexpr (std::is_same_v<T, Run>) {
            const Method& callee = lookup(n.method);
            std::int64_t v = value(*n.arg);
            st_.store.local(callee.name) = v;
            st_.stack.push(callee.name);
            st_.emit(EventKind::run_call, callee.name, v);
            work_.push_back(Boundary{&callee});
            work_.push_back(Exec{&callee.body});
          } else if constexpr (std::is_same_v<T, Return>) {
            std::string m = st_.stack.peek();
            st_.stack.pop();
            st_.emit(EventKind::ret, std::move(m));
            return Control::returned;
          } else {
            std::int64_t v = value(*n.arg);
            AsynchNode node{n.method, n.arg, v, n.priority, st_.next_post_seq++};
            st_.postlist.insert(std::move(node));
            st_.emit(EventKind::post, n.method, v, n.priority);
          }
          return Control::next;
        },
        s.node);
  }

  MachineState<Queue>& st_;
  const Program& program_;
  std::vector<Frame> work_;
};

}  // namespace detail

// Executes one statement against `st`. Requires an active method on the
// stack. Returns `returned` when a return() escaped the statement.
template <PostQueue Queue>
Control exec_stmt(const Stmt& s, MachineState<Queue>& st, const Program& p) {
  return detail::Engine<Queue>(st, p).exec(s);
}

// Runs a declared method as a top-level activation: push its name, execute
// its body with the local's current value, pop at the end unless return()
// already did.
template <PostQueue Queue>
void run_top_level_method(const Method& m, MachineState<Queue>& st, const Program& p) {
  st.tick(m.pos);
  st.stack.push(m.name);
  st.emit(EventKind::method_start, m.name);
  if (exec_stmt(m.body, st, p) == Control::next) {
    st.stack.pop();
    st.emit(EventKind::method_end, m.name);
  }
}

// Drains the post list, one head call at a time, until it is empty.
template <PostQueue Queue>
void dispatch_loop(MachineState<Queue>& st, const Program& p) {
  while (!st.postlist.empty()) {
    st.tick(Pos{});
    AsynchNode n = st.postlist.pop_front();
    const Method* m = p.find_method(n.method);
    if (!m) throw std::logic_error("dispatch of undeclared method " + n.method);
    st.store.local(m->name) = n.arg_value;
    st.stack.push(m->name);
    st.emit(EventKind::dispatch, m->name, n.arg_value, n.priority);
    if (exec_stmt(m->body, st, p) == Control::next) {
      st.stack.pop();
      st.emit(EventKind::method_end, m->name);
    }
  }
}

// ---------------------------------------------------------------------------
// Whole programs

struct Finished {
  std::int64_t final_global = 0;
};

struct RuntimeError {
  FaultKind kind;
  Pos location;
};

struct Outcome {
  std::variant<Finished, RuntimeError> result;
  std::vector<TraceEvent> trace;
  Store store;
  std::size_t pending_posts = 0;
  std::size_t stack_depth = 0;
  std::uint64_t steps = 0;

  bool finished() const { return std::holds_alternative<Finished>(result); }
};

template <PostQueue Queue = AsynchList>
Outcome run_program(const Program& p, std::uint64_t budget = kDefaultBudget) {
  MachineState<Queue> st = initial_state<Queue>(p, budget);
  Outcome out;
  try {
    for (const auto& m : p.methods) run_top_level_method(m, st, p);
    dispatch_loop(st, p);
    out.result = Finished{st.store.global_value};
  } catch (const RuntimeFault& fault) {
    if (fault.kind() != FaultKind::provided_failed) {
      std::optional<std::string> active;
      if (!st.stack.empty()) active = st.stack.peek();
      st.emit(EventKind::error, std::move(active));
    }
    out.result = RuntimeError{fault.kind(), fault.where()};
  }
  out.trace = std::move(st.trace);
  out.store = std::move(st.store);
  out.pending_posts = st.postlist.size();
  out.stack_depth = st.stack.size();
  out.steps = st.step_count;
  return out;
}

// ---------------------------------------------------------------------------
// Trace output (JSON Lines)

inline nlohmann::ordered_json to_json(const TraceEvent& ev) {
  nlohmann::ordered_json j;
  j["seq"] = ev.seq;
  j["kind"] = to_string(ev.kind);
  if (ev.method) j["method"] = *ev.method;
  if (ev.value) j["value"] = *ev.value;
  if (ev.priority) j["priority"] = to_string(*ev.priority);
  return j;
}

inline void write_trace(std::ostream& os, const Outcome& out) {
  for (const auto& ev : out.trace) os << to_json(ev).dump() << '\n';
  if (const auto* f = std::get_if<Finished>(&out.result)) {
    nlohmann::ordered_json last;
    last["kind"] = "finished";
    last["global"] = f->final_global;
    os << last.dump() << '\n';
  }
}

}  // namespace asynchp
