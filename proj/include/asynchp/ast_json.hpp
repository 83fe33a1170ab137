#pragma once

// JSON form of the syntax tree, as printed by `asynchp parse --emit-ast`.
//
//   program: {"global": g, "methods": [method...]}
//   method:  {"name", "local", "line", "col", "body": stmt}
//   stmt:    {"kind": "seq" | "assign-global" | "assign-local" | "provided"
//             | "if" | "while" | "run" | "return" | "synch", "line", "col", ...}
//   expr:    {"kind": "int" | "var" | "unary" | "binary", "line", "col", ...}

#include <stdexcept>
#include <string>

#include "json.hpp"

#include "asynchp/syntax.hpp"

namespace asynchp {

using ojson = nlohmann::ordered_json;

namespace detail {

inline void put_pos(ojson& j, Pos p) {
  j["line"] = p.line;
  j["col"] = p.col;
}

inline Pos get_pos(const ojson& j) {
  return {j.value("line", 0), j.value("col", 0)};
}

}  // namespace detail

inline ojson to_json(const Expr& e) {
  ojson j;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IntLit>) {
          j["kind"] = "int";
          j["value"] = n.value;
        } else if constexpr (std::is_same_v<T, Var>) {
          j["kind"] = "var";
          j["name"] = n.name;
        } else if constexpr (std::is_same_v<T, Unary>) {
          j["kind"] = "unary";
          j["op"] = to_string(n.op);
          j["operand"] = to_json(*n.operand);
        } else {
          j["kind"] = "binary";
          j["op"] = to_string(n.op);
          j["left"] = to_json(*n.left);
          j["right"] = to_json(*n.right);
        }
      },
      e.node);
  detail::put_pos(j, e.pos);
  return j;
}

inline ojson to_json(const Stmt& s) {
  ojson j;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Seq>) {
          j["kind"] = "seq";
          j["body"] = ojson::array();
          for (const auto& child : n.body) j["body"].push_back(to_json(child));
        } else if constexpr (std::is_same_v<T, AssignGlobal>) {
          j["kind"] = "assign-global";
          j["name"] = n.name;
          j["value"] = to_json(*n.value);
        } else if constexpr (std::is_same_v<T, AssignLocal>) {
          j["kind"] = "assign-local";
          j["name"] = n.name;
          j["value"] = to_json(*n.value);
        } else if constexpr (std::is_same_v<T, Provided>) {
          j["kind"] = "provided";
          j["cond"] = to_json(*n.cond);
        } else if constexpr (std::is_same_v<T, If>) {
          j["kind"] = "if";
          j["cond"] = to_json(*n.cond);
          j["then"] = to_json(*n.then_branch);
          j["else"] = to_json(*n.else_branch);
        } else if constexpr (std::is_same_v<T, While>) {
          j["kind"] = "while";
          j["cond"] = to_json(*n.cond);
          j["body"] = to_json(*n.body);
        } else if constexpr (std::is_same_v<T, Run>) {
          j["kind"] = "run";
          j["method"] = n.method;
          j["arg"] = to_json(*n.arg);
        } else if constexpr (std::is_same_v<T, Return>) {
          j["kind"] = "return";
        } else {
          j["kind"] = "synch";
          j["method"] = n.method;
          j["arg"] = to_json(*n.arg);
          j["priority"] = to_string(n.priority);
        }
      },
      s.node);
  detail::put_pos(j, s.pos);
  return j;
}

inline ojson to_json(const Program& p) {
  ojson j;
  j["global"] = p.global;
  j["methods"] = ojson::array();
  for (const auto& m : p.methods) {
    ojson mj;
    mj["name"] = m.name;
    mj["local"] = m.local;
    detail::put_pos(mj, m.pos);
    mj["body"] = to_json(m.body);
    j["methods"].push_back(std::move(mj));
  }
  return j;
}

// Inverse of to_json. Throws std::invalid_argument or a json exception on
// malformed input.
inline ExprRef expr_from_json(const ojson& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const Pos at = detail::get_pos(j);
  if (kind == "int") return make_int(j.at("value").get<std::int64_t>(), at);
  if (kind == "var") return make_var(j.at("name").get<std::string>(), at);
  const std::string op = j.at("op").get<std::string>();
  if (kind == "unary") {
    if (op != "-" && op != "!") throw std::invalid_argument("bad unary operator " + op);
    return make_unary(op == "-" ? UnaryOp::negate : UnaryOp::logical_not,
                      expr_from_json(j.at("operand")), at);
  }
  if (kind == "binary") {
    for (int i = 0; i <= static_cast<int>(BinaryOp::logical_or); ++i) {
      auto b = static_cast<BinaryOp>(i);
      if (to_string(b) == op)
        return make_binary(b, expr_from_json(j.at("left")), expr_from_json(j.at("right")), at);
    }
    throw std::invalid_argument("bad binary operator " + op);
  }
  throw std::invalid_argument("bad expression kind " + kind);
}

inline Stmt stmt_from_json(const ojson& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const Pos at = detail::get_pos(j);
  auto sub = [](const ojson& x) { return std::make_shared<const Stmt>(stmt_from_json(x)); };
  if (kind == "seq") {
    Seq seq;
    for (const auto& child : j.at("body")) seq.body.push_back(stmt_from_json(child));
    return {at, std::move(seq)};
  }
  if (kind == "assign-global")
    return {at, AssignGlobal{j.at("name").get<std::string>(), expr_from_json(j.at("value"))}};
  if (kind == "assign-local")
    return {at, AssignLocal{j.at("name").get<std::string>(), expr_from_json(j.at("value"))}};
  if (kind == "provided") return {at, Provided{expr_from_json(j.at("cond"))}};
  if (kind == "if")
    return {at, If{expr_from_json(j.at("cond")), sub(j.at("then")), sub(j.at("else"))}};
  if (kind == "while") return {at, While{expr_from_json(j.at("cond")), sub(j.at("body"))}};
  if (kind == "run") return {at, Run{j.at("method").get<std::string>(), expr_from_json(j.at("arg"))}};
  if (kind == "return") return {at, Return{}};
  if (kind == "synch") {
    auto prio = priority_from_string(j.at("priority").get<std::string>());
    if (!prio) throw std::invalid_argument("bad priority");
    return {at, Synch{j.at("method").get<std::string>(), expr_from_json(j.at("arg")), *prio}};
  }
  throw std::invalid_argument("bad statement kind " + kind);
}

inline Program program_from_json(const ojson& j) {
  Program p;
  p.global = j.at("global").get<std::string>();
  for (const auto& mj : j.at("methods")) {
    p.methods.push_back(Method{detail::get_pos(mj), mj.at("name").get<std::string>(),
                               mj.at("local").get<std::string>(), stmt_from_json(mj.at("body"))});
  }
  return p;
}

}  // namespace asynchp
