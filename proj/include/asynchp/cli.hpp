#pragma once

// Subcommands behind the `asynchp` executable. Exit codes: 0 success,
// 1 runtime error, 2 unreadable/invalid input or bad usage.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "asynchp/analysis.hpp"
#include "asynchp/ast_json.hpp"
#include "asynchp/interp.hpp"
#include "asynchp/syntax.hpp"

namespace asynchp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInput = 2;

enum class Command { run, parse, analyze };

struct CliConfig {
  Command command = Command::run;
  std::string input;
  std::optional<std::string> trace_path;
  std::uint64_t budget = kDefaultBudget;
  bool dump_final_store = false;
  bool emit_ast = false;
};

namespace detail {

// Reads, parses and scope-checks `path`. Diagnostics go to `err`.
inline std::optional<Program> load(const std::string& path, std::ostream& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err << path << ": cannot read file\n";
    return std::nullopt;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  Program p;
  try {
    p = parse_program(buf.str());
  } catch (const ParseError& e) {
    err << path << ":" << e.what() << '\n';
    return std::nullopt;
  }
  auto errors = validate_scopes(p);
  if (!errors.empty()) {
    for (const auto& e : errors) err << path << ":" << e.message() << '\n';
    return std::nullopt;
  }
  return p;
}

}  // namespace detail

inline int cmd_parse(const std::string& path, bool emit_ast, std::ostream& out, std::ostream& err) {
  auto p = detail::load(path, err);
  if (!p) return kExitInput;
  if (emit_ast)
    out << to_json(*p).dump(2) << '\n';
  else
    out << pretty_print(*p);
  return kExitOk;
}

inline int cmd_run(const std::string& path, std::uint64_t budget,
                   const std::optional<std::string>& trace_path, bool dump_final_store,
                   std::ostream& out, std::ostream& err) {
  if (budget < 1) {
    err << "budget must be at least 1\n";
    return kExitInput;
  }
  auto p = detail::load(path, err);
  if (!p) return kExitInput;

  const Outcome outcome = run_program(*p, budget);

  if (trace_path) {
    std::ofstream trace(*trace_path, std::ios::binary | std::ios::trunc);
    if (!trace) {
      err << *trace_path << ": cannot write trace\n";
      return kExitInput;
    }
    write_trace(trace, outcome);
  }

  if (const auto* failure = std::get_if<RuntimeError>(&outcome.result)) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(failure->kind);
    j["line"] = failure->location.line;
    j["col"] = failure->location.col;
    out << j.dump() << '\n';
    return kExitRuntime;
  }

  out << std::get<Finished>(outcome.result).final_global << '\n';
  if (dump_final_store) {
    nlohmann::ordered_json store;
    store["global"] = outcome.store.global_value;
    store["locals"] = nlohmann::ordered_json::object();
    for (const auto& m : p->methods) store["locals"][m.name] = outcome.store.local(m.name);
    out << store.dump() << '\n';
  }
  return kExitOk;
}

inline int cmd_analyze(const std::string& path, std::ostream& out, std::ostream& err) {
  auto p = detail::load(path, err);
  if (!p) return kExitInput;
  out << to_json(dead_posts(*p)).dump() << '\n';
  return kExitOk;
}

inline int run(const CliConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  switch (cfg.command) {
    case Command::parse: return cmd_parse(cfg.input, cfg.emit_ast, out, err);
    case Command::run:
      return cmd_run(cfg.input, cfg.budget, cfg.trace_path, cfg.dump_final_store, out, err);
    case Command::analyze: return cmd_analyze(cfg.input, out, err);
  }
  return kExitInput;
}

}  // namespace asynchp::cli
