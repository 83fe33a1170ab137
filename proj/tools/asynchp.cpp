#include <cstdint>
#include <iostream>
#include <limits>
#include <string>

#include "CLI11.hpp"

#include "asynchp/cli.hpp"

int main(int argc, char** argv) {
  using asynchp::cli::CliConfig;
  using asynchp::cli::Command;

  CLI::App app{"Parse, run and analyze prioritized asynchronous programs (.ap)"};
  app.require_subcommand(1);
  CliConfig cfg;

  auto* run = app.add_subcommand("run", "Run a program and print the final global value");
  run->add_option("file", cfg.input, "Program file")->required();
  run->add_option("--budget", cfg.budget, "Step budget")->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
  run->add_option("--trace", cfg.trace_path, "Write a JSON Lines trace to FILE");
  run->add_flag("--dump-final-store", cfg.dump_final_store, "Also print the final store as JSON");

  auto* parse = app.add_subcommand("parse", "Check a program and print it canonically");
  parse->add_option("file", cfg.input, "Program file")->required();
  parse->add_flag("--emit-ast", cfg.emit_ast, "Print the syntax tree as JSON");

  auto* analyze = app.add_subcommand("analyze", "Report effect-free methods and dead posts");
  analyze->add_option("file", cfg.input, "Program file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : asynchp::cli::kExitInput;
  }

  if (run->parsed()) cfg.command = Command::run;
  else if (parse->parsed()) cfg.command = Command::parse;
  else cfg.command = Command::analyze;
  return asynchp::cli::run(cfg);
}
