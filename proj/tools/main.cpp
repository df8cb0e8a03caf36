#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

void add_oracle_flags(CLI::App& cmd, bbgi::cli::OracleChoice& o) {
  cmd.add_option("--oracle-cmd", o.command, "Command reading a candidate on stdin; exit 0 accepts");
  cmd.add_option("--oracle-grammar", o.grammar_path, "Reference grammar file used as the oracle");
  cmd.add_option("--oracle-builtin", o.builtin, "Built-in oracle: tinyc, json or parens");
  cmd.add_option("--timeout", o.timeout, "Per-query oracle timeout in seconds");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace bbgi::cli;
  CLI::App app{"Black-box grammar inference from examples and a membership oracle"};
  app.require_subcommand(1);

  RunConfig config;
  std::string grammar_path, input_path, language, dir;
  bool with_sampling = false;
  std::size_t train_count = 40, test_count = 500;

  auto* infer = app.add_subcommand("infer", "Infer a grammar from training examples");
  infer->add_option("--train", config.train_dir, "Directory with one example per file")->required();
  infer->add_option("--test", config.test_dir, "Optional test directory evaluated after inference");
  infer->add_option("--out", config.out, "Grammar file to write")->required();
  infer->add_option("--report", config.report, "Run report path (default <out>.report.json)");
  infer->add_option("--seed", config.seed, "Run seed");
  infer->add_option("--budget-forest", config.budgets.forest, "Predicate evaluations per forest search");
  infer->add_option("--budget-lstar", config.budgets.lstar_rounds, "Equivalence rounds per L* run");
  infer->add_option("--budget-validation", config.budgets.validation_rounds, "Lexical validation rounds");
  infer->add_option("--budget-clique", config.budgets.clique, "Clique enumeration expansions");
  infer->add_option("--budget-wall", config.budgets.wall_seconds, "Wall-clock budget in seconds");
  add_oracle_flags(*infer, config.oracle);

  auto* evaluate = app.add_subcommand("evaluate", "Score a grammar on test programs");
  evaluate->add_option("--grammar", grammar_path, "Grammar file")->required();
  evaluate->add_option("--test", config.test_dir, "Directory with one test program per file")->required();
  evaluate->add_option("--out", config.out, "JSON report path");
  evaluate->add_option("--seed", config.seed, "Run seed");
  evaluate->add_option("--budget-wall", config.budgets.wall_seconds, "Wall-clock budget in seconds");
  evaluate->add_flag("--sampling", with_sampling, "Also report sampling precision");
  add_oracle_flags(*evaluate, config.oracle);

  auto* tokenize = app.add_subcommand("tokenize", "Print the token list of an input file");
  tokenize->add_option("--grammar", grammar_path, "Grammar file")->required();
  tokenize->add_option("input", input_path, "Input file")->required();

  auto* parse = app.add_subcommand("parse", "Print the parse tree of an input file");
  parse->add_option("--grammar", grammar_path, "Grammar file")->required();
  parse->add_option("input", input_path, "Input file")->required();

  auto* stats = app.add_subcommand("stats", "Print grammar size statistics");
  stats->add_option("--grammar", grammar_path, "Grammar file")->required();

  auto* exp = app.add_subcommand("export-builtin", "Write a built-in language's grammar file and corpora");
  exp->add_option("--language", language, "tinyc, json or parens")->required();
  exp->add_option("--out", dir, "Output directory")->required();
  exp->add_option("--train-count", train_count, "Training programs");
  exp->add_option("--test-count", test_count, "Test programs");
  exp->add_option("--seed", config.seed, "Generation seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << status_line("", {kUsage, e.what(), {}}) << "\n";
    return kUsage;
  }

  std::string name;
  Outcome outcome;
  if (*infer) {
    name = "infer";
    outcome = cmd_infer(config);
  } else if (*evaluate) {
    name = "evaluate";
    outcome = cmd_evaluate(config, grammar_path, with_sampling);
  } else if (*tokenize) {
    name = "tokenize";
    outcome = cmd_tokenize(grammar_path, input_path);
  } else if (*parse) {
    name = "parse";
    outcome = cmd_parse(grammar_path, input_path);
  } else if (*stats) {
    name = "stats";
    outcome = cmd_stats(grammar_path);
  } else {
    name = "export-builtin";
    outcome = cmd_export_builtin(language, dir, train_count, test_count, config.seed);
  }
  std::cout.flush();
  std::cerr << status_line(name, outcome) << "\n";
  return outcome.code;
}
