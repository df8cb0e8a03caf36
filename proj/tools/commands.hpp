#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bbgi::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kEmptyCorpus = 2,
  kOracleUnavailable = 3,
  kBudgetExhausted = 4,
  kMalformedInput = 5,
  kUntokenizable = 6,
  kNoParse = 7,
  kRejectedExample = 8,
  kIoError = 9,
  kInternal = 70,
};

const char* exit_name(int code);

struct OracleChoice {
  std::string command;
  std::string grammar_path;
  std::string builtin;
  double timeout = 10.0;
};

struct Budgets {
  std::size_t forest = 10000;
  std::size_t lstar_rounds = 50;
  std::size_t validation_rounds = 20;
  std::size_t clique = 200000;
  double wall_seconds = 48.0 * 3600.0;
};

struct RunConfig {
  std::string train_dir;
  std::string test_dir;
  OracleChoice oracle;
  std::uint64_t seed = 1;
  Budgets budgets;
  std::string out;
  std::string report;
};

/// Result of one command: exit code plus the fields of its status line.
struct Outcome {
  int code = kOk;
  std::string message;
  std::vector<std::pair<std::string, std::string>> fields;
};

/// Seed for a named pipeline stage, derived from the run seed.
std::uint64_t sub_seed(std::uint64_t seed, const std::string& name);

/// Files of `dir` in name order, one example per file.
std::vector<std::string> read_corpus(const std::string& dir);

Outcome cmd_infer(const RunConfig& config);
Outcome cmd_evaluate(const RunConfig& config, const std::string& grammar_path, bool with_sampling);
Outcome cmd_tokenize(const std::string& grammar_path, const std::string& input_path);
Outcome cmd_parse(const std::string& grammar_path, const std::string& input_path);
Outcome cmd_stats(const std::string& grammar_path);
Outcome cmd_export_builtin(const std::string& language, const std::string& dir, std::size_t train,
                           std::size_t test, std::uint64_t seed);

/// `bbgi-status {...}` on one line.
std::string status_line(const std::string& command, const Outcome& outcome);

}  // namespace bbgi::cli
