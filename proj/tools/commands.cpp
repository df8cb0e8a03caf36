#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "bbgi/errors.hpp"
#include "bbgi/eval/eval.hpp"
#include "bbgi/grammar/grammar_file.hpp"
#include "bbgi/lexinf/lexinf.hpp"
#include "bbgi/oracle/reference_languages.hpp"
#include "bbgi/syninf/syninf.hpp"
#include "json.hpp"

namespace bbgi::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct WallClockExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Forwards to another backend until the run deadline passes.
class DeadlineBackend : public OracleBackend {
 public:
  DeadlineBackend(std::shared_ptr<OracleBackend> inner, std::chrono::steady_clock::time_point deadline)
      : inner_(std::move(inner)), deadline_(deadline) {}

  Verdict run(const std::string& candidate, double timeout_seconds) override {
    if (std::chrono::steady_clock::now() > deadline_) throw WallClockExceeded("wall-clock budget exhausted");
    return inner_->run(candidate, timeout_seconds);
  }

 private:
  std::shared_ptr<OracleBackend> inner_;
  std::chrono::steady_clock::time_point deadline_;
};

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::unique_ptr<Oracle> make_oracle(const OracleChoice& choice, double wall_seconds) {
  const int chosen = !choice.command.empty() + !choice.grammar_path.empty() + !choice.builtin.empty();
  if (chosen != 1)
    throw std::invalid_argument("exactly one of --oracle-cmd, --oracle-grammar, --oracle-builtin is required");
  if (choice.timeout <= 0) throw std::invalid_argument("--timeout must be positive");
  std::shared_ptr<OracleBackend> backend;
  if (!choice.command.empty()) {
    auto argv = split_words(choice.command);
    if (argv.empty()) throw std::invalid_argument("empty --oracle-cmd");
    backend = std::make_shared<CommandBackend>(argv);
  } else if (!choice.grammar_path.empty()) {
    backend = ReferenceBackend::from_file(choice.grammar_path);
  } else {
    auto lang = builtin_language(choice.builtin);
    backend = std::make_shared<ReferenceBackend>(lang.grammar, lang.lexicon);
  }
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(std::min(wall_seconds, 1e9)));
  backend = std::make_shared<DeadlineBackend>(std::move(backend), deadline);
  return std::make_unique<Oracle>(std::move(backend), choice.timeout);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << data)) throw IoError("cannot write '" + path + "'");
}

std::pair<Grammar, Lexicon> load_grammar(const std::string& path) { return deserialize(read_file(path)); }

Json stats_json(const GrammarStats& s) {
  return {{"NT", s.nonterminals}, {"T", s.terminals}, {"A", s.rules}, {"lA", s.mean_rule_length},
          {"S", s.total_length}};
}

Json oracle_json(const OracleStats& s) {
  return {{"total_queries", s.total_queries}, {"cache_hits", s.cache_hits}, {"requests", s.requests}};
}

template <class F>
Outcome guarded(F&& body) {
  try {
    return body();
  } catch (const EmptyCorpus& e) {
    return {kEmptyCorpus, e.what(), {}};
  } catch (const OracleUnavailable& e) {
    return {kOracleUnavailable, e.what(), {}};
  } catch (const WallClockExceeded& e) {
    return {kBudgetExhausted, e.what(), {}};
  } catch (const MalformedInput& e) {
    return {kMalformedInput, e.what(), {}};
  } catch (const IoError& e) {
    return {kIoError, e.what(), {}};
  } catch (const fs::filesystem_error& e) {
    return {kIoError, e.what(), {}};
  } catch (const std::invalid_argument& e) {
    return {kUsage, e.what(), {}};
  } catch (const std::exception& e) {
    return {kInternal, e.what(), {}};
  }
}

void dump_tree(std::ostream& out, const ParseTree& t, const Grammar& g, const Lexicon& lex, int depth) {
  out << std::string(static_cast<std::size_t>(depth) * 2, ' ');
  if (t.is_token()) {
    out << lex.classes[t.id].name << " \"" << escape_bytes(t.lexeme) << "\"\n";
    return;
  }
  out << g.nonterminals[t.id] << "\n";
  for (const auto& c : t.children) dump_tree(out, c, g, lex, depth + 1);
}

}  // namespace

const char* exit_name(int code) {
  switch (code) {
    case kOk: return "ok";
    case kUsage: return "usage";
    case kEmptyCorpus: return "empty-corpus";
    case kOracleUnavailable: return "oracle-unavailable";
    case kBudgetExhausted: return "budget-exhausted";
    case kMalformedInput: return "malformed-input";
    case kUntokenizable: return "untokenizable";
    case kNoParse: return "no-parse";
    case kRejectedExample: return "rejected-example";
    case kIoError: return "io-error";
    default: return "internal-error";
  }
}

std::uint64_t sub_seed(std::uint64_t seed, const std::string& name) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : name) h = (h ^ c) * 1099511628211ULL;
  std::uint64_t z = seed ^ h;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::string> read_corpus(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: '" + dir + "'");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename().string().front() != '.') files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<std::string> out;
  for (const auto& f : files) out.push_back(read_file(f.string()));
  return out;
}

Outcome cmd_infer(const RunConfig& config) {
  return guarded([&]() -> Outcome {
    const auto t0 = std::chrono::steady_clock::now();
    if (config.out.empty()) throw std::invalid_argument("--out is required");
    auto train = read_corpus(config.train_dir);
    if (train.empty()) throw EmptyCorpus("no training examples in '" + config.train_dir + "'");
    auto oracle = make_oracle(config.oracle, config.budgets.wall_seconds);

    const auto verdicts = oracle->batch_query(train);
    for (std::size_t i = 0; i < train.size(); ++i)
      if (!verdicts[i]) return {kRejectedExample, "training example " + std::to_string(i) + " is rejected", {}};

    const std::uint64_t lex_seed = sub_seed(config.seed, "lexinf");
    const std::uint64_t syn_seed = sub_seed(config.seed, "syninf");
    const std::uint64_t eval_seed = sub_seed(config.seed, "eval");

    LexInferOptions lo;
    lo.forest_budget = config.budgets.forest;
    lo.max_validation_rounds = config.budgets.validation_rounds;
    lo.lstar.max_rounds = config.budgets.lstar_rounds;
    auto lex = infer_lexicon(train, *oracle, lex_seed, lo);
    const auto lex_queries = oracle->stats();

    SynInferOptions so;
    so.forest_budget = config.budgets.forest;
    so.merge.clique_budget = config.budgets.clique;
    bool cliques_complete = true;
    so.on_merge = [&](const MergeEvent& e) { cliques_complete = cliques_complete && e.report.enumeration_complete; };
    auto syn = infer_grammar(train, lex.lexicon, *oracle, syn_seed, so);

    write_file(config.out, serialize(syn.grammar, lex.lexicon));

    Json report;
    report["command"] = "infer";
    report["seed"] = config.seed;
    report["sub_seeds"] = {{"lexinf", lex_seed}, {"syninf", syn_seed}, {"eval", eval_seed}};
    report["train_count"] = train.size();
    report["lexical"] = {{"classes", lex.lexicon.classes.size()},
                         {"short_samples", lex.short_samples.size()},
                         {"counterexamples", lex.counterexamples.size()},
                         {"validation_rounds", lex.validation_rounds},
                         {"complete", lex.complete},
                         {"queries", lex_queries.total_queries}};
    report["syntactic"] = {{"samples", syn.samples.size()},
                           {"merges", syn.merges},
                           {"cliques_examined", syn.cliques_examined},
                           {"clique_enumeration_complete", cliques_complete},
                           {"matrix_rows", syn.matrix_rows},
                           {"matrix_cols", syn.matrix_cols},
                           {"training_parsed", syn.training_parsed},
                           {"complete", syn.complete}};
    report["grammar"] = stats_json(stats(syn.grammar));
    report["oracle"] = oracle_json(oracle->stats());
    if (!config.test_dir.empty()) {
      auto tests = read_corpus(config.test_dir);
      auto ev = evaluate(syn.grammar, lex.lexicon, tests, *oracle, eval_seed);
      report["evaluation"] = Json::parse(to_json(ev));
    }
    const std::string report_path = config.report.empty() ? config.out + ".report.json" : config.report;
    write_file(report_path, report.dump(2) + "\n");

    const bool complete = syn.complete && lex.complete;
    Outcome out{complete ? kOk : kBudgetExhausted,
                complete ? "grammar written" : "budget exhausted before every example was covered",
                {}};
    out.fields = {{"grammar", config.out},
                  {"report", report_path},
                  {"rules", std::to_string(syn.grammar.rules.size())},
                  {"training_parsed", std::to_string(syn.training_parsed) + "/" + std::to_string(train.size())},
                  {"queries", std::to_string(oracle->stats().total_queries)},
                  {"seconds", std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count())}};
    return out;
  });
}

Outcome cmd_evaluate(const RunConfig& config, const std::string& grammar_path, bool with_sampling) {
  return guarded([&]() -> Outcome {
    auto [grammar, lexicon] = load_grammar(grammar_path);
    auto tests = read_corpus(config.test_dir);
    if (tests.empty()) throw EmptyCorpus("no test programs in '" + config.test_dir + "'");
    auto oracle = make_oracle(config.oracle, config.budgets.wall_seconds);
    EvalOptions opts;
    opts.with_sampling = with_sampling;
    auto rep = evaluate(grammar, lexicon, tests, *oracle, sub_seed(config.seed, "eval"), opts);
    const std::string json = to_json(rep);
    if (!config.out.empty()) write_file(config.out, json + "\n");
    std::cout << to_table(rep);
    Outcome out{kOk, "evaluated", {}};
    out.fields = {{"recall", std::to_string(rep.recall)},
                  {"swap_precision", rep.swap_precision ? std::to_string(*rep.swap_precision) : "n/a"},
                  {"f1", std::to_string(rep.f1)}};
    return out;
  });
}

Outcome cmd_tokenize(const std::string& grammar_path, const std::string& input_path) {
  return guarded([&]() -> Outcome {
    auto [grammar, lexicon] = load_grammar(grammar_path);
    const std::string input = read_file(input_path);
    auto r = lexicon.tokenize(input);
    if (!r.ok())
      return {kUntokenizable, "no token matches at offset " + std::to_string(*r.error_offset),
              {{"offset", std::to_string(*r.error_offset)}}};
    for (const auto& t : r.tokens) std::cout << lexicon.classes[t.cls].name << " \"" << escape_bytes(t.lexeme) << "\"\n";
    return {kOk, "tokenized", {{"tokens", std::to_string(r.tokens.size())}}};
  });
}

Outcome cmd_parse(const std::string& grammar_path, const std::string& input_path) {
  return guarded([&]() -> Outcome {
    auto [grammar, lexicon] = load_grammar(grammar_path);
    const std::string input = read_file(input_path);
    auto r = lexicon.tokenize(input);
    if (!r.ok())
      return {kUntokenizable, "no token matches at offset " + std::to_string(*r.error_offset),
              {{"offset", std::to_string(*r.error_offset)}}};
    std::vector<std::uint32_t> classes;
    std::vector<std::string> lexemes;
    for (const auto& t : r.tokens) {
      classes.push_back(t.cls);
      lexemes.push_back(t.lexeme);
    }
    EarleyParser parser(grammar);
    auto res = parser.parse(classes, kRecallTimeout, &lexemes);
    if (!res.parsed())
      return {kNoParse, res.status == ParseStatus::Timeout ? "parse timed out" : "input is not in the language", {}};
    dump_tree(std::cout, res.tree, grammar, lexicon, 0);
    return {kOk, "parsed", {{"tokens", std::to_string(classes.size())}}};
  });
}

Outcome cmd_stats(const std::string& grammar_path) {
  return guarded([&]() -> Outcome {
    auto [grammar, lexicon] = load_grammar(grammar_path);
    Json j = stats_json(stats(grammar));
    j["classes"] = lexicon.classes.size();
    std::cout << j.dump() << "\n" << ebnf(grammar, lexicon);
    return {kOk, "stats", {}};
  });
}

Outcome cmd_export_builtin(const std::string& language, const std::string& dir, std::size_t train,
                           std::size_t test, std::uint64_t seed) {
  return guarded([&]() -> Outcome {
    auto lang = builtin_language(language);
    const fs::path root(dir);
    write_file((root / "grammar.bbg").string(), serialize(lang.grammar, lang.lexicon));
    const auto opts = default_generate_options(language);
    auto emit = [&](const char* sub, std::size_t count, std::uint64_t s) {
      auto programs = generate_corpus(lang, count, s, opts);
      char name[32];
      for (std::size_t i = 0; i < programs.size(); ++i) {
        std::snprintf(name, sizeof name, "%05zu.txt", i);
        write_file((root / sub / name).string(), programs[i]);
      }
    };
    emit("train", train, sub_seed(seed, "train"));
    emit("test", test, sub_seed(seed, "test"));
    return {kOk, "exported", {{"dir", dir}}};
  });
}

std::string status_line(const std::string& command, const Outcome& outcome) {
  Json j;
  j["command"] = command;
  j["code"] = outcome.code;
  j["status"] = exit_name(outcome.code);
  j["message"] = outcome.message;
  for (const auto& [k, v] : outcome.fields) j[k] = v;
  return "bbgi-status " + j.dump();
}

}  // namespace bbgi::cli
