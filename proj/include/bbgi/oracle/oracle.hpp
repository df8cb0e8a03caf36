#pragma once

#include <cstddef>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "bbgi/grammar/earley.hpp"
#include "bbgi/grammar/grammar.hpp"
#include "bbgi/lexinf/lexicon.hpp"

namespace bbgi {

struct ExternalCommand {
  std::vector<std::string> argv;
};

struct ReferenceGrammarFile {
  std::string path;
};

struct OracleConfig {
  std::variant<ExternalCommand, ReferenceGrammarFile> backend;
  double per_query_timeout = 10.0;
  /// 0 means unbounded.
  std::size_t cache_capacity = 0;

  /// Throws std::invalid_argument on a nonpositive timeout or empty argv.
  void validate() const;
};

struct OracleStats {
  /// Candidates sent to the backend, i.e. cache misses.
  std::size_t total_queries = 0;
  std::size_t cache_hits = 0;
  /// All query requests, hits included.
  std::size_t requests = 0;
  std::size_t timeouts = 0;
  double oracle_time = 0.0;
};

enum class Verdict { Accept, Reject, Timeout };

class OracleBackend {
 public:
  virtual ~OracleBackend() = default;
  /// Must be safe to call from several threads at once.
  virtual Verdict run(const std::string& candidate, double timeout_seconds) = 0;
};

/// Candidate on stdin, exit status 0 accepts. One process per query.
class CommandBackend : public OracleBackend {
 public:
  explicit CommandBackend(std::vector<std::string> argv);
  Verdict run(const std::string& candidate, double timeout_seconds) override;

 private:
  std::vector<std::string> argv_;
};

/// In-process language: tokenize with the lexicon, then Earley-parse.
class ReferenceBackend : public OracleBackend {
 public:
  ReferenceBackend(Grammar grammar, Lexicon lexicon);
  static std::shared_ptr<ReferenceBackend> from_file(const std::string& path);
  Verdict run(const std::string& candidate, double timeout_seconds) override;

  const Lexicon& lexicon() const { return lexicon_; }
  const Grammar& grammar() const { return parser_.grammar(); }

 private:
  EarleyParser parser_;
  Lexicon lexicon_;
};

/// Membership oracle with an LRU verdict cache and query accounting.
/// Thread-safe; verdicts are assumed to be pure functions of the candidate.
class Oracle {
 public:
  using Logger = std::function<void(const std::string&)>;

  Oracle(std::shared_ptr<OracleBackend> backend, double per_query_timeout = 10.0,
         std::size_t cache_capacity = 0);
  Oracle(const Oracle&) = delete;
  Oracle& operator=(const Oracle&) = delete;

  /// Throws OracleUnavailable when the backend cannot be created.
  static std::unique_ptr<Oracle> from_config(const OracleConfig& config);

  bool query(const std::string& candidate);
  std::vector<bool> batch_query(const std::vector<std::string>& candidates);

  OracleStats stats() const;
  void set_logger(Logger logger);
  /// Worker threads used for cache misses in a batch; default is the core count.
  void set_parallelism(std::size_t threads);

 private:
  std::shared_ptr<OracleBackend> backend_;
  double timeout_;
  std::size_t capacity_;
  std::size_t threads_;
  Logger logger_;

  mutable std::mutex mu_;
  std::list<std::pair<std::string, bool>> lru_;
  std::unordered_map<std::string, std::list<std::pair<std::string, bool>>::iterator> index_;
  OracleStats stats_;

  bool lookup(const std::string& candidate, bool& verdict);
  void store(const std::string& candidate, bool verdict, double seconds, bool timed_out);
  bool evaluate(const std::string& candidate);
};

}  // namespace bbgi
