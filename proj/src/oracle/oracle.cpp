#include "bbgi/oracle/oracle.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "bbgi/errors.hpp"
#include "bbgi/grammar/grammar_file.hpp"

extern char** environ;

namespace bbgi {

void OracleConfig::validate() const {
  if (!(per_query_timeout > 0)) throw std::invalid_argument("per_query_timeout must be positive");
  if (const auto* cmd = std::get_if<ExternalCommand>(&backend); cmd != nullptr && cmd->argv.empty())
    throw std::invalid_argument("oracle command is empty");
}

CommandBackend::CommandBackend(std::vector<std::string> argv) : argv_(std::move(argv)) {
  if (argv_.empty()) throw std::invalid_argument("oracle command is empty");
  // A child that exits before reading its input must not kill us.
  ::signal(SIGPIPE, SIG_IGN);
}

Verdict CommandBackend::run(const std::string& candidate, double timeout_seconds) {
  int fds[2];
  if (::pipe(fds) != 0) throw OracleUnavailable(std::string("pipe: ") + std::strerror(errno));
  ::fcntl(fds[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(fds[1], F_SETFL, O_NONBLOCK);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fds[0], 0);
  posix_spawn_file_actions_addclose(&actions, fds[0]);
  posix_spawn_file_actions_addopen(&actions, 1, "/dev/null", O_WRONLY, 0);
  posix_spawn_file_actions_addopen(&actions, 2, "/dev/null", O_WRONLY, 0);

  std::vector<char*> argv;
  for (auto& a : argv_) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = 0;
  int rc = ::posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(fds[0]);
  if (rc != 0) {
    ::close(fds[1]);
    throw OracleUnavailable("cannot spawn '" + argv_[0] + "': " + std::strerror(rc));
  }

  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_seconds);
  std::size_t written = 0;
  int out_fd = fds[1];
  if (candidate.empty()) {
    ::close(out_fd);
    out_fd = -1;
  }
  int status = 0;
  auto pause = std::chrono::microseconds(20);
  while (true) {
    if (out_fd >= 0) {
      ssize_t n = ::write(out_fd, candidate.data() + written, candidate.size() - written);
      if (n > 0) written += static_cast<std::size_t>(n);
      if (written == candidate.size() || (n < 0 && errno != EAGAIN && errno != EINTR)) {
        ::close(out_fd);
        out_fd = -1;
      }
    }
    pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid) break;
    if (std::chrono::steady_clock::now() > deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      if (out_fd >= 0) ::close(out_fd);
      return Verdict::Timeout;
    }
    if (out_fd >= 0) {
      pollfd p{out_fd, POLLOUT, 0};
      ::poll(&p, 1, 1);
    } else {
      std::this_thread::sleep_for(pause);
      if (pause < std::chrono::milliseconds(2)) pause *= 2;
    }
  }
  if (out_fd >= 0) ::close(out_fd);
  return WIFEXITED(status) && WEXITSTATUS(status) == 0 ? Verdict::Accept : Verdict::Reject;
}

ReferenceBackend::ReferenceBackend(Grammar grammar, Lexicon lexicon)
    : parser_(std::move(grammar)), lexicon_(std::move(lexicon)) {}

std::shared_ptr<ReferenceBackend> ReferenceBackend::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OracleUnavailable("cannot read reference grammar '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    auto [g, lex] = deserialize(ss.str());
    return std::make_shared<ReferenceBackend>(std::move(g), std::move(lex));
  } catch (const MalformedInput& e) {
    throw OracleUnavailable("reference grammar '" + path + "': " + e.what());
  }
}

Verdict ReferenceBackend::run(const std::string& candidate, double timeout_seconds) {
  auto lexed = lexicon_.tokenize(candidate);
  if (!lexed.ok()) return Verdict::Reject;
  std::vector<std::uint32_t> classes;
  classes.reserve(lexed.tokens.size());
  for (const auto& t : lexed.tokens) classes.push_back(t.cls);
  switch (parser_.recognize(classes, timeout_seconds)) {
    case ParseStatus::Parsed:
      return Verdict::Accept;
    case ParseStatus::Timeout:
      return Verdict::Timeout;
    default:
      return Verdict::Reject;
  }
}

Oracle::Oracle(std::shared_ptr<OracleBackend> backend, double per_query_timeout,
               std::size_t cache_capacity)
    : backend_(std::move(backend)),
      timeout_(per_query_timeout),
      capacity_(cache_capacity),
      threads_(std::max(1u, std::thread::hardware_concurrency())) {
  if (!(per_query_timeout > 0)) throw std::invalid_argument("per_query_timeout must be positive");
  logger_ = [](const std::string& line) { std::clog << line << '\n'; };
}

std::unique_ptr<Oracle> Oracle::from_config(const OracleConfig& config) {
  config.validate();
  std::shared_ptr<OracleBackend> backend;
  if (const auto* cmd = std::get_if<ExternalCommand>(&config.backend)) {
    backend = std::make_shared<CommandBackend>(cmd->argv);
  } else {
    backend = ReferenceBackend::from_file(std::get<ReferenceGrammarFile>(config.backend).path);
  }
  return std::make_unique<Oracle>(std::move(backend), config.per_query_timeout, config.cache_capacity);
}

void Oracle::set_logger(Logger logger) {
  std::lock_guard lock(mu_);
  logger_ = std::move(logger);
}

void Oracle::set_parallelism(std::size_t threads) { threads_ = std::max<std::size_t>(1, threads); }

OracleStats Oracle::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

bool Oracle::lookup(const std::string& candidate, bool& verdict) {
  std::lock_guard lock(mu_);
  ++stats_.requests;
  auto it = index_.find(candidate);
  if (it == index_.end()) return false;
  lru_.splice(lru_.begin(), lru_, it->second);
  verdict = it->second->second;
  ++stats_.cache_hits;
  return true;
}

void Oracle::store(const std::string& candidate, bool verdict, double seconds, bool timed_out) {
  Logger log;
  {
    std::lock_guard lock(mu_);
    ++stats_.total_queries;
    stats_.oracle_time += seconds;
    if (timed_out) {
      ++stats_.timeouts;
      log = logger_;
    }
    if (index_.find(candidate) == index_.end()) {
      lru_.emplace_front(candidate, verdict);
      index_[candidate] = lru_.begin();
      if (capacity_ > 0 && lru_.size() > capacity_) {
        index_.erase(lru_.back().first);
        lru_.pop_back();
      }
    }
  }
  if (log) {
    std::ostringstream os;
    os << "oracle timeout, counted as reject: candidate hash " << std::hex
       << std::hash<std::string>{}(candidate) << std::dec << ", " << candidate.size() << " bytes";
    log(os.str());
  }
}

bool Oracle::evaluate(const std::string& candidate) {
  auto t0 = std::chrono::steady_clock::now();
  Verdict v = backend_->run(candidate, timeout_);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool accepted = v == Verdict::Accept;
  store(candidate, accepted, secs, v == Verdict::Timeout);
  return accepted;
}

bool Oracle::query(const std::string& candidate) {
  bool verdict = false;
  if (lookup(candidate, verdict)) return verdict;
  return evaluate(candidate);
}

std::vector<bool> Oracle::batch_query(const std::vector<std::string>& candidates) {
  std::vector<bool> out(candidates.size(), false);
  std::vector<std::size_t> misses;
  {
    std::unordered_set<std::string_view> pending;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      bool verdict = false;
      if (lookup(candidates[i], verdict)) {
        out[i] = verdict;
      } else if (pending.insert(candidates[i]).second) {
        misses.push_back(i);
      }
    }
  }
  std::vector<char> verdicts(misses.size(), 0);
  const std::size_t workers = std::min(threads_, misses.size());
  if (workers <= 1) {
    for (std::size_t m = 0; m < misses.size(); ++m) verdicts[m] = evaluate(candidates[misses[m]]);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t m = w; m < misses.size(); m += workers)
            verdicts[m] = evaluate(candidates[misses[m]]);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }
  std::unordered_map<std::string_view, bool> fresh;
  for (std::size_t m = 0; m < misses.size(); ++m) fresh[candidates[misses[m]]] = verdicts[m] != 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto it = fresh.find(candidates[i]);
    if (it != fresh.end()) out[i] = it->second;
  }
  return out;
}

}  // namespace bbgi
