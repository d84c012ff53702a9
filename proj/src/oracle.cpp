#include "fairaudit/oracle.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>
#include <json.hpp>

#include "fairaudit/error.hpp"

namespace fairaudit {

using nlohmann::json;

std::string_view to_string(ScoringMode mode) {
  return mode == ScoringMode::Masked ? "masked" : "pseudo_likelihood";
}

ScoringMode parse_scoring_mode(std::string_view text) {
  if (text == "masked") return ScoringMode::Masked;
  if (text == "pseudo_likelihood") return ScoringMode::PseudoLikelihood;
  fail(ErrorCode::InvalidArgument, fmt::format("unknown scoring mode '{}'", text));
}

std::size_t count_masks(std::string_view text) {
  std::size_t n = 0;
  for (auto pos = text.find(kMaskToken); pos != std::string_view::npos;
       pos = text.find(kMaskToken, pos + kMaskToken.size())) {
    ++n;
  }
  return n;
}

std::string encode_query(const OracleQuery& q) {
  nlohmann::ordered_json obj;
  obj["id"] = q.id;
  obj["text"] = q.text;
  obj["candidates"] = q.candidates;
  obj["scoring_mode"] = to_string(q.mode);
  obj["target"] = {{"mask_index", q.mask_index}};
  return obj.dump();
}

OracleQuery decode_query(std::string_view line) {
  try {
    const auto obj = json::parse(line);
    OracleQuery q;
    q.id = obj.at("id").get<std::int64_t>();
    q.text = obj.at("text").get<std::string>();
    q.candidates = obj.at("candidates").get<std::vector<std::string>>();
    q.mode = parse_scoring_mode(obj.at("scoring_mode").get<std::string>());
    q.mask_index = obj.at("target").at("mask_index").get<std::size_t>();
    return q;
  } catch (const json::exception& e) {
    fail(ErrorCode::OracleFailure, fmt::format("malformed oracle request: {}", e.what()));
  }
}

std::string encode_response(const OracleResponse& r) {
  nlohmann::ordered_json obj;
  obj["id"] = r.id;
  if (r.error) {
    obj["error"] = *r.error;
  } else {
    obj["log_probs"] = nlohmann::ordered_json::object();
    for (const auto& [cand, lp] : r.log_probs) obj["log_probs"][cand] = lp;
  }
  return obj.dump();
}

OracleResponse decode_response(std::string_view line) {
  try {
    const auto obj = json::parse(line);
    OracleResponse r;
    r.id = obj.at("id").get<std::int64_t>();
    if (obj.contains("error")) {
      r.error = obj.at("error").get<std::string>();
      return r;
    }
    for (const auto& [cand, lp] : obj.at("log_probs").items()) {
      r.log_probs[cand] = lp.get<double>();
    }
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::OracleFailure, fmt::format("malformed oracle response: {}", e.what()));
  }
}

std::vector<OracleResponse> ask(Oracle& oracle, std::span<const OracleQuery> queries) {
  std::unordered_map<std::int64_t, std::size_t> slot;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& q = queries[i];
    if (q.candidates.empty()) fail(ErrorCode::InvalidArgument, fmt::format("query {} has no candidates", q.id));
    if (q.mask_index >= count_masks(q.text)) {
      fail(ErrorCode::InvalidArgument,
           fmt::format("query {}: mask_index {} but text has {} [MASK]", q.id, q.mask_index,
                       count_masks(q.text)));
    }
    if (!slot.emplace(q.id, i).second) {
      fail(ErrorCode::InvalidArgument, fmt::format("duplicate query id {}", q.id));
    }
  }
  auto responses = oracle.query(queries);
  std::vector<std::optional<OracleResponse>> ordered(queries.size());
  for (auto& r : responses) {
    auto it = slot.find(r.id);
    if (it == slot.end()) fail(ErrorCode::OracleFailure, fmt::format("response for unknown id {}", r.id));
    if (ordered[it->second]) fail(ErrorCode::OracleFailure, fmt::format("duplicate response for id {}", r.id));
    if (r.error) fail(ErrorCode::OracleFailure, fmt::format("query {}: {}", r.id, *r.error));
    for (const auto& cand : queries[it->second].candidates) {
      auto lp = r.log_probs.find(cand);
      if (lp == r.log_probs.end()) {
        fail(ErrorCode::OracleFailure,
             fmt::format("query {}: no log-probability for candidate '{}'", r.id, cand));
      }
      if (!std::isfinite(lp->second) || lp->second > 0.0) {
        fail(ErrorCode::OracleFailure,
             fmt::format("query {}: log-probability {} for '{}' is not finite and <= 0", r.id,
                         lp->second, cand));
      }
    }
    ordered[it->second] = std::move(r);
  }
  std::vector<OracleResponse> out;
  out.reserve(queries.size());
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (!ordered[i]) fail(ErrorCode::OracleFailure, fmt::format("no response for query {}", queries[i].id));
    out.push_back(std::move(*ordered[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string TableOracle::context_key(ScoringMode mode, std::size_t mask_index,
                                     const std::string& text) {
  return fmt::format("{}|{}|{}", to_string(mode), mask_index, text);
}

void TableOracle::set(ScoringMode mode, std::size_t mask_index, const std::string& text,
                      const std::string& candidate, double probability) {
  if (!(probability > 0.0 && probability <= 1.0)) {
    fail(ErrorCode::InvalidArgument,
         fmt::format("table probability {} for '{}' not in (0, 1]", probability, candidate));
  }
  table_[context_key(mode, mask_index, text)][candidate] = probability;
}

double TableOracle::lookup(ScoringMode mode, std::size_t mask_index, const std::string& text,
                           const std::string& candidate) const {
  const auto key = context_key(mode, mask_index, text);
  auto it = table_.find(key);
  if (it == table_.end()) fail(ErrorCode::MissingEntry, "no table entry for context '" + key + "'");
  auto c = it->second.find(candidate);
  if (c == it->second.end()) {
    fail(ErrorCode::MissingEntry,
         "no table entry for candidate '" + candidate + "' in context '" + key + "'");
  }
  return c->second;
}

std::vector<std::string> TableOracle::vocabulary() const {
  std::set<std::string> words;
  for (const auto& [key, probs] : table_) {
    for (const auto& [cand, p] : probs) words.insert(cand);
  }
  return {words.begin(), words.end()};
}

std::vector<std::string> TableOracle::candidates_for(ScoringMode mode, std::size_t mask_index,
                                                     const std::string& text) const {
  std::vector<std::string> out;
  if (auto it = table_.find(context_key(mode, mask_index, text)); it != table_.end()) {
    for (const auto& [cand, p] : it->second) out.push_back(cand);
  }
  return out;
}

OracleResponse TableOracle::answer(const OracleQuery& q) const {
  OracleResponse r;
  r.id = q.id;
  try {
    for (const auto& cand : q.candidates) {
      r.log_probs[cand] = std::log(lookup(q.mode, q.mask_index, q.text, cand));
    }
  } catch (const Error& e) {
    r.log_probs.clear();
    r.error = e.what();
  }
  return r;
}

std::vector<OracleResponse> TableOracle::query(std::span<const OracleQuery> queries) {
  std::vector<OracleResponse> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    for (const auto& cand : q.candidates) lookup(q.mode, q.mask_index, q.text, cand);
    out.push_back(answer(q));
  }
  return out;
}

TableOracle TableOracle::parse(std::string_view json_text) {
  TableOracle oracle;
  try {
    const auto doc = json::parse(json_text);
    for (const auto& entry : doc.at("entries")) {
      const auto mode = parse_scoring_mode(entry.value("mode", std::string("masked")));
      const auto text = entry.at("text").get<std::string>();
      const auto mask_index = entry.value("mask_index", std::size_t{0});
      for (const auto& [cand, p] : entry.at("probs").items()) {
        oracle.set(mode, mask_index, text, cand, p.get<double>());
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedRow, fmt::format("bad oracle table: {}", e.what()));
  }
  return oracle;
}

TableOracle TableOracle::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open oracle table " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string TableOracle::dump() const {
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& [key, probs] : table_) {
    const auto first = key.find('|');
    const auto second = key.find('|', first + 1);
    nlohmann::ordered_json entry;
    entry["mode"] = key.substr(0, first);
    entry["mask_index"] = std::stoull(key.substr(first + 1, second - first - 1));
    entry["text"] = key.substr(second + 1);
    entry["probs"] = nlohmann::ordered_json::object();
    for (const auto& [cand, p] : probs) entry["probs"][cand] = p;
    entries.push_back(std::move(entry));
  }
  nlohmann::ordered_json doc;
  doc["entries"] = std::move(entries);
  return doc.dump(2) + "\n";
}

void TableOracle::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write oracle table " + path.string());
  out << dump();
}

// ---------------------------------------------------------------------------

struct ProcessOracle::Impl {
  pid_t pid = -1;
  int to_child = -1;
  FILE* from_child = nullptr;
  std::string command;

  ~Impl() {
    if (to_child >= 0) ::close(to_child);
    if (from_child) std::fclose(from_child);
    if (pid > 0) {
      int status = 0;
      ::waitpid(pid, &status, 0);
    }
  }
};

ProcessOracle::ProcessOracle(const std::string& command) : impl_(std::make_unique<Impl>()) {
  impl_->command = command;
  std::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) {
    fail(ErrorCode::OracleFailure, "cannot create pipes for oracle process");
  }
  const pid_t pid = ::fork();
  if (pid < 0) fail(ErrorCode::OracleFailure, "cannot fork oracle process");
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  impl_->pid = pid;
  impl_->to_child = in_pipe[1];
  impl_->from_child = ::fdopen(out_pipe[0], "r");
}

ProcessOracle::~ProcessOracle() = default;

std::vector<OracleResponse> ProcessOracle::query(std::span<const OracleQuery> queries) {
  std::string payload;
  for (const auto& q : queries) {
    payload += encode_query(q);
    payload += '\n';
  }
  std::jthread writer([fd = impl_->to_child, &payload] {
    std::size_t done = 0;
    while (done < payload.size()) {
      const auto n = ::write(fd, payload.data() + done, payload.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        return;  // child gone; the reader reports it
      }
      done += static_cast<std::size_t>(n);
    }
  });

  std::vector<OracleResponse> out;
  out.reserve(queries.size());
  char* line = nullptr;
  std::size_t cap = 0;
  while (out.size() < queries.size()) {
    const auto len = ::getline(&line, &cap, impl_->from_child);
    if (len < 0) break;
    std::string_view text(line, static_cast<std::size_t>(len));
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) continue;
    try {
      out.push_back(decode_response(text));
    } catch (...) {
      std::free(line);
      throw;
    }
  }
  std::free(line);
  writer.join();
  if (out.size() < queries.size()) {
    fail(ErrorCode::OracleFailure,
         fmt::format("oracle process '{}' closed its output after {} of {} responses",
                     impl_->command, out.size(), queries.size()));
  }
  return out;
}

}  // namespace fairaudit
