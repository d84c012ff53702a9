#include "fairaudit/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace fairaudit {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string_view> alnum_tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && !is_alnum(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && is_alnum(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string_view phi_sentinel(std::string_view span_body) {
  static const std::regex date(R"(\d+-\d+-\d+)");
  const auto body = trim(span_body);
  if (std::regex_match(body.begin(), body.end(), date)) return "[DEID_DATE]";

  const auto words = alnum_tokens(body);
  auto has = [&](std::string_view w) { return std::ranges::find(words, w) != words.end(); };
  if (has("Name")) return "[DEID_NAME]";
  if (has("Hospital") || has("Location")) return "[DEID_LOC]";
  const bool numeric =
      !body.empty() && std::ranges::all_of(body, [](char c) {
        return std::isdigit(static_cast<unsigned char>(c)) || c == ' ';
      });
  if (has("Telephone") || numeric) return "[DEID_CONTACT]";
  return "[DEID_OTHER]";
}

std::string normalize_phi(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find("[**", pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find("**]", open + 3);
    if (close == std::string_view::npos) break;
    out.append(text.substr(pos, open - pos));
    out.append(phi_sentinel(text.substr(open + 3, close - open - 3)));
    pos = close + 3;
  }
  out.append(text.substr(pos));
  return out;
}

std::vector<Tokens> aggregate_sentences(std::span<const Tokens> sentences,
                                        std::size_t min_tokens) {
  if (min_tokens < 1) fail(ErrorCode::InvalidArgument, "aggregate_sentences: min_tokens must be >= 1");
  std::vector<Tokens> groups;
  Tokens current;
  for (const auto& sentence : sentences) {
    current.insert(current.end(), sentence.begin(), sentence.end());
    if (current.size() >= min_tokens) {
      groups.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) groups.push_back(std::move(current));
  return groups;
}

std::vector<Tokens> window_note(std::span<const std::string> tokens, const WindowParams& params) {
  if (params.window < 1 || params.stride < 1 || params.stride > params.window ||
      params.max_windows < 1) {
    fail(ErrorCode::InvalidArgument, "window_note: need window >= 1, 1 <= stride <= window, "
                                     "max_windows >= 1");
  }
  std::vector<Tokens> out;
  for (std::size_t start = 0; start < tokens.size() && out.size() < params.max_windows;
       start += params.stride) {
    const std::size_t end = std::min(tokens.size(), start + params.window);
    out.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                     tokens.begin() + static_cast<std::ptrdiff_t>(end));
    if (end == tokens.size()) break;
  }
  return out;
}

std::vector<Tokens> patient_subsequences(std::vector<NoteDocument> notes, const WindowParams& params,
                                         std::size_t limit) {
  std::ranges::stable_sort(notes, {}, &NoteDocument::chart_order);
  std::vector<Tokens> all;
  for (const auto& note : notes) {
    auto windows = window_note(note.tokens, params);
    std::ranges::move(windows, std::back_inserter(all));
  }
  return select_backward<Tokens>(all, limit);
}

Tokens whitespace_tokens(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::string tok(text.substr(i, j - i));
      std::ranges::transform(tok, tok.begin(),
                             [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      out.push_back(std::move(tok));
    }
    i = j;
  }
  return out;
}

}  // namespace fairaudit
