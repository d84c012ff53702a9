#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/error.hpp"

namespace fairaudit {

using Tokens = std::vector<std::string>;

struct NoteDocument {
  std::string note_id;
  std::string patient_id;
  std::string category;  // e.g. "Nursing", "Physician", "Discharge summary"
  int chart_order = 0;
  std::string text;
  Tokens tokens;
};

/// Replaces each bracketed de-identification span "[** ... **]" with one typed
/// sentinel: [DEID_DATE], [DEID_NAME], [DEID_LOC], [DEID_CONTACT] or
/// [DEID_OTHER]. Idempotent.
std::string normalize_phi(std::string_view text);

/// Sentinel a single span body (the text between "[**" and "**]") maps to.
std::string_view phi_sentinel(std::string_view span_body);

/// Greedy left-to-right merge of sentences into groups of at least
/// `min_tokens`. Sentences are never split; the last group may be short.
std::vector<Tokens> aggregate_sentences(std::span<const Tokens> sentences,
                                        std::size_t min_tokens = 20);

struct WindowParams {
  std::size_t window = 512;
  std::size_t stride = 512;
  std::size_t max_windows = 10;
};

/// Windows starting at 0, stride, 2*stride, ... until one reaches the end of
/// the tokens or max_windows is hit. The last window is truncated.
std::vector<Tokens> window_note(std::span<const std::string> tokens, const WindowParams& params);

/// The last min(limit, size) items, in their original order.
template <typename T>
std::vector<T> select_backward(std::span<const T> chronological, std::size_t limit = 30) {
  if (limit < 1) fail(ErrorCode::InvalidArgument, "select_backward: limit must be >= 1");
  const std::size_t take = std::min(limit, chronological.size());
  return {chronological.end() - static_cast<std::ptrdiff_t>(take), chronological.end()};
}

/// Windows every note of one patient (ordered by chart_order) and keeps the
/// last `limit` subsequences.
std::vector<Tokens> patient_subsequences(std::vector<NoteDocument> notes, const WindowParams& params,
                                         std::size_t limit = 30);

/// Lower-cased whitespace tokenization; stands in for a model tokenizer.
Tokens whitespace_tokens(std::string_view text);

}  // namespace fairaudit
