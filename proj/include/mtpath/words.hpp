#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtpath/types.hpp"

namespace mtpath {

struct WordSpan {
  std::string text;
  int start = 0;  // byte offsets
  int end = 0;
  int index = 0;
  bool operator==(const WordSpan&) const = default;
};

// Maximal runs of word characters are words; every punctuation code point is
// its own single-character word; whitespace separates and never joins a word.
// A code point is a word character iff it is neither whitespace nor listed
// punctuation. In Han mode every Han code point is additionally its own word.
std::vector<WordSpan> segment_words(const std::string& text, bool is_han);

enum class Side { Target, Source };
const char* side_name(Side s);
Side parse_side(const std::string& s);

struct TokenWordAlignment {
  std::vector<std::vector<std::size_t>> word_tokens;  // word index -> token indices
  std::vector<std::size_t> orphan_words;              // words overlapping no token
};

// Token t maps to word w iff their byte ranges overlap by >= 1 byte.
TokenWordAlignment align_tokens_to_words(const std::vector<TokenSpan>& tokens,
                                         const std::vector<WordSpan>& words);

// Fixed feature names per side; absent traces yield partial rows.
struct TokenFeatureRow {
  std::size_t token_index = 0;
  std::map<std::string, double> features;
};

// Target side: logprob, contrastive_logprob, alti_total, alti_max.
std::vector<TokenFeatureRow> token_features_halluc(const TranslationRecord& r);
// Source side: rev_logprob, rev_contrastive_logprob, alti_t_total, alti_t_max.
std::vector<TokenFeatureRow> token_features_omission(const TranslationRecord& r);

const std::vector<std::string>& halluc_feature_names();
const std::vector<std::string>& omission_feature_names();

// Word score = max over its tokens (worst-token aggregation); words whose
// tokens all lack the feature get no value.
std::vector<std::map<std::string, double>> aggregate_to_words(
    const std::vector<TokenFeatureRow>& token_rows, const TokenWordAlignment& alignment);

// Word labeled 1 iff it overlaps any annotated span by >= 1 byte.
std::vector<int> gold_word_labels(const std::vector<AnnotatedSpan>& spans,
                                  const std::vector<WordSpan>& words);

struct WordRow {
  std::string id;
  std::string direction;
  Side side = Side::Target;
  WordSpan word;
  std::map<std::string, double> features;
  std::optional<int> gold;  // absent without a usable annotation
};

struct WordTable {
  std::vector<WordRow> rows;
  std::size_t orphan_word_count = 0;  // excluded from rows, diagnostics only
};

// Detects Han mode per text (any Han code point). Records lacking the traces
// for a side contribute rows with whatever features are computable.
WordTable build_word_table(const Corpus& c, int threads);
WordTable build_word_table_serial(const Corpus& c);

// Columns: id, side, word_index, word_text, start, end, one column per
// feature (fixed ones first, extras sorted), gold_label when any row has one.
std::string word_table_to_csv(const WordTable& t);
WordTable word_table_from_csv_file(const std::string& path,
                                   std::vector<std::string>* feature_columns = nullptr);

}  // namespace mtpath
