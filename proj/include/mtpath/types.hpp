#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mtpath {

struct Direction {
  std::string src_lang;    // 3 letters, lowercase
  std::string src_script;  // 4 letters, titlecase
  std::string tgt_lang;
  std::string tgt_script;

  std::string str() const;
  bool operator==(const Direction&) const = default;
};

// Canonical form "<lang>_<Script>-<lang>_<Script>"; case is normalized.
Direction parse_direction(const std::string& s);

enum class Severity : int { None = 0, Word = 1, Partial = 2, Full = 3 };

enum class PathologyAxis { Hallucination, Omission };

const char* severity_name(Severity s);  // "None" / "Word" / "Partial" / "Full"
std::string sentence_label(Severity s, PathologyAxis axis);

// Accepts 0-3, the short names, and the sentence labels of either axis,
// plus caller-supplied remaps (dataset label string -> level).
Severity parse_severity(const std::string& s, const std::map<std::string, int>& remap = {});

// Byte offsets into the parent text; text equals the slice [start, end).
struct TokenSpan {
  std::string text;
  int start = 0;
  int end = 0;
  bool operator==(const TokenSpan&) const = default;
};

struct AnnotatedSpan {
  int start = 0;
  int end = 0;
  bool operator==(const AnnotatedSpan&) const = default;
};

struct Annotation {
  Severity halluc_severity = Severity::None;
  Severity omission_severity = Severity::None;
  std::vector<AnnotatedSpan> halluc_spans;    // target side
  std::vector<AnnotatedSpan> omission_spans;  // source side
  bool incomprehensible = false;
  bool operator==(const Annotation&) const = default;
};

// Row-major n_tgt x n_src; row sums <= 1 + 1e-6 (remainder is target-prefix
// contribution, not stored).
struct ContributionMatrix {
  std::size_t n_tgt = 0;
  std::size_t n_src = 0;
  std::vector<double> entries;

  double at(std::size_t i, std::size_t j) const { return entries[i * n_src + j]; }
  double& at(std::size_t i, std::size_t j) { return entries[i * n_src + j]; }
  double row_sum(std::size_t i) const;
  double row_max(std::size_t i) const;
  double col_sum(std::size_t j) const;
  double col_max(std::size_t j) const;
  double total() const;
  bool operator==(const ContributionMatrix&) const = default;
};

struct AttentionDistribution {
  std::vector<double> mass;  // over source positions, plus EOS last when has_eos
  bool has_eos = false;
  bool operator==(const AttentionDistribution&) const = default;
};

struct EmbeddingPair {
  std::vector<double> src;
  std::vector<double> tgt;
  bool operator==(const EmbeddingPair&) const = default;
};

struct TranslationRecord {
  std::string id;
  Direction direction;
  std::string data_source;
  std::string src_text;
  std::string tgt_text;
  std::vector<TokenSpan> src_tokens;
  std::vector<TokenSpan> tgt_tokens;
  std::vector<double> tgt_logprob;  // natural log, <= 0, one per target token
  std::optional<std::vector<double>> tgt_logprob_uncond;
  std::optional<ContributionMatrix> alti;
  std::optional<AttentionDistribution> attn;
  std::optional<std::vector<double>> src_logprob_rev;
  std::optional<std::vector<double>> src_logprob_rev_uncond;
  std::map<std::string, EmbeddingPair> embeddings;  // empty map = absent
  std::map<std::string, double> external_scores;    // stored as higher = better
  std::optional<Annotation> annotation;

  bool operator==(const TranslationRecord&) const = default;
};

struct Corpus {
  std::vector<TranslationRecord> records;
  // direction string -> data_source -> count; kept consistent by rebuild_manifest.
  std::map<std::string, std::map<std::string, std::size_t>> manifest;

  void rebuild_manifest();
  bool operator==(const Corpus&) const = default;
};

}  // namespace mtpath
