#include "mtpath/words.hpp"

#include <algorithm>
#include <set>

#include "mtpath/csv.hpp"
#include "mtpath/errors.hpp"
#include "mtpath/parallel.hpp"
#include "mtpath/utf8.hpp"

namespace mtpath {

namespace {

bool is_whitespace(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\f': case U'\v':
    case 0x00A0: case 0x1680: case 0x2028: case 0x2029: case 0x202F:
    case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

// Explicit punctuation table; anything neither whitespace nor listed here is
// a word character, so segmentation stays total on all of Unicode.
bool is_punct(char32_t c) {
  if (c < 0x80)
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  switch (c) {
    case 0x00A1: case 0x00A7: case 0x00AB: case 0x00B6: case 0x00B7:
    case 0x00BB: case 0x00BF:                      // Latin-1 punctuation
    case 0x060C: case 0x061B: case 0x061F: case 0x066A: case 0x066B:
    case 0x066C: case 0x066D: case 0x06D4:         // Arabic punctuation
    case 0x0964: case 0x0965:                      // Devanagari danda
    case 0x3001: case 0x3002: case 0x3008: case 0x3009: case 0x300A:
    case 0x300B: case 0x300C: case 0x300D: case 0x300E: case 0x300F:
    case 0x3010: case 0x3011: case 0x3014: case 0x3015:  // CJK brackets
    case 0xFE50: case 0xFE51: case 0xFE52: case 0xFE54: case 0xFE55:
    case 0xFE56: case 0xFE57:                      // small form variants
      return true;
    default:
      break;
  }
  if (c >= 0x2010 && c <= 0x2027) return true;  // general punctuation
  if (c >= 0x2030 && c <= 0x205E) return true;
  if (c >= 0xFF01 && c <= 0xFF0F) return true;  // fullwidth ASCII punctuation
  if (c >= 0xFF1A && c <= 0xFF20) return true;
  if (c >= 0xFF3B && c <= 0xFF40) return true;
  if (c >= 0xFF5B && c <= 0xFF65) return true;
  return false;
}

bool is_han(char32_t c) {
  return (c >= 0x3400 && c <= 0x4DBF) || (c >= 0x4E00 && c <= 0x9FFF) ||
         (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x20000 && c <= 0x2A6DF) ||
         (c >= 0x2A700 && c <= 0x2EBEF) || (c >= 0x30000 && c <= 0x3134F);
}

}  // namespace

std::vector<WordSpan> segment_words(const std::string& text, bool han_mode) {
  std::vector<WordSpan> words;
  int word_start = -1;
  auto flush = [&](int end) {
    if (word_start < 0) return;
    WordSpan w;
    w.start = word_start;
    w.end = end;
    w.text = text.substr(static_cast<std::size_t>(word_start),
                         static_cast<std::size_t>(end - word_start));
    w.index = static_cast<int>(words.size());
    words.push_back(std::move(w));
    word_start = -1;
  };
  Utf8Cursor cur(text);
  Utf8Char ch;
  while (cur.next(ch)) {
    if (is_whitespace(ch.cp)) {
      flush(ch.start);
    } else if (is_punct(ch.cp) || (han_mode && is_han(ch.cp))) {
      flush(ch.start);
      word_start = ch.start;
      flush(ch.end);
    } else {
      if (word_start < 0) word_start = ch.start;
    }
  }
  flush(static_cast<int>(text.size()));
  return words;
}

const char* side_name(Side s) { return s == Side::Target ? "target" : "source"; }

Side parse_side(const std::string& s) {
  if (s == "target") return Side::Target;
  if (s == "source") return Side::Source;
  throw Error(ErrorCode::SchemaError, "side must be \"target\" or \"source\", got \"" + s + "\"");
}

TokenWordAlignment align_tokens_to_words(const std::vector<TokenSpan>& tokens,
                                         const std::vector<WordSpan>& words) {
  TokenWordAlignment out;
  out.word_tokens.assign(words.size(), {});
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      int lo = std::max(words[w].start, tokens[t].start);
      int hi = std::min(words[w].end, tokens[t].end);
      if (hi - lo >= 1) out.word_tokens[w].push_back(t);
    }
    if (out.word_tokens[w].empty()) out.orphan_words.push_back(w);
  }
  return out;
}

const std::vector<std::string>& halluc_feature_names() {
  static const std::vector<std::string> names = {"logprob", "contrastive_logprob", "alti_total",
                                                 "alti_max"};
  return names;
}

const std::vector<std::string>& omission_feature_names() {
  static const std::vector<std::string> names = {"rev_logprob", "rev_contrastive_logprob",
                                                 "alti_t_total", "alti_t_max"};
  return names;
}

std::vector<TokenFeatureRow> token_features_halluc(const TranslationRecord& r) {
  const std::size_t n = r.tgt_tokens.size();
  std::vector<TokenFeatureRow> rows(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto& row = rows[k];
    row.token_index = k;
    if (k < r.tgt_logprob.size()) {
      row.features["logprob"] = -r.tgt_logprob[k];
      if (r.tgt_logprob_uncond && k < r.tgt_logprob_uncond->size())
        row.features["contrastive_logprob"] = -(r.tgt_logprob[k] - (*r.tgt_logprob_uncond)[k]);
    }
    if (r.alti && r.alti->n_tgt == n && k < r.alti->n_tgt) {
      row.features["alti_total"] = -r.alti->row_sum(k);
      row.features["alti_max"] = -r.alti->row_max(k);
    }
  }
  return rows;
}

std::vector<TokenFeatureRow> token_features_omission(const TranslationRecord& r) {
  const std::size_t n = r.src_tokens.size();
  std::vector<TokenFeatureRow> rows(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto& row = rows[j];
    row.token_index = j;
    if (r.src_logprob_rev && j < r.src_logprob_rev->size()) {
      row.features["rev_logprob"] = -(*r.src_logprob_rev)[j];
      if (r.src_logprob_rev_uncond && j < r.src_logprob_rev_uncond->size())
        row.features["rev_contrastive_logprob"] =
            -((*r.src_logprob_rev)[j] - (*r.src_logprob_rev_uncond)[j]);
    }
    if (r.alti && r.alti->n_src == n && j < r.alti->n_src) {
      row.features["alti_t_total"] = -r.alti->col_sum(j);
      row.features["alti_t_max"] = -r.alti->col_max(j);
    }
  }
  return rows;
}

std::vector<std::map<std::string, double>> aggregate_to_words(
    const std::vector<TokenFeatureRow>& token_rows, const TokenWordAlignment& alignment) {
  std::vector<std::map<std::string, double>> out(alignment.word_tokens.size());
  for (std::size_t w = 0; w < alignment.word_tokens.size(); ++w) {
    for (std::size_t t : alignment.word_tokens[w]) {
      for (const auto& [name, v] : token_rows[t].features) {
        auto it = out[w].find(name);
        if (it == out[w].end() || v > it->second) out[w][name] = v;
      }
    }
  }
  return out;
}

std::vector<int> gold_word_labels(const std::vector<AnnotatedSpan>& spans,
                                  const std::vector<WordSpan>& words) {
  std::vector<int> labels(words.size(), 0);
  for (std::size_t w = 0; w < words.size(); ++w)
    for (const auto& s : spans) {
      int lo = std::max(words[w].start, s.start);
      int hi = std::min(words[w].end, s.end);
      if (hi - lo >= 1) {
        labels[w] = 1;
        break;
      }
    }
  return labels;
}

namespace {

bool text_has_han(const std::string& text) {
  Utf8Cursor cur(text);
  Utf8Char ch;
  while (cur.next(ch))
    if (is_han(ch.cp)) return true;
  return false;
}

struct RecordWordRows {
  std::vector<WordRow> rows;
  std::size_t orphans = 0;
};

void side_rows(const TranslationRecord& r, Side side, RecordWordRows& out) {
  const std::string& text = side == Side::Target ? r.tgt_text : r.src_text;
  const auto& tokens = side == Side::Target ? r.tgt_tokens : r.src_tokens;
  auto words = segment_words(text, text_has_han(text));
  auto alignment = align_tokens_to_words(tokens, words);
  auto token_rows = side == Side::Target ? token_features_halluc(r) : token_features_omission(r);
  auto features = aggregate_to_words(token_rows, alignment);

  std::vector<int> gold;
  bool have_gold = r.annotation && !r.annotation->incomprehensible;
  if (have_gold) {
    const auto& spans =
        side == Side::Target ? r.annotation->halluc_spans : r.annotation->omission_spans;
    gold = gold_word_labels(spans, words);
  }

  std::set<std::size_t> orphan(alignment.orphan_words.begin(), alignment.orphan_words.end());
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (orphan.count(w)) {
      ++out.orphans;  // no token claims this word; excluded rather than invented
      continue;
    }
    WordRow row;
    row.id = r.id;
    row.direction = r.direction.str();
    row.side = side;
    row.word = words[w];
    row.features = std::move(features[w]);
    if (have_gold) row.gold = gold[w];
    out.rows.push_back(std::move(row));
  }
}

WordTable assemble(std::vector<RecordWordRows>& parts) {
  WordTable t;
  for (auto& p : parts) {
    t.orphan_word_count += p.orphans;
    for (auto& row : p.rows) t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace

WordTable build_word_table(const Corpus& c, int threads) {
  std::vector<RecordWordRows> parts(c.records.size());
  parallel_for(c.records.size(), threads, [&](std::size_t i) {
    side_rows(c.records[i], Side::Target, parts[i]);
    side_rows(c.records[i], Side::Source, parts[i]);
  });
  return assemble(parts);
}

WordTable build_word_table_serial(const Corpus& c) {
  std::vector<RecordWordRows> parts(c.records.size());
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    side_rows(c.records[i], Side::Target, parts[i]);
    side_rows(c.records[i], Side::Source, parts[i]);
  }
  return assemble(parts);
}

std::string word_table_to_csv(const WordTable& t) {
  std::vector<std::string> feature_cols = halluc_feature_names();
  for (const auto& n : omission_feature_names()) feature_cols.push_back(n);
  std::set<std::string> known(feature_cols.begin(), feature_cols.end());
  std::set<std::string> extras;
  bool any_gold = false;
  for (const auto& row : t.rows) {
    for (const auto& [name, _] : row.features)
      if (!known.count(name)) extras.insert(name);
    if (row.gold) any_gold = true;
  }
  for (const auto& n : extras) feature_cols.push_back(n);

  std::vector<std::string> header = {"id", "side", "word_index", "word_text", "start", "end"};
  header.insert(header.end(), feature_cols.begin(), feature_cols.end());
  if (any_gold) header.push_back("gold_label");

  std::string out = join_csv_row(header) + "\n";
  for (const auto& row : t.rows) {
    std::vector<std::string> fields = {row.id,
                                       side_name(row.side),
                                       std::to_string(row.word.index),
                                       row.word.text,
                                       std::to_string(row.word.start),
                                       std::to_string(row.word.end)};
    for (const auto& col : feature_cols) {
      auto it = row.features.find(col);
      fields.push_back(it == row.features.end() ? std::string() : format_double(it->second));
    }
    if (any_gold) fields.push_back(row.gold ? std::to_string(*row.gold) : std::string());
    out += join_csv_row(fields);
    out += '\n';
  }
  return out;
}

WordTable word_table_from_csv_file(const std::string& path,
                                   std::vector<std::string>* feature_columns) {
  CsvTable csv = read_csv(path);
  const std::vector<std::string> meta = {"id", "side", "word_index", "word_text", "start", "end"};
  if (csv.header.size() < meta.size())
    throw Error(ErrorCode::SchemaError, path + ": too few columns for a word table");
  for (std::size_t i = 0; i < meta.size(); ++i)
    if (csv.header[i] != meta[i])
      throw Error(ErrorCode::SchemaError, path + ": expected column " + meta[i] + " at position " +
                                              std::to_string(i));
  int gold_col = csv.column("gold_label");
  std::vector<std::pair<std::size_t, std::string>> feats;
  for (std::size_t i = meta.size(); i < csv.header.size(); ++i)
    if (static_cast<int>(i) != gold_col) feats.push_back({i, csv.header[i]});
  if (feature_columns) {
    feature_columns->clear();
    for (const auto& [_, name] : feats) feature_columns->push_back(name);
  }

  WordTable t;
  for (const auto& row : csv.rows) {
    WordRow r;
    r.id = row[0];
    r.side = parse_side(row[1]);
    r.word.index = static_cast<int>(parse_double(row[2]));
    r.word.text = row[3];
    r.word.start = static_cast<int>(parse_double(row[4]));
    r.word.end = static_cast<int>(parse_double(row[5]));
    for (const auto& [col, name] : feats)
      if (!row[col].empty()) r.features[name] = parse_double(row[col]);
    if (gold_col >= 0 && !row[static_cast<std::size_t>(gold_col)].empty())
      r.gold = static_cast<int>(parse_double(row[static_cast<std::size_t>(gold_col)]));
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace mtpath
