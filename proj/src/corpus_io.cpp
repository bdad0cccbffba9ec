#include "mtpath/corpus_io.hpp"

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "mtpath/errors.hpp"
#include "mtpath/markup.hpp"
#include "mtpath/validate.hpp"

namespace mtpath {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void schema_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::SchemaError, "line " + std::to_string(line) + ": " + what);
}

const json& require(const json& j, const char* field, std::size_t line) {
  auto it = j.find(field);
  if (it == j.end()) schema_fail(line, std::string("missing field \"") + field + "\"");
  return *it;
}

std::vector<double> as_doubles(const json& j, const char* field, std::size_t line) {
  if (!j.is_array()) schema_fail(line, std::string("field \"") + field + "\" must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) schema_fail(line, std::string("field \"") + field + "\" must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<TokenSpan> parse_tokens(const json& j, const char* field, std::size_t line) {
  if (!j.is_array()) schema_fail(line, std::string("field \"") + field + "\" must be an array");
  std::vector<TokenSpan> out;
  out.reserve(j.size());
  for (const auto& t : j) {
    if (!t.is_object() || !t.contains("text") || !t.contains("start") || !t.contains("end"))
      schema_fail(line, std::string("field \"") + field + "\" entries need text/start/end");
    out.push_back({t["text"].get<std::string>(), t["start"].get<int>(), t["end"].get<int>()});
  }
  return out;
}

Severity parse_severity_json(const json& j, const char* field, std::size_t line,
                             const LoadOptions& opts) {
  if (j.is_number_integer()) {
    int v = j.get<int>();
    if (v < 0 || v > 3)
      schema_fail(line, std::string("field \"") + field + "\" severity out of range");
    return static_cast<Severity>(v);
  }
  if (j.is_string()) {
    try {
      return parse_severity(j.get<std::string>(), opts.severity_remap);
    } catch (const Error& e) {
      schema_fail(line, std::string("field \"") + field + "\": " + e.what());
    }
  }
  schema_fail(line, std::string("field \"") + field + "\" must be an integer or label string");
}

std::vector<AnnotatedSpan> parse_spans(const json& j, const char* field, std::size_t line) {
  if (!j.is_array()) schema_fail(line, std::string("field \"") + field + "\" must be an array");
  std::vector<AnnotatedSpan> out;
  out.reserve(j.size());
  for (const auto& s : j) {
    if (!s.is_object() || !s.contains("start") || !s.contains("end"))
      schema_fail(line, std::string("field \"") + field + "\" entries need start/end");
    out.push_back({s["start"].get<int>(), s["end"].get<int>()});
  }
  return out;
}

// Marked text, when present, must agree with the plain text and with any
// explicit spans; disagreements and markup errors become violations so a
// corrupted fixture is rejected with the offending rule named.
void apply_marked(const std::string& marked, const std::string& plain_expected,
                  const char* marked_field, bool have_explicit,
                  std::vector<AnnotatedSpan>& spans, const LoadOptions& opts,
                  std::vector<std::string>& violations) {
  ParsedMarkup parsed;
  try {
    parsed = parse_span_markup(marked, opts.open_delim, opts.close_delim);
  } catch (const Error& e) {
    violations.push_back(std::string("annotation.") + marked_field + ": " + e.what());
    return;
  }
  if (parsed.plain != plain_expected) {
    violations.push_back(std::string("annotation.") + marked_field +
                         ": plain text differs from the record text");
    return;
  }
  if (have_explicit) {
    if (parsed.spans != spans)
      violations.push_back(std::string("annotation.") + marked_field +
                           ": marked spans disagree with explicit spans");
  } else {
    spans = parsed.spans;
  }
}

std::optional<Annotation> parse_annotation(const json& j, const TranslationRecord& r,
                                           std::size_t line, const LoadOptions& opts,
                                           std::vector<std::string>& violations) {
  if (!j.is_object()) schema_fail(line, "field \"annotation\" must be an object");
  Annotation a;
  if (j.contains("halluc_severity"))
    a.halluc_severity = parse_severity_json(j["halluc_severity"], "halluc_severity", line, opts);
  if (j.contains("omission_severity"))
    a.omission_severity =
        parse_severity_json(j["omission_severity"], "omission_severity", line, opts);
  bool explicit_h = j.contains("halluc_spans");
  bool explicit_o = j.contains("omission_spans");
  if (explicit_h) a.halluc_spans = parse_spans(j["halluc_spans"], "halluc_spans", line);
  if (explicit_o) a.omission_spans = parse_spans(j["omission_spans"], "omission_spans", line);
  if (j.contains("tgt_marked"))
    apply_marked(j["tgt_marked"].get<std::string>(), r.tgt_text, "tgt_marked", explicit_h,
                 a.halluc_spans, opts, violations);
  if (j.contains("src_marked"))
    apply_marked(j["src_marked"].get<std::string>(), r.src_text, "src_marked", explicit_o,
                 a.omission_spans, opts, violations);
  if (j.contains("incomprehensible")) a.incomprehensible = j["incomprehensible"].get<bool>();
  return a;
}

TranslationRecord parse_record(const json& j, std::size_t line, const LoadOptions& opts,
                               std::vector<std::string>& violations) {
  if (!j.is_object()) schema_fail(line, "record must be a JSON object");
  TranslationRecord r;
  r.id = require(j, "id", line).get<std::string>();
  try {
    r.direction = parse_direction(require(j, "direction", line).get<std::string>());
  } catch (const Error& e) {
    schema_fail(line, std::string("field \"direction\": ") + e.what());
  }
  r.data_source = require(j, "data_source", line).get<std::string>();
  r.src_text = require(j, "src_text", line).get<std::string>();
  r.tgt_text = require(j, "tgt_text", line).get<std::string>();
  r.src_tokens = parse_tokens(require(j, "src_tokens", line), "src_tokens", line);
  r.tgt_tokens = parse_tokens(require(j, "tgt_tokens", line), "tgt_tokens", line);
  r.tgt_logprob = as_doubles(require(j, "tgt_logprob", line), "tgt_logprob", line);
  if (j.contains("tgt_logprob_uncond"))
    r.tgt_logprob_uncond = as_doubles(j["tgt_logprob_uncond"], "tgt_logprob_uncond", line);
  if (j.contains("alti")) {
    const auto& m = j["alti"];
    if (!m.is_array()) schema_fail(line, "field \"alti\" must be an array of rows");
    ContributionMatrix cm;
    cm.n_tgt = m.size();
    for (const auto& row : m) {
      auto vals = as_doubles(row, "alti", line);
      if (cm.n_src == 0) cm.n_src = vals.size();
      if (vals.size() != cm.n_src) schema_fail(line, "field \"alti\" rows have uneven lengths");
      cm.entries.insert(cm.entries.end(), vals.begin(), vals.end());
    }
    if (cm.n_tgt == 0) cm.n_src = r.src_tokens.size();
    r.alti = std::move(cm);
  }
  if (j.contains("attn")) {
    const auto& a = j["attn"];
    if (!a.is_object() || !a.contains("mass"))
      schema_fail(line, "field \"attn\" must be an object with \"mass\"");
    AttentionDistribution d;
    d.mass = as_doubles(a["mass"], "attn.mass", line);
    if (a.contains("has_eos")) d.has_eos = a["has_eos"].get<bool>();
    r.attn = std::move(d);
  }
  if (j.contains("src_logprob_rev"))
    r.src_logprob_rev = as_doubles(j["src_logprob_rev"], "src_logprob_rev", line);
  if (j.contains("src_logprob_rev_uncond"))
    r.src_logprob_rev_uncond =
        as_doubles(j["src_logprob_rev_uncond"], "src_logprob_rev_uncond", line);
  if (j.contains("embeddings")) {
    const auto& e = j["embeddings"];
    if (!e.is_object()) schema_fail(line, "field \"embeddings\" must be an object");
    for (auto it = e.begin(); it != e.end(); ++it) {
      if (!it.value().is_object() || !it.value().contains("src") || !it.value().contains("tgt"))
        schema_fail(line, "field \"embeddings\" entries need src/tgt vectors");
      EmbeddingPair p;
      p.src = as_doubles(it.value()["src"], "embeddings.src", line);
      p.tgt = as_doubles(it.value()["tgt"], "embeddings.tgt", line);
      r.embeddings[it.key()] = std::move(p);
    }
  }
  if (j.contains("external_scores")) {
    const auto& e = j["external_scores"];
    if (!e.is_object()) schema_fail(line, "field \"external_scores\" must be an object");
    for (auto it = e.begin(); it != e.end(); ++it) {
      if (!it.value().is_number())
        schema_fail(line, "field \"external_scores\" values must be numbers");
      r.external_scores[it.key()] = it.value().get<double>();
    }
  }
  if (j.contains("annotation"))
    r.annotation = parse_annotation(j["annotation"], r, line, opts, violations);
  return r;
}

bool blank(const std::string& s) {
  for (char c : s)
    if (c != ' ' && c != '\t' && c != '\r' && c != '\n') return false;
  return true;
}

}  // namespace

Corpus load_corpus(const std::string& path, const LoadOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  Corpus c;
  std::vector<std::string> all_violations;
  std::set<std::string> seen_ids;
  std::string line_text;
  std::size_t line = 0;
  while (std::getline(in, line_text)) {
    ++line;
    if (blank(line_text)) continue;
    json j;
    try {
      j = json::parse(line_text);
    } catch (const json::exception& e) {
      schema_fail(line, std::string("invalid JSON: ") + e.what());
    }
    std::vector<std::string> violations;
    TranslationRecord r;
    try {
      r = parse_record(j, line, opts, violations);
    } catch (const json::exception& e) {
      schema_fail(line, std::string("bad field type: ") + e.what());
    }
    if (!seen_ids.insert(r.id).second)
      all_violations.push_back(r.id + ": id: duplicate record id");
    for (auto& v : violations) all_violations.push_back(r.id + ": " + v);
    for (auto& v : validate_record(r)) all_violations.push_back(r.id + ": " + v);
    c.records.push_back(std::move(r));
  }
  if (!all_violations.empty())
    throw ValidationFailure("corpus " + path + " failed validation", std::move(all_violations));
  c.rebuild_manifest();
  return c;
}

namespace {

ojson annotation_to_json(const Annotation& a) {
  ojson j;
  j["halluc_severity"] = severity_name(a.halluc_severity);
  j["omission_severity"] = severity_name(a.omission_severity);
  ojson hs = ojson::array();
  for (const auto& s : a.halluc_spans) hs.push_back({{"start", s.start}, {"end", s.end}});
  j["halluc_spans"] = std::move(hs);
  ojson os = ojson::array();
  for (const auto& s : a.omission_spans) os.push_back({{"start", s.start}, {"end", s.end}});
  j["omission_spans"] = std::move(os);
  if (a.incomprehensible) j["incomprehensible"] = true;
  return j;
}

ojson tokens_to_json(const std::vector<TokenSpan>& tokens) {
  ojson out = ojson::array();
  for (const auto& t : tokens)
    out.push_back({{"text", t.text}, {"start", t.start}, {"end", t.end}});
  return out;
}

}  // namespace

void save_corpus(const Corpus& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  for (const auto& r : c.records) {
    ojson j;
    j["id"] = r.id;
    j["direction"] = r.direction.str();
    j["data_source"] = r.data_source;
    j["src_text"] = r.src_text;
    j["tgt_text"] = r.tgt_text;
    j["src_tokens"] = tokens_to_json(r.src_tokens);
    j["tgt_tokens"] = tokens_to_json(r.tgt_tokens);
    j["tgt_logprob"] = r.tgt_logprob;
    if (r.tgt_logprob_uncond) j["tgt_logprob_uncond"] = *r.tgt_logprob_uncond;
    if (r.alti) {
      ojson rows = ojson::array();
      for (std::size_t i = 0; i < r.alti->n_tgt; ++i) {
        ojson row = ojson::array();
        for (std::size_t k = 0; k < r.alti->n_src; ++k) row.push_back(r.alti->at(i, k));
        rows.push_back(std::move(row));
      }
      j["alti"] = std::move(rows);
    }
    if (r.attn) j["attn"] = {{"mass", r.attn->mass}, {"has_eos", r.attn->has_eos}};
    if (r.src_logprob_rev) j["src_logprob_rev"] = *r.src_logprob_rev;
    if (r.src_logprob_rev_uncond) j["src_logprob_rev_uncond"] = *r.src_logprob_rev_uncond;
    if (!r.embeddings.empty()) {
      ojson e;
      for (const auto& [name, pair] : r.embeddings)
        e[name] = {{"src", pair.src}, {"tgt", pair.tgt}};
      j["embeddings"] = std::move(e);
    }
    if (!r.external_scores.empty()) {
      ojson e;
      for (const auto& [name, v] : r.external_scores) e[name] = v;
      j["external_scores"] = std::move(e);
    }
    if (r.annotation) j["annotation"] = annotation_to_json(*r.annotation);
    out << j.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

void merge_annotation_overlay(Corpus& c, const std::string& path, const LoadOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < c.records.size(); ++i) index[c.records[i].id] = i;
  std::vector<std::string> all_violations;
  std::string line_text;
  std::size_t line = 0;
  while (std::getline(in, line_text)) {
    ++line;
    if (blank(line_text)) continue;
    json j;
    try {
      j = json::parse(line_text);
    } catch (const json::exception& e) {
      schema_fail(line, std::string("invalid JSON: ") + e.what());
    }
    std::string id = require(j, "id", line).get<std::string>();
    auto it = index.find(id);
    if (it == index.end()) {
      all_violations.push_back(id + ": id: not present in the corpus");
      continue;
    }
    TranslationRecord& r = c.records[it->second];
    std::vector<std::string> violations;
    try {
      r.annotation = parse_annotation(require(j, "annotation", line), r, line, opts, violations);
    } catch (const json::exception& e) {
      schema_fail(line, std::string("bad field type: ") + e.what());
    }
    for (auto& v : violations) all_violations.push_back(id + ": " + v);
    for (auto& v : validate_record(r)) all_violations.push_back(id + ": " + v);
  }
  if (!all_violations.empty())
    throw ValidationFailure("overlay " + path + " failed validation", std::move(all_violations));
}

}  // namespace mtpath
