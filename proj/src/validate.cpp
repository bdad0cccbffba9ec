#include "mtpath/validate.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "mtpath/errors.hpp"

namespace mtpath {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void check_tokens(const std::string& field, const std::vector<TokenSpan>& tokens,
                  const std::string& text, std::vector<std::string>& out) {
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const auto& t = tokens[k];
    std::string where = field + "[" + std::to_string(k) + "]";
    if (t.start < 0 || t.start >= t.end || t.end > static_cast<int>(text.size())) {
      out.push_back(where + ": span [" + std::to_string(t.start) + "," + std::to_string(t.end) +
                    ") out of bounds for text of length " + std::to_string(text.size()));
      continue;
    }
    if (text.compare(static_cast<std::size_t>(t.start), static_cast<std::size_t>(t.end - t.start),
                     t.text) != 0)
      out.push_back(where + ": text does not equal the parent-text slice");
  }
}

void check_logprobs(const std::string& field, const std::vector<double>& values,
                    std::size_t expected, std::vector<std::string>& out) {
  if (values.size() != expected) {
    out.push_back(field + ": length " + std::to_string(values.size()) + ", expected " +
                  std::to_string(expected));
    return;
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k]))
      out.push_back(field + "[" + std::to_string(k) + "]: non-finite value");
    else if (values[k] > 0.0)
      out.push_back(field + "[" + std::to_string(k) + "]: positive log-probability");
  }
}

void check_spans(const std::string& field, const std::vector<AnnotatedSpan>& spans,
                 const std::string& text, std::vector<std::string>& out) {
  int prev_end = 0;
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const auto& s = spans[k];
    std::string where = field + "[" + std::to_string(k) + "]";
    if (s.start >= s.end) {
      out.push_back(where + ": empty or inverted span");
      continue;
    }
    if (s.start < 0 || s.end > static_cast<int>(text.size()))
      out.push_back(where + ": span out of text bounds");
    if (s.start < prev_end) out.push_back(where + ": spans overlap or are unsorted");
    prev_end = s.end;
  }
}

}  // namespace

std::vector<std::string> validate_record(const TranslationRecord& r) {
  std::vector<std::string> out;
  if (r.id.empty()) out.push_back("id: empty");
  check_tokens("src_tokens", r.src_tokens, r.src_text, out);
  check_tokens("tgt_tokens", r.tgt_tokens, r.tgt_text, out);
  const std::size_t n_src = r.src_tokens.size();
  const std::size_t n_tgt = r.tgt_tokens.size();

  check_logprobs("tgt_logprob", r.tgt_logprob, n_tgt, out);
  if (r.tgt_logprob_uncond) check_logprobs("tgt_logprob_uncond", *r.tgt_logprob_uncond, n_tgt, out);
  if (r.src_logprob_rev) check_logprobs("src_logprob_rev", *r.src_logprob_rev, n_src, out);
  if (r.src_logprob_rev_uncond)
    check_logprobs("src_logprob_rev_uncond", *r.src_logprob_rev_uncond, n_src, out);

  if (r.alti) {
    const auto& m = *r.alti;
    if (m.n_tgt != n_tgt || m.n_src != n_src)
      out.push_back("alti: dims " + std::to_string(m.n_tgt) + "x" + std::to_string(m.n_src) +
                    ", expected " + std::to_string(n_tgt) + "x" + std::to_string(n_src));
    else if (m.entries.size() != m.n_tgt * m.n_src)
      out.push_back("alti: entry count does not match dims");
    else {
      bool bad_entry = false;
      for (double v : m.entries)
        if (!std::isfinite(v) || v < 0.0) bad_entry = true;
      if (bad_entry) out.push_back("alti: entries must be finite and >= 0");
      for (std::size_t i = 0; i < m.n_tgt && !bad_entry; ++i) {
        double rs = m.row_sum(i);
        if (rs > 1.0 + 1e-6)
          out.push_back("alti: row " + std::to_string(i) + " sums to " + num(rs) +
                        ", expected <= 1+1e-6");
      }
    }
  }

  if (r.attn) {
    const auto& a = *r.attn;
    std::size_t expected = n_src + (a.has_eos ? 1 : 0);
    if (a.mass.size() != expected)
      out.push_back("attn: mass length " + std::to_string(a.mass.size()) + ", expected " +
                    std::to_string(expected));
    bool bad_entry = false;
    for (double v : a.mass)
      if (!std::isfinite(v) || v < 0.0) bad_entry = true;
    if (bad_entry)
      out.push_back("attn: mass entries must be finite and >= 0");
    else if (!a.mass.empty()) {
      double s = 0.0;
      for (double v : a.mass) s += v;
      if (std::fabs(s - 1.0) > 1e-4)
        out.push_back("attn: mass sums to " + num(s) + ", expected 1±1e-4");
    }
  }

  for (const auto& [name, pair] : r.embeddings) {
    if (pair.src.empty() || pair.src.size() != pair.tgt.size())
      out.push_back("embeddings[" + name + "]: vectors must be non-empty and of equal dimension");
    bool bad = false;
    for (double v : pair.src)
      if (!std::isfinite(v)) bad = true;
    for (double v : pair.tgt)
      if (!std::isfinite(v)) bad = true;
    if (bad) out.push_back("embeddings[" + name + "]: non-finite entries");
  }

  for (const auto& [name, v] : r.external_scores)
    if (!std::isfinite(v)) out.push_back("external_scores[" + name + "]: non-finite value");

  if (r.annotation) {
    const auto& a = *r.annotation;
    if ((a.halluc_severity == Severity::None) != a.halluc_spans.empty())
      out.push_back("annotation: halluc_severity None iff halluc_spans empty violated");
    if ((a.omission_severity == Severity::None) != a.omission_spans.empty())
      out.push_back("annotation: omission_severity None iff omission_spans empty violated");
    check_spans("annotation.halluc_spans", a.halluc_spans, r.tgt_text, out);
    check_spans("annotation.omission_spans", a.omission_spans, r.src_text, out);
  }
  return out;
}

void validate_corpus(const Corpus& c) {
  std::vector<std::string> all;
  std::set<std::string> seen;
  for (const auto& r : c.records) {
    if (!seen.insert(r.id).second) all.push_back(r.id + ": id: duplicate record id");
    for (auto& v : validate_record(r)) all.push_back(r.id + ": " + v);
  }
  if (!all.empty()) throw ValidationFailure("corpus validation failed", std::move(all));
}

}  // namespace mtpath
