#include "mtpath/types.hpp"

#include <cctype>

#include "mtpath/errors.hpp"

namespace mtpath {

std::string Direction::str() const {
  return src_lang + "_" + src_script + "-" + tgt_lang + "_" + tgt_script;
}

namespace {

bool all_alpha(const std::string& s) {
  for (unsigned char c : s)
    if (!std::isalpha(c)) return false;
  return !s.empty();
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string titlecase(std::string s) {
  s = lower(std::move(s));
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

struct LangScript {
  std::string lang;
  std::string script;
};

LangScript parse_lang_script(const std::string& part, const std::string& whole) {
  auto us = part.find('_');
  if (us == std::string::npos || part.find('_', us + 1) != std::string::npos)
    throw Error(ErrorCode::MalformedDirection, "expected <lang>_<Script> in \"" + whole + "\"");
  LangScript out{part.substr(0, us), part.substr(us + 1)};
  if (out.lang.size() != 3 || !all_alpha(out.lang) || out.script.size() != 4 || !all_alpha(out.script))
    throw Error(ErrorCode::MalformedDirection,
                "lang must be 3 letters and script 4 letters in \"" + whole + "\"");
  out.lang = lower(out.lang);
  out.script = titlecase(out.script);
  return out;
}

}  // namespace

Direction parse_direction(const std::string& s) {
  auto dash = s.find('-');
  if (dash == std::string::npos || s.find('-', dash + 1) != std::string::npos)
    throw Error(ErrorCode::MalformedDirection, "expected one '-' in \"" + s + "\"");
  LangScript src = parse_lang_script(s.substr(0, dash), s);
  LangScript tgt = parse_lang_script(s.substr(dash + 1), s);
  return Direction{src.lang, src.script, tgt.lang, tgt.script};
}

const char* severity_name(Severity s) {
  switch (s) {
    case Severity::None: return "None";
    case Severity::Word: return "Word";
    case Severity::Partial: return "Partial";
    case Severity::Full: return "Full";
  }
  return "None";
}

std::string sentence_label(Severity s, PathologyAxis axis) {
  const char* noun = axis == PathologyAxis::Hallucination ? "hallucination" : "omission";
  switch (s) {
    case Severity::None: return std::string("No ") + noun;
    case Severity::Word: return std::string("Small ") + noun;
    case Severity::Partial: return std::string("Partial ") + noun;
    case Severity::Full: return std::string("Full ") + noun;
  }
  return std::string("No ") + noun;
}

Severity parse_severity(const std::string& s, const std::map<std::string, int>& remap) {
  if (auto it = remap.find(s); it != remap.end()) {
    if (it->second < 0 || it->second > 3)
      throw Error(ErrorCode::InvalidConfig, "severity remap level out of range for \"" + s + "\"");
    return static_cast<Severity>(it->second);
  }
  if (s.size() == 1 && s[0] >= '0' && s[0] <= '3') return static_cast<Severity>(s[0] - '0');
  for (int level = 0; level <= 3; ++level) {
    auto sev = static_cast<Severity>(level);
    if (s == severity_name(sev) || s == sentence_label(sev, PathologyAxis::Hallucination) ||
        s == sentence_label(sev, PathologyAxis::Omission))
      return sev;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown severity label \"" + s + "\"");
}

double ContributionMatrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = 0; j < n_src; ++j) s += at(i, j);
  return s;
}

double ContributionMatrix::row_max(std::size_t i) const {
  double m = 0.0;
  for (std::size_t j = 0; j < n_src; ++j)
    if (at(i, j) > m) m = at(i, j);
  return m;
}

double ContributionMatrix::col_sum(std::size_t j) const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_tgt; ++i) s += at(i, j);
  return s;
}

double ContributionMatrix::col_max(std::size_t j) const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_tgt; ++i)
    if (at(i, j) > m) m = at(i, j);
  return m;
}

double ContributionMatrix::total() const {
  double s = 0.0;
  for (double v : entries) s += v;
  return s;
}

void Corpus::rebuild_manifest() {
  manifest.clear();
  for (const auto& r : records) ++manifest[r.direction.str()][r.data_source];
}

}  // namespace mtpath
