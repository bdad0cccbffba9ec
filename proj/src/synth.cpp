#include "mtpath/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "mtpath/errors.hpp"
#include "mtpath/parallel.hpp"
#include "mtpath/rng.hpp"
#include "mtpath/validate.hpp"

namespace mtpath {

SignalProfile SignalProfile::sharp() {
  SignalProfile p;
  p.out_logprob_mu = -0.8;
  p.out_logprob_sd = 0.4;
  p.in_logprob_mu = -3.5;
  p.in_logprob_sd = 0.5;
  p.out_delta_mu = 4.0;
  p.out_delta_sd = 1.0;
  p.in_delta_mu = 0.3;
  p.in_delta_sd = 0.25;
  p.out_row_mu = 0.85;
  p.out_row_sd = 0.06;
  p.out_row_lo = 0.5;
  p.out_row_hi = 0.99;
  p.in_row_mu = 0.18;
  p.in_row_sd = 0.05;
  p.in_row_lo = 0.02;
  p.in_row_hi = 0.28;
  p.out_conc_mu = 0.65;
  p.out_conc_sd = 0.08;
  p.in_conc_mu = 0.25;
  p.in_conc_sd = 0.08;
  p.col_ratio_sd = 0.015;
  p.len_ratio_sd = 0.015;
  p.omission_shrink = 0.9;
  p.spill = 0.05;
  p.eos_mu = 0.2;
  p.eos_sd = 0.05;
  p.sim_cos[0] = 0.9;
  p.sim_cos[1] = 0.75;
  p.sim_cos[2] = 0.5;
  p.sim_cos[3] = 0.2;
  p.sim_noise = 0.05;
  p.qe[0] = 0.85;
  p.qe[1] = 0.65;
  p.qe[2] = 0.45;
  p.qe[3] = 0.2;
  p.qe_noise = 0.05;
  return p;
}

SignalProfile SignalProfile::noisy() {
  SignalProfile p = sharp();
  p.out_logprob_mu = -1.2;
  p.out_logprob_sd = 1.0;
  p.in_logprob_mu = -2.6;
  p.in_logprob_sd = 1.0;
  p.out_delta_mu = 3.0;
  p.out_delta_sd = 1.0;
  p.in_delta_mu = 1.6;
  p.in_delta_sd = 1.0;
  p.out_row_mu = 0.66;
  p.out_row_sd = 0.13;
  p.out_row_lo = 0.5;
  p.out_row_hi = 0.99;
  p.in_row_mu = 0.4;
  p.in_row_sd = 0.13;
  p.in_row_lo = 0.02;
  p.in_row_hi = 0.6;
  p.out_conc_mu = 0.6;
  p.out_conc_sd = 0.12;
  p.in_conc_mu = 0.42;
  p.in_conc_sd = 0.12;
  p.sim_noise = 0.12;
  p.qe_noise = 0.12;
  return p;
}

namespace {

void append_cp(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

enum class Script { Latin, Cyrillic, Han };

Script script_of(const std::string& tag) {
  if (tag == "Cyrl") return Script::Cyrillic;
  if (tag == "Hans" || tag == "Hant") return Script::Han;
  return Script::Latin;
}

// A word as code-point strings, so token splits stay on boundaries.
std::vector<std::string> make_word(Rng& rng, Script script) {
  std::vector<std::string> cps;
  if (script == Script::Han) {
    std::size_t len = 1 + rng.bounded(2);
    for (std::size_t i = 0; i < len; ++i) {
      std::string cp;
      append_cp(cp, static_cast<char32_t>(0x4E00 + rng.bounded(512)));
      cps.push_back(cp);
    }
    return cps;
  }
  std::size_t len = 3 + rng.bounded(6);
  for (std::size_t i = 0; i < len; ++i) {
    std::string cp;
    if (script == Script::Cyrillic) append_cp(cp, static_cast<char32_t>(0x430 + rng.bounded(32)));
    else cp.push_back(static_cast<char>('a' + rng.bounded(26)));
    cps.push_back(cp);
  }
  return cps;
}

struct SideText {
  std::string text;
  std::vector<TokenSpan> tokens;
  std::vector<std::size_t> word_start;                // byte offset per word
  std::vector<std::size_t> word_end;
  std::vector<std::vector<std::size_t>> word_tokens;  // token indices per word
  std::vector<std::size_t> token_word;                // word index per token
};

// Exactly round(split_prob * n_words) words become two tokens, so the token
// count is a deterministic function of the word count.
SideText build_side(Rng& rng, Script script, std::size_t n_words, double split_prob) {
  SideText side;
  const bool spaced = script != Script::Han;
  std::size_t n_split = static_cast<std::size_t>(std::llround(split_prob * static_cast<double>(n_words)));
  n_split = std::min(n_split, n_words);
  std::vector<char> splits(n_words, 0);
  for (auto w : rng.sample_without_replacement(n_words, n_split)) splits[w] = 1;
  for (std::size_t w = 0; w < n_words; ++w) {
    if (spaced && w > 0) side.text.push_back(' ');
    auto cps = make_word(rng, script);
    while (splits[w] && cps.size() < 2) {
      // Pad single-code-point words so the split has a boundary to use.
      std::string cp;
      if (script == Script::Han) append_cp(cp, static_cast<char32_t>(0x4E00 + rng.bounded(512)));
      else cp.push_back('a');
      cps.push_back(cp);
    }
    std::size_t start = side.text.size();
    std::vector<std::size_t> cp_offsets;
    std::string word;
    for (const auto& cp : cps) {
      cp_offsets.push_back(word.size());
      word += cp;
    }
    side.text += word;
    side.word_start.push_back(start);
    side.word_end.push_back(start + word.size());
    std::vector<std::size_t> toks;
    const int b0 = static_cast<int>(start);
    const int b2 = static_cast<int>(start + word.size());
    if (splits[w]) {
      std::size_t cut = cp_offsets[(cps.size() + 1) / 2];
      const int b1 = static_cast<int>(start + cut);
      toks.push_back(side.tokens.size());
      side.tokens.push_back({word.substr(0, cut), b0, b1});
      toks.push_back(side.tokens.size());
      side.tokens.push_back({word.substr(cut), b1, b2});
      side.token_word.push_back(w);
      side.token_word.push_back(w);
    } else {
      toks.push_back(side.tokens.size());
      side.tokens.push_back({word, b0, b2});
      side.token_word.push_back(w);
    }
    side.word_tokens.push_back(std::move(toks));
  }
  return side;
}

void check_spans(const std::vector<WordRange>& spans, std::size_t n_words, Severity sev, const char* axis) {
  if ((sev == Severity::None) != spans.empty())
    throw Error(ErrorCode::InvalidSpec, std::string(axis) + ": severity and spans disagree");
  std::size_t prev_end = 0;
  bool first = true;
  for (const auto& s : spans) {
    if (s.len == 0) throw Error(ErrorCode::InvalidSpec, std::string(axis) + ": empty span");
    if (s.begin + s.len > n_words) throw Error(ErrorCode::InvalidSpec, std::string(axis) + ": span out of range");
    if (!first && s.begin < prev_end) throw Error(ErrorCode::InvalidSpec, std::string(axis) + ": overlapping spans");
    prev_end = s.begin + s.len;
    first = false;
  }
}

double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

TranslationRecord generate_record(const RecordSpec& spec, std::uint64_t seed) {
  if (spec.id.empty()) throw Error(ErrorCode::InvalidSpec, "empty id");
  if (spec.src_words == 0 || spec.tgt_words == 0) throw Error(ErrorCode::InvalidSpec, "word counts must be positive");
  if (spec.split_prob < 0.0 || spec.split_prob > 1.0) throw Error(ErrorCode::InvalidSpec, "split_prob outside [0,1]");
  check_spans(spec.halluc_spans, spec.tgt_words, spec.halluc, "halluc");
  check_spans(spec.omission_spans, spec.src_words, spec.omission, "omission");

  const SignalProfile& p = spec.profile;
  Rng rng(seed);

  TranslationRecord r;
  r.id = spec.id;
  r.direction = spec.direction;
  r.data_source = spec.data_source;

  SideText src = build_side(rng, script_of(spec.direction.src_script), spec.src_words, spec.split_prob);
  SideText tgt = build_side(rng, script_of(spec.direction.tgt_script), spec.tgt_words, spec.split_prob);
  r.src_text = src.text;
  r.tgt_text = tgt.text;
  r.src_tokens = src.tokens;
  r.tgt_tokens = tgt.tokens;
  const std::size_t n_src_tok = src.tokens.size(), n_tgt_tok = tgt.tokens.size();

  std::vector<char> word_omitted(spec.src_words, 0), word_halluc(spec.tgt_words, 0);
  for (const auto& s : spec.omission_spans)
    for (std::size_t w = s.begin; w < s.begin + s.len; ++w) word_omitted[w] = 1;
  for (const auto& s : spec.halluc_spans)
    for (std::size_t w = s.begin; w < s.begin + s.len; ++w) word_halluc[w] = 1;

  std::vector<char> tok_omitted(n_src_tok, 0), tok_halluc(n_tgt_tok, 0);
  for (std::size_t t = 0; t < n_src_tok; ++t) tok_omitted[t] = word_omitted[src.token_word[t]];
  for (std::size_t t = 0; t < n_tgt_tok; ++t) tok_halluc[t] = word_halluc[tgt.token_word[t]];

  std::size_t omitted_words = 0;
  for (char c : word_omitted) omitted_words += c != 0;
  const double f_o = static_cast<double>(omitted_words) / static_cast<double>(spec.src_words);

  // Alignment targets: hallucination-free target words map onto the
  // non-omitted source words roughly in order.
  std::vector<std::size_t> align_pool;
  for (std::size_t w = 0; w < spec.src_words; ++w)
    if (!word_omitted[w]) align_pool.push_back(w);
  if (align_pool.empty())
    for (std::size_t w = 0; w < spec.src_words; ++w) align_pool.push_back(w);

  // The planted column mean shrinks with the omitted fraction. Row masses are
  // scaled by the realized token-count ratio so the column mean hits the
  // target regardless of length rounding.
  const double ratio = clampd(1.0 + rng.normal() * p.col_ratio_sd, 0.95, 1.05);
  const double col_mean = p.out_row_mu * (1.0 - p.omission_shrink * f_o) * ratio;
  const double mu_row =
      clampd(col_mean * static_cast<double>(n_src_tok) / static_cast<double>(n_tgt_tok), 0.05, 0.97);

  ContributionMatrix alti;
  alti.n_tgt = n_tgt_tok;
  alti.n_src = n_src_tok;
  alti.entries.assign(n_tgt_tok * n_src_tok, 0.0);
  std::vector<double> jitter(n_src_tok);
  for (std::size_t t = 0; t < n_tgt_tok; ++t) {
    const std::size_t wi = tgt.token_word[t];
    const bool in_span = tok_halluc[t] != 0;
    const double m = in_span ? clampd(p.in_row_mu + rng.normal() * p.in_row_sd, p.in_row_lo, p.in_row_hi)
                             : clampd(mu_row + rng.normal() * p.out_row_sd, p.out_row_lo, p.out_row_hi);
    const double conc = in_span ? clampd(p.in_conc_mu + rng.normal() * p.in_conc_sd, 0.05, 0.95)
                                : clampd(p.out_conc_mu + rng.normal() * p.out_conc_sd, 0.05, 0.95);
    const std::size_t aligned_word = align_pool[wi * align_pool.size() / spec.tgt_words];
    const auto& aligned_toks = src.word_tokens[aligned_word];

    for (std::size_t j = 0; j < n_src_tok; ++j) jitter[j] = 0.7 + 0.6 * rng.real01();
    std::vector<std::size_t> rest_clean, rest_omit;
    for (std::size_t j = 0; j < n_src_tok; ++j) {
      if (src.token_word[j] == aligned_word) continue;
      (tok_omitted[j] ? rest_omit : rest_clean).push_back(j);
    }
    double aligned_mass = conc * m;
    double rest_mass = m - aligned_mass;
    double omit_mass = 0.0, clean_mass = rest_mass;
    if (!rest_omit.empty() && !rest_clean.empty()) {
      omit_mass = p.spill * rest_mass;
      clean_mass = rest_mass - omit_mass;
    } else if (!rest_omit.empty()) {
      omit_mass = rest_mass;
      clean_mass = 0.0;
    } else if (rest_clean.empty()) {
      aligned_mass += rest_mass;
      clean_mass = 0.0;
    }
    for (auto j : aligned_toks)
      alti.entries[t * n_src_tok + j] = aligned_mass / static_cast<double>(aligned_toks.size());
    auto spread = [&](const std::vector<std::size_t>& pool, double mass) {
      if (pool.empty() || mass <= 0.0) return;
      double total = 0.0;
      for (auto j : pool) total += jitter[j];
      for (auto j : pool) alti.entries[t * n_src_tok + j] = mass * jitter[j] / total;
    };
    spread(rest_clean, clean_mass);
    spread(rest_omit, omit_mass);
  }
  r.alti = alti;

  r.tgt_logprob.resize(n_tgt_tok);
  std::vector<double> uncond(n_tgt_tok);
  for (std::size_t t = 0; t < n_tgt_tok; ++t) {
    const bool in_span = tok_halluc[t] != 0;
    double lp = in_span ? p.in_logprob_mu + rng.normal() * p.in_logprob_sd
                        : p.out_logprob_mu + rng.normal() * p.out_logprob_sd;
    lp = clampd(lp, -20.0, -0.001);
    double delta = in_span ? p.in_delta_mu + rng.normal() * p.in_delta_sd
                           : p.out_delta_mu + rng.normal() * p.out_delta_sd;
    delta = clampd(delta, 0.0, 20.0);
    r.tgt_logprob[t] = lp;
    uncond[t] = lp - delta;
  }
  r.tgt_logprob_uncond = uncond;

  std::vector<double> rev(n_src_tok), rev_uncond(n_src_tok);
  for (std::size_t j = 0; j < n_src_tok; ++j) {
    const bool in_span = tok_omitted[j] != 0;
    double lp = in_span ? p.in_logprob_mu + rng.normal() * p.in_logprob_sd
                        : p.out_logprob_mu + rng.normal() * p.out_logprob_sd;
    lp = clampd(lp, -20.0, -0.001);
    double delta = in_span ? p.in_delta_mu + rng.normal() * p.in_delta_sd
                           : p.out_delta_mu + rng.normal() * p.out_delta_sd;
    delta = clampd(delta, 0.0, 20.0);
    rev[j] = lp;
    rev_uncond[j] = lp - delta;
  }
  r.src_logprob_rev = rev;
  r.src_logprob_rev_uncond = rev_uncond;

  // Attention follows the contribution column masses with a planted EOS share.
  const double eos = clampd(p.eos_mu + rng.normal() * p.eos_sd, 0.02, 0.6);
  double total_mass = 0.0;
  for (double e : alti.entries) total_mass += e;
  AttentionDistribution attn;
  attn.has_eos = true;
  attn.mass.resize(n_src_tok + 1);
  for (std::size_t j = 0; j < n_src_tok; ++j) {
    double col = 0.0;
    for (std::size_t t = 0; t < n_tgt_tok; ++t) col += alti.entries[t * n_src_tok + j];
    attn.mass[j] = col / total_mass * (1.0 - eos);
  }
  attn.mass[n_src_tok] = eos;
  r.attn = attn;

  const int max_sev = std::max(static_cast<int>(spec.halluc), static_cast<int>(spec.omission));
  const double cos_target = clampd(p.sim_cos[max_sev] + rng.normal() * p.sim_noise, -0.95, 0.99);
  std::vector<double> v1(8), v2(8);
  for (auto& v : v1) v = rng.normal();
  for (auto& v : v2) v = rng.normal();
  auto norm = [](std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    for (double& x : v) x /= s;
  };
  norm(v1);
  double proj = 0.0;
  for (std::size_t i = 0; i < 8; ++i) proj += v1[i] * v2[i];
  for (std::size_t i = 0; i < 8; ++i) v2[i] -= proj * v1[i];
  norm(v2);
  EmbeddingPair emb;
  emb.src = v1;
  emb.tgt.resize(8);
  const double ortho = std::sqrt(1.0 - cos_target * cos_target);
  for (std::size_t i = 0; i < 8; ++i) emb.tgt[i] = cos_target * v1[i] + ortho * v2[i];
  r.embeddings["synthenc"] = emb;

  r.external_scores["qe"] = clampd(p.qe[max_sev] + rng.normal() * p.qe_noise, 0.001, 0.999);

  Annotation ann;
  ann.halluc_severity = spec.halluc;
  ann.omission_severity = spec.omission;
  for (const auto& s : spec.halluc_spans)
    ann.halluc_spans.push_back({static_cast<int>(tgt.word_start[s.begin]),
                                static_cast<int>(tgt.word_end[s.begin + s.len - 1])});
  for (const auto& s : spec.omission_spans)
    ann.omission_spans.push_back({static_cast<int>(src.word_start[s.begin]),
                                  static_cast<int>(src.word_end[s.begin + s.len - 1])});
  ann.incomprehensible = false;
  r.annotation = ann;
  return r;
}

std::vector<std::size_t> mixture_counts(const std::vector<double>& shares, std::size_t n) {
  std::vector<std::size_t> counts(shares.size(), 0);
  std::vector<std::pair<double, std::size_t>> fracs;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    double exact = shares[i] * static_cast<double>(n);
    double fl = std::floor(exact);
    counts[i] = static_cast<std::size_t>(fl);
    assigned += counts[i];
    fracs.emplace_back(exact - fl, i);
  }
  std::sort(fracs.begin(), fracs.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[fracs[i % fracs.size()].second];
  return counts;
}

GenConfig GenConfig::defaults() {
  GenConfig c;
  c.directions = {parse_direction("eng_Latn-deu_Latn"), parse_direction("deu_Latn-eng_Latn"),
                  parse_direction("eng_Latn-rus_Cyrl")};
  c.records_per_direction = 500;
  c.mixture = {
      {Severity::None, Severity::None, 0.81},    {Severity::Word, Severity::None, 0.01},
      {Severity::Partial, Severity::None, 0.01}, {Severity::Full, Severity::Full, 0.01},
      {Severity::None, Severity::Word, 0.06},    {Severity::None, Severity::Partial, 0.06},
      {Severity::None, Severity::Full, 0.04},
  };
  return c;
}

GenConfig GenConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config JSON: ") + e.what());
  }
  GenConfig c = defaults();
  try {
    if (j.contains("directions")) {
      c.directions.clear();
      for (const auto& d : j.at("directions")) c.directions.push_back(parse_direction(d.get<std::string>()));
    }
    if (j.contains("records_per_direction")) c.records_per_direction = j.at("records_per_direction").get<std::size_t>();
    if (j.contains("mixture")) {
      c.mixture.clear();
      for (const auto& cell : j.at("mixture")) {
        SeverityCell sc;
        sc.halluc = parse_severity(cell.at("halluc"), {});
        sc.omission = parse_severity(cell.at("omission"), {});
        sc.share = cell.at("share").get<double>();
        c.mixture.push_back(sc);
      }
    }
    if (j.contains("profile")) {
      c.profile_name = j.at("profile").get<std::string>();
      if (c.profile_name == "sharp") c.profile = SignalProfile::sharp();
      else if (c.profile_name == "noisy") c.profile = SignalProfile::noisy();
      else throw Error(ErrorCode::InvalidConfig, "unknown profile '" + c.profile_name + "'");
    }
    if (j.contains("data_source")) c.data_source = j.at("data_source").get<std::string>();
    if (j.contains("min_src_words")) c.min_src_words = j.at("min_src_words").get<std::size_t>();
    if (j.contains("max_src_words")) c.max_src_words = j.at("max_src_words").get<std::size_t>();
    if (j.contains("split_prob")) c.split_prob = j.at("split_prob").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw;
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  if (c.directions.empty()) throw Error(ErrorCode::InvalidConfig, "no directions");
  if (c.records_per_direction == 0) throw Error(ErrorCode::InvalidConfig, "records_per_direction must be positive");
  if (c.mixture.empty()) throw Error(ErrorCode::InvalidConfig, "empty mixture");
  double sum = 0.0;
  for (const auto& cell : c.mixture) {
    if (cell.share < 0.0) throw Error(ErrorCode::InvalidConfig, "negative mixture share");
    sum += cell.share;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw Error(ErrorCode::InvalidConfig, "mixture shares must sum to 1");
  if (c.min_src_words < 2 || c.min_src_words > c.max_src_words)
    throw Error(ErrorCode::InvalidConfig, "need 2 <= min_src_words <= max_src_words");
  if (c.split_prob < 0.0 || c.split_prob > 1.0) throw Error(ErrorCode::InvalidConfig, "split_prob outside [0,1]");
  return c;
}

namespace {

std::vector<WordRange> plan_spans(Rng& rng, Severity sev, std::size_t words, bool is_halluc) {
  if (sev == Severity::None) return {};
  std::size_t k = 0;
  switch (sev) {
    case Severity::Word: k = 1 + rng.bounded(2); break;
    case Severity::Partial:
      k = static_cast<std::size_t>(std::llround((is_halluc ? 0.4 : 0.45) * static_cast<double>(words)));
      break;
    case Severity::Full:
      k = is_halluc ? words : static_cast<std::size_t>(std::llround(0.85 * static_cast<double>(words)));
      break;
    default: break;
  }
  std::size_t cap = words;
  if (!(is_halluc && sev == Severity::Full)) cap = words > 1 ? words - 1 : 1;
  k = std::min(std::max<std::size_t>(k, 1), cap);
  std::size_t start = rng.bounded(words - k + 1);
  return {{start, k}};
}

}  // namespace

Corpus generate_corpus(const GenConfig& config, std::uint64_t seed, int threads) {
  if (config.directions.empty()) throw Error(ErrorCode::InvalidConfig, "no directions");
  if (config.mixture.empty()) throw Error(ErrorCode::InvalidConfig, "empty mixture");
  for (std::size_t i = 0; i < config.directions.size(); ++i)
    for (std::size_t j = i + 1; j < config.directions.size(); ++j)
      if (config.directions[i].str() == config.directions[j].str())
        throw Error(ErrorCode::InvalidConfig, "duplicate direction " + config.directions[i].str());

  std::vector<double> shares;
  for (const auto& cell : config.mixture) shares.push_back(cell.share);

  std::vector<RecordSpec> specs;
  for (const auto& dir : config.directions) {
    auto counts = mixture_counts(shares, config.records_per_direction);
    std::vector<std::size_t> cell_of;
    for (std::size_t ci = 0; ci < counts.size(); ++ci)
      for (std::size_t k = 0; k < counts[ci]; ++k) cell_of.push_back(ci);
    Rng mix_rng(derive_seed(seed, "mixture:" + dir.str()));
    mix_rng.shuffle(cell_of.size(), [&](std::size_t a, std::size_t b) { std::swap(cell_of[a], cell_of[b]); });

    for (std::size_t i = 0; i < config.records_per_direction; ++i) {
      char idx[32];
      std::snprintf(idx, sizeof idx, "%05zu", i);
      RecordSpec spec;
      spec.id = "synth-" + dir.str() + "-" + idx;
      spec.direction = dir;
      spec.data_source = config.data_source;
      spec.profile = config.profile;
      spec.split_prob = config.split_prob;
      const auto& cell = config.mixture[cell_of[i]];
      spec.halluc = cell.halluc;
      spec.omission = cell.omission;

      Rng plan(derive_seed(seed, "plan:" + spec.id));
      spec.src_words = config.min_src_words + plan.bounded(config.max_src_words - config.min_src_words + 1);
      spec.omission_spans = plan_spans(plan, spec.omission, spec.src_words, false);
      std::size_t omitted = 0;
      for (const auto& s : spec.omission_spans) omitted += s.len;
      double f_o = static_cast<double>(omitted) / static_cast<double>(spec.src_words);
      double r2 = 1.0 + plan.normal() * config.profile.len_ratio_sd;
      double shrunk = static_cast<double>(spec.src_words) * (1.0 - config.profile.omission_shrink * f_o) * r2;
      spec.tgt_words = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(shrunk)));
      spec.halluc_spans = plan_spans(plan, spec.halluc, spec.tgt_words, true);
      specs.push_back(std::move(spec));
    }
  }

  Corpus corpus;
  corpus.records.resize(specs.size());
  parallel_for(specs.size(), threads, [&](std::size_t i) {
    corpus.records[i] = generate_record(specs[i], derive_seed(seed, "trace:" + specs[i].id));
  });
  corpus.rebuild_manifest();
  validate_corpus(corpus);
  return corpus;
}

}  // namespace mtpath
