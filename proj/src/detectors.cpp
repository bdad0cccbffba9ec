#include "mtpath/detectors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "mtpath/csv.hpp"
#include "mtpath/errors.hpp"
#include "mtpath/parallel.hpp"
#include "mtpath/rng.hpp"

namespace mtpath {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

const char* kind_name(DetectorId::Kind k) {
  switch (k) {
    case DetectorId::Kind::SeqLogprob: return "seq_logprob";
    case DetectorId::Kind::Alti: return "alti";
    case DetectorId::Kind::AltiT: return "alti_t";
    case DetectorId::Kind::Sim: return "sim";
    case DetectorId::Kind::Ext: return "ext";
    case DetectorId::Kind::WassToUnif: return "wass_to_unif";
    case DetectorId::Kind::WassToData: return "wass_to_data";
    case DetectorId::Kind::WassCombo: return "wass_combo";
    case DetectorId::Kind::WassMean: return "wass_mean";
    case DetectorId::Kind::Noise: return "noise";
  }
  return "";
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

}  // namespace

std::string DetectorId::str() const {
  std::string base = kind_name(kind);
  if (kind == Kind::Sim || kind == Kind::Ext || kind == Kind::Noise) return base + ":" + arg;
  if (is_wass() && drop_eos) return base + "_noeos";
  return base;
}

DetectorId DetectorId::parse(const std::string& s) {
  DetectorId id;
  if (s == "seq_logprob") {
    id.kind = Kind::SeqLogprob;
    return id;
  }
  if (s == "alti") {
    id.kind = Kind::Alti;
    return id;
  }
  if (s == "alti_t") {
    id.kind = Kind::AltiT;
    return id;
  }
  if (s.rfind("sim:", 0) == 0 && s.size() > 4) {
    id.kind = Kind::Sim;
    id.arg = s.substr(4);
    return id;
  }
  if (s.rfind("ext:", 0) == 0 && s.size() > 4) {
    id.kind = Kind::Ext;
    id.arg = s.substr(4);
    return id;
  }
  if (s.rfind("noise:", 0) == 0 && all_digits(s.substr(6))) {
    id.kind = Kind::Noise;
    id.arg = s.substr(6);
    return id;
  }
  std::string base = s;
  if (base.size() > 6 && base.compare(base.size() - 6, 6, "_noeos") == 0) {
    id.drop_eos = true;
    base = base.substr(0, base.size() - 6);
  }
  if (base == "wass_to_unif")
    id.kind = Kind::WassToUnif;
  else if (base == "wass_to_data")
    id.kind = Kind::WassToData;
  else if (base == "wass_combo")
    id.kind = Kind::WassCombo;
  else if (base == "wass_mean")
    id.kind = Kind::WassMean;
  else
    throw Error(ErrorCode::UnknownDetector, "\"" + s + "\"");
  return id;
}

std::vector<DetectorId> parse_detector_list(const std::string& comma_separated) {
  std::vector<DetectorId> out;
  std::stringstream ss(comma_separated);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(DetectorId::parse(item));
  }
  return out;
}

DetectorScore seq_logprob(const TranslationRecord& r) {
  if (r.tgt_logprob.empty()) throw Error(ErrorCode::MissingInput, r.id + ": tgt_logprob empty");
  double sum = 0.0;
  for (double v : r.tgt_logprob) sum += v;
  return {"seq_logprob", -(sum / static_cast<double>(r.tgt_logprob.size()))};
}

DetectorScore alti_mean(const TranslationRecord& r) {
  if (!r.alti || r.alti->n_tgt == 0)
    throw Error(ErrorCode::MissingInput, r.id + ": alti absent or empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < r.alti->n_tgt; ++i) sum += r.alti->row_sum(i);
  return {"alti", -(sum / static_cast<double>(r.alti->n_tgt))};
}

DetectorScore alti_t_mean(const TranslationRecord& r) {
  if (!r.alti || r.alti->n_src == 0)
    throw Error(ErrorCode::MissingInput, r.id + ": alti absent or empty");
  double sum = 0.0;
  for (std::size_t j = 0; j < r.alti->n_src; ++j) sum += r.alti->col_sum(j);
  return {"alti_t", -(sum / static_cast<double>(r.alti->n_src))};
}

DetectorScore embedding_similarity(const TranslationRecord& r, const std::string& encoder) {
  auto it = r.embeddings.find(encoder);
  if (it == r.embeddings.end())
    throw Error(ErrorCode::MissingInput, r.id + ": embeddings[" + encoder + "] absent");
  const auto& p = it->second;
  double dot = 0.0, ns = 0.0, nt = 0.0;
  for (std::size_t i = 0; i < p.src.size(); ++i) {
    dot += p.src[i] * p.tgt[i];
    ns += p.src[i] * p.src[i];
    nt += p.tgt[i] * p.tgt[i];
  }
  if (ns == 0.0 || nt == 0.0)
    throw Error(ErrorCode::ZeroVector, r.id + ": zero-norm embedding for " + encoder);
  double cos = dot / (std::sqrt(ns) * std::sqrt(nt));
  return {"sim:" + encoder, -cos};
}

DetectorScore external_score(const TranslationRecord& r, const std::string& name) {
  auto it = r.external_scores.find(name);
  if (it == r.external_scores.end())
    throw Error(ErrorCode::MissingInput, r.id + ": external_scores[" + name + "] absent");
  return {"ext:" + name, -it->second};
}

DetectorScore noise_score(const TranslationRecord& r, std::uint64_t seed) {
  Rng rng(derive_seed(seed, r.id));
  return {"noise:" + std::to_string(seed), rng.real01()};
}

ScoringContext build_scoring_context(const Corpus& reference, const std::vector<DetectorId>& ids,
                                     const OtParams& params) {
  ScoringContext ctx;
  ctx.params = params;
  bool ref_plain = false, ref_noeos = false, cal_plain = false, cal_noeos = false;
  for (const auto& id : ids) {
    if (!id.needs_reference()) continue;
    (id.drop_eos ? ref_noeos : ref_plain) = true;
    if (id.needs_calibration()) (id.drop_eos ? cal_noeos : cal_plain) = true;
  }
  if (ref_plain) ctx.refs = build_reference_set(reference, false);
  if (ref_noeos) ctx.refs_noeos = build_reference_set(reference, true);
  if (cal_plain) ctx.calibs = calibrate(reference, ctx.refs, false, params);
  if (cal_noeos) ctx.calibs_noeos = calibrate(reference, ctx.refs_noeos, true, params);
  return ctx;
}

namespace {

// Per-record OT intermediates for one EOS policy, computed at most once.
struct WassCell {
  bool dist_ok = false;
  AttentionDistribution dist;
  bool have_wtu = false;
  double wtu = 0.0;
  bool have_wtd = false;
  bool wtd_ok = false;
  double wtd = 0.0;
};

void fill_wass(const TranslationRecord& r, bool drop_eos, const ScoringContext& ctx,
               WassCell& cell, bool need_wtd) {
  if (!cell.have_wtu) {
    cell.have_wtu = true;
    try {
      cell.dist = attention_distribution(r, drop_eos);
      cell.dist_ok = true;
      cell.wtu = wass_to_unif(cell.dist);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MissingInput && e.code() != ErrorCode::DegenerateMass) throw;
      cell.dist_ok = false;
    }
  }
  if (need_wtd && !cell.have_wtd) {
    cell.have_wtd = true;
    cell.wtd_ok = false;
    if (cell.dist_ok) {
      const auto& refs = drop_eos ? ctx.refs_noeos : ctx.refs;
      auto it = refs.find(r.direction.str());
      if (it != refs.end()) {
        cell.wtd = wass_to_data(cell.dist, static_cast<int>(r.src_tokens.size()), it->second,
                                ctx.params.k, ctx.params.window);
        cell.wtd_ok = true;
      }
    }
  }
}

void score_record_into(const TranslationRecord& r, const std::vector<DetectorId>& detectors,
                       const ScoringContext& ctx, std::vector<double>& row) {
  WassCell plain, noeos;
  for (std::size_t c = 0; c < detectors.size(); ++c) {
    const DetectorId& id = detectors[c];
    row[c] = kMissing;
    try {
      switch (id.kind) {
        case DetectorId::Kind::SeqLogprob:
          row[c] = seq_logprob(r).value;
          break;
        case DetectorId::Kind::Alti:
          row[c] = alti_mean(r).value;
          break;
        case DetectorId::Kind::AltiT:
          row[c] = alti_t_mean(r).value;
          break;
        case DetectorId::Kind::Sim:
          row[c] = embedding_similarity(r, id.arg).value;
          break;
        case DetectorId::Kind::Ext:
          row[c] = external_score(r, id.arg).value;
          break;
        case DetectorId::Kind::Noise:
          row[c] = noise_score(r, std::stoull(id.arg)).value;
          break;
        case DetectorId::Kind::WassToUnif:
        case DetectorId::Kind::WassToData:
        case DetectorId::Kind::WassCombo:
        case DetectorId::Kind::WassMean: {
          WassCell& cell = id.drop_eos ? noeos : plain;
          fill_wass(r, id.drop_eos, ctx, cell, id.needs_reference());
          if (!cell.dist_ok) break;
          if (id.kind == DetectorId::Kind::WassToUnif) {
            row[c] = cell.wtu;
            break;
          }
          if (!cell.wtd_ok) break;
          if (id.kind == DetectorId::Kind::WassToData) {
            row[c] = cell.wtd;
            break;
          }
          const auto& calibs = id.drop_eos ? ctx.calibs_noeos : ctx.calibs;
          auto it = calibs.find(r.direction.str());
          if (it == calibs.end()) break;
          row[c] = id.kind == DetectorId::Kind::WassCombo
                       ? wass_combo(cell.wtu, cell.wtd, it->second)
                       : wass_mean(cell.wtu, cell.wtd, it->second);
          break;
        }
      }
    } catch (const Error& e) {
      // Record-level gaps stay missing markers; configuration faults surface.
      if (e.code() != ErrorCode::MissingInput && e.code() != ErrorCode::ZeroVector &&
          e.code() != ErrorCode::DegenerateMass)
        throw;
    }
  }
}

ScoreTable make_table(const Corpus& c, const std::vector<DetectorId>& detectors) {
  ScoreTable t;
  t.ids.reserve(c.records.size());
  for (const auto& r : c.records) {
    t.ids.push_back(r.id);
    t.directions.push_back(r.direction.str());
    t.data_sources.push_back(r.data_source);
  }
  for (const auto& id : detectors) t.columns.push_back(id.str());
  t.values.assign(c.records.size(), std::vector<double>(detectors.size(), kMissing));
  return t;
}

}  // namespace

ScoreTable score_corpus(const Corpus& c, const std::vector<DetectorId>& detectors,
                        const ScoringContext& ctx, int threads) {
  ScoreTable t = make_table(c, detectors);
  parallel_for(c.records.size(), threads, [&](std::size_t i) {
    score_record_into(c.records[i], detectors, ctx, t.values[i]);
  });
  t.build_row_index();
  return t;
}

ScoreTable score_corpus_serial(const Corpus& c, const std::vector<DetectorId>& detectors,
                               const ScoringContext& ctx) {
  ScoreTable t = make_table(c, detectors);
  for (std::size_t i = 0; i < c.records.size(); ++i)
    score_record_into(c.records[i], detectors, ctx, t.values[i]);
  t.build_row_index();
  return t;
}

std::optional<double> ScoreTable::value(std::size_t row, std::size_t col) const {
  double v = values[row][col];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

int ScoreTable::column(const std::string& detector) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == detector) return static_cast<int>(i);
  return -1;
}

int ScoreTable::row_of(const std::string& id) const {
  auto it = row_index_.find(id);
  return it == row_index_.end() ? -1 : static_cast<int>(it->second);
}

void ScoreTable::build_row_index() {
  row_index_.clear();
  for (std::size_t i = 0; i < ids.size(); ++i) row_index_[ids[i]] = i;
}

std::string ScoreTable::to_csv() const {
  std::string out;
  std::vector<std::string> header = {"id", "direction", "data_source"};
  header.insert(header.end(), columns.begin(), columns.end());
  out += join_csv_row(header);
  out += '\n';
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::vector<std::string> row = {ids[i], directions[i], data_sources[i]};
    for (std::size_t c = 0; c < columns.size(); ++c) {
      double v = values[i][c];
      row.push_back(std::isnan(v) ? std::string() : format_double(v));
    }
    out += join_csv_row(row);
    out += '\n';
  }
  return out;
}

std::string ScoreTable::to_json() const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    nlohmann::ordered_json j;
    j["id"] = ids[i];
    j["direction"] = directions[i];
    j["data_source"] = data_sources[i];
    nlohmann::ordered_json scores;
    for (std::size_t c = 0; c < columns.size(); ++c)
      if (!std::isnan(values[i][c])) scores[columns[c]] = values[i][c];
    j["scores"] = std::move(scores);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

ScoreTable ScoreTable::from_csv_file(const std::string& path) {
  CsvTable csv = read_csv(path);
  if (csv.header.size() < 3 || csv.header[0] != "id" || csv.header[1] != "direction" ||
      csv.header[2] != "data_source")
    throw Error(ErrorCode::SchemaError, path + ": expected header id,direction,data_source,...");
  ScoreTable t;
  t.columns.assign(csv.header.begin() + 3, csv.header.end());
  for (const auto& row : csv.rows) {
    t.ids.push_back(row[0]);
    t.directions.push_back(row[1]);
    t.data_sources.push_back(row[2]);
    std::vector<double> vals;
    vals.reserve(t.columns.size());
    for (std::size_t c = 3; c < row.size(); ++c)
      vals.push_back(row[c].empty() ? kMissing : parse_double(row[c]));
    t.values.push_back(std::move(vals));
  }
  t.build_row_index();
  return t;
}

}  // namespace mtpath
