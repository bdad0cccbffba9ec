#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtpath/attn_ot.hpp"
#include "mtpath/types.hpp"

namespace mtpath {

// Orientation contract: higher = more pathological, applied exactly once,
// at the detector boundary.
struct DetectorScore {
  std::string detector;
  double value = 0.0;
};

struct DetectorId {
  enum class Kind {
    SeqLogprob,
    Alti,
    AltiT,
    Sim,
    Ext,
    WassToUnif,
    WassToData,
    WassCombo,
    WassMean,
    Noise,
  };

  Kind kind = Kind::SeqLogprob;
  std::string arg;        // encoder for Sim, score name for Ext, seed for Noise
  bool drop_eos = false;  // wass family only ("_noeos" suffix)

  std::string str() const;
  static DetectorId parse(const std::string& s);  // UnknownDetector on bad ids

  bool is_wass() const {
    return kind == Kind::WassToUnif || kind == Kind::WassToData || kind == Kind::WassCombo ||
           kind == Kind::WassMean;
  }
  bool needs_reference() const {
    return kind == Kind::WassToData || kind == Kind::WassCombo || kind == Kind::WassMean;
  }
  bool needs_calibration() const {
    return kind == Kind::WassCombo || kind == Kind::WassMean;
  }
};

std::vector<DetectorId> parse_detector_list(const std::string& comma_separated);

// value = -mean(tgt_logprob)
DetectorScore seq_logprob(const TranslationRecord& r);
// value = -mean over target tokens of row sums
DetectorScore alti_mean(const TranslationRecord& r);
// value = -mean over source tokens of column sums
DetectorScore alti_t_mean(const TranslationRecord& r);
// value = -cosine(src, tgt); ZeroVector when either norm is 0
DetectorScore embedding_similarity(const TranslationRecord& r, const std::string& encoder);
// value = -stored score (stored convention: higher = better quality)
DetectorScore external_score(const TranslationRecord& r, const std::string& name);
// Seeded null detector: uniform [0,1) from (seed, record id), schedule-free.
DetectorScore noise_score(const TranslationRecord& r, std::uint64_t seed);

// Reference sets and calibrations keyed by direction string, one map per
// EOS policy. Only consulted for wass detectors.
struct ScoringContext {
  std::map<std::string, ReferenceSet> refs;             // drop_eos = false
  std::map<std::string, ReferenceSet> refs_noeos;       // drop_eos = true
  std::map<std::string, Calibration> calibs;
  std::map<std::string, Calibration> calibs_noeos;
  OtParams params;
};

// Builds the reference sets (and calibrations when needed) that the listed
// detectors require, from a reference corpus.
ScoringContext build_scoring_context(const Corpus& reference, const std::vector<DetectorId>& ids,
                                     const OtParams& params = {});

struct ScoreTable {
  std::vector<std::string> ids;
  std::vector<std::string> directions;
  std::vector<std::string> data_sources;
  std::vector<std::string> columns;                 // detector ids, canonical strings
  std::vector<std::vector<double>> values;          // [row][col], NaN = missing input

  std::optional<double> value(std::size_t row, std::size_t col) const;
  int column(const std::string& detector) const;    // -1 when absent
  int row_of(const std::string& id) const;          // -1 when absent
  void build_row_index();

  std::string to_csv() const;
  std::string to_json() const;
  static ScoreTable from_csv_file(const std::string& path);

 private:
  std::map<std::string, std::size_t> row_index_;
};

// Deterministic: rows in corpus order, missing inputs marked, never zero.
// Record-level problems (missing trace, zero vector, degenerate EOS mass)
// become missing markers; configuration problems (unknown detector, missing
// reference for a requested direction set, degenerate calibration) throw.
ScoreTable score_corpus(const Corpus& c, const std::vector<DetectorId>& detectors,
                        const ScoringContext& ctx, int threads);

// Serial reference implementation, kept for tests and benchmarks; must be
// bitwise identical to score_corpus at any thread count.
ScoreTable score_corpus_serial(const Corpus& c, const std::vector<DetectorId>& detectors,
                               const ScoringContext& ctx);

}  // namespace mtpath
