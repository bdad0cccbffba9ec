#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtpath/types.hpp"

namespace mtpath {

// Planted-signal constants. Token-level draws: "in" applies inside a planted
// pathology span, "out" everywhere else. Orientation: lower log-probs, lower
// contribution masses, and flatter rows are planted inside spans.
struct SignalProfile {
  double out_logprob_mu, out_logprob_sd;
  double in_logprob_mu, in_logprob_sd;
  double out_delta_mu, out_delta_sd;  // logprob minus unconditioned logprob
  double in_delta_mu, in_delta_sd;
  double out_row_mu, out_row_sd, out_row_lo, out_row_hi;  // alti row mass
  double in_row_mu, in_row_sd, in_row_lo, in_row_hi;
  double out_conc_mu, out_conc_sd;  // fraction of row mass on the aligned word
  double in_conc_mu, in_conc_sd;
  double col_ratio_sd;     // noise on the planted column-mean target
  double len_ratio_sd;     // noise on the target/source length ratio
  double omission_shrink;  // target-length shrink per omitted fraction
  double spill;            // share of spread mass leaking into omitted columns
  double eos_mu, eos_sd;
  double sim_cos[4];  // embedding cosine target, indexed by max severity
  double sim_noise;
  double qe[4];  // external quality score, indexed by max severity
  double qe_noise;

  static SignalProfile sharp();  // wide margins; the default
  static SignalProfile noisy();  // overlapping features for combiner studies
};

// Contiguous run of whole words, [begin, begin+len).
struct WordRange {
  std::size_t begin = 0;
  std::size_t len = 0;
};

struct RecordSpec {
  std::string id;
  Direction direction;
  std::string data_source = "synthetic";
  std::size_t src_words = 0;
  std::size_t tgt_words = 0;
  Severity halluc = Severity::None;
  Severity omission = Severity::None;
  std::vector<WordRange> halluc_spans;    // over target words
  std::vector<WordRange> omission_spans;  // over source words
  SignalProfile profile = SignalProfile::sharp();
  double split_prob = 0.2;  // chance a word becomes two tokens
};

// Deterministic given (spec, seed); all data_model invariants hold on the
// output. Throws InvalidSpec.
TranslationRecord generate_record(const RecordSpec& spec, std::uint64_t seed);

struct SeverityCell {
  Severity halluc = Severity::None;
  Severity omission = Severity::None;
  double share = 0.0;
};

struct GenConfig {
  std::vector<Direction> directions;
  std::size_t records_per_direction = 500;
  std::vector<SeverityCell> mixture;  // shares sum to 1
  SignalProfile profile = SignalProfile::sharp();
  std::string profile_name = "sharp";
  std::string data_source = "synthetic";
  std::size_t min_src_words = 6, max_src_words = 14;
  double split_prob = 0.2;

  static GenConfig defaults();
  static GenConfig from_json(const std::string& text);  // throws InvalidConfig
};

// Exact largest-remainder apportionment of n among the shares.
std::vector<std::size_t> mixture_counts(const std::vector<double>& shares, std::size_t n);

// Per-record sub-seeds derived from (seed, id): schedule-independent.
Corpus generate_corpus(const GenConfig& config, std::uint64_t seed, int threads = 1);

}  // namespace mtpath
