#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "mtpath/types.hpp"

namespace mtpath {

// EOS policy applied once here: drop_eos removes the EOS entry and rescales;
// otherwise the mass is passed through renormalized to sum exactly 1 (1e-12).
AttentionDistribution attention_distribution(const TranslationRecord& r, bool drop_eos);

// Total variation of the sum-normalized distribution to uniform
// (1-Wasserstein with 0/1 cost); range [0, 1 - 1/n].
// Long-double accumulation with a single final rounding keeps the
// closed-form cases (uniform -> 0, one-hot -> (n-1)/n) exact.
double wass_to_unif(const AttentionDistribution& d);

// Exact 1-Wasserstein between measures placing a_j at position (j+0.5)/|a|
// and b_k at (k+0.5)/|b|, via the CDF-difference integral over merged
// breakpoints. Symmetric; zero iff the merged-position measures coincide.
double wass1_positions(const AttentionDistribution& a, const AttentionDistribution& b);

struct ReferenceSet {
  std::string direction;
  bool drop_eos = false;
  std::vector<AttentionDistribution> distributions;
  std::vector<int> source_lengths;  // source token counts, parallel to distributions
};

struct OtParams {
  std::size_t k = 4;           // bottom distances averaged by wass_to_data
  double window = 1.25;        // length-ratio filter
  double tau_quantile = 0.99;  // wtu quantile used as the combo threshold
};

// Per direction, drops records in the worst ceil(0.2 n) by any available
// criterion (length ratio always; seq_logprob and one embedding similarity
// when computable for every record of the direction), ties by id ascending,
// then collects survivors' attention distributions. Directions where the
// union of drops leaves nothing raise EmptyReferenceSet.
std::map<std::string, ReferenceSet> build_reference_set(const Corpus& c, bool drop_eos);

double wass_to_data(const AttentionDistribution& d, int source_length, const ReferenceSet& ref,
                    std::size_t k = 4, double window = 1.25);

struct Calibration {
  std::string direction;
  bool drop_eos = false;
  double q1_wtu = 0, q99_wtu = 0;
  double q1_wtd = 0, q99_wtd = 0;
  double sd_wtu = 0, sd_wtd = 0;  // population sds
  double tau = 0;                 // tau_quantile of raw wtu
  OtParams params;
};

// Type-7 quantile (linear interpolation between order statistics); p in [0,1].
double quantile_type7(std::vector<double> values, double p);

// Raw wtu/wtd on calibration records per direction; needs >= 10 records with
// usable attention per direction, positive variance in both scores.
std::map<std::string, Calibration> calibrate(const Corpus& c,
                                             const std::map<std::string, ReferenceSet>& refs,
                                             bool drop_eos, const OtParams& params = {});

// Affine map sending (q1_wtu, q99_wtu) -> (q1_wtd, q99_wtd).
double combo_scale(double wtu, const Calibration& cal);
// s_wtu scaled if wtu > tau, else raw wtd.
double wass_combo(double wtu, double wtd, const Calibration& cal);
// Inverse-sd weighted average; weights sum to 1.
double wass_mean(double wtu, double wtd, const Calibration& cal);

std::string calibrations_to_json(const std::vector<Calibration>& cals);
std::vector<Calibration> calibrations_from_json(const std::string& text);

}  // namespace mtpath
