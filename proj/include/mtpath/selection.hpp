#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "mtpath/detectors.hpp"
#include "mtpath/types.hpp"

namespace mtpath {

enum class SelectionStrategy { Uniform, Quantile, Worst };

const char* strategy_name(SelectionStrategy s);
SelectionStrategy parse_strategy(const std::string& s);

// Per table row: mean over detectors of (average badness rank)/n, in (0,1].
// Every listed detector must have a score in every row.
std::vector<double> quantile_weights(const ScoreTable& t, const std::vector<std::string>& detectors);

class Rng;

// Sequential draw-and-remove: each draw picks index i with probability
// weights[i] / (sum over remaining), exactly k distinct indices in draw order.
// The quantile strategy of select_candidates runs on this.
std::vector<std::size_t> weighted_sample_without_replacement(const std::vector<double>& weights,
                                                             std::size_t k, Rng& rng);

struct SelectionResult {
  std::vector<std::string> ids;  // in selection order
  std::string audit_json;
};

// uniform: seeded sample without replacement; quantile: sequential weighted
// draw-and-remove with probabilities proportional to quantile_weights;
// worst: round-robin over detectors, each contributing its next-worst
// unselected record (score descending, id ascending). Excluded ids leave the
// pool before anything else happens.
SelectionResult select_candidates(const Corpus& c, const ScoreTable& t, SelectionStrategy strategy,
                                  std::size_t n, std::uint64_t seed,
                                  const std::vector<std::string>& detectors,
                                  const std::set<std::string>& exclude = {});

}  // namespace mtpath
