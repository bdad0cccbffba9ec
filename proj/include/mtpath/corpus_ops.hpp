#pragma once

#include <array>
#include <map>
#include <string>

#include "mtpath/types.hpp"

namespace mtpath {

// Drops incomprehensible and unannotated records, preserving order.
Corpus filter_evaluable(const Corpus& c);

struct DirectionStats {
  std::size_t count = 0;  // annotated, comprehensible records
  std::array<std::size_t, 4> halluc_counts{};
  std::array<std::size_t, 4> omission_counts{};

  double halluc_rate(Severity s) const {
    return static_cast<double>(halluc_counts[static_cast<int>(s)]) / static_cast<double>(count);
  }
  double omission_rate(Severity s) const {
    return static_cast<double>(omission_counts[static_cast<int>(s)]) / static_cast<double>(count);
  }
  // Fraction with severity > None.
  double halluc_any_rate() const {
    return static_cast<double>(count - halluc_counts[0]) / static_cast<double>(count);
  }
  double omission_any_rate() const {
    return static_cast<double>(count - omission_counts[0]) / static_cast<double>(count);
  }
};

// Per-direction severity rates; directions with no annotated records are
// absent from the map, never zero-divided.
std::map<std::string, DirectionStats> corpus_stats(const Corpus& c);

}  // namespace mtpath
