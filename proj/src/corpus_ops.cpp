#include "mtpath/corpus_ops.hpp"

namespace mtpath {

Corpus filter_evaluable(const Corpus& c) {
  Corpus out;
  for (const auto& r : c.records)
    if (r.annotation && !r.annotation->incomprehensible) out.records.push_back(r);
  out.rebuild_manifest();
  return out;
}

std::map<std::string, DirectionStats> corpus_stats(const Corpus& c) {
  std::map<std::string, DirectionStats> out;
  for (const auto& r : c.records) {
    if (!r.annotation || r.annotation->incomprehensible) continue;
    auto& s = out[r.direction.str()];
    ++s.count;
    ++s.halluc_counts[static_cast<int>(r.annotation->halluc_severity)];
    ++s.omission_counts[static_cast<int>(r.annotation->omission_severity)];
  }
  return out;
}

}  // namespace mtpath
