#include "mtpath/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "mtpath/errors.hpp"
#include "mtpath/rng.hpp"

namespace mtpath {

const char* strategy_name(SelectionStrategy s) {
  switch (s) {
    case SelectionStrategy::Uniform: return "uniform";
    case SelectionStrategy::Quantile: return "quantile";
    case SelectionStrategy::Worst: return "worst";
  }
  return "?";
}

SelectionStrategy parse_strategy(const std::string& s) {
  if (s == "uniform") return SelectionStrategy::Uniform;
  if (s == "quantile") return SelectionStrategy::Quantile;
  if (s == "worst") return SelectionStrategy::Worst;
  throw Error(ErrorCode::InvalidConfig, "unknown strategy '" + s + "'");
}

std::vector<double> quantile_weights(const ScoreTable& t, const std::vector<std::string>& detectors) {
  const std::size_t n = t.ids.size();
  if (detectors.empty()) throw Error(ErrorCode::InvalidConfig, "need at least one detector");
  std::vector<double> weights(n, 0.0);
  for (const auto& det : detectors) {
    int ci = t.column(det);
    if (ci < 0) throw Error(ErrorCode::MissingScores, "score table has no column '" + det + "'");
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto v = t.value(i, static_cast<std::size_t>(ci));
      if (!v) throw Error(ErrorCode::MissingScores, "record '" + t.ids[i] + "' has no score for '" + det + "'");
      col[i] = *v;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });
    // Average rank over each tie run; rank 1 = least pathological.
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j < n && col[order[j]] == col[order[i]]) ++j;
      double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
      for (std::size_t p = i; p < j; ++p) weights[order[p]] += avg_rank / static_cast<double>(n);
      i = j;
    }
  }
  for (double& w : weights) w /= static_cast<double>(detectors.size());
  return weights;
}

std::vector<std::size_t> weighted_sample_without_replacement(const std::vector<double>& weights,
                                                             std::size_t k, Rng& rng) {
  if (k > weights.size())
    throw Error(ErrorCode::NotEnoughRecords, "requested " + std::to_string(k) + " of " +
                                                 std::to_string(weights.size()) + " weighted items");
  for (double w : weights)
    if (!(w >= 0.0)) throw Error(ErrorCode::InvalidConfig, "weights must be non-negative");
  std::vector<std::size_t> remaining(weights.size());
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<double> w(weights);
  std::vector<std::size_t> out;
  out.reserve(k);
  while (out.size() < k) {
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    double r = rng.real01() * total;
    std::size_t chosen = w.size() - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc += w[i];
      if (r < acc) {
        chosen = i;
        break;
      }
    }
    out.push_back(remaining[chosen]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(chosen));
    w.erase(w.begin() + static_cast<std::ptrdiff_t>(chosen));
  }
  return out;
}

SelectionResult select_candidates(const Corpus& c, const ScoreTable& t, SelectionStrategy strategy,
                                  std::size_t n, std::uint64_t seed,
                                  const std::vector<std::string>& detectors,
                                  const std::set<std::string>& exclude) {
  std::vector<std::string> pool;  // corpus order
  for (const auto& r : c.records)
    if (!exclude.count(r.id)) pool.push_back(r.id);
  if (n > pool.size()) {
    throw Error(ErrorCode::NotEnoughRecords, "requested " + std::to_string(n) + " of " +
                                                 std::to_string(pool.size()) + " eligible records");
  }

  std::vector<double> all_weights;
  std::vector<std::string> ids;
  if (strategy == SelectionStrategy::Uniform) {
    Rng rng(seed);
    auto draws = rng.sample_without_replacement(pool.size(), n);
    for (auto d : draws) ids.push_back(pool[d]);
  } else {
    if (detectors.empty()) throw Error(ErrorCode::InvalidConfig, "strategy needs at least one detector");
    all_weights = quantile_weights(t, detectors);
    auto row_of = [&](const std::string& id) {
      int r = t.row_of(id);
      if (r < 0) throw Error(ErrorCode::MissingScores, "record '" + id + "' missing from the score table");
      return static_cast<std::size_t>(r);
    };
    if (strategy == SelectionStrategy::Quantile) {
      Rng rng(seed);
      std::vector<double> w(pool.size());
      for (std::size_t i = 0; i < pool.size(); ++i) w[i] = all_weights[row_of(pool[i])];
      for (std::size_t i : weighted_sample_without_replacement(w, n, rng)) ids.push_back(pool[i]);
    } else {
      // worst: per-detector ranking, score descending then id ascending.
      std::vector<std::vector<std::string>> ranked(detectors.size());
      for (std::size_t d = 0; d < detectors.size(); ++d) {
        int ci = t.column(detectors[d]);
        std::vector<std::pair<double, std::string>> scored;
        for (const auto& id : pool) {
          auto v = t.value(row_of(id), static_cast<std::size_t>(ci));
          if (!v) throw Error(ErrorCode::MissingScores, "record '" + id + "' has no score for '" + detectors[d] + "'");
          scored.emplace_back(*v, id);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
          if (a.first != b.first) return a.first > b.first;
          return a.second < b.second;
        });
        ranked[d].reserve(scored.size());
        for (auto& [s, id] : scored) ranked[d].push_back(std::move(id));
      }
      std::set<std::string> taken;
      std::vector<std::size_t> cursor(detectors.size(), 0);
      std::size_t d = 0;
      while (ids.size() < n) {
        auto& cur = cursor[d];
        while (cur < ranked[d].size() && taken.count(ranked[d][cur])) ++cur;
        if (cur < ranked[d].size()) {
          ids.push_back(ranked[d][cur]);
          taken.insert(ranked[d][cur]);
          ++cur;
        }
        d = (d + 1) % detectors.size();
      }
    }
  }

  nlohmann::ordered_json audit;
  audit["strategy"] = strategy_name(strategy);
  audit["seed"] = seed;
  audit["n"] = n;
  audit["pool_size"] = pool.size();
  audit["excluded"] = std::vector<std::string>(exclude.begin(), exclude.end());
  if (strategy != SelectionStrategy::Uniform) audit["detectors"] = detectors;
  if (strategy == SelectionStrategy::Quantile) {
    nlohmann::ordered_json w = nlohmann::ordered_json::object();
    for (const auto& id : pool) w[id] = all_weights[static_cast<std::size_t>(t.row_of(id))];
    audit["weights"] = std::move(w);
  }
  audit["selected"] = ids;

  SelectionResult res;
  res.ids = std::move(ids);
  res.audit_json = audit.dump(2);
  return res;
}

}  // namespace mtpath
