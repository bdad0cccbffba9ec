#include "mtpath/attn_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "mtpath/detectors.hpp"
#include "mtpath/errors.hpp"

namespace mtpath {

AttentionDistribution attention_distribution(const TranslationRecord& r, bool drop_eos) {
  if (!r.attn) throw Error(ErrorCode::MissingInput, r.id + ": attn absent");
  const auto& mass = r.attn->mass;
  if (mass.empty()) throw Error(ErrorCode::MissingInput, r.id + ": attn mass empty");
  long double total = 0.0L;
  for (double v : mass) total += v;
  if (!(total > 0.0L)) throw Error(ErrorCode::DegenerateMass, r.id + ": attn mass sums to zero");

  AttentionDistribution out;
  if (drop_eos) {
    if (!r.attn->has_eos) throw Error(ErrorCode::MissingInput, r.id + ": attn has no EOS entry");
    long double eos = mass.back();
    long double rest = total - eos;
    if (eos / total >= 1.0L - 1e-9L || !(rest > 0.0L))
      throw Error(ErrorCode::DegenerateMass, r.id + ": EOS carries all attention mass");
    out.mass.resize(mass.size() - 1);
    for (std::size_t i = 0; i + 1 < mass.size(); ++i)
      out.mass[i] = static_cast<double>(mass[i] / rest);
    out.has_eos = false;
  } else {
    out.mass.resize(mass.size());
    for (std::size_t i = 0; i < mass.size(); ++i)
      out.mass[i] = static_cast<double>(mass[i] / total);
    out.has_eos = r.attn->has_eos;
  }
  return out;
}

double wass_to_unif(const AttentionDistribution& d) {
  const std::size_t n = d.mass.size();
  if (n == 0) throw std::invalid_argument("wass_to_unif: empty distribution");
  long double s = 0.0L;
  for (double v : d.mass) s += v;
  if (!(s > 0.0L)) throw std::invalid_argument("wass_to_unif: zero total mass");
  const long double u = s / static_cast<long double>(n);
  long double acc = 0.0L;
  for (double v : d.mass) acc += std::fabs(static_cast<long double>(v) - u);
  return static_cast<double>(0.5L * acc / s);
}

double wass1_positions(const AttentionDistribution& a, const AttentionDistribution& b) {
  const std::size_t na = a.mass.size(), nb = b.mass.size();
  if (na == 0 || nb == 0) throw std::invalid_argument("wass1_positions: empty distribution");
  double suma = 0.0, sumb = 0.0;
  for (double v : a.mass) suma += v;
  for (double v : b.mass) sumb += v;
  if (!(suma > 0.0) || !(sumb > 0.0))
    throw std::invalid_argument("wass1_positions: zero total mass");

  const double inf = std::numeric_limits<double>::infinity();
  std::size_t i = 0, j = 0;
  double ca = 0.0, cb = 0.0, prev = 0.0, dist = 0.0;
  while (i < na || j < nb) {
    double xa = i < na ? (static_cast<double>(i) + 0.5) / static_cast<double>(na) : inf;
    double xb = j < nb ? (static_cast<double>(j) + 0.5) / static_cast<double>(nb) : inf;
    double x = std::min(xa, xb);
    dist += std::fabs(ca - cb) * (x - prev);
    if (xa == x) {
      ca += a.mass[i] / suma;
      ++i;
    }
    if (xb == x) {
      cb += b.mass[j] / sumb;
      ++j;
    }
    prev = x;
  }
  return dist;
}

namespace {

struct PoolEntry {
  std::size_t record_index;
  AttentionDistribution dist;
  int source_length;
};

// Ids of the worst ceil(0.2 n) under the given badness (descending), ties by
// id ascending.
std::vector<std::size_t> worst_fifth(const std::vector<std::size_t>& pool,
                                     const std::vector<double>& badness,
                                     const std::vector<const std::string*>& ids) {
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    if (badness[l] != badness[r]) return badness[l] > badness[r];
    return *ids[l] < *ids[r];
  });
  std::size_t drop = (pool.size() + 4) / 5;  // ceil(0.2 n)
  order.resize(drop);
  return order;
}

}  // namespace

std::map<std::string, ReferenceSet> build_reference_set(const Corpus& c, bool drop_eos) {
  // Pool per direction: records whose attention is usable under the EOS policy.
  std::map<std::string, std::vector<PoolEntry>> pools;
  for (std::size_t idx = 0; idx < c.records.size(); ++idx) {
    const auto& r = c.records[idx];
    if (!r.attn) continue;
    AttentionDistribution d;
    try {
      d = attention_distribution(r, drop_eos);
    } catch (const Error&) {
      continue;
    }
    pools[r.direction.str()].push_back(
        {idx, std::move(d), static_cast<int>(r.src_tokens.size())});
  }

  std::map<std::string, ReferenceSet> out;
  for (auto& [dir, pool] : pools) {
    const std::size_t n = pool.size();
    std::vector<std::size_t> local(n);
    for (std::size_t i = 0; i < n; ++i) local[i] = i;
    std::vector<const std::string*> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = &c.records[pool[i].record_index].id;

    std::vector<std::vector<std::size_t>> drops;

    // Length ratio, always available; lower ratio = worse, so badness = -ratio.
    {
      std::vector<double> badness(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& r = c.records[pool[i].record_index];
        double ns = static_cast<double>(r.src_tokens.size());
        double nt = static_cast<double>(r.tgt_tokens.size());
        double lo = std::min(ns, nt), hi = std::max(ns, nt);
        badness[i] = hi > 0.0 ? -(lo / hi) : 0.0;
      }
      drops.push_back(worst_fifth(local, badness, ids));
    }

    // seq_logprob, when computable for every record of the direction.
    {
      bool available = true;
      std::vector<double> badness(n);
      for (std::size_t i = 0; i < n && available; ++i) {
        const auto& r = c.records[pool[i].record_index];
        if (r.tgt_logprob.empty())
          available = false;
        else
          badness[i] = seq_logprob(r).value;
      }
      if (available) drops.push_back(worst_fifth(local, badness, ids));
    }

    // Embedding similarity: the lexicographically first encoder present on
    // every record of the direction.
    {
      std::string encoder;
      bool found = false;
      if (n > 0) {
        for (const auto& [name, _] : c.records[pool[0].record_index].embeddings) {
          bool on_all = true;
          for (std::size_t i = 1; i < n && on_all; ++i)
            on_all = c.records[pool[i].record_index].embeddings.count(name) > 0;
          if (on_all) {
            encoder = name;
            found = true;
            break;
          }
        }
      }
      if (found) {
        bool available = true;
        std::vector<double> badness(n);
        for (std::size_t i = 0; i < n && available; ++i) {
          try {
            badness[i] = embedding_similarity(c.records[pool[i].record_index], encoder).value;
          } catch (const Error&) {
            available = false;
          }
        }
        if (available) drops.push_back(worst_fifth(local, badness, ids));
      }
    }

    std::vector<bool> dropped(n, false);
    for (const auto& d : drops)
      for (std::size_t i : d) dropped[i] = true;

    ReferenceSet ref;
    ref.direction = dir;
    ref.drop_eos = drop_eos;
    for (std::size_t i = 0; i < n; ++i) {
      if (dropped[i]) continue;
      ref.distributions.push_back(std::move(pool[i].dist));
      ref.source_lengths.push_back(pool[i].source_length);
    }
    if (ref.distributions.empty())
      throw Error(ErrorCode::EmptyReferenceSet,
                  "direction " + dir + ": filtering left no reference records");
    out.emplace(dir, std::move(ref));
  }
  return out;
}

double wass_to_data(const AttentionDistribution& d, int source_length, const ReferenceSet& ref,
                    std::size_t k, double window) {
  if (ref.distributions.empty())
    throw Error(ErrorCode::EmptyReferenceSet, "direction " + ref.direction + ": empty reference");
  if (k < 1) k = 1;

  std::vector<std::size_t> candidates;
  candidates.reserve(ref.distributions.size());
  for (std::size_t i = 0; i < ref.distributions.size(); ++i) {
    double a = static_cast<double>(std::min(source_length, ref.source_lengths[i]));
    double b = static_cast<double>(std::max(source_length, ref.source_lengths[i]));
    double ratio = a > 0.0 ? b / a : std::numeric_limits<double>::infinity();
    if (ratio <= window) candidates.push_back(i);
  }
  if (candidates.size() < k) {
    candidates.resize(ref.distributions.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = i;
  }

  std::vector<double> dist;
  dist.reserve(candidates.size());
  for (std::size_t i : candidates) dist.push_back(wass1_positions(d, ref.distributions[i]));
  std::sort(dist.begin(), dist.end());
  std::size_t take = std::min(k, dist.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < take; ++i) acc += dist[i];
  return acc / static_cast<double>(take);
}

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  std::sort(values.begin(), values.end());
  double h = static_cast<double>(values.size() - 1) * p;
  std::size_t lo = static_cast<std::size_t>(h);
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

// Population sd; exact zero for a constant sample.
double population_sd(const std::vector<double>& values) {
  double mn = values[0], mx = values[0];
  for (double v : values) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  if (mn == mx) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(std::max(0.0, ss / static_cast<double>(values.size())));
}

}  // namespace

std::map<std::string, Calibration> calibrate(const Corpus& c,
                                             const std::map<std::string, ReferenceSet>& refs,
                                             bool drop_eos, const OtParams& params) {
  std::map<std::string, std::vector<const TranslationRecord*>> by_dir;
  for (const auto& r : c.records) by_dir[r.direction.str()].push_back(&r);

  std::map<std::string, Calibration> out;
  for (const auto& [dir, ref] : refs) {
    auto it = by_dir.find(dir);
    std::vector<double> wtu, wtd;
    if (it != by_dir.end()) {
      for (const TranslationRecord* r : it->second) {
        if (!r->attn) continue;
        AttentionDistribution d;
        try {
          d = attention_distribution(*r, drop_eos);
        } catch (const Error&) {
          continue;
        }
        wtu.push_back(wass_to_unif(d));
        wtd.push_back(wass_to_data(d, static_cast<int>(r->src_tokens.size()), ref, params.k,
                                   params.window));
      }
    }
    if (wtu.size() < 10)
      throw Error(ErrorCode::InsufficientCalibrationData,
                  "direction " + dir + ": " + std::to_string(wtu.size()) +
                      " usable calibration records, need >= 10");
    Calibration cal;
    cal.direction = dir;
    cal.drop_eos = drop_eos;
    cal.params = params;
    cal.sd_wtu = population_sd(wtu);
    cal.sd_wtd = population_sd(wtd);
    if (cal.sd_wtu == 0.0 || cal.sd_wtd == 0.0)
      throw Error(ErrorCode::DegenerateCalibration,
                  "direction " + dir + ": zero-variance calibration scores");
    cal.q1_wtu = quantile_type7(wtu, 0.01);
    cal.q99_wtu = quantile_type7(wtu, 0.99);
    cal.q1_wtd = quantile_type7(wtd, 0.01);
    cal.q99_wtd = quantile_type7(wtd, 0.99);
    cal.tau = quantile_type7(wtu, params.tau_quantile);
    out.emplace(dir, std::move(cal));
  }
  return out;
}

double combo_scale(double wtu, const Calibration& cal) {
  double span = cal.q99_wtu - cal.q1_wtu;
  if (span == 0.0)
    throw Error(ErrorCode::DegenerateCalibration,
                "direction " + cal.direction + ": q99_wtu equals q1_wtu");
  return cal.q1_wtd + (wtu - cal.q1_wtu) * (cal.q99_wtd - cal.q1_wtd) / span;
}

double wass_combo(double wtu, double wtd, const Calibration& cal) {
  return wtu > cal.tau ? combo_scale(wtu, cal) : wtd;
}

double wass_mean(double wtu, double wtd, const Calibration& cal) {
  if (cal.sd_wtu <= 0.0 || cal.sd_wtd <= 0.0)
    throw Error(ErrorCode::DegenerateCalibration,
                "direction " + cal.direction + ": non-positive sd");
  double inv_u = 1.0 / cal.sd_wtu, inv_d = 1.0 / cal.sd_wtd;
  double w_u = inv_u / (inv_u + inv_d);
  double w_d = inv_d / (inv_u + inv_d);
  return w_u * wtu + w_d * wtd;
}

std::string calibrations_to_json(const std::vector<Calibration>& cals) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& cal : cals) {
    nlohmann::ordered_json j;
    j["direction"] = cal.direction;
    j["drop_eos"] = cal.drop_eos;
    j["q1_wtu"] = cal.q1_wtu;
    j["q99_wtu"] = cal.q99_wtu;
    j["q1_wtd"] = cal.q1_wtd;
    j["q99_wtd"] = cal.q99_wtd;
    j["sd_wtu"] = cal.sd_wtu;
    j["sd_wtd"] = cal.sd_wtd;
    j["tau"] = cal.tau;
    j["params"] = {{"k", cal.params.k},
                   {"window", cal.params.window},
                   {"tau_quantile", cal.params.tau_quantile}};
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::vector<Calibration> calibrations_from_json(const std::string& text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("calibration JSON: ") + e.what());
  }
  if (!arr.is_array()) throw Error(ErrorCode::SchemaError, "calibration JSON must be an array");
  std::vector<Calibration> out;
  for (const auto& j : arr) {
    try {
      Calibration cal;
      cal.direction = j.at("direction").get<std::string>();
      cal.drop_eos = j.at("drop_eos").get<bool>();
      cal.q1_wtu = j.at("q1_wtu").get<double>();
      cal.q99_wtu = j.at("q99_wtu").get<double>();
      cal.q1_wtd = j.at("q1_wtd").get<double>();
      cal.q99_wtd = j.at("q99_wtd").get<double>();
      cal.sd_wtu = j.at("sd_wtu").get<double>();
      cal.sd_wtd = j.at("sd_wtd").get<double>();
      cal.tau = j.at("tau").get<double>();
      cal.params.k = j.at("params").at("k").get<std::size_t>();
      cal.params.window = j.at("params").at("window").get<double>();
      cal.params.tau_quantile = j.at("params").at("tau_quantile").get<double>();
      out.push_back(std::move(cal));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::SchemaError, std::string("calibration JSON: ") + e.what());
    }
  }
  return out;
}

}  // namespace mtpath
