#include "mtpath/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "mtpath/csv.hpp"
#include "mtpath/errors.hpp"
#include "mtpath/rng.hpp"

namespace mtpath {

const char* task_name(TaskId t) {
  switch (t) {
    case TaskId::SentHalluc: return "sent_halluc";
    case TaskId::SentOmission: return "sent_omission";
    case TaskId::SentPathology: return "sent_pathology";
    case TaskId::WordHalluc: return "word_halluc";
    case TaskId::WordOmission: return "word_omission";
  }
  return "?";
}

TaskId parse_task(const std::string& s) {
  if (s == "sent_halluc") return TaskId::SentHalluc;
  if (s == "sent_omission") return TaskId::SentOmission;
  if (s == "sent_pathology") return TaskId::SentPathology;
  if (s == "word_halluc") return TaskId::WordHalluc;
  if (s == "word_omission") return TaskId::WordOmission;
  throw Error(ErrorCode::InvalidConfig, "unknown task '" + s + "'");
}

bool is_word_task(TaskId t) { return t == TaskId::WordHalluc || t == TaskId::WordOmission; }

std::vector<SentenceInstance> build_task(const Corpus& c, TaskId t) {
  if (is_word_task(t)) throw Error(ErrorCode::InvalidConfig, "build_task handles sentence tasks only");
  std::vector<SentenceInstance> out;
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    const auto& r = c.records[i];
    if (!r.annotation || r.annotation->incomprehensible) continue;
    int h = static_cast<int>(r.annotation->halluc_severity);
    int o = static_cast<int>(r.annotation->omission_severity);
    switch (t) {
      case TaskId::SentHalluc: out.push_back({i, h}); break;
      case TaskId::SentOmission:
        if (h == 0) out.push_back({i, o});
        break;
      case TaskId::SentPathology: out.push_back({i, std::max(h, o)}); break;
      default: break;
    }
  }
  return out;
}

namespace {

// Prefix-count tree over compressed label indices.
struct Fenwick {
  std::vector<unsigned long long> t;
  explicit Fenwick(std::size_t n) : t(n + 1, 0) {}
  void add(std::size_t i) {
    for (++i; i < t.size(); i += i & (~i + 1)) ++t[i];
  }
  // count of items with label index < i
  unsigned long long below(std::size_t i) const {
    unsigned long long s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += t[i];
    return s;
  }
};

}  // namespace

double pairwise_ranking_score(const std::vector<double>& scores, const std::vector<int>& labels) {
  const std::size_t n = scores.size();
  if (labels.size() != n) throw Error(ErrorCode::InvalidConfig, "scores and labels must be equal-length");
  std::vector<int> distinct(labels);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw Error(ErrorCode::DegenerateLabels, "need at least two distinct labels");
  const std::size_t k = distinct.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::vector<unsigned long long> class_count(k, 0);
  for (int l : labels)
    ++class_count[static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), l) - distinct.begin())];
  unsigned long long total = 0;
  {
    unsigned long long nn = n, sq = 0;
    for (auto c : class_count) sq += c * c;
    total = (nn * nn - sq) / 2;
  }

  Fenwick fen(k);
  unsigned long long processed = 0, incorrect = 0, ties = 0;
  std::vector<unsigned long long> group_count(k, 0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Pairs inside an equal-score run with different labels are ties.
    std::fill(group_count.begin(), group_count.end(), 0ull);
    for (std::size_t p = i; p < j; ++p) {
      int l = labels[order[p]];
      ++group_count[static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), l) - distinct.begin())];
    }
    unsigned long long g = j - i, gsq = 0;
    for (auto c : group_count) gsq += c * c;
    ties += (g * g - gsq) / 2;
    // Against strictly lower scores: a lower label there is correct, a higher
    // label there is an inversion, an equal label is not a pair.
    for (std::size_t p = i; p < j; ++p) {
      std::size_t li = static_cast<std::size_t>(
          std::lower_bound(distinct.begin(), distinct.end(), labels[order[p]]) - distinct.begin());
      incorrect += processed - fen.below(li + 1);
    }
    for (std::size_t p = i; p < j; ++p) {
      std::size_t li = static_cast<std::size_t>(
          std::lower_bound(distinct.begin(), distinct.end(), labels[order[p]]) - distinct.begin());
      fen.add(li);
      ++processed;
    }
    i = j;
  }
  return 1.0 - (static_cast<double>(incorrect) + 0.5 * static_cast<double>(ties)) / static_cast<double>(total);
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  const std::size_t n = scores.size();
  if (labels.size() != n) throw Error(ErrorCode::InvalidConfig, "scores and labels must be equal-length");
  unsigned long long n1 = 0, n0 = 0;
  for (int l : labels) {
    if (l == 1) ++n1;
    else if (l == 0) ++n0;
    else throw Error(ErrorCode::NonBinaryLabels, "label " + std::to_string(l) + " is not 0 or 1");
  }
  if (n1 == 0 || n0 == 0) throw Error(ErrorCode::DegenerateLabels, "need both classes");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));  // 1-based average
    for (std::size_t p = i; p < j; ++p)
      if (labels[order[p]] == 1) rank_sum_pos += midrank;
    i = j;
  }
  double u1 = rank_sum_pos - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);
  return u1 / (static_cast<double>(n1) * static_cast<double>(n0));
}

namespace {

struct Cell {
  std::vector<double> scores;
  std::vector<int> labels;
  std::size_t dropped = 0;
};

EvalResult aggregate_directions(TaskId task, const std::vector<std::string>& detectors,
                                const std::set<std::string>& all_dirs,
                                std::map<std::string, std::map<std::string, Cell>>& cells,
                                const std::map<std::string, std::size_t>& instances_per_dir) {
  EvalResult res;
  res.task = task;
  res.detectors = detectors;
  std::size_t evaluable_cells = 0;
  for (const auto& dir : all_dirs) {
    DirectionEval de;
    de.direction = dir;
    std::size_t n_inst = 0;
    if (auto it = instances_per_dir.find(dir); it != instances_per_dir.end()) n_inst = it->second;
    for (const auto& det : detectors) {
      Cell& cell = cells[dir][det];
      de.counts[det] = cell.scores.size();
      de.dropped[det] = cell.dropped;
      if (n_inst == 0) {
        de.excluded[det] = "no task instances";
        continue;
      }
      if (cell.scores.empty()) {
        de.excluded[det] = "no scored instances";
        continue;
      }
      std::set<int> uniq(cell.labels.begin(), cell.labels.end());
      if (uniq.size() < 2) {
        de.excluded[det] = "one label class";
        continue;
      }
      de.scores[det] = pairwise_ranking_score(cell.scores, cell.labels);
      ++evaluable_cells;
    }
    res.directions.push_back(std::move(de));
  }
  if (evaluable_cells == 0) throw Error(ErrorCode::NoEvaluableDirections, std::string("task ") + task_name(task));
  for (const auto& det : detectors) {
    double sum = 0.0;
    std::size_t cnt = 0;
    for (const auto& de : res.directions) {
      auto it = de.scores.find(det);
      if (it != de.scores.end()) {
        sum += it->second;
        ++cnt;
      }
    }
    if (cnt > 0) res.mean[det] = sum / static_cast<double>(cnt);
  }
  return res;
}

}  // namespace

EvalResult evaluate_sentences(const Corpus& c, const ScoreTable& scores, TaskId t,
                              const std::vector<std::string>& detectors) {
  if (is_word_task(t)) throw Error(ErrorCode::InvalidConfig, "sentence evaluation needs a sentence task");
  for (const auto& d : detectors)
    if (scores.column(d) < 0) throw Error(ErrorCode::MissingScores, "score table has no column '" + d + "'");
  std::vector<int> cols(detectors.size());
  for (std::size_t d = 0; d < detectors.size(); ++d) cols[d] = scores.column(detectors[d]);
  auto instances = build_task(c, t);
  std::set<std::string> all_dirs;
  for (const auto& r : c.records)
    if (r.annotation && !r.annotation->incomprehensible) all_dirs.insert(r.direction.str());
  std::map<std::string, std::size_t> per_dir;
  std::map<std::string, std::map<std::string, Cell>> cells;
  for (const auto& inst : instances) {
    const auto& rec = c.records[inst.record];
    const std::string dir = rec.direction.str();
    ++per_dir[dir];
    int row = scores.row_of(rec.id);
    for (std::size_t d = 0; d < detectors.size(); ++d) {
      Cell& cell = cells[dir][detectors[d]];
      std::optional<double> v;
      if (row >= 0) v = scores.value(static_cast<std::size_t>(row), static_cast<std::size_t>(cols[d]));
      if (v) {
        cell.scores.push_back(*v);
        cell.labels.push_back(inst.label);
      } else {
        ++cell.dropped;
      }
    }
  }
  return aggregate_directions(t, detectors, all_dirs, cells, per_dir);
}

EvalResult evaluate_words(const Corpus& c, const WordTable& scores, TaskId t,
                          const std::vector<std::string>& features) {
  if (!is_word_task(t)) throw Error(ErrorCode::InvalidConfig, "word evaluation needs a word task");
  const Side side = t == TaskId::WordHalluc ? Side::Target : Side::Source;

  // Gold labels always come from the corpus annotations, not the table.
  WordTable gold_table = build_word_table_serial(c);
  std::map<std::pair<std::string, std::size_t>, int> gold;
  for (const auto& row : gold_table.rows)
    if (row.side == side && row.gold) gold[{row.id, row.word.index}] = *row.gold;

  std::map<std::string, std::string> dir_of;
  std::set<std::string> all_dirs;
  for (const auto& r : c.records)
    if (r.annotation && !r.annotation->incomprehensible) {
      dir_of[r.id] = r.direction.str();
      all_dirs.insert(r.direction.str());
    }

  std::map<std::string, std::size_t> per_dir;
  std::map<std::string, std::map<std::string, Cell>> cells;
  for (const auto& row : scores.rows) {
    if (row.side != side) continue;
    auto git = gold.find({row.id, row.word.index});
    if (git == gold.end()) continue;
    auto dit = dir_of.find(row.id);
    if (dit == dir_of.end()) continue;
    const std::string& dir = dit->second;
    ++per_dir[dir];
    for (const auto& det : features) {
      Cell& cell = cells[dir][det];
      auto fit = row.features.find(det);
      if (fit != row.features.end() && !std::isnan(fit->second)) {
        cell.scores.push_back(fit->second);
        cell.labels.push_back(git->second);
      } else {
        ++cell.dropped;
      }
    }
  }
  return aggregate_directions(t, features, all_dirs, cells, per_dir);
}

std::string EvalResult::to_csv() const {
  std::string out;
  std::vector<std::string> header{"direction"};
  header.insert(header.end(), detectors.begin(), detectors.end());
  out += join_csv_row(header);
  out += '\n';
  auto emit = [&](const std::string& name, const std::map<std::string, double>& row) {
    std::vector<std::string> fields{name};
    for (const auto& det : detectors) {
      auto it = row.find(det);
      fields.push_back(it == row.end() ? std::string() : format_double(it->second));
    }
    out += join_csv_row(fields);
    out += '\n';
  };
  for (const auto& de : directions) emit(de.direction, de.scores);
  emit("mean", mean);
  return out;
}

std::string EvalResult::to_json() const {
  nlohmann::ordered_json j;
  j["task"] = task_name(task);
  j["detectors"] = detectors;
  nlohmann::ordered_json dirs = nlohmann::ordered_json::array();
  for (const auto& de : directions) {
    nlohmann::ordered_json d;
    d["direction"] = de.direction;
    nlohmann::ordered_json sc = nlohmann::ordered_json::object();
    for (const auto& [k, v] : de.scores) sc[k] = v;
    d["scores"] = sc;
    nlohmann::ordered_json cnt = nlohmann::ordered_json::object();
    for (const auto& [k, v] : de.counts) cnt[k] = v;
    d["counts"] = cnt;
    nlohmann::ordered_json drop = nlohmann::ordered_json::object();
    for (const auto& [k, v] : de.dropped) drop[k] = v;
    d["dropped_missing_scores"] = drop;
    nlohmann::ordered_json exc = nlohmann::ordered_json::object();
    for (const auto& [k, v] : de.excluded) exc[k] = v;
    d["excluded"] = exc;
    dirs.push_back(std::move(d));
  }
  j["directions"] = std::move(dirs);
  nlohmann::ordered_json m = nlohmann::ordered_json::object();
  for (const auto& [k, v] : mean) m[k] = v;
  j["mean"] = m;
  return j.dump(2);
}

std::pair<Corpus, Corpus> matched_downsample(const Corpus& a, const Corpus& b, std::uint64_t seed) {
  using Key = std::string;
  auto key_of = [](const TranslationRecord& r) {
    int h = static_cast<int>(r.annotation->halluc_severity);
    int o = static_cast<int>(r.annotation->omission_severity);
    return std::to_string(std::max(h, o)) + "|" + r.data_source + "|" + r.direction.str();
  };
  auto strata = [&](const Corpus& c) {
    std::map<Key, std::vector<std::size_t>> m;
    for (std::size_t i = 0; i < c.records.size(); ++i) {
      const auto& r = c.records[i];
      if (!r.annotation || r.annotation->incomprehensible) continue;
      m[key_of(r)].push_back(i);
    }
    return m;
  };
  auto sa = strata(a), sb = strata(b);

  auto pick = [&](const std::vector<std::size_t>& pool, std::size_t m, const Key& key, const char* tag) {
    std::vector<std::size_t> chosen;
    Rng rng(derive_seed(seed, std::string("downsample:") + tag + ":" + key));
    auto draws = rng.sample_without_replacement(pool.size(), m);
    for (auto d : draws) chosen.push_back(pool[d]);
    return chosen;
  };

  std::vector<char> keep_a(a.records.size(), 0), keep_b(b.records.size(), 0);
  for (const auto& [key, pa] : sa) {
    auto it = sb.find(key);
    if (it == sb.end()) continue;
    std::size_t m = std::min(pa.size(), it->second.size());
    for (auto i : pick(pa, m, key, "a")) keep_a[i] = 1;
    for (auto i : pick(it->second, m, key, "b")) keep_b[i] = 1;
  }

  auto subset = [](const Corpus& c, const std::vector<char>& keep) {
    Corpus out;
    for (std::size_t i = 0; i < c.records.size(); ++i)
      if (keep[i]) out.records.push_back(c.records[i]);
    out.rebuild_manifest();
    return out;
  };
  return {subset(a, keep_a), subset(b, keep_b)};
}

}  // namespace mtpath
