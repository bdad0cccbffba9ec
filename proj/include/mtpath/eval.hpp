#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mtpath/detectors.hpp"
#include "mtpath/types.hpp"
#include "mtpath/words.hpp"

namespace mtpath {

enum class TaskId { SentHalluc, SentOmission, SentPathology, WordHalluc, WordOmission };

const char* task_name(TaskId t);
TaskId parse_task(const std::string& s);
bool is_word_task(TaskId t);

struct SentenceInstance {
  std::size_t record = 0;  // index into the corpus
  int label = 0;           // severity ordinal
};

// sent_halluc: all evaluable records, halluc severity; sent_omission: the
// hallucination-free subset, omission severity; sent_pathology: all, max of
// the two severities. Evaluable = annotated and not incomprehensible.
std::vector<SentenceInstance> build_task(const Corpus& c, TaskId t);

// 1 - (incorrect + 0.5*ties)/total over all label-discordant pairs, higher
// score ranked as more pathological. O(n log n); exact integer pair counts.
double pairwise_ranking_score(const std::vector<double>& scores, const std::vector<int>& labels);

// Mann-Whitney with midranks; equals pairwise_ranking_score on binary labels.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct DirectionEval {
  std::string direction;
  std::map<std::string, double> scores;            // detector -> metric
  std::map<std::string, std::size_t> counts;       // instances used
  std::map<std::string, std::size_t> dropped;      // instances lacking a score
  std::map<std::string, std::string> excluded;     // detector -> reason
};

struct EvalResult {
  TaskId task = TaskId::SentHalluc;
  std::vector<std::string> detectors;
  std::vector<DirectionEval> directions;           // direction-sorted
  std::map<std::string, double> mean;              // over evaluable directions

  std::string to_csv() const;   // rows = directions + "mean"
  std::string to_json() const;  // adds counts and exclusions
};

// Sentence tasks: labels from the annotations, scores from the table by id.
EvalResult evaluate_sentences(const Corpus& c, const ScoreTable& scores, TaskId t,
                              const std::vector<std::string>& detectors);

// Word tasks: gold labels recomputed from the corpus, feature columns joined
// by (id, side, word index).
EvalResult evaluate_words(const Corpus& c, const WordTable& scores, TaskId t,
                          const std::vector<std::string>& features);

// Stratifies by (pathology label, data_source, direction) and samples
// min(|a_s|, |b_s|) per stratum from each side; outputs keep input order.
std::pair<Corpus, Corpus> matched_downsample(const Corpus& a, const Corpus& b, std::uint64_t seed);

}  // namespace mtpath
