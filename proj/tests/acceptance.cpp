// Acceptance gate: every release criterion checked end to end, one line each.
// Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtpath/attn_ot.hpp"
#include "mtpath/combiner.hpp"
#include "mtpath/corpus_io.hpp"
#include "mtpath/corpus_ops.hpp"
#include "mtpath/detectors.hpp"
#include "mtpath/errors.hpp"
#include "mtpath/eval.hpp"
#include "mtpath/markup.hpp"
#include "mtpath/rng.hpp"
#include "mtpath/synth.hpp"
#include "mtpath/types.hpp"
#include "mtpath/validate.hpp"
#include "mtpath/words.hpp"
#include "oracles.hpp"

using namespace mtpath;
namespace tu = testutil;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(bool cond, const std::string& msg) {
  if (!cond) throw Failure(msg);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

// -----------------------------------------------------------------------------
// 1. pairwise ranking equals brute-force pair enumeration; binary case matches
//    the ROC AUC closed form; the whole sweep finishes inside five seconds.

void criterion_ranking() {
  double start = now_seconds();
  Rng rng(11);
  for (int iter = 0; iter < 1000; ++iter) {
    std::size_t n = 2 + rng.bounded(49);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    while (true) {
      for (std::size_t i = 0; i < n; ++i) {
        scores[i] = static_cast<double>(rng.bounded(8)) / 7.0;  // injected ties
        labels[i] = static_cast<int>(rng.bounded(4));
      }
      std::set<int> distinct(labels.begin(), labels.end());
      if (distinct.size() >= 2) break;
    }
    double fast = pairwise_ranking_score(scores, labels);
    double slow = tu::pairwise_oracle(scores, labels);
    check(fast == slow, "pairwise != brute force at instance " + std::to_string(iter) + " (" +
                            fmt(fast) + " vs " + fmt(slow) + ")");
  }
  for (int iter = 0; iter < 300; ++iter) {
    std::size_t n = 2 + rng.bounded(49);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    while (true) {
      for (std::size_t i = 0; i < n; ++i) {
        scores[i] = static_cast<double>(rng.bounded(6)) / 5.0;
        labels[i] = static_cast<int>(rng.bounded(2));
      }
      std::set<int> distinct(labels.begin(), labels.end());
      if (distinct.size() == 2) break;
    }
    double pw = pairwise_ranking_score(scores, labels);
    double auc = roc_auc(scores, labels);
    check(std::fabs(pw - auc) <= 1e-12,
          "binary pairwise deviates from roc_auc by " + fmt(std::fabs(pw - auc)));
  }
  double seconds = now_seconds() - start;
  check(seconds < 5.0, "ranking sweep took " + fmt(seconds) + "s, budget is 5s");
}

// -----------------------------------------------------------------------------
// 2. positional transport distance equals a brute-force monotone plan on small
//    supports; closed forms for uniform and one-hot inputs hold exactly.

void criterion_transport() {
  Rng rng(22);
  for (int iter = 0; iter < 500; ++iter) {
    auto draw = [&](std::vector<double>& m) {
      m.assign(1 + rng.bounded(6), 0.0);
      double total = 0.0;
      for (auto& v : m) {
        v = rng.real01() < 0.3 ? 0.0 : rng.real01();
        total += v;
      }
      if (total <= 0.0) m[rng.bounded(m.size())] = 1.0;
    };
    AttentionDistribution a, b;
    draw(a.mass);
    draw(b.mass);
    double fast = wass1_positions(a, b);
    double slow = tu::transport_w1(a.mass, b.mass);
    check(std::fabs(fast - slow) <= 1e-9, "transport mismatch at instance " +
                                              std::to_string(iter) + ": " + fmt(fast) + " vs " +
                                              fmt(slow));
  }
  for (std::size_t n = 2; n <= 10; ++n) {
    AttentionDistribution uniform{std::vector<double>(n, 1.0 / static_cast<double>(n)), false};
    check(wass_to_unif(uniform) == 0.0, "uniform distance nonzero at n=" + std::to_string(n));
    AttentionDistribution onehot{std::vector<double>(n, 0.0), false};
    onehot.mass[0] = 1.0;
    double expect = (static_cast<double>(n) - 1.0) / static_cast<double>(n);
    check(wass_to_unif(onehot) == expect, "one-hot distance wrong at n=" + std::to_string(n));
  }
}

// -----------------------------------------------------------------------------
// 3. the combo scale is the affine map matching the 1% and 99% quantiles of
//    the reference-distance scores, and the mean detector's weights sum to 1.

void criterion_calibration() {
  Calibration cal;
  cal.direction = "x";
  cal.q1_wtu = 0.1;
  cal.q99_wtu = 0.9;
  cal.q1_wtd = 2.0;
  cal.q99_wtd = 6.0;
  cal.sd_wtu = 1.0;
  cal.sd_wtd = 3.0;
  cal.tau = 0.5;
  check(std::fabs(combo_scale(cal.q1_wtu, cal) - cal.q1_wtd) <= 1e-12,
        "affine map misses the lower quantile");
  check(std::fabs(combo_scale(cal.q99_wtu, cal) - cal.q99_wtd) <= 1e-12,
        "affine map misses the upper quantile");

  Calibration flipped = cal;
  flipped.q1_wtu = -1.0;
  flipped.q99_wtu = 3.0;
  flipped.q1_wtd = 10.0;
  flipped.q99_wtd = 2.0;
  check(std::fabs(combo_scale(-1.0, flipped) - 10.0) <= 1e-12 &&
            std::fabs(combo_scale(3.0, flipped) - 2.0) <= 1e-12,
        "affine map fails on a decreasing target range");

  // sd 1 vs 3 gives weights 0.75/0.25: 0.75*0.4 + 0.25*0.8 = 0.5.
  check(std::fabs(wass_mean(0.4, 0.8, cal) - 0.5) <= 1e-12, "hand-computed 0.5 example failed");
  for (double x : {0.17, 1.3, 42.0})
    check(std::fabs(wass_mean(x, x, cal) - x) <= 1e-12,
          "weights do not sum to 1 (fixed point broken at " + fmt(x) + ")");
}

// -----------------------------------------------------------------------------
// 4. grouped cross-validation: no group straddles folds, per-fold
//    standardization ignores test rows, and every training loss trace is
//    non-increasing.

void criterion_cv_hygiene() {
  const std::size_t rows = 10000, groups_n = 300;
  const int k = 5;
  const std::uint64_t seed = 1234;
  const double lambda = 0.1, tol = 1e-6;
  const int max_iter = 5000;

  Rng rng(404);
  CrossvalInput input;
  input.feature_names = {"f0", "f1", "f2"};
  const std::vector<double> w_true = {1.0, -0.5, 0.25};
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> x = {rng.normal(), rng.normal(), rng.normal()};
    double z = -0.3;
    for (std::size_t j = 0; j < 3; ++j) z += w_true[j] * x[j];
    input.y.push_back(rng.real01() < 1.0 / (1.0 + std::exp(-z)) ? 1 : 0);
    input.X.push_back(std::move(x));
    input.groups.push_back("g" + std::to_string(i % groups_n));
  }

  // Fold assignment is a single total map over groups: every group present,
  // every fold used, so no group can straddle and no fold is empty.
  FoldAssignment folds = assign_folds(input.groups, k, seed);
  check(folds.size() == groups_n, "fold map does not cover every group");
  std::set<int> used;
  for (const auto& [g, f] : folds) {
    check(f >= 0 && f < k, "fold id out of range for group " + g);
    used.insert(f);
  }
  check(used.size() == static_cast<std::size_t>(k), "some fold received no groups");

  CrossvalResult cv = crossval_combine(input, k, seed, lambda, tol, max_iter);

  // Perturbing one test row must leave every other row of its fold untouched.
  const std::size_t target = 10;
  const int f_target = folds.at(input.groups[target]);
  CrossvalInput perturbed = input;
  perturbed.X[target][1] += 1000.0;
  CrossvalResult cv2 = crossval_combine(perturbed, k, seed, lambda, tol, max_iter);
  std::size_t changed_outside = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (folds.at(input.groups[i]) == f_target) {
      if (i != target)
        check(cv.oof_scores[i] == cv2.oof_scores[i],
              "test-fold row " + std::to_string(i) + " saw the perturbation");
    } else if (cv.oof_scores[i] != cv2.oof_scores[i]) {
      ++changed_outside;
    }
  }
  check(changed_outside > 0, "perturbation changed nothing outside the fold");

  // Re-run the same standardize-then-fit pipeline and inspect each loss trace.
  auto fit_subset = [&](int hold_out) {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (std::size_t i = 0; i < rows; ++i) {
      if (hold_out >= 0 && folds.at(input.groups[i]) == hold_out) continue;
      X.push_back(input.X[i]);
      y.push_back(input.y[i]);
    }
    std::vector<double> mean(3, 0.0), sd(3, 0.0);
    for (const auto& x : X)
      for (std::size_t j = 0; j < 3; ++j) mean[j] += x[j];
    for (auto& m : mean) m /= static_cast<double>(X.size());
    for (const auto& x : X)
      for (std::size_t j = 0; j < 3; ++j) sd[j] += (x[j] - mean[j]) * (x[j] - mean[j]);
    for (auto& s : sd) s = std::sqrt(s / static_cast<double>(X.size()));
    for (auto& x : X)
      for (std::size_t j = 0; j < 3; ++j) x[j] = (x[j] - mean[j]) / sd[j];
    return fit_logreg(X, y, lambda, tol, max_iter);
  };
  for (int f = -1; f < k; ++f) {
    FitResult fit = fit_subset(f);
    for (std::size_t i = 1; i < fit.loss_trace.size(); ++i)
      check(fit.loss_trace[i] <= fit.loss_trace[i - 1],
            "loss increased at step " + std::to_string(i) + " of fit " + std::to_string(f));
  }
}

// -----------------------------------------------------------------------------
// 5. on planted word-level pathologies with overlapping feature noise, the
//    cross-validated combination reaches AUC >= 0.95 out of fold and beats the
//    best single feature by at least 0.01.

void criterion_combiner_signal() {
  GenConfig cfg;
  cfg.directions = {parse_direction("eng_Latn-deu_Latn")};
  cfg.records_per_direction = 400;
  cfg.mixture = {
      {Severity::None, Severity::None, 0.55},
      {Severity::Word, Severity::None, 0.20},
      {Severity::Partial, Severity::None, 0.15},
      {Severity::Full, Severity::None, 0.10},
  };
  cfg.profile = SignalProfile::noisy();
  cfg.profile_name = "noisy";
  Corpus corpus = generate_corpus(cfg, 31, 4);

  WordTable table = build_word_table(corpus, 4);
  const std::vector<std::string> features = {"logprob", "contrastive_logprob", "alti_total",
                                             "alti_max"};
  CrossvalInput input;
  input.feature_names = features;
  for (const auto& row : table.rows) {
    if (row.side != Side::Target || !row.gold) continue;
    std::vector<double> x;
    bool complete = true;
    for (const auto& f : features) {
      auto it = row.features.find(f);
      if (it == row.features.end() || std::isnan(it->second)) {
        complete = false;
        break;
      }
      x.push_back(it->second);
    }
    if (!complete) continue;
    input.X.push_back(std::move(x));
    input.y.push_back(*row.gold);
    input.groups.push_back(row.id);
  }
  check(input.X.size() > 2000, "unexpectedly small word-feature table");

  CrossvalResult cv = crossval_combine(input, 3, 77, 0.01, 1e-7, 5000);
  double combo = roc_auc(cv.oof_scores, input.y);
  double best_single = 0.0;
  for (std::size_t j = 0; j < features.size(); ++j) {
    std::vector<double> col;
    col.reserve(input.X.size());
    for (const auto& x : input.X) col.push_back(x[j]);
    best_single = std::max(best_single, roc_auc(col, input.y));
  }
  check(combo >= 0.95, "combined out-of-fold AUC " + fmt(combo) + " below 0.95");
  check(combo >= best_single + 0.01, "combined AUC " + fmt(combo) +
                                         " does not beat the best single feature " +
                                         fmt(best_single) + " by 0.01");
}

// -----------------------------------------------------------------------------
// 6. on the default synthetic corpus the contribution detectors separate both
//    pathology axes (mean >= 0.9) while seeded noise stays at chance, all
//    inside sixty seconds.

void criterion_separation() {
  double start = now_seconds();
  Corpus corpus = generate_corpus(GenConfig::defaults(), 99, 4);

  std::string list = "alti,alti_t";
  const int noise_seeds = 20;
  for (int s = 1; s <= noise_seeds; ++s) list += ",noise:" + std::to_string(s);
  auto ids = parse_detector_list(list);
  ScoringContext ctx = build_scoring_context(corpus, ids);
  ScoreTable table = score_corpus(corpus, ids, ctx, 4);

  std::vector<std::string> names;
  for (const auto& id : ids) names.push_back(id.str());
  EvalResult halluc = evaluate_sentences(corpus, table, TaskId::SentHalluc, names);
  EvalResult omission = evaluate_sentences(corpus, table, TaskId::SentOmission, names);

  check(halluc.mean.at("alti") >= 0.9,
        "alti sent_halluc mean " + fmt(halluc.mean.at("alti")) + " below 0.9");
  check(omission.mean.at("alti_t") >= 0.9,
        "alti_t sent_omission mean " + fmt(omission.mean.at("alti_t")) + " below 0.9");

  double noise_h = 0.0, noise_o = 0.0;
  for (int s = 1; s <= noise_seeds; ++s) {
    noise_h += halluc.mean.at("noise:" + std::to_string(s));
    noise_o += omission.mean.at("noise:" + std::to_string(s));
  }
  noise_h /= noise_seeds;
  noise_o /= noise_seeds;
  check(std::fabs(noise_h - 0.5) <= 0.05,
        "noise sent_halluc mean over 20 seeds is " + fmt(noise_h) + ", outside 0.5 +- 0.05");
  check(std::fabs(noise_o - 0.5) <= 0.05,
        "noise sent_omission mean over 20 seeds is " + fmt(noise_o) + ", outside 0.5 +- 0.05");

  double seconds = now_seconds() - start;
  check(seconds < 60.0, "separation run took " + fmt(seconds) + "s, budget is 60s");
}

// -----------------------------------------------------------------------------
// 7. span markup round-trips, corpora survive serialize->load field-identical,
//    and corrupted fixtures are rejected with the offending rule named.

void criterion_round_trips() {
  Rng rng(7);
  const std::string charset = "abcdefgh ij.,xyz0189";
  auto random_case = [&](std::string& text, std::vector<AnnotatedSpan>& spans) {
    text.clear();
    spans.clear();
    std::size_t len = rng.bounded(61);
    for (std::size_t i = 0; i < len; ++i) text.push_back(charset[rng.bounded(charset.size())]);
    std::size_t pos = 0;
    for (int s = 0; s < 3 && pos < text.size(); ++s) {
      std::size_t start = pos + rng.bounded(text.size() - pos);
      if (start >= text.size()) break;
      std::size_t max_len = std::min<std::size_t>(text.size() - start, 8);
      std::size_t slen = 1 + rng.bounded(max_len);
      spans.push_back({static_cast<int>(start), static_cast<int>(start + slen)});
      pos = start + slen;
    }
  };
  for (int iter = 0; iter < 1000; ++iter) {
    std::string text;
    std::vector<AnnotatedSpan> spans;
    random_case(text, spans);
    const bool alt = iter % 5 == 0;
    const std::string open = alt ? "{" : "<<";
    const std::string close = alt ? "}" : ">>";
    ParsedMarkup parsed = parse_span_markup(render_span_markup(text, spans, open, close), open, close);
    check(parsed.plain == text && parsed.spans == spans,
          "markup round-trip failed at case " + std::to_string(iter));
  }

  auto markup_code = [](const std::string& marked) {
    try {
      parse_span_markup(marked, "<<", ">>");
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::UnknownDetector;  // sentinel: no throw
  };
  check(markup_code("ab <<cd") == ErrorCode::UnbalancedMarkup, "dangling open not rejected");
  check(markup_code("ab >>cd") == ErrorCode::UnbalancedMarkup, "stray close not rejected");
  check(markup_code("<<a <<b>> c>>") == ErrorCode::NestedMarkup, "nested open not rejected");
  check(markup_code("x<<>>y") == ErrorCode::EmptySpan, "empty span not rejected");

  // Serialization identity on a generated corpus.
  GenConfig cfg = GenConfig::defaults();
  cfg.records_per_direction = 20;
  Corpus corpus = generate_corpus(cfg, 5, 4);
  std::string dir = tu::temp_dir();
  save_corpus(corpus, dir + "/round.jsonl");
  Corpus back = load_corpus(dir + "/round.jsonl");
  check(back.records == corpus.records, "serialize->load changed a record field");

  // Corrupted fixtures, each rejected with the rule named in the violation.
  auto violation_for = [&](const std::string& path) -> std::string {
    try {
      load_corpus(path);
    } catch (const ValidationFailure& vf) {
      std::string all;
      for (const auto& v : vf.violations()) all += v + "\n";
      return all;
    }
    return "";
  };

  TranslationRecord pos = tu::make_record("c-pos", "eng_Latn-deu_Latn", 2, 2);
  pos.tgt_logprob = {0.5, -1.0};
  save_corpus(tu::make_corpus({pos}), dir + "/pos.jsonl");
  check(violation_for(dir + "/pos.jsonl").find("tgt_logprob[0]: positive log-probability") !=
            std::string::npos,
        "positive log-prob fixture not rejected by name");

  TranslationRecord len = tu::make_record("c-len", "eng_Latn-deu_Latn", 2, 2);
  len.tgt_logprob = {-1.0};
  save_corpus(tu::make_corpus({len}), dir + "/len.jsonl");
  check(violation_for(dir + "/len.jsonl").find("tgt_logprob: length 1, expected 2") !=
            std::string::npos,
        "length-mismatch fixture not rejected by name");

  TranslationRecord mk = tu::make_record("c-mark", "eng_Latn-deu_Latn", 2, 2);
  mk.annotation = tu::make_annotation(Severity::Word, Severity::None,
                                      {tu::first_word_span(mk.tgt_text)});
  save_corpus(tu::make_corpus({mk}), dir + "/mark.jsonl");
  auto j = nlohmann::json::parse(tu::read_file(dir + "/mark.jsonl"));
  j["annotation"]["tgt_marked"] = mk.tgt_text + " <<";
  tu::write_file(dir + "/mark.jsonl", j.dump() + "\n");
  std::string got = violation_for(dir + "/mark.jsonl");
  check(got.find("annotation.tgt_marked") != std::string::npos &&
            got.find("UnbalancedMarkup") != std::string::npos,
        "unbalanced-markup fixture not rejected by name; got: " + got);
}

// -----------------------------------------------------------------------------
// 8. corpus statistics reproduce the target pathology rates exactly on a
//    fixture with 3% hallucination (1% full) and 17% omission (5% full).

void criterion_rates() {
  std::vector<TranslationRecord> records;
  for (int i = 0; i < 500; ++i) {
    TranslationRecord r = tu::make_record("f-" + std::to_string(i), "eng_Latn-deu_Latn", 2, 2);
    AnnotatedSpan tgt_span = tu::first_word_span(r.tgt_text);
    AnnotatedSpan src_span = tu::first_word_span(r.src_text);
    if (i < 5) r.annotation = tu::make_annotation(Severity::Full, Severity::None, {tgt_span});
    else if (i < 15) r.annotation = tu::make_annotation(Severity::Partial, Severity::None, {tgt_span});
    else if (i < 40) r.annotation = tu::make_annotation(Severity::None, Severity::Full, {}, {src_span});
    else if (i < 100) r.annotation = tu::make_annotation(Severity::None, Severity::Word, {}, {src_span});
    else r.annotation = tu::make_annotation(Severity::None, Severity::None);
    records.push_back(std::move(r));
  }
  Corpus c = tu::make_corpus(records);
  validate_corpus(c);

  auto stats = corpus_stats(c);
  check(stats.count("eng_Latn-deu_Latn") == 1, "fixture direction missing from the stats");
  const DirectionStats& s = stats.at("eng_Latn-deu_Latn");
  check(s.count == 500, "fixture count wrong");
  check(s.halluc_any_rate() == 15.0 / 500, "hallucination rate is not exactly 15/500");
  check(s.halluc_rate(Severity::Full) == 5.0 / 500, "full hallucination rate is not exactly 5/500");
  check(s.omission_any_rate() == 85.0 / 500, "omission rate is not exactly 85/500");
  check(s.omission_rate(Severity::Full) == 25.0 / 500, "full omission rate is not exactly 25/500");
}

// -----------------------------------------------------------------------------
// 9. every pipeline command is bitwise deterministic across repeated runs and
//    across --threads 1 vs 8.

#ifdef MTPATH_BIN

void criterion_determinism() {
  std::string dir = tu::temp_dir();
  auto run = [&](const std::string& args) {
    tu::CmdResult r = tu::run_cli(args);
    check(r.exit_code == 0, "command failed: " + args + "\nstderr: " + r.err);
  };
  auto same = [&](const std::string& a, const std::string& b, const std::string& what) {
    check(tu::read_file(a) == tu::read_file(b), what + " differ: " + a + " vs " + b);
  };

  std::string cfg = dir + "/gen.json";
  tu::write_file(cfg, R"({"directions": ["eng_Latn-deu_Latn", "deu_Latn-eng_Latn"],)"
                      R"( "records_per_direction": 80})");
  std::string dense = dir + "/dense.json";
  tu::write_file(dense, R"({
    "directions": ["eng_Latn-deu_Latn"],
    "records_per_direction": 120,
    "mixture": [{"halluc": "None", "omission": "None", "share": 0.55},
                {"halluc": "Word", "omission": "None", "share": 0.2},
                {"halluc": "Partial", "omission": "None", "share": 0.15},
                {"halluc": "Full", "omission": "None", "share": 0.1}]
  })");

  run("--threads 1 synth --config " + cfg + " --seed 5 -o " + dir + "/a1.jsonl");
  run("--threads 1 synth --config " + cfg + " --seed 5 -o " + dir + "/a2.jsonl");
  run("--threads 8 synth --config " + cfg + " --seed 5 -o " + dir + "/a8.jsonl");
  same(dir + "/a1.jsonl", dir + "/a2.jsonl", "synth reruns");
  same(dir + "/a1.jsonl", dir + "/a8.jsonl", "synth thread counts");
  run("--threads 1 synth --config " + dense + " --seed 6 -o " + dir + "/d.jsonl");

  std::string dets = "seq_logprob,alti,alti_t,wass_to_unif,wass_combo";
  run("--threads 1 score " + dir + "/a1.jsonl --detectors " + dets + " -o " + dir + "/s1.csv");
  run("--threads 1 score " + dir + "/a1.jsonl --detectors " + dets + " -o " + dir + "/s2.csv");
  run("--threads 8 score " + dir + "/a1.jsonl --detectors " + dets + " -o " + dir + "/s8.csv");
  same(dir + "/s1.csv", dir + "/s2.csv", "score reruns");
  same(dir + "/s1.csv", dir + "/s8.csv", "score thread counts");

  run("--threads 1 eval " + dir + "/a1.jsonl --scores " + dir + "/s1.csv" +
      " --task sent_halluc -o " + dir + "/e1.csv");
  run("--threads 8 eval " + dir + "/a1.jsonl --scores " + dir + "/s1.csv" +
      " --task sent_halluc -o " + dir + "/e2.csv");
  same(dir + "/e1.csv", dir + "/e2.csv", "eval reruns");
  same(dir + "/e1.csv.json", dir + "/e2.csv.json", "eval JSON reruns");

  std::string fit = " --task word_halluc --seed 3 --lambda 0.1 -o ";
  run("--threads 1 combine " + dir + "/d.jsonl" + fit + dir + "/m1.json");
  run("--threads 1 combine " + dir + "/d.jsonl" + fit + dir + "/m2.json");
  run("--threads 8 combine " + dir + "/d.jsonl" + fit + dir + "/m8.json");
  same(dir + "/m1.json", dir + "/m2.json", "combine reruns");
  same(dir + "/m1.json", dir + "/m8.json", "combine thread counts");

  run("select " + dir + "/a1.jsonl --scores " + dir + "/s1.csv --strategy quantile" +
      " -n 10 --seed 4 --detectors alti -o " + dir + "/sel1.txt");
  run("select " + dir + "/a1.jsonl --scores " + dir + "/s1.csv --strategy quantile" +
      " -n 10 --seed 4 --detectors alti -o " + dir + "/sel2.txt");
  same(dir + "/sel1.txt", dir + "/sel2.txt", "select reruns");
  same(dir + "/sel1.txt.audit.json", dir + "/sel2.txt.audit.json", "select audits");

  run("downsample " + dir + "/a1.jsonl " + dir + "/d.jsonl --seed 6 -o " + dir + "/x1.jsonl " +
      dir + "/y1.jsonl");
  run("downsample " + dir + "/a1.jsonl " + dir + "/d.jsonl --seed 6 -o " + dir + "/x2.jsonl " +
      dir + "/y2.jsonl");
  same(dir + "/x1.jsonl", dir + "/x2.jsonl", "downsample reruns (side A)");
  same(dir + "/y1.jsonl", dir + "/y2.jsonl", "downsample reruns (side B)");
}

#endif  // MTPATH_BIN

struct Criterion {
  const char* name;
  void (*fn)();
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"1. pairwise ranking matches brute-force enumeration", criterion_ranking},
      {"2. positional transport matches brute-force plans", criterion_transport},
      {"3. calibration affine map and weight normalization", criterion_calibration},
      {"4. group cross-validation hygiene", criterion_cv_hygiene},
      {"5. combined word features beat the best single feature", criterion_combiner_signal},
      {"6. detectors separate planted pathologies at chance-level noise", criterion_separation},
      {"7. format round-trips and named corruption rejection", criterion_round_trips},
      {"8. exact pathology rates on a shaped fixture", criterion_rates},
#ifdef MTPATH_BIN
      {"9. bitwise determinism across runs and thread counts", criterion_determinism},
#endif
  };

  int failures = 0;
  for (const auto& c : criteria) {
    double start = now_seconds();
    std::string detail;
    try {
      c.fn();
    } catch (const std::exception& e) {
      detail = e.what();
    }
    double seconds = now_seconds() - start;
    if (detail.empty()) {
      std::printf("[PASS] %s (%.2fs)\n", c.name, seconds);
    } else {
      std::printf("[FAIL] %s (%.2fs): %s\n", c.name, seconds, detail.c_str());
      ++failures;
    }
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
