#include "mtpath/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mtpath/attn_ot.hpp"
#include "mtpath/combiner.hpp"
#include "mtpath/corpus_io.hpp"
#include "mtpath/corpus_ops.hpp"
#include "mtpath/csv.hpp"
#include "mtpath/detectors.hpp"
#include "mtpath/errors.hpp"
#include "mtpath/eval.hpp"
#include "mtpath/selection.hpp"
#include "mtpath/synth.hpp"
#include "mtpath/words.hpp"

namespace mtpath {

namespace {

struct CliExit {
  int code;
};

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void run_validate(const std::string& corpus_path, bool stats) {
  Corpus c;
  try {
    c = load_corpus(corpus_path);
  } catch (const ValidationFailure& vf) {
    std::cout << "invalid: " << vf.context() << "\n";
    for (const auto& v : vf.violations()) std::cout << "  " << v << "\n";
    throw CliExit{2};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SchemaError) throw;
    std::cout << "invalid: " << e.what() << "\n";
    throw CliExit{2};
  }
  std::cout << "ok: " << c.records.size() << " records, " << c.manifest.size() << " directions\n";
  if (stats) {
    auto per_dir = corpus_stats(c);
    std::cout << "direction,annotated,halluc_any,halluc_full,omission_any,omission_full\n";
    for (const auto& [dir, st] : per_dir) {
      std::cout << dir << ',' << st.count << ',' << format_double(st.halluc_any_rate()) << ','
                << format_double(st.halluc_rate(Severity::Full)) << ','
                << format_double(st.omission_any_rate()) << ','
                << format_double(st.omission_rate(Severity::Full)) << "\n";
    }
  }
}

void run_score(const std::string& corpus_path, const std::string& level, const std::string& detector_list,
               const std::string& ref_path, const std::string& calib_path, const std::string& save_calib,
               bool drop_eos, const std::string& model_path, const std::string& out, int threads) {
  Corpus corpus = load_corpus(corpus_path);
  if (level == "word") {
    WordTable table = build_word_table(corpus, threads);
    if (!model_path.empty()) {
      LinearModel model = LinearModel::from_json(read_text_file(model_path));
      for (auto& row : table.rows) {
        auto z = model.log_odds(row.features);
        if (z) row.features["combo"] = *z;
      }
    }
    write_text_file(out, word_table_to_csv(table));
    std::cout << "wrote " << table.rows.size() << " word rows to " << out;
    if (table.orphan_word_count > 0) std::cout << " (" << table.orphan_word_count << " orphan words excluded)";
    std::cout << "\n";
    return;
  }
  if (level != "sentence") throw Error(ErrorCode::InvalidConfig, "level must be sentence or word");

  auto ids = parse_detector_list(detector_list);
  if (drop_eos)
    for (auto& id : ids)
      if (id.is_wass()) id.drop_eos = true;

  ScoringContext ctx;
  bool any_wass = false;
  for (const auto& id : ids) any_wass = any_wass || id.is_wass();
  if (any_wass) {
    Corpus ref_storage;
    const Corpus* ref = &corpus;
    if (!ref_path.empty()) {
      ref_storage = load_corpus(ref_path);
      ref = &ref_storage;
    }
    if (calib_path.empty()) {
      ctx = build_scoring_context(*ref, ids);
    } else {
      // references only; calibrations come from the file
      std::vector<DetectorId> ref_ids = ids;
      for (auto& id : ref_ids)
        if (id.needs_calibration()) id.kind = DetectorId::Kind::WassToData;
      ctx = build_scoring_context(*ref, ref_ids);
      for (auto& cal : calibrations_from_json(read_text_file(calib_path)))
        (cal.drop_eos ? ctx.calibs_noeos : ctx.calibs)[cal.direction] = cal;
    }
    if (!save_calib.empty()) {
      std::vector<Calibration> all;
      for (const auto& [dir, cal] : ctx.calibs) all.push_back(cal);
      for (const auto& [dir, cal] : ctx.calibs_noeos) all.push_back(cal);
      write_text_file(save_calib, calibrations_to_json(all));
    }
  }

  ScoreTable table = score_corpus(corpus, ids, ctx, threads);
  write_text_file(out, table.to_csv());
  std::cout << "wrote " << table.ids.size() << " rows x " << table.columns.size() << " detectors to " << out
            << "\n";
}

void run_eval(const std::string& corpus_path, const std::string& scores_path, const std::string& task_name_s,
              const std::string& detector_list, const std::string& out) {
  Corpus corpus = load_corpus(corpus_path);
  TaskId task = parse_task(task_name_s);
  EvalResult result;
  if (is_word_task(task)) {
    std::vector<std::string> feature_cols;
    WordTable table = word_table_from_csv_file(scores_path, &feature_cols);
    std::vector<std::string> features =
        detector_list.empty() ? feature_cols : split_list(detector_list);
    result = evaluate_words(corpus, table, task, features);
  } else {
    ScoreTable table = ScoreTable::from_csv_file(scores_path);
    std::vector<std::string> detectors = detector_list.empty() ? table.columns : split_list(detector_list);
    result = evaluate_sentences(corpus, table, task, detectors);
  }
  write_text_file(out, result.to_csv());
  write_text_file(out + ".json", result.to_json());
  for (const auto& de : result.directions)
    for (const auto& [det, reason] : de.excluded)
      std::cout << "excluded " << de.direction << " " << det << ": " << reason << "\n";
  for (const auto& det : result.detectors) {
    auto it = result.mean.find(det);
    std::cout << "mean " << det << " = " << (it == result.mean.end() ? "n/a" : format_double(it->second))
              << "\n";
  }
}

void run_combine(const std::string& corpus_path, const std::string& task_name_s,
                 const std::string& feature_list, std::uint64_t seed, double lambda, int folds,
                 const std::string& out, int threads) {
  Corpus corpus = load_corpus(corpus_path);
  TaskId task = parse_task(task_name_s);
  if (!is_word_task(task)) throw Error(ErrorCode::InvalidConfig, "combine works on word tasks");
  const Side side = task == TaskId::WordHalluc ? Side::Target : Side::Source;
  std::vector<std::string> features = split_list(feature_list);
  if (features.empty()) throw Error(ErrorCode::InvalidConfig, "no features given");

  WordTable table = build_word_table(corpus, threads);
  CrossvalInput input;
  input.feature_names = features;
  std::vector<std::string> row_dirs;
  std::size_t gold_rows = 0, skipped = 0;
  for (const auto& row : table.rows) {
    if (row.side != side || !row.gold) continue;
    ++gold_rows;
    std::vector<double> x;
    x.reserve(features.size());
    bool complete = true;
    for (const auto& f : features) {
      auto it = row.features.find(f);
      if (it == row.features.end() || std::isnan(it->second)) {
        complete = false;
        break;
      }
      x.push_back(it->second);
    }
    if (!complete) {
      ++skipped;
      continue;
    }
    input.X.push_back(std::move(x));
    input.y.push_back(*row.gold);
    input.groups.push_back(row.id);
    row_dirs.push_back(row.direction);
  }
  std::cout << "using " << input.X.size() << " of " << gold_rows << " gold rows";
  if (skipped > 0) std::cout << " (" << skipped << " lacked features)";
  std::cout << "\n";

  CrossvalResult cv = crossval_combine(input, folds, seed, lambda);
  write_text_file(out, cv.model.to_json());

  std::set<std::string> dirs(row_dirs.begin(), row_dirs.end());
  for (const auto& dir : dirs) {
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t i = 0; i < row_dirs.size(); ++i)
      if (row_dirs[i] == dir) {
        s.push_back(cv.oof_scores[i]);
        y.push_back(input.y[i]);
      }
    try {
      std::cout << "oof_auc " << dir << " = " << format_double(roc_auc(s, y)) << "\n";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateLabels) throw;
      std::cout << "oof_auc " << dir << " = n/a (one label class)\n";
    }
  }
  std::cout << "oof_auc pooled = " << format_double(roc_auc(cv.oof_scores, input.y)) << "\n";
}

void run_select(const std::string& corpus_path, const std::string& scores_path, const std::string& strategy_s,
                std::size_t n, std::uint64_t seed, const std::string& detector_list,
                const std::string& exclude_path, const std::string& out) {
  Corpus corpus = load_corpus(corpus_path);
  SelectionStrategy strategy = parse_strategy(strategy_s);
  ScoreTable table;
  if (!scores_path.empty()) table = ScoreTable::from_csv_file(scores_path);
  else if (strategy != SelectionStrategy::Uniform)
    throw Error(ErrorCode::MissingScores, "strategy needs --scores");
  std::set<std::string> exclude;
  if (!exclude_path.empty()) {
    std::istringstream in(read_text_file(exclude_path));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) exclude.insert(line);
    }
  }
  auto result = select_candidates(corpus, table, strategy, n, seed, split_list(detector_list), exclude);
  std::string ids;
  for (const auto& id : result.ids) {
    ids += id;
    ids += '\n';
  }
  write_text_file(out, ids);
  write_text_file(out + ".audit.json", result.audit_json + "\n");
  std::cout << "selected " << result.ids.size() << " records to " << out << "\n";
}

void run_downsample(const std::string& path_a, const std::string& path_b, std::uint64_t seed,
                    const std::vector<std::string>& outs) {
  Corpus a = load_corpus(path_a);
  Corpus b = load_corpus(path_b);
  auto [da, db] = matched_downsample(a, b, seed);
  save_corpus(da, outs[0]);
  save_corpus(db, outs[1]);
  std::cout << "kept " << da.records.size() << " of " << a.records.size() << " and " << db.records.size()
            << " of " << b.records.size() << " records\n";
}

void run_synth(const std::string& config_path, std::uint64_t seed, const std::string& out, int threads) {
  GenConfig config = config_path.empty() ? GenConfig::defaults() : GenConfig::from_json(read_text_file(config_path));
  Corpus c = generate_corpus(config, seed, threads);
  save_corpus(c, out);
  std::cout << "wrote " << c.records.size() << " records to " << out << "\n";
}

void run_report(const std::vector<std::string>& eval_csvs, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  CsvTable merged;
  merged.header = {"source", "direction", "detector", "score"};
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& path : eval_csvs) {
    CsvTable t = read_csv(path);
    if (t.header.empty() || t.header[0] != "direction")
      throw Error(ErrorCode::SchemaError, path + ": not an evaluation matrix (no direction column)");
    nlohmann::ordered_json per_dir = nlohmann::ordered_json::object();
    for (const auto& row : t.rows) {
      nlohmann::ordered_json per_det = nlohmann::ordered_json::object();
      for (std::size_t c = 1; c < t.header.size(); ++c) {
        if (row[c].empty()) continue;
        merged.rows.push_back({path, row[0], t.header[c], row[c]});
        per_det[t.header[c]] = parse_double(row[c]);
      }
      per_dir[row[0]] = std::move(per_det);
    }
    j[path] = std::move(per_dir);
  }
  auto csv_path = (std::filesystem::path(out_dir) / "report.csv").string();
  auto json_path = (std::filesystem::path(out_dir) / "report.json").string();
  write_csv(merged, csv_path);
  write_text_file(json_path, j.dump(2) + "\n");
  std::cout << "wrote " << csv_path << " and " << json_path << "\n";
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"detectors and benchmarks for translation pathology traces"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "record-level parallelism")->capture_default_str();

  auto* validate_cmd = app.add_subcommand("validate", "check a trace corpus against the format rules");
  std::string v_corpus;
  bool v_stats = false;
  validate_cmd->add_option("corpus", v_corpus, "JSON-Lines trace corpus")->required();
  validate_cmd->add_flag("--stats", v_stats, "print per-direction pathology rates");
  validate_cmd->callback([&] { run_validate(v_corpus, v_stats); });

  auto* score_cmd = app.add_subcommand("score", "compute detector scores");
  std::string s_corpus, s_level = "sentence", s_detectors = "seq_logprob,alti,alti_t", s_ref, s_calib,
              s_save_calib, s_model, s_out;
  bool s_drop_eos = false;
  score_cmd->add_option("corpus", s_corpus)->required();
  score_cmd->add_option("--level", s_level, "sentence or word")->capture_default_str();
  score_cmd->add_option("--detectors", s_detectors, "comma-separated detector ids")->capture_default_str();
  score_cmd->add_option("--ref", s_ref, "reference corpus for the wass detectors");
  score_cmd->add_option("--calib", s_calib, "load calibration JSON instead of computing it");
  score_cmd->add_option("--save-calib", s_save_calib, "write the calibration JSON");
  score_cmd->add_flag("--drop-eos", s_drop_eos, "use the EOS-dropped variant of the wass detectors");
  score_cmd->add_option("--model", s_model, "word level: add a combo column from a linear model");
  score_cmd->add_option("-o,--out", s_out, "output CSV")->required();
  score_cmd->callback([&] {
    if (!s_model.empty() && s_level != "word")
      throw CLI::ValidationError("--model", "only applies to --level word");
    run_score(s_corpus, s_level, s_detectors, s_ref, s_calib, s_save_calib, s_drop_eos, s_model, s_out,
              threads);
  });

  auto* eval_cmd = app.add_subcommand("eval", "per-direction ranking metrics");
  std::string e_corpus, e_scores, e_task, e_detectors, e_out;
  eval_cmd->add_option("corpus", e_corpus)->required();
  eval_cmd->add_option("--scores", e_scores, "score CSV from the score command")->required();
  eval_cmd->add_option("--task", e_task, "sent_halluc|sent_omission|sent_pathology|word_halluc|word_omission")
      ->required();
  eval_cmd->add_option("--detectors", e_detectors, "subset of score columns (default: all)");
  eval_cmd->add_option("-o,--out", e_out, "output CSV (JSON sidecar at <out>.json)")->required();
  eval_cmd->callback([&] { run_eval(e_corpus, e_scores, e_task, e_detectors, e_out); });

  auto* combine_cmd = app.add_subcommand("combine", "cross-validated word-feature combination");
  std::string c_corpus, c_task, c_features = "logprob,contrastive_logprob,alti_total,alti_max", c_out;
  std::uint64_t c_seed = 0;
  double c_lambda = 1.0;
  int c_folds = 3;
  combine_cmd->add_option("corpus", c_corpus)->required();
  combine_cmd->add_option("--task", c_task, "word_halluc or word_omission")->required();
  combine_cmd->add_option("--features", c_features, "comma-separated word features")->capture_default_str();
  combine_cmd->add_option("--seed", c_seed, "fold-assignment seed")->required();
  combine_cmd->add_option("--lambda", c_lambda, "L2 strength")->capture_default_str();
  combine_cmd->add_option("--folds", c_folds, "fold count")->capture_default_str();
  combine_cmd->add_option("-o,--out", c_out, "output model JSON")->required();
  combine_cmd->callback(
      [&] { run_combine(c_corpus, c_task, c_features, c_seed, c_lambda, c_folds, c_out, threads); });

  auto* select_cmd = app.add_subcommand("select", "pick annotation candidates");
  std::string sel_corpus, sel_scores, sel_strategy, sel_detectors, sel_exclude, sel_out;
  std::size_t sel_n = 0;
  std::uint64_t sel_seed = 0;
  select_cmd->add_option("corpus", sel_corpus)->required();
  select_cmd->add_option("--scores", sel_scores, "score CSV (needed for quantile and worst)");
  select_cmd->add_option("--strategy", sel_strategy, "uniform|quantile|worst")->required();
  select_cmd->add_option("-n,--count", sel_n, "how many records")->required();
  select_cmd->add_option("--seed", sel_seed, "sampling seed")->required();
  select_cmd->add_option("--detectors", sel_detectors, "detector columns driving the selection");
  select_cmd->add_option("--exclude", sel_exclude, "file of ids to leave out, one per line");
  select_cmd->add_option("-o,--out", sel_out, "output id list (audit at <out>.audit.json)")->required();
  select_cmd->callback(
      [&] { run_select(sel_corpus, sel_scores, sel_strategy, sel_n, sel_seed, sel_detectors, sel_exclude, sel_out); });

  auto* down_cmd = app.add_subcommand("downsample", "stratified matched downsampling of two corpora");
  std::string d_a, d_b;
  std::uint64_t d_seed = 0;
  std::vector<std::string> d_outs;
  down_cmd->add_option("corpusA", d_a)->required();
  down_cmd->add_option("corpusB", d_b)->required();
  down_cmd->add_option("--seed", d_seed, "sampling seed")->required();
  down_cmd->add_option("-o,--out", d_outs, "two output corpus paths")->expected(2)->required();
  down_cmd->callback([&] { run_downsample(d_a, d_b, d_seed, d_outs); });

  auto* synth_cmd = app.add_subcommand("synth", "generate a planted-pathology trace corpus");
  std::string sy_config, sy_out;
  std::uint64_t sy_seed = 0;
  synth_cmd->add_option("--config", sy_config, "generator config JSON (defaults when absent)");
  synth_cmd->add_option("--seed", sy_seed, "generation seed")->required();
  synth_cmd->add_option("-o,--out", sy_out, "output corpus path")->required();
  synth_cmd->callback([&] { run_synth(sy_config, sy_seed, sy_out, threads); });

  auto* report_cmd = app.add_subcommand("report", "merge evaluation matrices into one bundle");
  std::vector<std::string> r_evals;
  std::string r_out;
  report_cmd->add_option("--eval", r_evals, "evaluation CSVs to merge")->required()->expected(-1);
  report_cmd->add_option("-o,--out", r_out, "output directory")->required();
  report_cmd->callback([&] { run_report(r_evals, r_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const CliExit& e) {
    return e.code;
  } catch (const ValidationFailure& vf) {
    std::cerr << "validation failure: " << vf.context() << "\n";
    for (const auto& v : vf.violations()) std::cerr << "  " << v << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace mtpath
