#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mtpath/detectors.hpp"
#include "mtpath/errors.hpp"
#include "mtpath/rng.hpp"
#include "oracles.hpp"

using namespace mtpath;
namespace tu = testutil;

namespace {

TranslationRecord with_alti(std::vector<std::vector<double>> rows) {
  TranslationRecord r = tu::make_record("r", "eng_Latn-deu_Latn",
                                        static_cast<int>(rows.empty() ? 1 : rows[0].size()),
                                        static_cast<int>(rows.size()));
  ContributionMatrix m;
  m.n_tgt = rows.size();
  m.n_src = rows.empty() ? 0 : rows[0].size();
  for (const auto& row : rows)
    for (double v : row) m.entries.push_back(v);
  r.alti = std::move(m);
  return r;
}

template <typename Fn>
ErrorCode thrown_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::SchemaError;
}

}  // namespace

TEST_SUITE("sentence_detectors") {

TEST_CASE("seq_logprob is the negated mean log-probability") {
  TranslationRecord r = tu::make_record("r", "eng_Latn-deu_Latn", 2, 3);
  r.tgt_logprob = {-1.0, -2.0, -3.0};
  CHECK(seq_logprob(r).value == 2.0);
  CHECK(seq_logprob(r).detector == "seq_logprob");

  r = tu::make_record("r", "eng_Latn-deu_Latn", 2, 2);
  r.tgt_logprob = {0.0, 0.0};
  CHECK(seq_logprob(r).value == 0.0);

  r = tu::make_record("r", "eng_Latn-deu_Latn", 2, 1);
  r.tgt_logprob = {-0.1};
  CHECK(seq_logprob(r).value == 0.1);

  r.tgt_logprob.clear();
  CHECK(thrown_code([&] { seq_logprob(r); }) == ErrorCode::MissingInput);
}

TEST_CASE("alti is the negated mean source contribution per target token") {
  CHECK(alti_mean(with_alti({{0.8, 0.1}, {0.05, 0.05}})).value == -0.5);
  CHECK(alti_mean(with_alti({{0.0, 0.0}, {0.0, 0.0}})).value == 0.0);
  CHECK(alti_mean(with_alti({{0.5, 0.5}, {0.25, 0.75}})).value == -1.0);

  TranslationRecord r = tu::make_record("r", "eng_Latn-deu_Latn", 2, 2);
  r.alti.reset();
  CHECK(thrown_code([&] { alti_mean(r); }) == ErrorCode::MissingInput);
}

TEST_CASE("alti_t averages column sums over source tokens") {
  CHECK(alti_t_mean(with_alti({{0.8, 0.1}, {0.05, 0.05}})).value == -0.5);
  CHECK(alti_t_mean(with_alti({{0.9, 0.0}})).value == -0.45);
  CHECK(alti_t_mean(with_alti({{0.9}, {0.9}})).value == -1.8);

  TranslationRecord r = tu::make_record("r", "eng_Latn-deu_Latn", 2, 2);
  r.alti.reset();
  CHECK(thrown_code([&] { alti_t_mean(r); }) == ErrorCode::MissingInput);
}

TEST_CASE("alti and alti_t share the total mass identity") {
  // n_src * (-alti_t) == n_tgt * (-alti): both equal the matrix total.
  Rng rng(55);
  for (int iter = 0; iter < 20; ++iter) {
    std::size_t n_tgt = 1 + rng.bounded(6), n_src = 1 + rng.bounded(6);
    std::vector<std::vector<double>> rows(n_tgt, std::vector<double>(n_src));
    for (auto& row : rows)
      for (auto& v : row) v = rng.real01() / static_cast<double>(n_src);
    TranslationRecord r = with_alti(rows);
    double lhs = static_cast<double>(n_src) * -alti_t_mean(r).value;
    double rhs = static_cast<double>(n_tgt) * -alti_mean(r).value;
    CHECK(std::fabs(lhs - rhs) <= 1e-9);
  }
}

TEST_CASE("embedding similarity is the negated cosine") {
  TranslationRecord r = tu::make_record("r", "eng_Latn-deu_Latn", 2, 2);
  r.embeddings["enc"] = {{1.0, 0.0}, {1.0, 0.0}};
  CHECK(embedding_similarity(r, "enc").value == -1.0);
  r.embeddings["enc"] = {{1.0, 0.0}, {0.0, 1.0}};
  CHECK(embedding_similarity(r, "enc").value == 0.0);
  r.embeddings["enc"] = {{1.0, 0.0}, {-1.0, 0.0}};
  CHECK(embedding_similarity(r, "enc").value == 1.0);
  r.embeddings["enc"] = {{1.0, 1.0}, {0.0, 0.0}};
  CHECK(thrown_code([&] { embedding_similarity(r, "enc"); }) == ErrorCode::ZeroVector);
  CHECK(thrown_code([&] { embedding_similarity(r, "other"); }) == ErrorCode::MissingInput);
}

TEST_CASE("external scores are negated stored values") {
  TranslationRecord r = tu::make_record("r", "eng_Latn-deu_Latn", 2, 2);
  r.external_scores["qe"] = 0.85;
  CHECK(external_score(r, "qe").value == -0.85);
  r.external_scores["qe"] = -0.2;
  CHECK(external_score(r, "qe").value == 0.2);
  CHECK(thrown_code([&] { external_score(r, "ghost"); }) == ErrorCode::MissingInput);
}

TEST_CASE("noise detector is a pure function of seed and record id") {
  TranslationRecord r = tu::make_record("abc", "eng_Latn-deu_Latn", 2, 2);
  double expected = Rng(derive_seed(17, "abc")).real01();
  CHECK(noise_score(r, 17).value == expected);
  CHECK(noise_score(r, 17).detector == "noise:17");

  // Content other than the id is irrelevant.
  TranslationRecord other = tu::make_record("abc", "deu_Latn-eng_Latn", 5, 7);
  other.external_scores["qe"] = 0.1;
  CHECK(noise_score(other, 17).value == expected);

  TranslationRecord different = tu::make_record("abd", "eng_Latn-deu_Latn", 2, 2);
  CHECK(noise_score(different, 17).value != expected);
  CHECK(noise_score(r, 18).value != expected);
  CHECK(noise_score(r, 17).value >= 0.0);
  CHECK(noise_score(r, 17).value < 1.0);
}

TEST_CASE("negating raw inputs flips each score sign exactly") {
  TranslationRecord r = tu::make_record("r", "eng_Latn-deu_Latn", 3, 2);
  r.tgt_logprob = {-0.3, -1.7};
  r.embeddings["enc"] = {{0.3, -0.2, 0.9}, {0.1, 0.4, -0.5}};
  r.external_scores["qe"] = 0.37;
  r.alti->entries = {0.2, 0.3, 0.1, 0.05, 0.4, 0.25};

  TranslationRecord neg = r;
  for (auto& v : neg.tgt_logprob) v = -v;
  for (auto& v : neg.embeddings["enc"].tgt) v = -v;
  neg.external_scores["qe"] = -neg.external_scores["qe"];
  for (auto& v : neg.alti->entries) v = -v;

  CHECK(seq_logprob(neg).value == -seq_logprob(r).value);
  CHECK(embedding_similarity(neg, "enc").value == -embedding_similarity(r, "enc").value);
  CHECK(external_score(neg, "qe").value == -external_score(r, "qe").value);
  CHECK(alti_mean(neg).value == -alti_mean(r).value);
  CHECK(alti_t_mean(neg).value == -alti_t_mean(r).value);
}

TEST_CASE("detector ids parse and print canonically") {
  for (const char* s : {"seq_logprob", "alti", "alti_t", "sim:enc", "ext:qe", "noise:42",
                        "wass_to_unif", "wass_to_data", "wass_combo", "wass_mean",
                        "wass_to_unif_noeos", "wass_to_data_noeos", "wass_combo_noeos",
                        "wass_mean_noeos"})
    CHECK(DetectorId::parse(s).str() == s);

  CHECK(DetectorId::parse("wass_mean_noeos").drop_eos);
  CHECK(DetectorId::parse("wass_mean_noeos").needs_calibration());
  CHECK(DetectorId::parse("wass_to_data").needs_reference());
  CHECK(!DetectorId::parse("wass_to_unif").needs_reference());
  CHECK(!DetectorId::parse("alti").is_wass());

  for (const char* bad : {"", "bogus", "sim:", "ext:", "noise:", "noise:x", "seq_logprob_noeos"})
    CHECK(thrown_code([&] { DetectorId::parse(bad); }) == ErrorCode::UnknownDetector);

  auto list = parse_detector_list("alti,seq_logprob,,noise:3");
  REQUIRE(list.size() == 3);
  CHECK(list[0].str() == "alti");
  CHECK(list[1].str() == "seq_logprob");
  CHECK(list[2].str() == "noise:3");
}

TEST_CASE("score_corpus fills one row per record and one column per detector") {
  TranslationRecord a = tu::make_record("a", "eng_Latn-deu_Latn", 2, 3);
  a.tgt_logprob = {-1.0, -2.0, -3.0};
  TranslationRecord b = tu::make_record("b", "eng_Latn-deu_Latn", 2, 2);
  b.tgt_logprob = {0.0, 0.0};
  TranslationRecord c = tu::make_record("c", "deu_Latn-eng_Latn", 2, 1);
  c.tgt_logprob = {-0.1};
  c.alti.reset();  // alti becomes a missing marker for this record
  Corpus corpus = tu::make_corpus({a, b, c});

  auto detectors = parse_detector_list("seq_logprob,alti");
  ScoringContext ctx;
  ScoreTable t = score_corpus(corpus, detectors, ctx, 1);

  REQUIRE(t.ids == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.columns == std::vector<std::string>{"seq_logprob", "alti"});
  CHECK(t.directions[2] == "deu_Latn-eng_Latn");
  CHECK(t.data_sources[0] == "test");
  CHECK(t.value(0, 0) == 2.0);
  CHECK(t.value(1, 0) == 0.0);
  CHECK(t.value(2, 0) == 0.1);
  CHECK(t.value(0, 1).has_value());
  CHECK(!t.value(2, 1).has_value());  // missing marker, not zero
  CHECK(t.row_of("b") == 1);
  CHECK(t.row_of("zz") == -1);
  CHECK(t.column("alti") == 1);
  CHECK(t.column("noise:1") == -1);

  ScoreTable empty = score_corpus(corpus, {}, ctx, 1);
  CHECK(empty.columns.empty());
  CHECK(empty.values.size() == 3);
  CHECK(empty.values[0].empty());
}

TEST_CASE("missing markers serialize as empty csv cells") {
  TranslationRecord a = tu::make_record("a", "eng_Latn-deu_Latn", 2, 2);
  a.alti.reset();
  Corpus corpus = tu::make_corpus({a});
  ScoringContext ctx;
  ScoreTable t = score_corpus(corpus, parse_detector_list("alti,seq_logprob"), ctx, 1);
  std::string csv = t.to_csv();
  CHECK(csv == "id,direction,data_source,alti,seq_logprob\n"
               "a,eng_Latn-deu_Latn,test,,1\n");

  std::string dir = tu::temp_dir();
  tu::write_file(dir + "/scores.csv", csv);
  ScoreTable back = ScoreTable::from_csv_file(dir + "/scores.csv");
  CHECK(back.ids == t.ids);
  CHECK(back.columns == t.columns);
  CHECK(!back.value(0, 0).has_value());
  CHECK(back.value(0, 1) == 1.0);
  CHECK(back.to_csv() == csv);

  tu::write_file(dir + "/bad.csv", "foo,bar\n1,2\n");
  CHECK(thrown_code([&] { ScoreTable::from_csv_file(dir + "/bad.csv"); }) ==
        ErrorCode::SchemaError);
}

TEST_CASE("noise column is schedule-free across corpus orderings") {
  std::vector<TranslationRecord> records;
  for (int i = 0; i < 8; ++i)
    records.push_back(tu::make_record("id" + std::to_string(i), "eng_Latn-deu_Latn", 2, 2));
  Corpus fwd = tu::make_corpus(records);
  std::reverse(records.begin(), records.end());
  Corpus rev = tu::make_corpus(records);

  ScoringContext ctx;
  auto detectors = parse_detector_list("noise:5");
  ScoreTable tf = score_corpus(fwd, detectors, ctx, 1);
  ScoreTable tr = score_corpus(rev, detectors, ctx, 4);
  for (const auto& id : tf.ids) {
    int rf = tf.row_of(id), rr = tr.row_of(id);
    REQUIRE(rf >= 0);
    REQUIRE(rr >= 0);
    CHECK(tf.values[static_cast<std::size_t>(rf)][0] ==
          tr.values[static_cast<std::size_t>(rr)][0]);
  }
}

TEST_CASE("parallel scoring is bitwise identical to the serial reference") {
  std::vector<TranslationRecord> records;
  Rng rng(77);
  for (int i = 0; i < 40; ++i) {
    TranslationRecord r = tu::make_record("r" + std::to_string(i), "eng_Latn-deu_Latn",
                                          2 + static_cast<int>(rng.bounded(5)),
                                          2 + static_cast<int>(rng.bounded(5)));
    for (auto& v : r.tgt_logprob) v = -rng.real01() * 5.0;
    r.embeddings["enc"] = {{rng.real01(), rng.real01()}, {rng.real01(), rng.real01()}};
    r.external_scores["qe"] = rng.real01();
    if (i % 7 == 0) r.alti.reset();
    records.push_back(std::move(r));
  }
  Corpus corpus = tu::make_corpus(records);

  auto detectors = parse_detector_list("seq_logprob,alti,alti_t,sim:enc,ext:qe,noise:9");
  ScoringContext ctx;
  ScoreTable serial = score_corpus_serial(corpus, detectors, ctx);
  ScoreTable par1 = score_corpus(corpus, detectors, ctx, 1);
  ScoreTable par8 = score_corpus(corpus, detectors, ctx, 8);
  CHECK(serial.to_csv() == par1.to_csv());
  CHECK(serial.to_csv() == par8.to_csv());

  // And across repeated runs.
  ScoreTable again = score_corpus(corpus, detectors, ctx, 8);
  CHECK(par8.to_csv() == again.to_csv());
}

TEST_CASE("score table json lists scores per record without missing entries") {
  TranslationRecord a = tu::make_record("a", "eng_Latn-deu_Latn", 2, 2);
  a.alti.reset();
  Corpus corpus = tu::make_corpus({a});
  ScoringContext ctx;
  ScoreTable t = score_corpus(corpus, parse_detector_list("alti,seq_logprob"), ctx, 1);
  std::string j = t.to_json();
  CHECK(j.find("\"id\": \"a\"") != std::string::npos);
  CHECK(j.find("\"seq_logprob\": 1.0") != std::string::npos);
  CHECK(j.find("\"alti\"") == std::string::npos);  // missing scores are omitted
}

}  // TEST_SUITE
