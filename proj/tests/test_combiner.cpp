#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mtpath/combiner.hpp"
#include "mtpath/errors.hpp"
#include "mtpath/eval.hpp"
#include "mtpath/rng.hpp"
#include "oracles.hpp"

using namespace mtpath;
namespace tu = testutil;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Rows with a known linear signal in standardized coordinates.
struct Planted {
  std::vector<std::vector<double>> X;
  std::vector<int> y;
};

Planted planted_data(std::size_t n, const std::vector<double>& w_true, double bias,
                     std::uint64_t seed) {
  Planted out;
  Rng rng(seed);
  out.X.assign(n, std::vector<double>(w_true.size()));
  out.y.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double z = bias;
    for (std::size_t j = 0; j < w_true.size(); ++j) {
      out.X[i][j] = rng.normal();
      z += w_true[j] * out.X[i][j];
    }
    out.y[i] = rng.real01() < sigmoid(z) ? 1 : 0;
  }
  return out;
}

}  // namespace

TEST_SUITE("combiner") {

TEST_CASE("assign_folds deals sorted shuffled groups round-robin") {
  std::vector<std::string> groups = {"g4", "g1", "g5", "g2", "g0", "g3"};
  FoldAssignment fa = assign_folds(groups, 3, 99);
  REQUIRE(fa.size() == 6);
  std::map<int, int> per_fold;
  for (const auto& [g, f] : fa) {
    CHECK(f >= 0);
    CHECK(f < 3);
    ++per_fold[f];
  }
  CHECK(per_fold[0] == 2);
  CHECK(per_fold[1] == 2);
  CHECK(per_fold[2] == 2);

  CHECK(assign_folds(groups, 3, 99) == fa);  // deterministic
  // Duplicates collapse: the assignment depends on the distinct set only.
  std::vector<std::string> dupes = groups;
  dupes.insert(dupes.end(), groups.begin(), groups.end());
  CHECK(assign_folds(dupes, 3, 99) == fa);
  // Input order is irrelevant (groups are sorted first).
  std::sort(groups.begin(), groups.end());
  CHECK(assign_folds(groups, 3, 99) == fa);

  CHECK_THROWS_WITH_AS(assign_folds(groups, 1, 0),
                       "InvalidConfig: fold count must be at least 2", Error);
  CHECK_THROWS_WITH_AS(assign_folds({"a", "b", "a"}, 3, 0),
                       "TooFewGroups: need at least 3 distinct groups, have 2", Error);
}

TEST_CASE("fit_logreg handles a single-class corpus by driving p to zero") {
  Rng rng(7);
  std::vector<std::vector<double>> X(50, std::vector<double>(2));
  for (auto& row : X)
    for (auto& v : row) v = rng.normal();
  std::vector<int> y(50, 0);

  FitResult fit = fit_logreg(X, y, 1e-2, 1e-4, 20000);
  for (double w : fit.weights) CHECK(std::fabs(w) < 0.2);
  CHECK(fit.bias < -4.0);
  for (const auto& row : X) {
    double z = fit.bias;
    for (std::size_t j = 0; j < row.size(); ++j) z += fit.weights[j] * row[j];
    CHECK(sigmoid(z) < 0.01);
  }
  for (std::size_t i = 1; i < fit.loss_trace.size(); ++i)
    CHECK(fit.loss_trace[i] <= fit.loss_trace[i - 1]);
}

TEST_CASE("fit_logreg recovers planted weights") {
  std::vector<double> w_true = {2.0, -1.0, 0.0, 0.5};
  Planted data = planted_data(2000, w_true, 0.25, 11);
  FitResult fit = fit_logreg(data.X, data.y, 1e-3, 1e-7, 20000);
  REQUIRE(fit.weights.size() == 4);
  for (std::size_t j = 0; j < 4; ++j) CHECK(std::fabs(fit.weights[j] - w_true[j]) < 0.15);
  CHECK(std::fabs(fit.bias - 0.25) < 0.15);
  CHECK(fit.grad_norm <= 1e-7);
  for (std::size_t i = 1; i < fit.loss_trace.size(); ++i)
    CHECK(fit.loss_trace[i] <= fit.loss_trace[i - 1]);
}

TEST_CASE("fit_logreg rejects bad inputs and impossible budgets") {
  std::vector<std::vector<double>> X = {{0.0, 1.0}, {1.0, -1.0}, {-1.0, 0.5}};
  CHECK_THROWS_WITH_AS(fit_logreg(X, {0, 1, 2}, 0.1), "NonBinaryLabels: label 2 is not 0 or 1",
                       Error);

  std::vector<std::vector<double>> constant = {{0.0, 3.0}, {1.0, 3.0}, {-1.0, 3.0}};
  CHECK_THROWS_WITH_AS(fit_logreg(constant, {0, 1, 0}, 0.1),
                       "ConstantFeature: feature column 1 is constant", Error);

  Planted data = planted_data(200, {2.0, -1.0}, 0.0, 3);
  try {
    fit_logreg(data.X, data.y, 1e-3, 1e-12, 1);
    FAIL("expected DidNotConverge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DidNotConverge);
    CHECK(std::string(e.what()).find("after 1 iterations") != std::string::npos);
  }
}

TEST_CASE("linear model evaluates standardized log-odds") {
  LinearModel m;
  m.features = {"f_a", "f_b"};
  m.weights = {1.0, 2.0};
  m.bias = 0.5;
  m.means = {0.0, 1.0};
  m.sds = {2.0, 4.0};

  CHECK(m.log_odds(std::vector<double>{2.0, 5.0}) == 3.5);

  std::map<std::string, double> feats = {{"f_a", 2.0}, {"f_b", 5.0}, {"ignored", 9.0}};
  auto v = m.log_odds(feats);
  REQUIRE(v.has_value());
  CHECK(*v == 3.5);
  feats.erase("f_b");
  CHECK(!m.log_odds(feats).has_value());
}

TEST_CASE("linear model json round-trips every field") {
  LinearModel m;
  m.features = {"logprob", "alti_total"};
  m.weights = {0.125, -2.75};
  m.bias = 0.0625;
  m.means = {1.5, -0.25};
  m.sds = {0.75, 2.5};
  m.lambda = 1e-3;
  m.tol = 1e-9;
  m.max_iter = 512;
  m.k = 5;
  m.seed = 42;

  std::string text = m.to_json();
  CHECK(text.find("\"features\"") < text.find("\"weights\""));
  CHECK(text.find("\"weights\"") < text.find("\"bias\""));

  LinearModel back = LinearModel::from_json(text);
  CHECK(back.features == m.features);
  CHECK(back.weights == m.weights);
  CHECK(back.bias == m.bias);
  CHECK(back.means == m.means);
  CHECK(back.sds == m.sds);
  CHECK(back.lambda == m.lambda);
  CHECK(back.tol == m.tol);
  CHECK(back.max_iter == m.max_iter);
  CHECK(back.k == m.k);
  CHECK(back.seed == m.seed);

  CHECK_THROWS_AS(LinearModel::from_json("{oops"), Error);
  CHECK_THROWS_AS(LinearModel::from_json("[]"), Error);
  LinearModel zero_sd = m;
  zero_sd.sds = {0.75, 0.0};
  try {
    LinearModel::from_json(zero_sd.to_json());
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaError);
    CHECK(std::string(e.what()).find("non-positive feature sd") != std::string::npos);
  }
}

TEST_CASE("crossval separates a feature-defined label") {
  Rng rng(55);
  CrossvalInput input;
  input.feature_names = {"f1", "f2", "f3"};
  for (int g = 0; g < 150; ++g)
    for (int j = 0; j < 4; ++j) {
      std::vector<double> row = {rng.normal(), rng.normal(), rng.normal()};
      input.y.push_back(row[0] > 0.0 ? 1 : 0);
      input.X.push_back(std::move(row));
      input.groups.push_back("g" + std::to_string(g));
    }

  CrossvalResult res = crossval_combine(input, 3, 9, 1e-3, 1e-6, 5000);
  REQUIRE(res.oof_scores.size() == input.X.size());
  CHECK(roc_auc(res.oof_scores, input.y) >= 0.99);

  // The exported model reproduces the separation on the training rows.
  CHECK(res.model.features == input.feature_names);
  std::vector<double> in_sample;
  for (const auto& row : input.X) in_sample.push_back(res.model.log_odds(row));
  CHECK(roc_auc(in_sample, input.y) >= 0.99);
  CHECK(res.model.k == 3);
  CHECK(res.model.seed == 9);
  CHECK(res.model.lambda == 1e-3);
}

TEST_CASE("crossval keeps whole groups inside one fold") {
  Rng rng(14);
  CrossvalInput input;
  input.feature_names = {"f1", "f2"};
  for (int g = 0; g < 60; ++g)
    for (int j = 0; j < 3; ++j) {
      std::vector<double> row = {rng.normal(), rng.normal()};
      input.y.push_back(rng.real01() < sigmoid(1.5 * row[0]) ? 1 : 0);
      input.X.push_back(std::move(row));
      input.groups.push_back("g" + std::to_string(g));
    }
  const int k = 3;
  const std::uint64_t seed = 21;
  CrossvalResult base = crossval_combine(input, k, seed, 1e-2, 1e-6, 5000);

  // Flipping one row's label may only move scores of OTHER folds: the flipped
  // row's own fold never trains on it, so its fold's scores are bit-identical.
  FoldAssignment fa = assign_folds(input.groups, k, seed);
  std::size_t flip_row = 10;
  int flip_fold = fa.at(input.groups[flip_row]);
  CrossvalInput flipped = input;
  flipped.y[flip_row] = 1 - flipped.y[flip_row];
  CrossvalResult moved = crossval_combine(flipped, k, seed, 1e-2, 1e-6, 5000);

  bool outside_changed = false;
  for (std::size_t i = 0; i < input.X.size(); ++i) {
    if (fa.at(input.groups[i]) == flip_fold)
      CHECK(moved.oof_scores[i] == base.oof_scores[i]);
    else if (moved.oof_scores[i] != base.oof_scores[i])
      outside_changed = true;
  }
  CHECK(outside_changed);
}

TEST_CASE("crossval scores are a null under label permutation") {
  Rng feat_rng(1001);
  CrossvalInput input;
  input.feature_names = {"f1", "f2", "f3", "f4"};
  const std::size_t n = 4000;
  for (std::size_t i = 0; i < n; ++i) {
    input.X.push_back({feat_rng.normal(), feat_rng.normal(), feat_rng.normal(),
                       feat_rng.normal()});
    input.groups.push_back("g" + std::to_string(i / 4));
    input.y.push_back(0);
  }
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Rng label_rng(derive_seed(500 + trial, "labels"));
    for (auto& label : input.y) label = label_rng.real01() < 0.5 ? 1 : 0;
    CrossvalResult res = crossval_combine(input, 3, 3000 + trial, 0.1, 1e-5, 5000);
    double auc = roc_auc(res.oof_scores, input.y);
    CHECK(auc >= 0.45);
    CHECK(auc <= 0.55);
  }
}

TEST_CASE("crossval rejects rows with missing features and degenerate columns") {
  CrossvalInput input;
  input.feature_names = {"f1", "f2"};
  Rng rng(8);
  for (int i = 0; i < 24; ++i) {
    input.X.push_back({rng.normal(), rng.normal()});
    input.y.push_back(i % 2);
    input.groups.push_back("g" + std::to_string(i));
  }
  input.X[1][0] = std::numeric_limits<double>::quiet_NaN();
  input.X[5][1] = std::numeric_limits<double>::quiet_NaN();
  try {
    crossval_combine(input, 3, 0, 0.1);
    FAIL("expected MissingFeature");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingFeature);
    CHECK(std::string(e.what()).find("2 rows with missing feature values (rows 1 5)") !=
          std::string::npos);
  }

  input.X[1][0] = 0.0;
  input.X[5][1] = 0.0;
  for (auto& row : input.X) row[1] = 7.0;  // constant on every training split
  try {
    crossval_combine(input, 3, 0, 0.1);
    FAIL("expected ConstantFeature");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConstantFeature);
    CHECK(std::string(e.what()).find("'f2' is constant on the training rows") !=
          std::string::npos);
  }
}

}  // TEST_SUITE
