#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mtpath {

// All rows sharing a group id share a fold.
using FoldAssignment = std::map<std::string, int>;

// Distinct groups, sorted, seeded-shuffled, dealt round-robin; deterministic.
FoldAssignment assign_folds(const std::vector<std::string>& groups, int k, std::uint64_t seed);

struct LinearModel {
  std::vector<std::string> features;  // ordered
  std::vector<double> weights;        // in standardized space
  double bias = 0.0;
  std::vector<double> means;  // training-row standardization stats
  std::vector<double> sds;    // population; > 0 (constant features rejected)
  double lambda = 1.0;
  double tol = 1e-8;
  std::size_t max_iter = 1000;
  int k = 3;
  std::uint64_t seed = 0;

  // Log-odds for a raw feature vector in `features` order.
  double log_odds(const std::vector<double>& raw) const;
  // Log-odds from a name->value map; absent when any feature is missing.
  std::optional<double> log_odds(const std::map<std::string, double>& feats) const;

  std::string to_json() const;
  static LinearModel from_json(const std::string& text);
};

struct FitResult {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> loss_trace;  // non-increasing by the Armijo guarantee
  double grad_norm = 0.0;
  std::size_t iterations = 0;
};

// Minimizes mean logistic loss + lambda/2 * ||w||^2 (bias unpenalized) by
// gradient descent with Armijo backtracking on pre-standardized X.
// Throws NonBinaryLabels, DidNotConverge (with the final gradient norm).
FitResult fit_logreg(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                     double lambda, double tol = 1e-8, std::size_t max_iter = 1000);

struct CrossvalInput {
  std::vector<std::vector<double>> X;  // raw feature rows
  std::vector<int> y;                  // binary
  std::vector<std::string> groups;     // sentence ids, one per row
  std::vector<std::string> feature_names;
};

struct CrossvalResult {
  std::vector<double> oof_scores;  // out-of-fold log-odds per row
  LinearModel model;               // final fit on all rows
};

// Per fold: standardize on train rows only, fit, score the held-out rows;
// then fit the exported model on all rows.
CrossvalResult crossval_combine(const CrossvalInput& input, int k, std::uint64_t seed,
                                double lambda, double tol = 1e-8, std::size_t max_iter = 1000);

}  // namespace mtpath
