#include "mtpath/combiner.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mtpath/csv.hpp"
#include "mtpath/errors.hpp"
#include "mtpath/rng.hpp"

namespace mtpath {

FoldAssignment assign_folds(const std::vector<std::string>& groups, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidConfig, "fold count must be at least 2");
  std::set<std::string> uniq(groups.begin(), groups.end());
  if (static_cast<int>(uniq.size()) < k) {
    throw Error(ErrorCode::TooFewGroups, "need at least " + std::to_string(k) + " distinct groups, have " +
                                             std::to_string(uniq.size()));
  }
  std::vector<std::string> order(uniq.begin(), uniq.end());
  Rng rng(seed);
  rng.shuffle(order.size(), [&](std::size_t i, std::size_t j) { std::swap(order[i], order[j]); });
  FoldAssignment folds;
  for (std::size_t i = 0; i < order.size(); ++i) folds[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  return folds;
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) { return z > 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

struct Objective {
  const std::vector<std::vector<double>>& X;
  const std::vector<int>& y;
  double lambda;

  double loss(const std::vector<double>& w, double b) const {
    const std::size_t n = X.size(), d = w.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = b;
      for (std::size_t j = 0; j < d; ++j) z += w[j] * X[i][j];
      // loss_i = softplus(z) - y*z
      total += softplus(z) - (y[i] ? z : 0.0);
    }
    double reg = 0.0;
    for (double wj : w) reg += wj * wj;
    return total / static_cast<double>(n) + 0.5 * lambda * reg;
  }

  void gradient(const std::vector<double>& w, double b, std::vector<double>& gw, double& gb) const {
    const std::size_t n = X.size(), d = w.size();
    gw.assign(d, 0.0);
    gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = b;
      for (std::size_t j = 0; j < d; ++j) z += w[j] * X[i][j];
      double r = sigmoid(z) - static_cast<double>(y[i]);
      for (std::size_t j = 0; j < d; ++j) gw[j] += r * X[i][j];
      gb += r;
    }
    for (std::size_t j = 0; j < d; ++j) gw[j] = gw[j] / static_cast<double>(n) + lambda * w[j];
    gb /= static_cast<double>(n);
  }
};

}  // namespace

FitResult fit_logreg(const std::vector<std::vector<double>>& X, const std::vector<int>& y, double lambda,
                     double tol, std::size_t max_iter) {
  if (X.empty() || X.size() != y.size()) throw Error(ErrorCode::InvalidConfig, "feature rows and labels must be non-empty and equal-length");
  for (int v : y)
    if (v != 0 && v != 1) throw Error(ErrorCode::NonBinaryLabels, "label " + std::to_string(v) + " is not 0 or 1");
  const std::size_t d = X[0].size();
  for (const auto& row : X)
    if (row.size() != d) throw Error(ErrorCode::InvalidConfig, "ragged feature rows");
  for (std::size_t j = 0; j < d; ++j) {
    double mn = X[0][j], mx = mn;
    for (const auto& row : X) {
      mn = std::min(mn, row[j]);
      mx = std::max(mx, row[j]);
    }
    if (mn == mx) throw Error(ErrorCode::ConstantFeature, "feature column " + std::to_string(j) + " is constant");
  }

  Objective obj{X, y, lambda};
  FitResult res;
  res.weights.assign(d, 0.0);
  res.bias = 0.0;
  double cur = obj.loss(res.weights, res.bias);
  res.loss_trace.push_back(cur);

  std::vector<double> gw(d), wtrial(d);
  double gb = 0.0;
  double step = 1.0;
  constexpr double armijo_c = 1e-4;
  for (std::size_t it = 0; it < max_iter; ++it) {
    obj.gradient(res.weights, res.bias, gw, gb);
    double gnorm = std::fabs(gb);
    for (double g : gw) gnorm = std::max(gnorm, std::fabs(g));
    res.grad_norm = gnorm;
    res.iterations = it;
    if (gnorm <= tol) return res;

    double gsq = gb * gb;
    for (double g : gw) gsq += g * g;
    // Backtrack until the Armijo sufficient-decrease condition holds.
    double next = cur;
    double btrial = res.bias;
    while (true) {
      for (std::size_t j = 0; j < d; ++j) wtrial[j] = res.weights[j] - step * gw[j];
      btrial = res.bias - step * gb;
      next = obj.loss(wtrial, btrial);
      if (next <= cur - armijo_c * step * gsq) break;
      step *= 0.5;
      if (step < 1e-18) throw Error(ErrorCode::DidNotConverge, "line search stalled at gradient norm " + std::to_string(gnorm));
    }
    res.weights = wtrial;
    res.bias = btrial;
    cur = next;
    res.loss_trace.push_back(cur);
    step *= 2.0;
  }
  obj.gradient(res.weights, res.bias, gw, gb);
  double gnorm = std::fabs(gb);
  for (double g : gw) gnorm = std::max(gnorm, std::fabs(g));
  res.grad_norm = gnorm;
  res.iterations = max_iter;
  if (gnorm > tol) {
    std::ostringstream msg;
    msg << "gradient norm " << gnorm << " above tolerance " << tol << " after " << max_iter << " iterations";
    throw Error(ErrorCode::DidNotConverge, msg.str());
  }
  return res;
}

double LinearModel::log_odds(const std::vector<double>& raw) const {
  if (raw.size() != weights.size()) throw Error(ErrorCode::InvalidConfig, "feature vector length mismatch");
  double z = bias;
  for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * (raw[j] - means[j]) / sds[j];
  return z;
}

std::optional<double> LinearModel::log_odds(const std::map<std::string, double>& feats) const {
  std::vector<double> raw(features.size());
  for (std::size_t j = 0; j < features.size(); ++j) {
    auto it = feats.find(features[j]);
    if (it == feats.end() || std::isnan(it->second)) return std::nullopt;
    raw[j] = it->second;
  }
  return log_odds(raw);
}

std::string LinearModel::to_json() const {
  nlohmann::ordered_json j;
  j["features"] = features;
  j["weights"] = weights;
  j["bias"] = bias;
  j["means"] = means;
  j["sds"] = sds;
  j["lambda"] = lambda;
  j["tol"] = tol;
  j["max_iter"] = max_iter;
  j["k"] = k;
  j["seed"] = seed;
  return j.dump(2);
}

LinearModel LinearModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("model JSON: ") + e.what());
  }
  LinearModel m;
  try {
    m.features = j.at("features").get<std::vector<std::string>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.means = j.at("means").get<std::vector<double>>();
    m.sds = j.at("sds").get<std::vector<double>>();
    m.lambda = j.at("lambda").get<double>();
    m.tol = j.at("tol").get<double>();
    m.max_iter = j.at("max_iter").get<std::size_t>();
    m.k = j.at("k").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("model JSON: ") + e.what());
  }
  if (m.weights.size() != m.features.size() || m.means.size() != m.features.size() ||
      m.sds.size() != m.features.size()) {
    throw Error(ErrorCode::SchemaError, "model JSON: feature/weight/means/sds lengths differ");
  }
  for (double s : m.sds)
    if (!(s > 0.0)) throw Error(ErrorCode::SchemaError, "model JSON: non-positive feature sd");
  return m;
}

namespace {

struct Standardizer {
  std::vector<double> means, sds;

  // Population statistics over the given row subset.
  static Standardizer fit(const std::vector<std::vector<double>>& X, const std::vector<std::size_t>& rows,
                          const std::vector<std::string>& names) {
    const std::size_t d = X.empty() ? 0 : X[0].size();
    Standardizer s;
    s.means.assign(d, 0.0);
    s.sds.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      double mn = X[rows[0]][j], mx = mn, sum = 0.0;
      for (std::size_t r : rows) {
        double v = X[r][j];
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        sum += v;
      }
      if (mn == mx) throw Error(ErrorCode::ConstantFeature, "feature '" + names[j] + "' is constant on the training rows");
      double mean = sum / static_cast<double>(rows.size());
      double ss = 0.0;
      for (std::size_t r : rows) {
        double dv = X[r][j] - mean;
        ss += dv * dv;
      }
      s.means[j] = mean;
      s.sds[j] = std::sqrt(ss / static_cast<double>(rows.size()));
    }
    return s;
  }

  std::vector<std::vector<double>> apply(const std::vector<std::vector<double>>& X,
                                         const std::vector<std::size_t>& rows) const {
    std::vector<std::vector<double>> out(rows.size(), std::vector<double>(means.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < means.size(); ++j) out[i][j] = (X[rows[i]][j] - means[j]) / sds[j];
    return out;
  }
};

}  // namespace

CrossvalResult crossval_combine(const CrossvalInput& input, int k, std::uint64_t seed, double lambda,
                                double tol, std::size_t max_iter) {
  const std::size_t n = input.X.size();
  if (n == 0 || input.y.size() != n || input.groups.size() != n)
    throw Error(ErrorCode::InvalidConfig, "rows, labels, and groups must be non-empty and equal-length");
  for (const auto& row : input.X)
    if (row.size() != input.feature_names.size()) throw Error(ErrorCode::InvalidConfig, "ragged feature rows");
  std::vector<std::size_t> bad_rows;
  for (std::size_t i = 0; i < n; ++i)
    for (double v : input.X[i])
      if (std::isnan(v)) {
        bad_rows.push_back(i);
        break;
      }
  if (!bad_rows.empty()) {
    std::ostringstream msg;
    msg << bad_rows.size() << " rows with missing feature values (rows";
    for (std::size_t i = 0; i < bad_rows.size() && i < 10; ++i) msg << ' ' << bad_rows[i];
    if (bad_rows.size() > 10) msg << " ...";
    msg << ")";
    throw Error(ErrorCode::MissingFeature, msg.str());
  }

  FoldAssignment folds = assign_folds(input.groups, k, seed);

  CrossvalResult res;
  res.oof_scores.assign(n, 0.0);
  for (int fold = 0; fold < k; ++fold) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (folds.at(input.groups[i]) == fold ? test : train).push_back(i);
    if (test.empty()) continue;
    if (train.empty()) throw Error(ErrorCode::TooFewGroups, "fold " + std::to_string(fold) + " has no training rows");
    std::vector<int> ytr(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) ytr[i] = input.y[train[i]];
    Standardizer std_tr = Standardizer::fit(input.X, train, input.feature_names);
    FitResult fit = fit_logreg(std_tr.apply(input.X, train), ytr, lambda, tol, max_iter);
    auto Xte = std_tr.apply(input.X, test);
    for (std::size_t i = 0; i < test.size(); ++i) {
      double z = fit.bias;
      for (std::size_t j = 0; j < fit.weights.size(); ++j) z += fit.weights[j] * Xte[i][j];
      res.oof_scores[test[i]] = z;
    }
  }

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  Standardizer std_all = Standardizer::fit(input.X, all, input.feature_names);
  FitResult fit = fit_logreg(std_all.apply(input.X, all), input.y, lambda, tol, max_iter);
  res.model.features = input.feature_names;
  res.model.weights = fit.weights;
  res.model.bias = fit.bias;
  res.model.means = std_all.means;
  res.model.sds = std_all.sds;
  res.model.lambda = lambda;
  res.model.tol = tol;
  res.model.max_iter = max_iter;
  res.model.k = k;
  res.model.seed = seed;
  return res;
}

}  // namespace mtpath
