/*
 * Copyright 2026 The Brainet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "brainet/attribution.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <regex>
#include <set>
#include <tuple>

#include "brainet/error.h"
#include "brainet/parallel.h"
#include "brainet/random.h"

namespace brainet::attribution {
namespace {

constexpr std::size_t kMaxBatchRows = 8192;

using Mask = std::vector<std::uint8_t>;

// v(S) for `count` coalitions; in_coalition(k, j) says whether feature j of
// coalition k comes from x. Predictions are batched across coalitions.
template <typename InCoalition>
std::vector<double> CoalitionValues(const BatchPredictor& predictor,
                                    const Eigen::VectorXd& x,
                                    const Eigen::MatrixXd& background,
                                    std::size_t count,
                                    InCoalition in_coalition) {
  const Eigen::Index b = background.rows();
  const Eigen::Index p = background.cols();
  const std::size_t per_batch =
      std::max<std::size_t>(1, kMaxBatchRows / static_cast<std::size_t>(b));
  std::vector<double> values(count);
  Eigen::MatrixXd batch;
  for (std::size_t start = 0; start < count; start += per_batch) {
    const std::size_t chunk = std::min(per_batch, count - start);
    batch.resize(static_cast<Eigen::Index>(chunk) * b, p);
    for (std::size_t c = 0; c < chunk; ++c) {
      auto block = batch.middleRows(static_cast<Eigen::Index>(c) * b, b);
      block = background;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (in_coalition(start + c, static_cast<std::size_t>(j))) {
          block.col(j).setConstant(x[j]);
        }
      }
    }
    const Eigen::VectorXd out = predictor(batch);
    for (std::size_t c = 0; c < chunk; ++c) {
      values[start + c] =
          out.segment(static_cast<Eigen::Index>(c) * b, b).sum() /
          static_cast<double>(b);
    }
  }
  return values;
}

void CheckInputs(const Eigen::VectorXd& x, const Eigen::MatrixXd& background) {
  if (background.rows() == 0) throw DataError("empty background set");
  if (background.cols() != x.size()) {
    throw DataError("background width does not match the explained row");
  }
  if (x.size() == 0) throw DataError("no features to explain");
}

double Predict(const BatchPredictor& predictor, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd row = x.transpose();
  return predictor(row)[0];
}

double BinomialCoefficient(std::size_t n, std::size_t k) {
  double result = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    result = result * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return result;
}

}  // namespace

BatchPredictor PredictorFor(const models::TrainedModel& model) {
  return [&model](const Eigen::MatrixXd& rows) { return model.PredictProba(rows); };
}

ShapleyValues ExactShapley(const BatchPredictor& predictor,
                           const Eigen::VectorXd& x,
                           const Eigen::MatrixXd& background) {
  CheckInputs(x, background);
  const auto p = static_cast<std::size_t>(x.size());
  if (p > kMaxExactFeatures) {
    throw ConfigError("exact Shapley enumeration supports at most " +
                      std::to_string(kMaxExactFeatures) + " features, got " +
                      std::to_string(p));
  }
  const std::size_t coalitions = std::size_t{1} << p;
  const std::vector<double> v = CoalitionValues(
      predictor, x, background, coalitions,
      [](std::size_t mask, std::size_t j) { return ((mask >> j) & 1U) != 0; });

  // weight(s) = s! (p - s - 1)! / p! = 1 / (p * C(p - 1, s)).
  std::vector<double> weight(p);
  for (std::size_t s = 0; s < p; ++s) {
    weight[s] = 1.0 / (static_cast<double>(p) * BinomialCoefficient(p - 1, s));
  }
  ShapleyValues result;
  result.phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (std::size_t mask = 0; mask < coalitions; ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    for (std::size_t j = 0; j < p; ++j) {
      if ((mask >> j) & 1U) continue;
      result.phi[static_cast<Eigen::Index>(j)] +=
          weight[size] * (v[mask | (std::size_t{1} << j)] - v[mask]);
    }
  }
  result.base = v[0];
  result.prediction = Predict(predictor, x);
  return result;
}

ShapleyValues SampledShapley(const BatchPredictor& predictor,
                             const Eigen::VectorXd& x,
                             const Eigen::MatrixXd& background,
                             std::size_t n_coalitions, std::uint64_t seed) {
  CheckInputs(x, background);
  const auto p = static_cast<std::size_t>(x.size());
  if (n_coalitions < 2 * p) {
    throw ConfigError("sampled Shapley needs at least 2p coalitions");
  }
  ShapleyValues result;
  result.prediction = Predict(predictor, x);
  result.base = CoalitionValues(predictor, x, background, 1,
                                [](std::size_t, std::size_t) { return false; })[0];
  const double delta = result.prediction - result.base;
  if (p == 1) {
    result.phi = Eigen::VectorXd::Constant(1, delta);
    return result;
  }

  // Coalitions with their regression weights.
  std::vector<Mask> masks;
  std::vector<double> weights;
  const bool enumerate = p < 63 && n_coalitions >= (std::size_t{1} << p) - 2;
  if (enumerate) {
    const std::size_t full = (std::size_t{1} << p) - 1;
    for (std::size_t bits = 1; bits < full; ++bits) {
      Mask mask(p);
      for (std::size_t j = 0; j < p; ++j) mask[j] = (bits >> j) & 1U;
      const auto s = static_cast<std::size_t>(std::popcount(bits));
      weights.push_back(static_cast<double>(p - 1) /
                        (BinomialCoefficient(p, s) * static_cast<double>(s) *
                         static_cast<double>(p - s)));
      masks.push_back(std::move(mask));
    }
  } else {
    // Coalition sizes follow the kernel mass per size, (p-1)/(s(p-s)); each
    // draw then weighs one, and duplicates accumulate.
    std::vector<double> cumulative(p - 1);
    double total = 0.0;
    for (std::size_t s = 1; s < p; ++s) {
      total += static_cast<double>(p - 1) /
               (static_cast<double>(s) * static_cast<double>(p - s));
      cumulative[s - 1] = total;
    }
    Rng rng(seed);
    std::map<Mask, double> counts;
    std::vector<std::size_t> features(p);
    for (std::size_t drawn = 0; drawn < n_coalitions;) {
      const double u = rng.Uniform() * total;
      const std::size_t size =
          static_cast<std::size_t>(
              std::upper_bound(cumulative.begin(), cumulative.end(), u) -
              cumulative.begin()) +
          1;
      std::iota(features.begin(), features.end(), 0);
      Mask mask(p, 0);
      for (std::size_t k = 0; k < std::min(size, p - 1); ++k) {
        const std::size_t pick = k + rng.UniformIndex(p - k);
        std::swap(features[k], features[pick]);
        mask[features[k]] = 1;
      }
      counts[mask] += 1.0;
      ++drawn;
      if (drawn < n_coalitions) {
        Mask complement(p);
        for (std::size_t j = 0; j < p; ++j) complement[j] = 1 - mask[j];
        counts[complement] += 1.0;
        ++drawn;
      }
    }
    for (auto& [mask, count] : counts) {
      masks.push_back(mask);
      weights.push_back(count);
    }
  }

  const std::vector<double> v = CoalitionValues(
      predictor, x, background, masks.size(),
      [&](std::size_t k, std::size_t j) { return masks[k][j] != 0; });

  // Eliminate the last feature through sum(phi) = delta:
  //   v - base - z_last * delta = sum_{j<last} (z_j - z_last) phi_j.
  const std::size_t last = p - 1;
  const auto m = static_cast<Eigen::Index>(masks.size());
  Eigen::MatrixXd design(m, static_cast<Eigen::Index>(last));
  Eigen::VectorXd target(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Mask& mask = masks[static_cast<std::size_t>(k)];
    const double root_weight = std::sqrt(weights[static_cast<std::size_t>(k)]);
    for (std::size_t j = 0; j < last; ++j) {
      design(k, static_cast<Eigen::Index>(j)) =
          root_weight * (static_cast<double>(mask[j]) - static_cast<double>(mask[last]));
    }
    target[k] = root_weight * (v[static_cast<std::size_t>(k)] - result.base -
                               static_cast<double>(mask[last]) * delta);
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < static_cast<Eigen::Index>(last)) {
    throw NumericError("degenerate coalition design: rank " +
                       std::to_string(qr.rank()) + " < " + std::to_string(last));
  }
  const Eigen::VectorXd reduced = qr.solve(target);
  result.phi.resize(static_cast<Eigen::Index>(p));
  result.phi.head(static_cast<Eigen::Index>(last)) = reduced;
  result.phi[static_cast<Eigen::Index>(last)] = delta - reduced.sum();
  return result;
}

AttributionMatrix Explain(const models::TrainedModel& model,
                          const Eigen::MatrixXd& rows,
                          const Eigen::MatrixXd& background,
                          const ExplainOptions& options, int bootstrap_index) {
  const BatchPredictor predictor = PredictorFor(model);
  AttributionMatrix out;
  out.feature_names = model.feature_names;
  out.model_kind = model.config.kind;
  out.bootstrap_index = bootstrap_index;
  out.values.resize(rows.rows(), rows.cols());
  out.predictions.resize(rows.rows());
  std::vector<double> bases(static_cast<std::size_t>(rows.rows()));
  ParallelFor(static_cast<std::size_t>(rows.rows()), options.jobs,
              [&](std::size_t r) {
                const Eigen::VectorXd x = rows.row(static_cast<Eigen::Index>(r)).transpose();
                const ShapleyValues values =
                    options.estimator == Estimator::kExact
                        ? ExactShapley(predictor, x, background)
                        : SampledShapley(predictor, x, background,
                                         options.n_coalitions, options.seed + r);
                out.values.row(static_cast<Eigen::Index>(r)) = values.phi.transpose();
                out.predictions[static_cast<Eigen::Index>(r)] = values.prediction;
                bases[r] = values.base;
              });
  out.base_value = bases.empty() ? 0.0 : bases.front();
  return out;
}

Eigen::MatrixXd SampleBackground(const Eigen::MatrixXd& train, std::size_t size,
                                 std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(train.rows());
  if (n == 0) throw DataError("cannot draw a background from no rows");
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  if (size < n) {
    Rng rng(seed);
    rng.Shuffle(std::span<std::size_t>(rows));
    rows.resize(size);
    std::sort(rows.begin(), rows.end());
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), train.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = train.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

ImportanceAggregate AggregateImportance(std::span<const AttributionMatrix> runs) {
  if (runs.empty()) throw DataError("empty run list");
  ImportanceAggregate aggregate;
  aggregate.feature_names = runs.front().feature_names;
  const std::size_t p = aggregate.feature_names.size();
  for (const auto& run : runs) {
    if (run.feature_names != aggregate.feature_names ||
        static_cast<std::size_t>(run.values.cols()) != p) {
      throw DataError("attribution runs disagree on feature order");
    }
  }

  std::vector<std::size_t> order(runs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = runs[a];
    const auto& rb = runs[b];
    const auto ka = std::make_tuple(static_cast<int>(ra.model_kind),
                                    ra.bootstrap_index, ra.values.rows());
    const auto kb = std::make_tuple(static_cast<int>(rb.model_kind),
                                    rb.bootstrap_index, rb.values.rows());
    if (ka != kb) return ka < kb;
    return std::lexicographical_compare(
        ra.values.data(), ra.values.data() + ra.values.size(),
        rb.values.data(), rb.values.data() + rb.values.size());
  });

  std::vector<double> sums(p, 0.0);
  std::set<int> bootstraps;
  std::set<int> kinds;
  for (const std::size_t index : order) {
    const auto& run = runs[index];
    for (Eigen::Index r = 0; r < run.values.rows(); ++r) {
      for (std::size_t j = 0; j < p; ++j) {
        sums[j] += std::fabs(run.values(r, static_cast<Eigen::Index>(j)));
      }
    }
    aggregate.total_rows += static_cast<std::size_t>(run.values.rows());
    bootstraps.insert(run.bootstrap_index);
    kinds.insert(static_cast<int>(run.model_kind));
  }
  if (aggregate.total_rows == 0) throw DataError("attribution runs hold no rows");
  aggregate.scores.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    aggregate.scores[j] = sums[j] / static_cast<double>(aggregate.total_rows);
  }
  aggregate.bootstraps = bootstraps.size();
  aggregate.models = kinds.size();
  return aggregate;
}

PoolSelection SelectPool(std::span<const ImportanceAggregate> per_model,
                         const SelectionConfig& config) {
  if (per_model.empty()) throw ConfigError("pool selection needs at least one model");
  if (config.top_n < 1) throw ConfigError("top_n must be positive");
  std::vector<std::regex> patterns;
  for (const auto& pattern : config.exclusion_patterns) {
    try {
      patterns.emplace_back(pattern, std::regex::ECMAScript);
    } catch (const std::regex_error&) {
      throw ConfigError("invalid exclusion pattern '" + pattern + "'");
    }
  }
  auto is_excluded = [&](const std::string& name) {
    return std::any_of(patterns.begin(), patterns.end(), [&](const std::regex& re) {
      return std::regex_search(name, re);
    });
  };

  PoolSelection selection;
  std::map<std::string, double> best_score;
  std::vector<std::string> union_order;
  for (const auto& model : per_model) {
    const std::size_t p = model.scores.size();
    std::vector<std::size_t> ranked(p);
    std::iota(ranked.begin(), ranked.end(), 0);
    std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
      return model.scores[a] > model.scores[b];
    });
    ranked.resize(std::min(config.top_n, p));
    std::vector<std::string> top;
    for (const std::size_t index : ranked) {
      const std::string& name = model.feature_names[index];
      top.push_back(name);
      const auto [it, inserted] = best_score.emplace(name, model.scores[index]);
      if (inserted) {
        union_order.push_back(name);
      } else {
        it->second = std::max(it->second, model.scores[index]);
      }
    }
    selection.per_model_top.push_back(std::move(top));
  }
  // Cross-model maximum over every model that scores the feature, not just
  // the ones where it made the top list.
  for (const auto& model : per_model) {
    for (std::size_t j = 0; j < model.scores.size(); ++j) {
      auto it = best_score.find(model.feature_names[j]);
      if (it != best_score.end()) it->second = std::max(it->second, model.scores[j]);
    }
  }

  for (const auto& name : union_order) {
    (is_excluded(name) ? selection.excluded : selection.pool).push_back(name);
  }
  if (selection.pool.empty()) throw DataError("empty pool: exclusions removed every feature");
  std::stable_sort(selection.pool.begin(), selection.pool.end(),
                   [&](const std::string& a, const std::string& b) {
                     return best_score.at(a) > best_score.at(b);
                   });
  for (const auto& name : selection.pool) selection.pool_scores.push_back(best_score.at(name));
  return selection;
}

}  // namespace brainet::attribution
