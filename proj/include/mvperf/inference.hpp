#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <vector>

#include "mvperf/dataset.hpp"
#include "mvperf/errors.hpp"
#include "mvperf/label_tuple.hpp"
#include "mvperf/measures.hpp"

namespace mvperf {

// One weight vector per view; weights[j] has dimension dims[j].
using ViewWeights = std::vector<Eigen::VectorXd>;

inline ViewWeights zero_weights(const MultiViewDataset& ds) {
  ViewWeights w;
  for (int j = 0; j < ds.m; ++j) w.push_back(Eigen::VectorXd::Zero(ds.dims[j]));
  return w;
}

inline void check_weights(const MultiViewDataset& ds, const ViewWeights& w) {
  if (static_cast<int>(w.size()) != ds.m)
    throw DimensionError("weights: expected " + std::to_string(ds.m) + " views, got " +
                         std::to_string(w.size()));
  for (int j = 0; j < ds.m; ++j)
    if (w[j].size() != ds.dims[j])
      throw DimensionError("weights: view " + std::to_string(j + 1) + " has dim " +
                           std::to_string(w[j].size()) + ", dataset expects " +
                           std::to_string(ds.dims[j]));
}

// Joint feature map Ψ(x̄^j, ȳ) = Σ_i y_i x_i^j, the vector summarizing how
// a label tuple matches a view's features.
inline Eigen::VectorXd joint_feature_map(const MultiViewDataset& ds, int view,
                                         const LabelTuple& y) {
  if (static_cast<std::int64_t>(y.size()) != ds.n)
    throw DimensionError("joint_feature_map: label tuple length " +
                         std::to_string(y.size()) + " != n = " + std::to_string(ds.n));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ds.dims[view]);
  for (std::int64_t i = 0; i < ds.n; ++i)
    ds.views[view][i].add_scaled_to(out, static_cast<double>(y[i]));
  return out;
}

// Per-view discriminant response w_jᵀ Ψ(x̄^j, ȳ).
inline double view_score(const MultiViewDataset& ds, int view,
                         const Eigen::VectorXd& w, const LabelTuple& y) {
  if (w.size() != ds.dims[view])
    throw DimensionError("view_score: weight dim mismatch");
  return w.dot(joint_feature_map(ds, view, y));
}

// Aggregate per-point score s_i = Σ_j w_jᵀ x_i^j. Every label-tuple
// objective decomposes through these: Σ_j w_jᵀ Ψ(x̄^j, ȳ) = Σ_i y_i s_i.
inline Eigen::VectorXd point_scores(const MultiViewDataset& ds, const ViewWeights& w) {
  check_weights(ds, w);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(ds.n);
  for (int j = 0; j < ds.m; ++j)
    for (std::int64_t i = 0; i < ds.n; ++i) s[i] += ds.views[j][i].dot(w[j]);
  return s;
}

inline double tuple_objective(const Eigen::VectorXd& scores, const LabelTuple& y) {
  double v = 0.0;
  for (std::int64_t i = 0; i < scores.size(); ++i) v += y[i] * scores[i];
  return v;
}

// The multivariate prediction h̄: argmax over all label tuples of
// Σ_i y_i s_i, which decouples to y_i = sign(s_i). Ties (s_i == 0)
// resolve to +1.
inline LabelTuple predict_from_scores(const Eigen::VectorXd& scores) {
  LabelTuple y(scores.size());
  for (std::int64_t i = 0; i < scores.size(); ++i) y[i] = scores[i] >= 0.0 ? 1 : -1;
  return y;
}

inline LabelTuple predict(const MultiViewDataset& ds, const ViewWeights& w) {
  return predict_from_scores(point_scores(ds, w));
}

// Highest-scoring tuple with exactly `count` positives: the score-objective
// argmax restricted to a fixed predicted-positive count. Ties in s_i break
// toward the smaller index.
inline LabelTuple predict_top(const Eigen::VectorXd& scores, std::int64_t count) {
  const std::int64_t n = scores.size();
  if (count < 0 || count > n)
    throw DimensionError("predict_top: count out of range");
  std::vector<std::int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int64_t a, std::int64_t b) { return scores[a] > scores[b]; });
  LabelTuple y(n, -1);
  for (std::int64_t r = 0; r < count; ++r) y[order[r]] = 1;
  return y;
}

// Measure-consistent prediction used by evaluation: the score argmax over
// the measure's admissible tuples. For ErrorRate/F1 that is the plain sign
// rule; prec@k/rec@k predict the top k by score; PRBEP predicts as many
// positives as the truth has, which forces fp == fn.
inline LabelTuple predict_for_measure(const MultiViewDataset& ds, const ViewWeights& w,
                                      const Measure& measure) {
  const Eigen::VectorXd s = point_scores(ds, w);
  switch (measure.kind) {
    case MeasureKind::ErrorRate:
    case MeasureKind::F1:
      return predict_from_scores(s);
    case MeasureKind::PrecisionAtK:
    case MeasureKind::RecallAtK:
      if (measure.k > ds.n)
        throw DimensionError("predict_for_measure: k exceeds dataset size");
      return predict_top(s, measure.k);
    case MeasureKind::Prbep:
      return predict_top(s, static_cast<std::int64_t>(positive_count(ds.labels)));
  }
  throw Error("unreachable");
}

}  // namespace mvperf
