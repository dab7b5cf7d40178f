#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "mvperf/inference.hpp"
#include "mvperf/measures.hpp"

namespace mvperf {

// Outcome of the separation oracle: the label tuple maximizing
// Δ(ȳ', ȳ) + Σ_i y'_i s_i − Σ_i y_i s_i over admissible tuples != truth.
// The objective equals the amount by which the tuple's margin constraint
// is violated, so the trainer compares it directly against ξ + ε.
struct SearchResult {
  LabelTuple tuple;
  double objective = 0.0;
  double loss = 0.0;
};

namespace detail {

inline void check_search_inputs(const Measure& measure, const LabelTuple& truth,
                                std::int64_t n) {
  if (static_cast<std::int64_t>(truth.size()) != n)
    throw DimensionError("constraint search: truth length != n");
  if (measure.uses_k() && (measure.k < 1 || measure.k > n))
    throw FormatError("constraint search: empty admissible set (k = " +
                      std::to_string(measure.k) + ", n = " + std::to_string(n) + ")");
  if (measure.kind == MeasureKind::RecallAtK && positive_count(truth) == 0)
    throw FormatError("constraint search: rec@k undefined, truth has no positives");
}

// Deterministic preference among equal objectives: fewer flipped points
// first (smaller fn + fp), then smaller fn.
inline bool tie_prefers(std::int64_t fn_a, std::int64_t fp_a, std::int64_t fn_b,
                        std::int64_t fp_b) {
  if (fn_a + fp_a != fn_b + fp_b) return fn_a + fp_a < fn_b + fp_b;
  return fn_a < fn_b;
}

}  // namespace detail

// Exact separation oracle via the contingency-table sweep. Δ depends on a
// candidate only through (tp, fp), and for a fixed (tp, fp) the margin term
// is maximized by keeping the top-scoring members of each truth class
// positive. Sort each class by s_i once, then scan the (fn, fp) grid.
// O(n log n + P·N).
inline SearchResult most_violated_from_scores(const Eigen::VectorXd& scores,
                                              const Measure& measure,
                                              const LabelTuple& truth) {
  const std::int64_t n = scores.size();
  detail::check_search_inputs(measure, truth, n);

  std::vector<std::int64_t> pos, neg;
  for (std::int64_t i = 0; i < n; ++i) (truth[i] == 1 ? pos : neg).push_back(i);
  auto by_score_desc = [&](std::int64_t a, std::int64_t b) {
    return scores[a] > scores[b];
  };
  std::stable_sort(pos.begin(), pos.end(), by_score_desc);
  std::stable_sort(neg.begin(), neg.end(), by_score_desc);
  const std::int64_t p_count = static_cast<std::int64_t>(pos.size());
  const std::int64_t n_count = static_cast<std::int64_t>(neg.size());

  // best_pos[tp] = max over labelings with tp kept positive of Σ_{i in P} y'_i s_i
  std::vector<double> best_pos(p_count + 1), best_neg(n_count + 1);
  {
    double sum = 0.0;
    for (std::int64_t i : pos) sum += scores[i];
    double prefix = 0.0;
    best_pos[0] = -sum;
    for (std::int64_t t = 1; t <= p_count; ++t) {
      prefix += scores[pos[t - 1]];
      best_pos[t] = 2.0 * prefix - sum;
    }
  }
  {
    double sum = 0.0;
    for (std::int64_t i : neg) sum += scores[i];
    double prefix = 0.0;
    best_neg[0] = -sum;
    for (std::int64_t t = 1; t <= n_count; ++t) {
      prefix += scores[neg[t - 1]];
      best_neg[t] = 2.0 * prefix - sum;
    }
  }
  const double truth_margin = best_pos[p_count] + best_neg[0];

  bool found = false;
  double best_obj = 0.0, best_loss = 0.0;
  std::int64_t best_tp = 0, best_fp = 0;
  for (std::int64_t tp = 0; tp <= p_count; ++tp) {
    for (std::int64_t fp = 0; fp <= n_count; ++fp) {
      if (tp == p_count && fp == 0) continue;  // that pair holds only the truth
      const ContingencyTable table{tp, fp, p_count - tp, n_count - fp};
      if (!admissible(measure, table)) continue;
      const double delta = loss(measure, table);
      const double obj = delta + best_pos[tp] + best_neg[fp] - truth_margin;
      const bool better =
          !found || obj > best_obj ||
          (obj == best_obj &&
           detail::tie_prefers(table.fn, fp, p_count - best_tp, best_fp));
      if (better) {
        found = true;
        best_obj = obj;
        best_loss = delta;
        best_tp = tp;
        best_fp = fp;
      }
    }
  }
  if (!found)
    throw FormatError("constraint search: no admissible tuple besides the truth");

  LabelTuple tuple(n, -1);
  for (std::int64_t t = 0; t < best_tp; ++t) tuple[pos[t]] = 1;
  for (std::int64_t t = 0; t < best_fp; ++t) tuple[neg[t]] = 1;
  return SearchResult{std::move(tuple), best_obj, best_loss};
}

inline SearchResult most_violated(const MultiViewDataset& ds, const ViewWeights& w,
                                  const Measure& measure, const LabelTuple& truth) {
  return most_violated_from_scores(point_scores(ds, w), measure, truth);
}

// Exhaustive 2^n oracle for verification. Same objective and tie-break as
// the sweep; only usable at desk scale.
inline SearchResult most_violated_bruteforce_from_scores(const Eigen::VectorXd& scores,
                                                         const Measure& measure,
                                                         const LabelTuple& truth) {
  const std::int64_t n = scores.size();
  detail::check_search_inputs(measure, truth, n);
  if (n > 20)
    throw DimensionError("brute-force search limited to n <= 20, got n = " +
                         std::to_string(n));

  const double truth_margin = tuple_objective(scores, truth);
  bool found = false;
  double best_obj = 0.0, best_loss = 0.0;
  std::int64_t best_fn = 0, best_fp = 0;
  LabelTuple best_tuple;
  LabelTuple candidate(n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
    for (std::int64_t i = 0; i < n; ++i)
      candidate[i] = (mask >> i) & 1 ? 1 : -1;
    if (candidate == truth) continue;
    const ContingencyTable table = contingency(candidate, truth);
    if (!admissible(measure, table)) continue;
    const double delta = loss(measure, table);
    const double obj = delta + tuple_objective(scores, candidate) - truth_margin;
    const bool better = !found || obj > best_obj ||
                        (obj == best_obj &&
                         detail::tie_prefers(table.fn, table.fp, best_fn, best_fp));
    if (better) {
      found = true;
      best_obj = obj;
      best_loss = delta;
      best_fn = table.fn;
      best_fp = table.fp;
      best_tuple = candidate;
    }
  }
  if (!found)
    throw FormatError("brute-force search: no admissible tuple besides the truth");
  return SearchResult{std::move(best_tuple), best_obj, best_loss};
}

inline SearchResult most_violated_bruteforce(const MultiViewDataset& ds,
                                             const ViewWeights& w,
                                             const Measure& measure,
                                             const LabelTuple& truth) {
  return most_violated_bruteforce_from_scores(point_scores(ds, w), measure, truth);
}

}  // namespace mvperf
