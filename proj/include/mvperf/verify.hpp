#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mvperf/constraint_search.hpp"
#include "mvperf/dual_qp.hpp"
#include "mvperf/synthetic.hpp"
#include "mvperf/trainer.hpp"

// Brute-force oracle suites. Everything here re-derives expected values by
// enumeration or exhaustive search, independent of the fast paths it checks;
// the CLI exposes these via `mvperf verify`.
namespace mvperf::verify {

struct SuiteReport {
  std::string name;
  int passed = 0;
  int failed = 0;
  double max_error = 0.0;
  std::string note;

  bool ok() const { return failed == 0 && passed > 0; }
};

// ---- deterministic random instances -------------------------------------

// Dense random dataset with mixed labels (at least one of each class, so
// every measure's admissible set is populated).
inline MultiViewDataset random_dataset(SplitMix64& rng, std::int64_t n, int m,
                                       int max_dim) {
  MultiViewDataset ds;
  ds.n = n;
  ds.m = m;
  ds.labels.resize(n);
  ds.labels[0] = 1;
  if (n > 1) ds.labels[1] = -1;
  for (std::int64_t i = 2; i < n; ++i) ds.labels[i] = rng.next() & 1 ? 1 : -1;
  ds.views.resize(m);
  for (int j = 0; j < m; ++j) {
    const int d = 1 + static_cast<int>(rng.next_below(max_dim));
    ds.dims.push_back(d);
    for (std::int64_t i = 0; i < n; ++i) {
      SparseRow row;
      for (int t = 0; t < d; ++t) {
        row.idx.push_back(t);
        row.val.push_back(2.0 * rng.next_unit() - 1.0);
      }
      ds.views[j].push_back(std::move(row));
    }
  }
  return ds;
}

inline ViewWeights random_weights(SplitMix64& rng, const MultiViewDataset& ds,
                                  double scale) {
  ViewWeights w;
  for (int j = 0; j < ds.m; ++j) {
    Eigen::VectorXd v(ds.dims[j]);
    for (int t = 0; t < ds.dims[j]; ++t) v[t] = scale * (2.0 * rng.next_unit() - 1.0);
    w.push_back(std::move(v));
  }
  return w;
}

// Cycles through all five measure families with a data-dependent k.
inline Measure cycling_measure(int index, SplitMix64& rng, std::int64_t n) {
  const std::int64_t k = 1 + static_cast<std::int64_t>(rng.next_below(n));
  switch (index % 5) {
    case 0: return Measure::error_rate();
    case 1: return Measure::f1();
    case 2: return Measure::prbep();
    case 3: return Measure::precision_at(k);
    default: return Measure::recall_at(k);
  }
}

inline WorkingConstraint make_constraint(const MultiViewDataset& ds,
                                         const std::vector<Eigen::VectorXd>& truth_map,
                                         const LabelTuple& tuple, const Measure& measure) {
  WorkingConstraint c;
  c.tuple = tuple;
  c.loss = loss(measure, contingency(tuple, ds.labels));
  for (int j = 0; j < ds.m; ++j)
    c.feature_diff.push_back(truth_map[j] - joint_feature_map(ds, j, tuple));
  return c;
}

// Random working set of distinct tuples != truth, with losses under an
// unrestricted measure, mirroring what training accumulates.
inline WorkingSet random_working_set(SplitMix64& rng, const MultiViewDataset& ds,
                                     const Measure& measure, int count) {
  std::vector<Eigen::VectorXd> truth_map;
  for (int j = 0; j < ds.m; ++j)
    truth_map.push_back(joint_feature_map(ds, j, ds.labels));
  WorkingSet ws;
  int guard = 0;
  while (static_cast<int>(ws.size()) < count && guard++ < 64 * count) {
    LabelTuple tuple(ds.n);
    for (std::int64_t i = 0; i < ds.n; ++i) tuple[i] = rng.next() & 1 ? 1 : -1;
    if (tuple == ds.labels || ws.contains(tuple)) continue;
    ws.add(make_constraint(ds, truth_map, tuple, measure));
  }
  return ws;
}

// ---- suite: constraint-search (sweep vs 2^n enumeration) ----------------

inline SuiteReport run_constraint_search_suite(int instances = 200,
                                               std::uint64_t seed = 0x5eed0001) {
  SuiteReport report{.name = "constraint-search"};
  SplitMix64 rng(seed);
  for (int it = 0; it < instances; ++it) {
    const std::int64_t n = 2 + static_cast<std::int64_t>(rng.next_below(11));  // 2..12
    const int m = 1 + static_cast<int>(rng.next_below(3));
    MultiViewDataset ds = random_dataset(rng, n, m, 4);
    const ViewWeights w = random_weights(rng, ds, 0.8);
    const Measure measure = cycling_measure(it, rng, n);
    const Eigen::VectorXd scores = point_scores(ds, w);

    const SearchResult fast = most_violated_from_scores(scores, measure, ds.labels);
    const SearchResult slow =
        most_violated_bruteforce_from_scores(scores, measure, ds.labels);

    bool ok = std::abs(fast.objective - slow.objective) <= 1e-12;
    report.max_error =
        std::max(report.max_error, std::abs(fast.objective - slow.objective));

    // The reported objective must match a from-scratch evaluation of the
    // returned tuple, and the tuple must differ from the truth.
    const double direct = loss(measure, contingency(fast.tuple, ds.labels)) +
                          tuple_objective(scores, fast.tuple) -
                          tuple_objective(scores, ds.labels);
    ok = ok && std::abs(direct - fast.objective) <= 1e-12;
    ok = ok && fast.tuple != ds.labels;

    // Exchange-argument optimality: within a truth class, no positive may
    // score strictly below a negative.
    for (int cls : {1, -1}) {
      double min_pos = std::numeric_limits<double>::infinity();
      double max_neg = -std::numeric_limits<double>::infinity();
      for (std::int64_t i = 0; i < n; ++i) {
        if (ds.labels[i] != cls) continue;
        if (fast.tuple[i] == 1)
          min_pos = std::min(min_pos, scores[i]);
        else
          max_neg = std::max(max_neg, scores[i]);
      }
      ok = ok && !(min_pos < max_neg);
    }

    ok ? ++report.passed : ++report.failed;
  }
  return report;
}

// ---- suite: prediction decoupling ----------------------------------------

inline SuiteReport run_prediction_suite(int instances = 100,
                                        std::uint64_t seed = 0x5eed0002) {
  SuiteReport report{.name = "prediction"};
  SplitMix64 rng(seed);
  for (int it = 0; it < instances; ++it) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng.next_below(10));  // 1..10
    const int m = 1 + static_cast<int>(rng.next_below(3));
    MultiViewDataset ds = random_dataset(rng, n, m, 4);
    const ViewWeights w = random_weights(rng, ds, 1.0);
    const Eigen::VectorXd scores = point_scores(ds, w);

    double best = -std::numeric_limits<double>::infinity();
    LabelTuple candidate(n);
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
      for (std::int64_t i = 0; i < n; ++i) candidate[i] = (mask >> i) & 1 ? 1 : -1;
      best = std::max(best, tuple_objective(scores, candidate));
    }
    const double via_sign = tuple_objective(scores, predict_from_scores(scores));
    const double err = std::abs(best - via_sign);
    report.max_error = std::max(report.max_error, err);
    err <= 1e-12 ? ++report.passed : ++report.failed;
  }
  return report;
}

// ---- suite: QP against a dense simplex grid ------------------------------

namespace detail {

template <typename Fn>
void for_each_composition(int units, int bins, std::vector<int>& current, Fn&& fn) {
  if (bins == 1) {
    current.push_back(units);
    fn(current);
    current.pop_back();
    return;
  }
  for (int take = 0; take <= units; ++take) {
    current.push_back(take);
    for_each_composition(units - take, bins - 1, current, fn);
    current.pop_back();
  }
}

}  // namespace detail

// Random view subproblem assembled from a random dataset, weights and
// working set, exactly as training would.
struct RandomSubproblem {
  MultiViewDataset ds;
  ViewWeights weights;
  WorkingSet ws;
  ViewSubproblem sub;
  double c1 = 1.0;
  double c2 = 0.0;
  int view = 0;
};

inline RandomSubproblem random_subproblem(SplitMix64& rng, int max_constraints = 10) {
  RandomSubproblem out;
  const std::int64_t n = 5 + static_cast<std::int64_t>(rng.next_below(6));  // 5..10
  const int m = 1 + static_cast<int>(rng.next_below(3));
  out.ds = random_dataset(rng, n, m, 4);
  out.weights = random_weights(rng, out.ds, 0.3);
  const Measure measure = rng.next() & 1 ? Measure::error_rate() : Measure::f1();
  const int count = 1 + static_cast<int>(rng.next_below(max_constraints));
  out.ws = random_working_set(rng, out.ds, measure, count);
  out.view = static_cast<int>(rng.next_below(m));
  const double c1_choices[] = {0.5, 1.0, 2.0};
  const double c2_choices[] = {0.0, 0.1, 1.0};
  out.c1 = c1_choices[rng.next_below(3)];
  out.c2 = c2_choices[rng.next_below(3)];
  out.sub = build_subproblem(out.ds, out.view, out.weights, out.ws, out.c2,
                             build_curvature(out.ds, out.view, out.c2));
  return out;
}

// Checks the solver against every point of a dense simplex grid. The grid
// maximum can undershoot the true optimum by at most
// G·L1 + ½·‖H‖_F·L1² with L1 = 2K·C1/g (nearest-grid-point bound), so the
// solver must land within that envelope above the grid and never below it.
inline SuiteReport run_qp_grid_suite(int instances = 50,
                                     std::uint64_t seed = 0x5eed0003) {
  SuiteReport report{.name = "qp-grid"};
  SplitMix64 rng(seed);
  const int grid_units = 24;
  for (int it = 0; it < instances; ++it) {
    RandomSubproblem inst = random_subproblem(rng, 5);
    const QpResult solved = solve_simplex_qp(inst.sub, inst.c1);

    const std::int64_t K = inst.sub.constraint_count();
    double grid_best = -std::numeric_limits<double>::infinity();
    std::vector<int> scratch;
    detail::for_each_composition(
        grid_units, static_cast<int>(K), scratch, [&](const std::vector<int>& parts) {
          Eigen::VectorXd a(K);
          for (std::int64_t k = 0; k < K; ++k)
            a[k] = inst.c1 * parts[k] / static_cast<double>(grid_units);
          grid_best = std::max(grid_best, inst.sub.dual_value(a));
        });

    const Eigen::VectorXd g =
        inst.sub.linear - inst.sub.gram * solved.alpha;
    const double slope = g.cwiseAbs().maxCoeff();
    const double l1 = 2.0 * static_cast<double>(K) * inst.c1 / grid_units;
    const double envelope =
        slope * l1 + 0.5 * inst.sub.gram.norm() * l1 * l1 + 1e-9;

    const double diff = solved.objective - grid_best;
    report.max_error = std::max(report.max_error, std::max(-diff, 0.0));
    const bool ok = diff >= -1e-9 && diff <= envelope;
    ok ? ++report.passed : ++report.failed;
  }
  return report;
}

// ---- suite: cutting-plane vs full constraint enumeration -----------------

// Every admissible tuple != truth; desk scale only.
inline std::vector<LabelTuple> enumerate_admissible_tuples(const Measure& measure,
                                                           const LabelTuple& truth) {
  const std::int64_t n = static_cast<std::int64_t>(truth.size());
  if (n > 16) throw DimensionError("enumerate_admissible_tuples: n too large");
  std::vector<LabelTuple> out;
  LabelTuple candidate(n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
    for (std::int64_t i = 0; i < n; ++i) candidate[i] = (mask >> i) & 1 ? 1 : -1;
    if (candidate == truth) continue;
    if (!admissible(measure, contingency(candidate, truth))) continue;
    out.push_back(candidate);
  }
  return out;
}

struct FullTrainResult {
  ViewWeights weights;
  double primal = 0.0;
  int passes = 0;
};

// Solves the restricted problem with the complete admissible constraint set
// preloaded, running per-view block solves until the primal stabilizes.
inline FullTrainResult train_full_working_set(const MultiViewDataset& ds,
                                              const TrainConfig& cfg,
                                              int max_passes = 500) {
  cfg.validate();
  std::vector<std::shared_ptr<const CurvatureFactor>> curvatures;
  std::vector<Eigen::VectorXd> truth_map;
  for (int j = 0; j < ds.m; ++j) {
    curvatures.push_back(build_curvature(ds, j, cfg.c2));
    truth_map.push_back(joint_feature_map(ds, j, ds.labels));
  }
  WorkingSet ws;
  for (const LabelTuple& tuple : enumerate_admissible_tuples(cfg.measure, ds.labels))
    ws.add(make_constraint(ds, truth_map, tuple, cfg.measure));
  if (ws.empty()) throw FormatError("train_full_working_set: empty admissible set");

  FullTrainResult out;
  out.weights = zero_weights(ds);
  double prev = std::numeric_limits<double>::infinity();
  for (int pass = 1; pass <= max_passes; ++pass) {
    for (int j = 0; j < ds.m; ++j) {
      const ViewSubproblem sub =
          build_subproblem(ds, j, out.weights, ws, cfg.c2, curvatures[j]);
      const Eigen::VectorXd warm = ws.alphas();
      const QpResult qp =
          solve_simplex_qp(sub, cfg.c1, cfg.qp_tol, cfg.qp_max_iter, &warm);
      out.weights[j] = recover_weights(sub, qp.alpha);
      for (std::size_t k = 0; k < ws.size(); ++k) ws.items[k].alpha = qp.alpha[k];
    }
    out.primal = primal_objective(ds, out.weights, compute_slack(ws, out.weights),
                                  cfg.c1, cfg.c2);
    out.passes = pass;
    if (std::abs(prev - out.primal) <= 1e-12 * std::max(1.0, std::abs(out.primal)))
      break;
    prev = out.primal;
  }
  return out;
}

inline SuiteReport run_full_training_suite(int instances = 4,
                                           std::uint64_t seed = 0x5eed0004) {
  SuiteReport report{.name = "full-training"};
  SplitMix64 rng(seed);
  const Measure measures[] = {Measure::error_rate(), Measure::f1(), Measure::prbep()};
  for (int it = 0; it < instances; ++it) {
    const std::int64_t n = 6 + static_cast<std::int64_t>(rng.next_below(3));  // 6..8
    MultiViewDataset ds = random_dataset(rng, n, 2, 3);
    TrainConfig cfg;
    cfg.measure = measures[it % 3];
    cfg.c1 = 1.0;
    cfg.c2 = 0.1;
    cfg.epsilon = 1e-4;
    cfg.max_iter = 200;

    const auto [model, state] = train(ds, cfg);
    const double primal_cp = primal_objective(
        ds, state.weights, compute_slack(state.working_set, state.weights), cfg.c1,
        cfg.c2);
    const FullTrainResult full = train_full_working_set(ds, cfg);

    const double rel = std::abs(primal_cp - full.primal) /
                       std::max(std::abs(full.primal), 1e-9);
    report.max_error = std::max(report.max_error, rel);
    rel <= 1e-3 ? ++report.passed : ++report.failed;
  }
  return report;
}

inline std::vector<SuiteReport> run_all_suites() {
  return {run_constraint_search_suite(), run_prediction_suite(), run_qp_grid_suite(),
          run_full_training_suite()};
}

}  // namespace mvperf::verify
