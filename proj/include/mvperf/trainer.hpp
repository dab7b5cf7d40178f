#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mvperf/constraint_search.hpp"
#include "mvperf/dataset.hpp"
#include "mvperf/dual_qp.hpp"
#include "mvperf/inference.hpp"
#include "mvperf/measures.hpp"
#include "mvperf/numeric_text.hpp"

namespace mvperf {

struct TrainConfig {
  double c1 = 1.0;   // slack tradeoff
  double c2 = 0.1;   // view-consistency tradeoff
  int max_iter = 100;  // outer iteration cap T
  double epsilon = 1e-4;  // stop once no constraint is violated by more than ξ + ε
  Measure measure;
  double qp_tol = 1e-8;
  int qp_max_iter = 10000;
  std::uint64_t seed = 0;  // reserved for randomized tie-breaking; unused

  void validate() const {
    if (!(c1 > 0.0)) throw FormatError("config: C1 must be > 0");
    if (!(c2 >= 0.0)) throw FormatError("config: C2 must be >= 0");
    if (max_iter < 1) throw FormatError("config: max_iter must be >= 1");
    if (!(epsilon >= 0.0)) throw FormatError("config: epsilon must be >= 0");
    if (!(qp_tol > 0.0)) throw FormatError("config: qp_tol must be > 0");
  }
};

struct IterationRecord {
  int t = 0;
  double xi = 0.0;
  double violation = 0.0;  // objective of the constraint added this iteration
  double primal = 0.0;
};

enum class StopReason { EpsilonConverged, DuplicateConstraint, MaxIterations };

inline bool is_converged(StopReason r) { return r != StopReason::MaxIterations; }

inline std::string stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::EpsilonConverged: return "converged";
    case StopReason::DuplicateConstraint: return "converged-duplicate";
    case StopReason::MaxIterations: return "max-iterations";
  }
  return "?";
}

struct TrainState {
  ViewWeights weights;
  WorkingSet working_set;
  double xi = 0.0;
  std::vector<IterationRecord> history;
  StopReason stop = StopReason::MaxIterations;
  double final_violation = 0.0;  // most-violated objective at the final weights
  int iterations = 0;            // completed outer iterations
};

struct Model {
  int format_version = 1;
  int m = 0;
  std::vector<int> dims;
  Measure measure;
  double c1 = 0.0, c2 = 0.0;
  int max_iter = 0;
  double epsilon = 0.0;
  ViewWeights weights;
};

// max_k [Δ_k − Σ_j w_jᵀ ψ_jk], the free minimizer of the slack over the
// working set. Negative once every cut is over-satisfied; −inf on an empty
// set.
inline double worst_violation(const WorkingSet& ws, const ViewWeights& weights) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const WorkingConstraint& c : ws.items) {
    double margin = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j)
      margin += weights[j].dot(c.feature_diff[j]);
    worst = std::max(worst, c.loss - margin);
  }
  return worst;
}

// ξ = max(0, max_k [Δ_k − Σ_j w_jᵀ ψ_jk]): the reported training slack.
inline double compute_slack(const WorkingSet& ws, const ViewWeights& weights) {
  return std::max(0.0, worst_violation(ws, weights));
}

// ½Σ_j‖w_j‖² + C1·ξ + (C2/2)·Σ_{j<j'} Σ_i (w_jᵀx_i^j − w_{j'}ᵀx_i^{j'})².
inline double primal_objective(const MultiViewDataset& ds, const ViewWeights& weights,
                               double xi, double c1, double c2) {
  check_weights(ds, weights);
  double value = c1 * xi;
  for (int j = 0; j < ds.m; ++j) value += 0.5 * weights[j].squaredNorm();
  if (ds.m > 1 && c2 != 0.0) {
    double consistency = 0.0;
    std::vector<double> response(ds.m);
    for (std::int64_t i = 0; i < ds.n; ++i) {
      for (int j = 0; j < ds.m; ++j) response[j] = ds.views[j][i].dot(weights[j]);
      for (int j = 0; j < ds.m; ++j)
        for (int j2 = j + 1; j2 < ds.m; ++j2) {
          const double gap = response[j] - response[j2];
          consistency += gap * gap;
        }
    }
    value += 0.5 * c2 * consistency;
  }
  return value;
}

// Cutting-plane training: alternate most-violated-constraint discovery with
// one pass of per-view dual solves, until no constraint is violated by more
// than ξ + ε or the iteration cap is reached.
inline std::pair<Model, TrainState> train(const MultiViewDataset& ds,
                                          const TrainConfig& cfg) {
  validate(ds);
  cfg.validate();
  if (cfg.measure.uses_k() && (cfg.measure.k < 1 || cfg.measure.k > ds.n))
    throw FormatError("train: measure k must be in [1, n]");

  // Ω_j depends only on the data and C2: factorize all views up front.
  std::vector<std::shared_ptr<const CurvatureFactor>> curvatures;
  std::vector<Eigen::VectorXd> truth_map;  // Ψ(x̄^j, ȳ) per view
  for (int j = 0; j < ds.m; ++j) {
    curvatures.push_back(build_curvature(ds, j, cfg.c2));
    truth_map.push_back(joint_feature_map(ds, j, ds.labels));
  }

  TrainState state;
  state.weights = zero_weights(ds);
  state.stop = StopReason::MaxIterations;

  for (int t = 1; t <= cfg.max_iter; ++t) {
    const Eigen::VectorXd scores = point_scores(ds, state.weights);
    const SearchResult found =
        most_violated_from_scores(scores, cfg.measure, ds.labels);
    state.final_violation = found.objective;
    state.xi = compute_slack(state.working_set, state.weights);

    if (found.objective <= state.xi + cfg.epsilon) {
      state.stop = StopReason::EpsilonConverged;
      break;
    }
    if (state.working_set.contains(found.tuple)) {
      state.stop = StopReason::DuplicateConstraint;
      break;
    }

    WorkingConstraint cut;
    cut.tuple = found.tuple;
    cut.loss = found.loss;
    cut.alpha = 0.0;
    for (int j = 0; j < ds.m; ++j)
      cut.feature_diff.push_back(truth_map[j] - joint_feature_map(ds, j, found.tuple));
    state.working_set.add(std::move(cut));

    for (int j = 0; j < ds.m; ++j) {
      const ViewSubproblem sub = build_subproblem(ds, j, state.weights,
                                                  state.working_set, cfg.c2,
                                                  curvatures[j]);
      const Eigen::VectorXd warm = state.working_set.alphas();
      const QpResult qp =
          solve_simplex_qp(sub, cfg.c1, cfg.qp_tol, cfg.qp_max_iter, &warm);
      state.weights[j] = recover_weights(sub, qp.alpha);
      for (std::size_t k = 0; k < state.working_set.size(); ++k)
        state.working_set.items[k].alpha = qp.alpha[k];
    }

    state.xi = compute_slack(state.working_set, state.weights);
    state.history.push_back(
        {t, state.xi, found.objective,
         primal_objective(ds, state.weights, state.xi, cfg.c1, cfg.c2)});
    state.iterations = t;
  }

  Model model;
  model.m = ds.m;
  model.dims = ds.dims;
  model.measure = cfg.measure;
  model.c1 = cfg.c1;
  model.c2 = cfg.c2;
  model.max_iter = cfg.max_iter;
  model.epsilon = cfg.epsilon;
  model.weights = state.weights;
  return {std::move(model), std::move(state)};
}

struct EvalReport {
  ContingencyTable table;
  double loss_value = 0.0;
  LabelTuple predictions;
};

inline void check_model_dims(const Model& model, const MultiViewDataset& ds) {
  if (model.m != ds.m || model.dims != ds.dims) {
    std::string got = "[", want = "[";
    for (int j = 0; j < ds.m; ++j) got += (j ? "," : "") + std::to_string(ds.dims[j]);
    for (std::size_t j = 0; j < model.dims.size(); ++j)
      want += (j ? "," : "") + std::to_string(model.dims[j]);
    throw DimensionError("model dims " + want + "] do not match dataset dims " +
                         got + "]");
  }
}

// Predicts with the measure's admissible-set argmax and scores the result.
inline EvalReport evaluate(const MultiViewDataset& ds, const Model& model,
                           const Measure& measure) {
  check_model_dims(model, ds);
  if (measure.uses_k() && (measure.k < 1 || measure.k > ds.n))
    throw FormatError("evaluate: measure k must be in [1, n]");
  EvalReport report;
  report.predictions = predict_for_measure(ds, model.weights, measure);
  report.table = contingency(report.predictions, ds.labels);
  report.loss_value = loss(measure, report.table);
  return report;
}

// ---- model persistence -------------------------------------------------
//
// Versioned line-based text format; doubles are written in shortest
// round-trip form, so save -> load -> save is byte-identical.

inline void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file " + path.string());
  out << "mvperf-model 1\n";
  out << "measure " << measure_name(model.measure) << "\n";
  out << "c1 " << format_double(model.c1) << "\n";
  out << "c2 " << format_double(model.c2) << "\n";
  out << "max_iter " << model.max_iter << "\n";
  out << "epsilon " << format_double(model.epsilon) << "\n";
  out << "views " << model.m << "\n";
  for (int j = 0; j < model.m; ++j) {
    out << "view " << (j + 1) << " dim " << model.dims[j] << "\n";
    for (int t = 0; t < model.dims[j]; ++t) {
      if (t) out << ' ';
      out << format_double(model.weights[j][t]);
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing model file " + path.string());
}

namespace detail {

inline std::string expect_line(std::istream& in, const std::string& what) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("model file: missing " + what);
  return strip_cr(line);
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

}  // namespace detail

inline Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());

  Model model;
  if (detail::expect_line(in, "header") != "mvperf-model 1")
    throw FormatError("model file: bad header (expected 'mvperf-model 1')");

  auto field = [&](const std::string& key) {
    const std::string line = detail::expect_line(in, key);
    if (line.rfind(key + " ", 0) != 0)
      throw FormatError("model file: expected '" + key + " ...', got '" + line + "'");
    return line.substr(key.size() + 1);
  };

  model.measure = parse_measure(field("measure"));
  model.c1 = parse_double(field("c1"), "model c1");
  model.c2 = parse_double(field("c2"), "model c2");
  model.max_iter = static_cast<int>(parse_int(field("max_iter"), "model max_iter"));
  model.epsilon = parse_double(field("epsilon"), "model epsilon");
  model.m = static_cast<int>(parse_int(field("views"), "model views"));
  if (model.m < 1) throw FormatError("model file: views must be >= 1");

  for (int j = 0; j < model.m; ++j) {
    const auto head = detail::split_ws(detail::expect_line(in, "view header"));
    if (head.size() != 4 || head[0] != "view" || head[2] != "dim" ||
        parse_int(head[1], "view index") != j + 1)
      throw FormatError("model file: bad view header for view " + std::to_string(j + 1));
    const int dim = static_cast<int>(parse_int(head[3], "view dim"));
    if (dim < 1) throw FormatError("model file: view dim must be >= 1");
    const auto values = detail::split_ws(detail::expect_line(in, "view weights"));
    if (static_cast<int>(values.size()) != dim)
      throw FormatError("model file: view " + std::to_string(j + 1) + " expects " +
                        std::to_string(dim) + " weights, got " +
                        std::to_string(values.size()));
    Eigen::VectorXd w(dim);
    for (int t = 0; t < dim; ++t) w[t] = parse_double(values[t], "weight");
    model.dims.push_back(dim);
    model.weights.push_back(std::move(w));
  }
  std::string trailing;
  if (std::getline(in, trailing) && !detail::strip_cr(trailing).empty())
    throw FormatError("model file: unexpected trailing content");
  return model;
}

}  // namespace mvperf
