#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mvperf/dataset.hpp"
#include "mvperf/inference.hpp"
#include "mvperf/label_tuple.hpp"

namespace mvperf {

// Per-view curvature operator Ω = I + C2·(m−1)·Σ_i x_i x_iᵀ, the Hessian of
// the view's smooth objective. Depends only on the data and C2, so it is
// factorized once before the training loop; every Ω⁻¹v afterwards is a pair
// of triangular solves.
//
// The (m−1) multiplicity covers all pairs the active view participates in.
class CurvatureFactor {
 public:
  CurvatureFactor(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
    llt_.compute(matrix_);
    if (llt_.info() != Eigen::Success)
      throw SolverError("curvature factorization failed (non-finite inputs?)");
  }

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& v) const { return llt_.solve(v); }
  Eigen::MatrixXd solve(const Eigen::MatrixXd& v) const { return llt_.solve(v); }

  double quad(const Eigen::VectorXd& w) const { return w.dot(matrix_ * w); }

 private:
  Eigen::MatrixXd matrix_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

inline std::shared_ptr<const CurvatureFactor> build_curvature(
    const MultiViewDataset& ds, int view, double c2) {
  if (c2 < 0) throw FormatError("build_curvature: C2 must be >= 0");
  const int d = ds.dims[view];
  Eigen::MatrixXd omega = Eigen::MatrixXd::Identity(d, d);
  const double scale = c2 * static_cast<double>(ds.m - 1);
  if (scale > 0.0) {
    for (const SparseRow& row : ds.views[view])
      for (std::size_t a = 0; a < row.idx.size(); ++a)
        for (std::size_t b = 0; b < row.idx.size(); ++b)
          omega(row.idx[a], row.idx[b]) += scale * row.val[a] * row.val[b];
  }
  return std::make_shared<const CurvatureFactor>(std::move(omega));
}

// One cut in the working set: a label tuple with its cached per-view
// feature differences ψ_j = Ψ(x̄^j, ȳ) − Ψ(x̄^j, ȳ'), its loss Δ(ȳ', ȳ)
// and the dual multiplier from the most recent per-view solve.
struct WorkingConstraint {
  LabelTuple tuple;
  std::vector<Eigen::VectorXd> feature_diff;  // per view
  double loss = 0.0;
  double alpha = 0.0;
};

struct WorkingSet {
  std::vector<WorkingConstraint> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }

  bool contains(const LabelTuple& tuple) const {
    for (const auto& c : items)
      if (c.tuple == tuple) return true;
    return false;
  }

  // Duplicate tuples are rejected: a repeated cut means the search made no
  // progress and the trainer treats it as convergence.
  void add(WorkingConstraint c) {
    if (contains(c.tuple)) throw Error("working set: duplicate constraint tuple");
    items.push_back(std::move(c));
  }

  Eigen::VectorXd alphas() const {
    Eigen::VectorXd a(items.size());
    for (std::size_t k = 0; k < items.size(); ++k) a[k] = items[k].alpha;
    return a;
  }
};

// The view-j restricted problem over the working set, reduced to dual form:
//
//   maximize  −½ αᵀ·gram·α + αᵀ·linear + dual_constant
//   subject to α ≥ 0, Σα = C1
//
// with gram_kl = γ_kᵀ Ω⁻¹ γ_l and linear_k = δ_k − γ_kᵀ Ω⁻¹ β, where
// γ_k is the view's feature difference, β the cross-view coupling
// C2·Σ_{j'≠j} Σ_i x_i^j (x_i^{j'}ᵀ w_{j'}), and δ_k the loss adjusted by
// the other views' margins: Δ_k − Σ_{j'≠j} w_{j'}ᵀ ψ_{j'k}.
//
// dual_constant carries −½βᵀΩ⁻¹β plus the w_j-independent part of the
// smooth objective, so the dual value is directly comparable with the
// restricted primal.
struct ViewSubproblem {
  int view = 0;
  std::shared_ptr<const CurvatureFactor> curvature;
  Eigen::MatrixXd feature_diffs;      // Γ, d × K
  Eigen::MatrixXd curv_inv_diffs;     // Ω⁻¹Γ, d × K
  Eigen::VectorXd coupling;           // β
  Eigen::VectorXd curv_inv_coupling;  // Ω⁻¹β
  Eigen::VectorXd adjusted_loss;      // δ
  Eigen::MatrixXd gram;               // H
  Eigen::VectorXd linear;             // b
  double cross_constant = 0.0;  // (C2/2)·Σ_{j'≠j} Σ_i (w_{j'}ᵀ x_i^{j'})²
  double dual_constant = 0.0;

  std::int64_t constraint_count() const { return adjusted_loss.size(); }

  // The slack minimizer for this subproblem at w: max_k (δ_k − γ_kᵀw).
  // ξ is unconstrained in the formulation (the dual keeps Σα = C1 exactly),
  // so this may be negative when every working cut is over-satisfied.
  double worst_violation_at(const Eigen::VectorXd& w) const {
    double worst = -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd margins = feature_diffs.transpose() * w;
    for (std::int64_t k = 0; k < adjusted_loss.size(); ++k)
      worst = std::max(worst, adjusted_loss[k] - margins[k]);
    return worst;
  }

  // Restricted primal with ξ at its minimizer:
  // ½wᵀΩw − wᵀβ + cross_constant + C1·max_k(δ_k − γ_kᵀw).
  // Strong duality makes this equal dual_value at the optimal pair.
  double primal_value(const Eigen::VectorXd& w, double c1) const {
    return 0.5 * curvature->quad(w) - w.dot(coupling) + cross_constant +
           c1 * worst_violation_at(w);
  }

  double dual_value(const Eigen::VectorXd& alpha) const {
    return -0.5 * alpha.dot(gram * alpha) + linear.dot(alpha) + dual_constant;
  }
};

// Cross-view coupling β = C2·Σ_{j'≠j} Σ_i x_i^j (x_i^{j'}ᵀ w_{j'}) together
// with the w_j-independent remainder (C2/2)·Σ_{j'≠j} Σ_i (w_{j'}ᵀ x_i^{j'})²
// of the view's smooth objective. β is also the linear part of the smooth
// gradient: ∇_{w_j} smooth = Ω_j w_j − β_j.
struct CrossCoupling {
  Eigen::VectorXd beta;
  double constant = 0.0;
};

inline CrossCoupling cross_coupling(const MultiViewDataset& ds, int view,
                                    const ViewWeights& weights, double c2) {
  check_weights(ds, weights);
  CrossCoupling out;
  out.beta = Eigen::VectorXd::Zero(ds.dims[view]);
  if (ds.m > 1 && c2 > 0.0) {
    for (std::int64_t i = 0; i < ds.n; ++i) {
      double cross = 0.0;
      for (int other = 0; other < ds.m; ++other) {
        if (other == view) continue;
        const double r = ds.views[other][i].dot(weights[other]);
        cross += r;
        out.constant += 0.5 * c2 * r * r;
      }
      ds.views[view][i].add_scaled_to(out.beta, c2 * cross);
    }
  }
  return out;
}

inline ViewSubproblem build_subproblem(const MultiViewDataset& ds, int view,
                                       const ViewWeights& weights,
                                       const WorkingSet& ws, double c2,
                                       std::shared_ptr<const CurvatureFactor> curvature) {
  if (ws.empty()) throw Error("build_subproblem: empty working set");
  check_weights(ds, weights);
  if (!curvature || curvature->dim() != ds.dims[view])
    throw DimensionError("build_subproblem: curvature factor dim mismatch");

  const std::int64_t K = static_cast<std::int64_t>(ws.size());
  const int d = ds.dims[view];

  ViewSubproblem sub;
  sub.view = view;
  sub.curvature = std::move(curvature);

  CrossCoupling cc = cross_coupling(ds, view, weights, c2);
  sub.coupling = std::move(cc.beta);
  sub.cross_constant = cc.constant;

  sub.feature_diffs.resize(d, K);
  sub.adjusted_loss.resize(K);
  for (std::int64_t k = 0; k < K; ++k) {
    const WorkingConstraint& c = ws.items[k];
    if (static_cast<int>(c.feature_diff.size()) != ds.m ||
        c.feature_diff[view].size() != d)
      throw DimensionError("build_subproblem: cached feature diff dim mismatch");
    sub.feature_diffs.col(k) = c.feature_diff[view];
    double adj = c.loss;
    for (int other = 0; other < ds.m; ++other) {
      if (other == view) continue;
      adj -= weights[other].dot(c.feature_diff[other]);
    }
    sub.adjusted_loss[k] = adj;
  }

  sub.curv_inv_coupling = sub.curvature->solve(sub.coupling);
  sub.curv_inv_diffs = sub.curvature->solve(sub.feature_diffs);
  sub.gram = sub.feature_diffs.transpose() * sub.curv_inv_diffs;
  sub.gram = ((sub.gram + sub.gram.transpose()) * 0.5).eval();
  sub.linear = sub.adjusted_loss - sub.feature_diffs.transpose() * sub.curv_inv_coupling;
  sub.dual_constant =
      -0.5 * sub.coupling.dot(sub.curv_inv_coupling) + sub.cross_constant;
  return sub;
}

// Stationarity: w = Ω⁻¹(β + Σ_k α_k γ_k).
inline Eigen::VectorXd recover_weights(const ViewSubproblem& sub,
                                       const Eigen::VectorXd& alpha) {
  if (alpha.size() != sub.constraint_count())
    throw DimensionError("recover_weights: alpha size mismatch");
  return sub.curv_inv_coupling + sub.curv_inv_diffs * alpha;
}

// Euclidean projection onto {a ≥ 0, Σa = total}.
inline Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v, double total) {
  const std::int64_t K = v.size();
  std::vector<double> u(v.data(), v.data() + K);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double prefix = 0.0, tau = 0.0;
  std::int64_t rho = 0;
  for (std::int64_t t = 0; t < K; ++t) {
    prefix += u[t];
    const double cand = (prefix - total) / static_cast<double>(t + 1);
    if (u[t] - cand > 0.0) {
      rho = t + 1;
      tau = cand;
    }
  }
  (void)rho;
  Eigen::VectorXd out(K);
  for (std::int64_t k = 0; k < K; ++k) out[k] = std::max(v[k] - tau, 0.0);
  return out;
}

// KKT residual for max −½αᵀHα + bᵀα over the scaled simplex: with
// g = b − Hα, every coordinate carrying mass must sit at the top gradient
// level; coordinates at zero may sit below it.
inline double simplex_kkt_residual(const Eigen::MatrixXd& gram,
                                   const Eigen::VectorXd& linear,
                                   const Eigen::VectorXd& alpha) {
  const Eigen::VectorXd g = linear - gram * alpha;
  const double top = g.maxCoeff();
  double resid = 0.0;
  for (std::int64_t k = 0; k < alpha.size(); ++k)
    if (alpha[k] > 0.0) resid = std::max(resid, top - g[k]);
  return resid;
}

struct QpResult {
  Eigen::VectorXd alpha;
  double objective = 0.0;  // −½αᵀHα + bᵀα (constant not included)
  double kkt_residual = 0.0;
  int iterations = 0;
};

namespace detail {

// One move toward the optimum of the equality-constrained problem on the
// current active face. Returns true if a bound became active (caller
// re-enters), false once the face optimum is reached.
inline bool face_step(const Eigen::MatrixXd& H, const Eigen::VectorXd& b,
                      Eigen::VectorXd& alpha, std::vector<int>& active) {
  const std::int64_t p = static_cast<std::int64_t>(active.size());
  if (p <= 1) return false;

  Eigen::VectorXd alpha_a(p), g_a(p);
  Eigen::MatrixXd h_aa(p, p);
  const Eigen::VectorXd g = b - H * alpha;
  for (std::int64_t r = 0; r < p; ++r) {
    alpha_a[r] = alpha[active[r]];
    g_a[r] = g[active[r]];
    for (std::int64_t c = 0; c < p; ++c) h_aa(r, c) = H(active[r], active[c]);
  }

  // Zero-sum directions within the face: columns e_{t+1} − e_0.
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(p, p - 1);
  for (std::int64_t t = 0; t + 1 < p; ++t) {
    z(0, t) = -1.0;
    z(t + 1, t) = 1.0;
  }
  const Eigen::MatrixXd bz = z.transpose() * h_aa * z;
  const Eigen::VectorXd cz = z.transpose() * g_a;

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(bz);
  const Eigen::VectorXd u = cod.solve(cz);
  const Eigen::VectorXd residual = cz - bz * u;
  const double scale = 1.0 + cz.cwiseAbs().maxCoeff() + g_a.cwiseAbs().maxCoeff();

  Eigen::VectorXd step;
  bool flat_ascent = false;
  if (residual.cwiseAbs().maxCoeff() > 1e-10 * scale) {
    // Singular curvature with leftover slope: ascend linearly along the
    // residual direction until a coordinate hits zero.
    step = z * residual;
    flat_ascent = true;
  } else {
    step = z * u;
  }

  if (step.cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + alpha_a.cwiseAbs().maxCoeff()))
    return false;

  // Ratio test against α ≥ 0.
  double theta = flat_ascent ? std::numeric_limits<double>::infinity() : 1.0;
  std::int64_t blocking = -1;
  for (std::int64_t r = 0; r < p; ++r) {
    if (step[r] < 0.0) {
      const double limit = alpha_a[r] / (-step[r]);
      if (limit < theta) {
        theta = limit;
        blocking = r;
      }
    }
  }
  if (flat_ascent && blocking < 0)
    throw SolverError("simplex QP: unbounded ascent direction on a compact face");

  for (std::int64_t r = 0; r < p; ++r)
    alpha[active[r]] = std::max(alpha_a[r] + theta * step[r], 0.0);
  if (blocking >= 0) {
    alpha[active[blocking]] = 0.0;
    active.erase(active.begin() + blocking);
    return true;
  }
  return false;
}

}  // namespace detail

// Concave QP over the scaled simplex {α ≥ 0, Σα = C1}: primal active-set
// ascent with minimum-norm face solves. Deterministic for fixed inputs
// (ties pick the smallest index), exits only with a KKT certificate.
inline QpResult solve_simplex_qp_raw(const Eigen::MatrixXd& gram,
                                     const Eigen::VectorXd& linear, double c1,
                                     double tol = 1e-8, int max_iter = 10000,
                                     const Eigen::VectorXd* warm = nullptr) {
  const std::int64_t K = linear.size();
  if (K < 1) throw Error("simplex QP: no constraints");
  if (c1 <= 0.0) throw FormatError("simplex QP: C1 must be positive");
  if (gram.rows() != K || gram.cols() != K)
    throw DimensionError("simplex QP: gram size mismatch");

  Eigen::VectorXd alpha;
  if (warm != nullptr && warm->size() == K && warm->minCoeff() >= 0.0 &&
      warm->sum() > 0.0) {
    alpha = project_to_simplex(*warm, c1);
  } else {
    std::int64_t start = 0;
    linear.maxCoeff(&start);
    alpha = Eigen::VectorXd::Zero(K);
    alpha[start] = c1;
  }

  std::vector<int> active;
  for (std::int64_t k = 0; k < K; ++k)
    if (alpha[k] > 0.0) active.push_back(static_cast<int>(k));
  if (active.empty()) {
    std::int64_t start = 0;
    linear.maxCoeff(&start);
    alpha.setZero();
    alpha[start] = c1;
    active.push_back(static_cast<int>(start));
  }

  int iters = 0;
  for (; iters < max_iter; ++iters) {
    if (detail::face_step(gram, linear, alpha, active)) continue;

    // Face optimum: admit the most violating outside coordinate, if any.
    const Eigen::VectorXd g = linear - gram * alpha;
    double level = 0.0;
    for (int k : active) level += g[k];
    level /= static_cast<double>(active.size());

    int enter = -1;
    double viol = tol * 0.25;
    for (std::int64_t k = 0; k < K; ++k) {
      if (std::find(active.begin(), active.end(), static_cast<int>(k)) != active.end())
        continue;
      if (g[k] - level > viol) {
        viol = g[k] - level;
        enter = static_cast<int>(k);
      }
    }
    if (enter < 0) break;
    active.insert(std::lower_bound(active.begin(), active.end(), enter), enter);
  }

  // Tidy the equality constraint before certifying.
  alpha *= c1 / alpha.sum();
  const double resid = simplex_kkt_residual(gram, linear, alpha);
  if (resid > tol)
    throw SolverError("simplex QP: no KKT certificate after " +
                          std::to_string(iters) + " iterations (residual " +
                          std::to_string(resid) + ")",
                      resid);
  QpResult out;
  out.alpha = std::move(alpha);
  out.objective = -0.5 * out.alpha.dot(gram * out.alpha) + linear.dot(out.alpha);
  out.kkt_residual = resid;
  out.iterations = iters;
  return out;
}

// Solves the view subproblem's dual. The reported objective includes the
// subproblem's constant terms, so it is directly the restricted dual value.
inline QpResult solve_simplex_qp(const ViewSubproblem& sub, double c1,
                                 double tol = 1e-8, int max_iter = 10000,
                                 const Eigen::VectorXd* warm = nullptr) {
  QpResult r = solve_simplex_qp_raw(sub.gram, sub.linear, c1, tol, max_iter, warm);
  r.objective += sub.dual_constant;
  return r;
}

}  // namespace mvperf
