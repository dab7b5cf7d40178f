// Acceptance suite: every release gate in one binary, one line per check.
// Exits nonzero if any gate fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mvperf/mvperf.hpp"

namespace fs = std::filesystem;
using namespace mvperf;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool ok, const std::string& detail) {
  if (!ok) ++g_failures;
  std::printf("[%s] %d. %s — %s\n", ok ? "PASS" : "FAIL", index, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// 1. sweep == 2^n brute force on >=200 instances, <=1e-12, <=60s
void criterion_search_exactness() {
  const auto start = Clock::now();
  const auto suite = verify::run_constraint_search_suite(200);
  const double elapsed = seconds_since(start);
  report(1, "constraint-search exactness",
         suite.failed == 0 && suite.passed >= 200 && elapsed <= 60.0,
         std::to_string(suite.passed) + "/200 instances, max gap " +
             fmt(suite.max_error) + ", " + fmt(elapsed) + "s");
}

// 2. sign rule == exhaustive argmax objective, >=100 instances, <=1e-12
void criterion_prediction_decoupling() {
  const auto suite = verify::run_prediction_suite(100);
  report(2, "prediction decoupling",
         suite.failed == 0 && suite.passed >= 100,
         std::to_string(suite.passed) + "/100 instances, max gap " +
             fmt(suite.max_error));
}

// 3. FD of the smooth objective == Ω_j w_j − β_j to 1e-5 relative, >=20 points
void criterion_gradient() {
  SplitMix64 rng(0xacc3);
  double worst = 0.0;
  int points = 0;
  for (int trial = 0; trial < 20; ++trial) {
    MultiViewDataset ds = verify::random_dataset(
        rng, 4 + static_cast<std::int64_t>(rng.next_below(5)),
        2 + static_cast<int>(rng.next_below(2)), 4);
    ViewWeights w = verify::random_weights(rng, ds, 1.0);
    const double c2 = 0.1 + rng.next_unit();
    ++points;
    for (int j = 0; j < ds.m; ++j) {
      const Eigen::VectorXd analytic =
          build_curvature(ds, j, c2)->matrix() * w[j] -
          cross_coupling(ds, j, w, c2).beta;
      Eigen::VectorXd fd(ds.dims[j]);
      for (int t = 0; t < ds.dims[j]; ++t) {
        const double h = 1e-4 * std::max(1.0, std::abs(w[j][t]));
        ViewWeights up = w, down = w;
        up[j][t] += h;
        down[j][t] -= h;
        fd[t] = (primal_objective(ds, up, 0.0, 1.0, c2) -
                 primal_objective(ds, down, 0.0, 1.0, c2)) /
                (2.0 * h);
      }
      worst = std::max(worst,
                       (fd - analytic).norm() / std::max(analytic.norm(), 1e-8));
    }
  }
  report(3, "gradient correctness", worst <= 1e-5 && points >= 20,
         std::to_string(points) + " points, worst relative error " + fmt(worst));
}

// 4. every inner solve certifies KKT and closes the restricted duality gap
void criterion_qp_certificate() {
  SplitMix64 rng(0xacc4);
  int solved = 0;
  bool ok = true;
  double worst_resid = 0.0, worst_sum = 0.0, worst_gap = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    verify::RandomSubproblem inst = verify::random_subproblem(rng, 10);
    const Eigen::VectorXd warm = inst.ws.alphas();
    const QpResult r = solve_simplex_qp(inst.sub, inst.c1, 1e-8, 10000, &warm);
    ++solved;

    const double sum_err = std::abs(r.alpha.sum() - inst.c1) / inst.c1;
    const Eigen::VectorXd w = recover_weights(inst.sub, r.alpha);
    const double primal = inst.sub.primal_value(w, inst.c1);
    const double gap =
        std::abs(primal - r.objective) / std::max(1.0, std::abs(primal));

    worst_resid = std::max(worst_resid, r.kkt_residual);
    worst_sum = std::max(worst_sum, sum_err);
    worst_gap = std::max(worst_gap, gap);
    ok = ok && r.alpha.minCoeff() >= 0.0 && sum_err <= 1e-8 &&
         r.kkt_residual <= 1e-8 && gap <= 1e-6;
  }
  report(4, "QP certificate", ok && solved >= 50,
         std::to_string(solved) + " subproblems, worst KKT " + fmt(worst_resid) +
             ", worst |Σα−C1|/C1 " + fmt(worst_sum) + ", worst gap " +
             fmt(worst_gap));
}

// 5. cutting-plane primal within 1e-3 relative of full enumeration, <=120s
void criterion_full_enumeration() {
  const auto start = Clock::now();
  const auto suite = verify::run_full_training_suite(4);
  const double elapsed = seconds_since(start);
  report(5, "cutting-plane vs full enumeration",
         suite.failed == 0 && suite.passed >= 4 && elapsed <= 120.0,
         std::to_string(suite.passed) + "/4 instances, worst relative gap " +
             fmt(suite.max_error) + ", " + fmt(elapsed) + "s");
}

GenSpec separable_spec() {
  GenSpec spec;
  spec.n = 60;
  spec.m = 2;
  spec.dims = {3, 4};
  spec.balance = 0.5;
  spec.margins = {2.0};
  spec.noises = {0.0};
  spec.correlation = 0.5;
  spec.seed = 2024;
  return spec;
}

TrainConfig separable_config() {
  TrainConfig cfg;
  cfg.measure = Measure::error_rate();
  cfg.c1 = 10.0;
  cfg.c2 = 1.0;
  cfg.max_iter = 50;
  return cfg;
}

// 6. separable 2-view dataset trains to zero error within 5 seconds
void criterion_separable() {
  const auto start = Clock::now();
  const MultiViewDataset ds = generate(separable_spec());
  const auto [model, state] = train(ds, separable_config());
  const EvalReport eval = evaluate(ds, model, Measure::error_rate());
  const double elapsed = seconds_since(start);
  report(6, "separable end-to-end",
         eval.loss_value == 0.0 && elapsed <= 5.0,
         "training error " + fmt(eval.loss_value) + ", " +
             stop_reason_name(state.stop) + " after " +
             std::to_string(state.iterations) + " iterations, " + fmt(elapsed) + "s");
}

// 7. converged runs satisfy violation <= ξ + ε, recomputed from the saved model
void criterion_termination() {
  const fs::path dir = fs::temp_directory_path() / "mvperf-acceptance";
  fs::create_directories(dir);
  SplitMix64 rng(0xacc7);
  bool ok = true;
  int converged_runs = 0;
  double worst_excess = -1e300;
  for (int trial = 0; trial < 4; ++trial) {
    MultiViewDataset ds;
    TrainConfig cfg;
    if (trial == 0) {
      ds = generate(separable_spec());
      cfg = separable_config();
    } else {
      ds = verify::random_dataset(rng, 8, 2, 3);
      cfg.measure = trial == 1 ? Measure::f1() : Measure::error_rate();
      cfg.c1 = 1.0;
      cfg.c2 = 0.1;
      cfg.max_iter = 300;
    }
    const auto [model, state] = train(ds, cfg);
    if (!is_converged(state.stop)) continue;
    ++converged_runs;

    const fs::path file = dir / ("termination-" + std::to_string(trial) + ".model");
    save_model(model, file);
    const Model loaded = load_model(file);

    // slack recomputed from scratch over the working-set tuples, weights
    // taken from the file
    std::vector<Eigen::VectorXd> truth_map;
    for (int j = 0; j < ds.m; ++j)
      truth_map.push_back(joint_feature_map(ds, j, ds.labels));
    double xi = 0.0;
    for (const WorkingConstraint& c : state.working_set.items) {
      double margin = 0.0;
      for (int j = 0; j < ds.m; ++j)
        margin += loaded.weights[j].dot(
            (truth_map[j] - joint_feature_map(ds, j, c.tuple)).eval());
      xi = std::max(xi, loss(cfg.measure, contingency(c.tuple, ds.labels)) - margin);
    }
    const SearchResult worst =
        most_violated(ds, loaded.weights, cfg.measure, ds.labels);
    const double excess = worst.objective - (xi + cfg.epsilon);
    worst_excess = std::max(worst_excess, excess);
    ok = ok && excess <= 1e-12;
  }
  fs::remove_all(dir);
  report(7, "termination contract", ok && converged_runs >= 2,
         std::to_string(converged_runs) + " converged runs, worst violation excess " +
             fmt(worst_excess));
}

// 8. save -> load -> save is byte-identical; loaded predictions match
void criterion_persistence() {
  const fs::path dir = fs::temp_directory_path() / "mvperf-acceptance";
  fs::create_directories(dir);
  const MultiViewDataset ds = generate(separable_spec());
  TrainConfig cfg = separable_config();
  cfg.measure = Measure::f1();
  const auto [model, state] = train(ds, cfg);

  const fs::path first = dir / "persist-a.model";
  const fs::path second = dir / "persist-b.model";
  save_model(model, first);
  const Model loaded = load_model(first);
  save_model(loaded, second);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
  };
  const std::string bytes_a = slurp(first), bytes_b = slurp(second);
  const bool bytes_ok = !bytes_a.empty() && bytes_a == bytes_b;
  const bool pred_ok = predict(ds, loaded.weights) == predict(ds, model.weights);
  fs::remove_all(dir);
  report(8, "persistence round trip", bytes_ok && pred_ok,
         std::string("files ") + (bytes_ok ? "identical" : "DIFFER") +
             ", predictions " + (pred_ok ? "match" : "DIFFER"));
}

}  // namespace

int main() {
  criterion_search_exactness();
  criterion_prediction_decoupling();
  criterion_gradient();
  criterion_qp_certificate();
  criterion_full_enumeration();
  criterion_separable();
  criterion_termination();
  criterion_persistence();

  if (g_failures == 0) {
    std::printf("acceptance: all 8 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return 1;
}
