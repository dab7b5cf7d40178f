// mvperf: generate data, train, predict, evaluate and verify multi-view
// models for multivariate performance measures.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvperf/mvperf.hpp"

namespace {

// Exit codes, also listed in --help.
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitFormat = 3;
constexpr int kExitDimensions = 4;
constexpr int kExitSolver = 5;
constexpr int kExitVerifyFailed = 6;

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    out.push_back(mvperf::parse_double(tok, what));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  for (double v : parse_double_list(text, what)) {
    if (v < 1 || v != static_cast<int>(v))
      throw mvperf::FormatError(std::string(what) + ": expected positive integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// MVPERF_THREADS caps internal parallelism. All computations currently run
// on one thread, which satisfies any cap; the variable is validated so a
// typo does not pass silently.
void read_thread_cap() {
  const char* raw = std::getenv("MVPERF_THREADS");
  if (raw == nullptr || *raw == '\0') return;
  try {
    const long long v = mvperf::parse_int(raw, "MVPERF_THREADS");
    if (v < 0) throw mvperf::FormatError("MVPERF_THREADS: must be >= 0");
  } catch (const mvperf::FormatError& e) {
    std::cerr << "warning: ignoring " << e.what() << "\n";
  }
}

int run_gen(const std::string& out_dir, long long n, int views,
            const std::string& dims, double balance, const std::string& margin,
            const std::string& noise, double correlation, unsigned long long seed) {
  mvperf::GenSpec spec;
  spec.n = n;
  spec.m = views;
  spec.dims = parse_int_list(dims, "--dims");
  spec.balance = balance;
  spec.margins = parse_double_list(margin, "--margin");
  spec.noises = parse_double_list(noise, "--noise");
  spec.correlation = correlation;
  spec.seed = seed;
  const mvperf::MultiViewDataset ds = mvperf::generate(spec);
  const auto manifest = mvperf::write_dataset(ds, out_dir);
  std::cout << manifest.string() << "\n";
  return 0;
}

int run_train(const std::string& data, const std::string& measure, double c1,
              double c2, int max_iter, double eps, const std::string& out,
              std::string log_path) {
  const mvperf::MultiViewDataset ds = mvperf::load_manifest(data);
  mvperf::TrainConfig cfg;
  cfg.measure = mvperf::parse_measure(measure);
  cfg.c1 = c1;
  cfg.c2 = c2;
  cfg.max_iter = max_iter;
  cfg.epsilon = eps;
  const auto [model, state] = mvperf::train(ds, cfg);
  mvperf::save_model(model, out);

  if (log_path.empty()) log_path = out + ".log";
  std::ofstream log(log_path, std::ios::binary);
  if (!log) throw mvperf::IoError("cannot write log file " + log_path);
  log << "t,xi,violation,primal\n";
  for (const mvperf::IterationRecord& rec : state.history)
    log << rec.t << ',' << mvperf::format_double(rec.xi) << ','
        << mvperf::format_double(rec.violation) << ','
        << mvperf::format_double(rec.primal) << "\n";

  std::cout << "status " << mvperf::stop_reason_name(state.stop) << "\n"
            << "iterations " << state.iterations << "\n"
            << "constraints " << state.working_set.size() << "\n"
            << "xi " << mvperf::format_double(state.xi) << "\n"
            << "final_violation " << mvperf::format_double(state.final_violation)
            << "\n";
  return 0;
}

int run_predict(const std::string& data, const std::string& model_path,
                const std::string& out) {
  const mvperf::MultiViewDataset ds = mvperf::load_manifest(data);
  const mvperf::Model model = mvperf::load_model(model_path);
  mvperf::check_model_dims(model, ds);
  const mvperf::LabelTuple pred = mvperf::predict(ds, model.weights);
  std::ofstream file(out, std::ios::binary);
  if (!file) throw mvperf::IoError("cannot write predictions to " + out);
  for (int y : pred) file << (y == 1 ? "+1" : "-1") << "\n";
  return 0;
}

int run_eval(const std::string& data, const std::string& model_path,
             const std::string& measure) {
  const mvperf::MultiViewDataset ds = mvperf::load_manifest(data);
  const mvperf::Model model = mvperf::load_model(model_path);
  const mvperf::Measure m = mvperf::parse_measure(measure);
  const mvperf::EvalReport report = mvperf::evaluate(ds, model, m);
  std::cout << "measure " << mvperf::measure_name(m) << "\n"
            << "tp " << report.table.tp << "\n"
            << "fp " << report.table.fp << "\n"
            << "fn " << report.table.fn << "\n"
            << "tn " << report.table.tn << "\n"
            << "loss " << mvperf::format_double(report.loss_value) << "\n";
  return 0;
}

int run_verify(const std::string& suite) {
  std::vector<mvperf::verify::SuiteReport> reports;
  if (suite == "all") {
    reports = mvperf::verify::run_all_suites();
  } else if (suite == "constraint-search") {
    reports.push_back(mvperf::verify::run_constraint_search_suite());
  } else if (suite == "prediction") {
    reports.push_back(mvperf::verify::run_prediction_suite());
  } else if (suite == "qp-grid") {
    reports.push_back(mvperf::verify::run_qp_grid_suite());
  } else if (suite == "full-training") {
    reports.push_back(mvperf::verify::run_full_training_suite());
  } else {
    throw mvperf::FormatError(
        "unknown suite '" + suite +
        "' (expected constraint-search | prediction | qp-grid | full-training | all)");
  }
  bool all_ok = true;
  for (const auto& r : reports) {
    all_ok = all_ok && r.ok();
    std::cout << r.name << ": " << (r.ok() ? "pass" : "FAIL") << " " << r.passed << "/"
              << (r.passed + r.failed) << "\n";
  }
  return all_ok ? 0 : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "mvperf: multi-view linear predictors trained for multivariate "
      "performance measures (err | f1 | prbep | prec@K | rec@K)"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes:\n"
      "  0  success\n"
      "  1  bad usage (unknown flag or subcommand, missing argument)\n"
      "  2  file I/O error\n"
      "  3  malformed data, manifest, model or configuration\n"
      "  4  dimension mismatch between model and data\n"
      "  5  inner solver failed to converge\n"
      "  6  verification suite reported failures\n"
      "\n"
      "MVPERF_THREADS caps internal parallelism (0 or absent: default).");

  // gen
  std::string gen_out, gen_dims = "3", gen_margin = "1", gen_noise = "0.1";
  long long gen_n = 100;
  int gen_views = 2;
  double gen_balance = 0.5, gen_corr = 0.5;
  unsigned long long gen_seed = 1;
  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic multi-view dataset");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--n", gen_n, "number of data points");
  gen->add_option("--views", gen_views, "number of views");
  gen->add_option("--dims", gen_dims, "per-view dims, comma-separated or single value");
  gen->add_option("--balance", gen_balance, "fraction of +1 labels, in (0,1)");
  gen->add_option("--margin", gen_margin, "per-view class separation");
  gen->add_option("--noise", gen_noise, "per-view noise scale");
  gen->add_option("--correlation", gen_corr, "cross-view latent correlation in [0,1]");
  gen->add_option("--seed", gen_seed, "RNG seed");

  // train
  std::string train_data, train_measure, train_out, train_log;
  double train_c1 = 1.0, train_c2 = 0.1, train_eps = 1e-4;
  int train_iters = 100;
  CLI::App* tr = app.add_subcommand("train", "train a model on a dataset manifest");
  tr->add_option("--data", train_data, "dataset manifest path")->required();
  tr->add_option("--measure", train_measure, "err | f1 | prbep | prec@K | rec@K")
      ->required();
  tr->add_option("--c1", train_c1, "slack tradeoff C1 (> 0)");
  tr->add_option("--c2", train_c2, "view consistency tradeoff C2 (>= 0)");
  tr->add_option("--max-iter", train_iters, "outer iteration cap T");
  tr->add_option("--eps", train_eps, "violation tolerance for early stop");
  tr->add_option("--out", train_out, "model output path")->required();
  tr->add_option("--log", train_log, "iteration log path (default: <out>.log)");

  // predict
  std::string pred_data, pred_model, pred_out;
  CLI::App* pr = app.add_subcommand("predict", "write one ±1 prediction per line");
  pr->add_option("--data", pred_data, "dataset manifest path")->required();
  pr->add_option("--model", pred_model, "model path")->required();
  pr->add_option("--out", pred_out, "predictions output path")->required();

  // eval
  std::string eval_data, eval_model, eval_measure;
  CLI::App* ev = app.add_subcommand("eval", "print contingency table and loss");
  ev->add_option("--data", eval_data, "dataset manifest path")->required();
  ev->add_option("--model", eval_model, "model path")->required();
  ev->add_option("--measure", eval_measure, "err | f1 | prbep | prec@K | rec@K")
      ->required();

  // verify
  std::string verify_suite = "all";
  CLI::App* vf = app.add_subcommand("verify", "run brute-force oracle suites");
  vf->add_option("--suite", verify_suite,
                 "constraint-search | prediction | qp-grid | full-training | all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  read_thread_cap();
  try {
    if (gen->parsed())
      return run_gen(gen_out, gen_n, gen_views, gen_dims, gen_balance, gen_margin,
                     gen_noise, gen_corr, gen_seed);
    if (tr->parsed())
      return run_train(train_data, train_measure, train_c1, train_c2, train_iters,
                       train_eps, train_out, train_log);
    if (pr->parsed()) return run_predict(pred_data, pred_model, pred_out);
    if (ev->parsed()) return run_eval(eval_data, eval_model, eval_measure);
    if (vf->parsed()) return run_verify(verify_suite);
  } catch (const mvperf::DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDimensions;
  } catch (const mvperf::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const mvperf::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const mvperf::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFormat;
  }
  return kExitUsage;
}
