#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "mvperf/dataset.hpp"
#include "mvperf/errors.hpp"

namespace mvperf {

// splitmix64: the fixed 64-bit mixing scheme behind every synthetic
// dataset, so a (spec, seed) pair produces the same bytes everywhere.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53-bit resolution
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }
};

// Box-Muller over splitmix64 uniforms.
struct GaussianSource {
  SplitMix64 rng;
  bool have_spare = false;
  double spare = 0.0;

  explicit GaussianSource(std::uint64_t seed) : rng(seed) {}

  double next() {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    const double u1 = 1.0 - rng.next_unit();  // (0, 1]
    const double u2 = rng.next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare = radius * std::sin(angle);
    have_spare = true;
    return radius * std::cos(angle);
  }
};

// Class-conditional Gaussian blobs: each view places the classes at
// ±(margin/2) along a random unit direction; the along-axis displacement
// mixes a shared per-point latent with a per-view one according to the
// correlation coefficient, and isotropic per-view noise is added on top.
// noise 0 collapses each view to two point masses `margin` apart.
struct GenSpec {
  std::int64_t n = 100;
  int m = 2;
  std::vector<int> dims = {3};       // size m, or size 1 to broadcast
  double balance = 0.5;              // fraction of +1 labels, in (0, 1)
  std::vector<double> margins = {1.0};  // per view, or size 1 to broadcast
  std::vector<double> noises = {0.1};   // per view, or size 1 to broadcast
  double correlation = 0.5;          // in [0, 1]
  std::uint64_t seed = 1;

  template <typename T>
  static std::vector<T> broadcast(const std::vector<T>& v, int m, const char* what) {
    if (static_cast<int>(v.size()) == m) return v;
    if (v.size() == 1) return std::vector<T>(m, v[0]);
    throw FormatError(std::string("gen: ") + what + " must have 1 or m entries");
  }

  void validate() const {
    if (n < 2) throw FormatError("gen: n must be >= 2");
    if (m < 1) throw FormatError("gen: m must be >= 1");
    if (!(balance > 0.0 && balance < 1.0))
      throw FormatError("gen: balance must be in (0, 1)");
    if (!(correlation >= 0.0 && correlation <= 1.0))
      throw FormatError("gen: correlation must be in [0, 1]");
    for (int d : broadcast(dims, m, "dims"))
      if (d < 1) throw FormatError("gen: dims must be >= 1");
    for (double v : broadcast(margins, m, "margin"))
      if (!(v >= 0.0)) throw FormatError("gen: margin must be >= 0");
    for (double v : broadcast(noises, m, "noise"))
      if (!(v >= 0.0)) throw FormatError("gen: noise must be >= 0");
  }
};

inline MultiViewDataset generate(const GenSpec& spec) {
  spec.validate();
  const auto dims = GenSpec::broadcast(spec.dims, spec.m, "dims");
  const auto margins = GenSpec::broadcast(spec.margins, spec.m, "margin");
  const auto noises = GenSpec::broadcast(spec.noises, spec.m, "noise");

  GaussianSource gauss(spec.seed);
  SplitMix64& rng = gauss.rng;

  MultiViewDataset ds;
  ds.n = spec.n;
  ds.m = spec.m;
  ds.dims = dims;

  // Labels: round(n·balance) positives scattered by a Fisher-Yates shuffle.
  const std::int64_t npos = std::llround(static_cast<double>(spec.n) * spec.balance);
  std::vector<std::int64_t> order(spec.n);
  for (std::int64_t i = 0; i < spec.n; ++i) order[i] = i;
  for (std::int64_t i = spec.n - 1; i > 0; --i) {
    const std::int64_t j =
        static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[i], order[j]);
  }
  ds.labels.assign(spec.n, -1);
  for (std::int64_t r = 0; r < npos && r < spec.n; ++r) ds.labels[order[r]] = 1;

  // Per-view unit directions.
  std::vector<std::vector<double>> axis(spec.m);
  for (int j = 0; j < spec.m; ++j) {
    axis[j].resize(dims[j]);
    double norm_sq = 0.0;
    for (int t = 0; t < dims[j]; ++t) {
      axis[j][t] = gauss.next();
      norm_sq += axis[j][t] * axis[j][t];
    }
    if (norm_sq < 1e-24) axis[j].assign(dims[j], 0.0), axis[j][0] = 1.0;
    else
      for (int t = 0; t < dims[j]; ++t) axis[j][t] /= std::sqrt(norm_sq);
  }

  // Shared per-point latent displacement.
  std::vector<double> shared(spec.n);
  for (std::int64_t i = 0; i < spec.n; ++i) shared[i] = gauss.next();

  const double rho = spec.correlation;
  const double rho_orth = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  ds.views.resize(spec.m);
  for (int j = 0; j < spec.m; ++j) {
    ds.views[j].reserve(spec.n);
    for (std::int64_t i = 0; i < spec.n; ++i) {
      const double own = gauss.next();
      const double along = ds.labels[i] * margins[j] * 0.5 +
                           noises[j] * (rho * shared[i] + rho_orth * own);
      SparseRow row;
      row.idx.resize(dims[j]);
      row.val.resize(dims[j]);
      for (int t = 0; t < dims[j]; ++t) {
        row.idx[t] = t;
        row.val[t] = along * axis[j][t] + noises[j] * gauss.next();
      }
      ds.views[j].push_back(std::move(row));
    }
  }
  validate(ds);
  return ds;
}

}  // namespace mvperf
