#pragma once

#include <cstdint>
#include <string>

#include "mvperf/errors.hpp"
#include "mvperf/label_tuple.hpp"

namespace mvperf {

// Counts comparing a predicted label tuple against the truth.
// Every supported loss is a function of this table alone.
struct ContingencyTable {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  std::int64_t predicted_positives() const { return tp + fp; }
  std::int64_t truth_positives() const { return tp + fn; }

  bool operator==(const ContingencyTable&) const = default;
};

enum class MeasureKind { ErrorRate, F1, Prbep, PrecisionAtK, RecallAtK };

// Identity of the loss Δ. k is only meaningful for the @k measures.
struct Measure {
  MeasureKind kind = MeasureKind::ErrorRate;
  std::int64_t k = 0;

  static Measure error_rate() { return {MeasureKind::ErrorRate, 0}; }
  static Measure f1() { return {MeasureKind::F1, 0}; }
  static Measure prbep() { return {MeasureKind::Prbep, 0}; }
  static Measure precision_at(std::int64_t k) { return {MeasureKind::PrecisionAtK, k}; }
  static Measure recall_at(std::int64_t k) { return {MeasureKind::RecallAtK, k}; }

  bool uses_k() const {
    return kind == MeasureKind::PrecisionAtK || kind == MeasureKind::RecallAtK;
  }

  bool operator==(const Measure&) const = default;
};

// CLI spelling: err | f1 | prbep | prec@K | rec@K
inline Measure parse_measure(const std::string& name) {
  if (name == "err") return Measure::error_rate();
  if (name == "f1") return Measure::f1();
  if (name == "prbep") return Measure::prbep();
  auto at = [&](const std::string& prefix) -> std::int64_t {
    if (name.rfind(prefix, 0) != 0) return -1;
    const std::string digits = name.substr(prefix.size());
    if (digits.empty()) return -1;
    std::int64_t k = 0;
    for (char c : digits) {
      if (c < '0' || c > '9') return -1;
      k = k * 10 + (c - '0');
      if (k > 1'000'000'000) return -1;
    }
    return k;
  };
  if (std::int64_t k = at("prec@"); k > 0) return Measure::precision_at(k);
  if (std::int64_t k = at("rec@"); k > 0) return Measure::recall_at(k);
  throw FormatError("unknown measure '" + name +
                    "' (expected err | f1 | prbep | prec@K | rec@K with K >= 1)");
}

inline std::string measure_name(const Measure& m) {
  switch (m.kind) {
    case MeasureKind::ErrorRate: return "err";
    case MeasureKind::F1: return "f1";
    case MeasureKind::Prbep: return "prbep";
    case MeasureKind::PrecisionAtK: return "prec@" + std::to_string(m.k);
    case MeasureKind::RecallAtK: return "rec@" + std::to_string(m.k);
  }
  throw Error("unreachable");
}

inline ContingencyTable contingency(const LabelTuple& pred, const LabelTuple& truth) {
  if (pred.size() != truth.size())
    throw DimensionError("contingency: tuple lengths differ (" +
                         std::to_string(pred.size()) + " vs " +
                         std::to_string(truth.size()) + ")");
  ContingencyTable t;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == 1)
      (truth[i] == 1 ? t.tp : t.fp)++;
    else
      (truth[i] == 1 ? t.fn : t.tn)++;
  }
  return t;
}

// PRBEP and the @k measures are only defined on a slice of all tables:
// PRBEP needs precision == recall (fp == fn), the @k measures need exactly
// k predicted positives. ErrorRate and F1 accept every table.
inline bool admissible(const Measure& m, const ContingencyTable& t) {
  switch (m.kind) {
    case MeasureKind::ErrorRate:
    case MeasureKind::F1:
      return true;
    case MeasureKind::Prbep:
      return t.fp == t.fn;
    case MeasureKind::PrecisionAtK:
    case MeasureKind::RecallAtK:
      return t.predicted_positives() == m.k;
  }
  return false;
}

// Loss Δ in [0, 1]. Lower is better; 0 is a perfect prediction.
// Degenerate tables: F1 (and PRBEP) on an all-negative problem with an
// all-negative prediction count as perfect agreement, loss 0. Recall@k is
// undefined when the truth has no positives.
inline double loss(const Measure& m, const ContingencyTable& t) {
  if (!admissible(m, t))
    throw FormatError("loss: table inadmissible for measure " + measure_name(m));
  const double tp = static_cast<double>(t.tp);
  switch (m.kind) {
    case MeasureKind::ErrorRate:
      return static_cast<double>(t.fp + t.fn) / static_cast<double>(t.total());
    case MeasureKind::F1: {
      const std::int64_t denom = 2 * t.tp + t.fp + t.fn;
      if (denom == 0) return 0.0;
      return 1.0 - 2.0 * tp / static_cast<double>(denom);
    }
    case MeasureKind::Prbep: {
      // fp == fn makes tp+fp == tp+fn, i.e. precision == recall.
      if (t.predicted_positives() == 0) return 0.0;  // all-negative identity
      return 1.0 - tp / static_cast<double>(t.predicted_positives());
    }
    case MeasureKind::PrecisionAtK:
      return 1.0 - tp / static_cast<double>(m.k);
    case MeasureKind::RecallAtK: {
      if (t.truth_positives() == 0)
        throw FormatError("loss: rec@k undefined when the truth has no positives");
      return 1.0 - tp / static_cast<double>(t.truth_positives());
    }
  }
  throw Error("unreachable");
}

}  // namespace mvperf
