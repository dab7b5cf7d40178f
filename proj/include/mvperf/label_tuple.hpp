#pragma once

#include <cstddef>
#include <vector>

#include "mvperf/errors.hpp"

namespace mvperf {

// A candidate labeling of all n points at once. Entries are exactly +1 or -1.
using LabelTuple = std::vector<int>;

inline bool is_label_tuple(const LabelTuple& y) {
  for (int v : y)
    if (v != 1 && v != -1) return false;
  return true;
}

inline LabelTuple flip(const LabelTuple& y) {
  LabelTuple out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = -y[i];
  return out;
}

inline std::size_t positive_count(const LabelTuple& y) {
  std::size_t c = 0;
  for (int v : y) c += (v == 1);
  return c;
}

}  // namespace mvperf
