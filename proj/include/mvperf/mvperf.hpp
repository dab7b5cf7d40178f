#pragma once

// Multi-view training of linear predictors that directly optimize
// multivariate performance measures (error rate, F1, PRBEP, precision@k,
// recall@k) with a cutting-plane method and per-view dual QPs.

#include "mvperf/constraint_search.hpp"
#include "mvperf/dataset.hpp"
#include "mvperf/dual_qp.hpp"
#include "mvperf/errors.hpp"
#include "mvperf/inference.hpp"
#include "mvperf/label_tuple.hpp"
#include "mvperf/measures.hpp"
#include "mvperf/synthetic.hpp"
#include "mvperf/trainer.hpp"
#include "mvperf/verify.hpp"
