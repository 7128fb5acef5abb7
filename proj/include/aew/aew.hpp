#pragma once

// Umbrella header: exponential-weights aggregation of classifiers with
// partition and kernel base families, adaptive hyperparameter grids, a
// synthetic benchmark family with closed-form optimal risks, and a
// Monte-Carlo rate harness.

#include "aew/aggregate.hpp"
#include "aew/dataset.hpp"
#include "aew/experiment.hpp"
#include "aew/grids.hpp"
#include "aew/parallel.hpp"
#include "aew/pipelines.hpp"
#include "aew/quadrature.hpp"
#include "aew/risk.hpp"
#include "aew/rng.hpp"
#include "aew/rules.hpp"
#include "aew/sieve.hpp"
#include "aew/split.hpp"
#include "aew/stats.hpp"
#include "aew/svm.hpp"
#include "aew/synth.hpp"
#include "aew/text.hpp"
