#pragma once

// Umbrella header for the whole library.

#include "epps/error.hpp"
#include "epps/random.hpp"
#include "epps/types.hpp"
#include "epps/numeric.hpp"
#include "epps/stats.hpp"
#include "epps/parallel.hpp"
#include "epps/stochastic_paths.hpp"
#include "epps/hawkes.hpp"
#include "epps/sampling.hpp"
#include "epps/estimators.hpp"
#include "epps/experiments.hpp"
#include "epps/taq.hpp"
#include "epps/config.hpp"
#include "epps/io.hpp"
