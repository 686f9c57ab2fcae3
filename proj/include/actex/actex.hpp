#pragma once

// Convenience header pulling in the whole library.

#include "actex/types.hpp"
#include "actex/version.hpp"
#include "actex/rng.hpp"
#include "actex/scenario.hpp"
#include "actex/risk.hpp"
#include "actex/portfolio.hpp"
#include "actex/objective.hpp"
#include "actex/sampler.hpp"
#include "actex/localsearch.hpp"
#include "actex/lp.hpp"
#include "actex/baselines.hpp"
