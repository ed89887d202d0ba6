#pragma once

// Core library. The benchmark fetcher lives in nre/pmlb.hpp and additionally
// needs the nre_fetch link target.
#include "nre/cv.hpp"
#include "nre/dataset.hpp"
#include "nre/ensemble.hpp"
#include "nre/error.hpp"
#include "nre/generators.hpp"
#include "nre/model_io.hpp"
#include "nre/neural.hpp"
#include "nre/plot.hpp"
#include "nre/rules.hpp"
#include "nre/stats.hpp"
#include "nre/tree.hpp"
