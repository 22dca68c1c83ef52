#pragma once

// Umbrella header for the uni-junction-memristor circuit toolkit.

#include "ujm/analysis.hpp"
#include "ujm/chaos.hpp"
#include "ujm/errors.hpp"
#include "ujm/fit.hpp"
#include "ujm/integrate.hpp"
#include "ujm/io.hpp"
#include "ujm/model.hpp"
#include "ujm/parallel.hpp"
#include "ujm/sweep.hpp"
