#pragma once

// Umbrella header.

#include "tig/baseline.hpp"
#include "tig/dtig.hpp"
#include "tig/errors.hpp"
#include "tig/geometry.hpp"
#include "tig/metrics.hpp"
#include "tig/random.hpp"
#include "tig/smoothing.hpp"
#include "tig/stig.hpp"
#include "tig/svg.hpp"
#include "tig/world.hpp"
