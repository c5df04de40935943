#pragma once

// Umbrella header for the whole library.

#include "mosdist/ensemble.hpp"
#include "mosdist/errors.hpp"
#include "mosdist/formats.hpp"
#include "mosdist/harness.hpp"
#include "mosdist/level_scheme.hpp"
#include "mosdist/metrics.hpp"
#include "mosdist/scoring.hpp"
#include "mosdist/simulator.hpp"
#include "mosdist/softlabel.hpp"
#include "mosdist/trainer.hpp"
