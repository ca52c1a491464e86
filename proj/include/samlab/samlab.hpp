#pragma once

#include "samlab/random.hpp"
#include "samlab/problems.hpp"
#include "samlab/schedules.hpp"
#include "samlab/optimizers.hpp"
#include "samlab/analysis.hpp"
#include "samlab/config.hpp"
#include "samlab/experiment.hpp"
#include "samlab/presets.hpp"
