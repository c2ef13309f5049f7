#pragma once

#include "rcast/baselines.hpp"
#include "rcast/config.hpp"
#include "rcast/deep_esn.hpp"
#include "rcast/error.hpp"
#include "rcast/field.hpp"
#include "rcast/forecast.hpp"
#include "rcast/kriging.hpp"
#include "rcast/manifest.hpp"
#include "rcast/metrics.hpp"
#include "rcast/model_io.hpp"
#include "rcast/numerics.hpp"
#include "rcast/parallel.hpp"
#include "rcast/qeesn.hpp"
#include "rcast/reservoir.hpp"
#include "rcast/rng.hpp"
#include "rcast/simulate.hpp"
#include "rcast/ssvs.hpp"
