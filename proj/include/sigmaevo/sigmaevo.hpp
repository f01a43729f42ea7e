#pragma once

#include "sigmaevo/core.hpp"
#include "sigmaevo/decay_harness.hpp"
#include "sigmaevo/evolution_engine.hpp"
#include "sigmaevo/exponent_calculus.hpp"
#include "sigmaevo/multiplier_kernels.hpp"
#include "sigmaevo/norm_series.hpp"
#include "sigmaevo/transforms.hpp"
