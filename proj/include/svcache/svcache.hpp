#pragma once

#include "analytic.hpp"
#include "baselines.hpp"
#include "config.hpp"
#include "estimate.hpp"
#include "montecarlo.hpp"
#include "objective.hpp"
#include "optimizer.hpp"
#include "popularity.hpp"
#include "power_model.hpp"
#include "quadrature.hpp"
