#pragma once

#include "d2dcache/analytics.hpp"
#include "d2dcache/anneal.hpp"
#include "d2dcache/error.hpp"
#include "d2dcache/experiment.hpp"
#include "d2dcache/experiment_config.hpp"
#include "d2dcache/lambert_w.hpp"
#include "d2dcache/model.hpp"
#include "d2dcache/optim.hpp"
#include "d2dcache/quadrature.hpp"
#include "d2dcache/sim.hpp"
#include "d2dcache/table.hpp"
