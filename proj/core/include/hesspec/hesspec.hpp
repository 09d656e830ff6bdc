#pragma once

#include "hesspec/bulk_solver.hpp"
#include "hesspec/empirical.hpp"
#include "hesspec/error.hpp"
#include "hesspec/expectation.hpp"
#include "hesspec/feature_model.hpp"
#include "hesspec/glm_models.hpp"
#include "hesspec/parallel.hpp"
#include "hesspec/quadrature.hpp"
#include "hesspec/rng.hpp"
#include "hesspec/spike_solver.hpp"
#include "hesspec/version.hpp"
