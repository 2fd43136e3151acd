#pragma once

// Umbrella header.

#include "adc/config.hpp"
#include "adc/dynamics.hpp"
#include "adc/errors.hpp"
#include "adc/filter.hpp"
#include "adc/grid.hpp"
#include "adc/io.hpp"
#include "adc/model.hpp"
#include "adc/montecarlo.hpp"
#include "adc/parallel.hpp"
#include "adc/prior.hpp"
#include "adc/quadrature.hpp"
#include "adc/riccati.hpp"
#include "adc/rng.hpp"
#include "adc/simulate.hpp"
#include "adc/solver.hpp"
#include "adc/symvec.hpp"
