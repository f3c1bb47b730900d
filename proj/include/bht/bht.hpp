#pragma once

#include "bht/error.hpp"
#include "bht/rng.hpp"
#include "bht/lattice.hpp"
#include "bht/advection.hpp"
#include "bht/phases.hpp"
#include "bht/fields.hpp"
#include "bht/predictor.hpp"
#include "bht/static_solver.hpp"
#include "bht/timedep.hpp"
#include "bht/ensemble.hpp"
#include "bht/config.hpp"
#include "bht/output.hpp"
#include "bht/commands.hpp"
