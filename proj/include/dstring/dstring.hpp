#pragma once

#include "dstring/error.hpp"
#include "dstring/parallel.hpp"
#include "dstring/model.hpp"
#include "dstring/quadrature.hpp"
#include "dstring/kernel.hpp"
#include "dstring/dynamics.hpp"
#include "dstring/observables.hpp"
#include "dstring/transitions.hpp"
#include "dstring/bathsim.hpp"
#include "dstring/fieldrep.hpp"
#include "dstring/cli.hpp"
