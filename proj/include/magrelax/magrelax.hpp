#pragma once

#include "magrelax/basis.hpp"
#include "magrelax/config.hpp"
#include "magrelax/ensemble.hpp"
#include "magrelax/error.hpp"
#include "magrelax/evolve.hpp"
#include "magrelax/gobbs.hpp"
#include "magrelax/hamiltonian.hpp"
#include "magrelax/observables.hpp"
#include "magrelax/run.hpp"
#include "magrelax/svg.hpp"
#include "magrelax/wavefront.hpp"
