// Umbrella include for the ideal-FDM dual variational toolkit.
#pragma once

#include "ifdm/checks.hpp"
#include "ifdm/config.hpp"
#include "ifdm/core.hpp"
#include "ifdm/dtp.hpp"
#include "ifdm/dual.hpp"
#include "ifdm/fft.hpp"
#include "ifdm/grid.hpp"
#include "ifdm/integrator.hpp"
#include "ifdm/io.hpp"
#include "ifdm/lattice.hpp"
#include "ifdm/lbfgs.hpp"
#include "ifdm/operators.hpp"
#include "ifdm/packed.hpp"
#include "ifdm/parallel.hpp"
#include "ifdm/primal.hpp"
#include "ifdm/scenarios.hpp"
