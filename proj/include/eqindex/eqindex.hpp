#pragma once

#include "eqindex/errors.hpp"
#include "eqindex/random.hpp"
#include "eqindex/parallel.hpp"
#include "eqindex/spectral_core.hpp"
#include "eqindex/jacobi.hpp"
#include "eqindex/linearization.hpp"
#include "eqindex/center_manifold.hpp"
#include "eqindex/planar_degree.hpp"
#include "eqindex/equilibrium_index.hpp"
#include "eqindex/conley_planar.hpp"
#include "eqindex/continuation.hpp"
#include "eqindex/bifurcation.hpp"
#include "eqindex/spec_io.hpp"
#include "eqindex/config.hpp"
#include "eqindex/reports.hpp"
