#pragma once

// Umbrella header.

#include "spdsysid/errors.hpp"
#include "spdsysid/linalg/matrix.hpp"
#include "spdsysid/linalg/symmetric.hpp"
#include "spdsysid/linalg/dense.hpp"
#include "spdsysid/manifold/spd_geometry.hpp"
#include "spdsysid/manifold/optimizers.hpp"
#include "spdsysid/model/thermal_network.hpp"
#include "spdsysid/model/state_space.hpp"
#include "spdsysid/model/portrait.hpp"
#include "spdsysid/model/parameter_sweep.hpp"
#include "spdsysid/data/trajectory.hpp"
#include "spdsysid/data/forcing.hpp"
#include "spdsysid/data/csv.hpp"
#include "spdsysid/data/generator.hpp"
#include "spdsysid/sysid/loss.hpp"
#include "spdsysid/sysid/fit.hpp"
#include "spdsysid/report/evaluation.hpp"
#include "spdsysid/io/json_io.hpp"
