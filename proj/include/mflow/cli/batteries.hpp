#pragma once

// Fixed function batteries shared by the `check` subcommands and the
// acceptance suite.

#include <vector>

#include "mflow/flow.hpp"

namespace mflow::cli {

/// Five cylinder functions with bounded outer maps and mixed inner functions.
std::vector<CylinderFunction> cylinder_battery(int d);

/// Four (u, v) pairs drawn from cylinder_battery.
std::vector<std::pair<CylinderFunction, CylinderFunction>> ibp_pairs(int d);

/// Twenty smooth functions of one or two coordinates.
std::vector<ScalarFunction> lsi_battery();

struct HyperCase {
  ScalarFunction u;
  double t = 0.0;
  double r = 2.0;
};

/// Ten single-mode (u, t, r) combinations.
std::vector<HyperCase> hyper_battery();

}  // namespace mflow::cli
