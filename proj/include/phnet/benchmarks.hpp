#pragma once

#include <string>
#include <vector>

#include "phnet/scenario.hpp"

namespace phnet {

/// Single unit-area edge on [-5, 5] (local x in [0, 10]), rho0 = 2 - sgn(x),
/// m0 = 0, closed ends, p = rho^2 / 2, lambda = 0, T = 2.
Scenario dam_break_scenario(double dx = 0.05, int q = 0, double dt = 0.0005, int reduced_points = 0);
/// Q3/P4 variant with a five-point reduced rule, dx = 0.1, dt = 0.005.
Scenario dam_break_q3_scenario();

/// Three unit-length edges meeting at one junction: w1 = (n1, n2),
/// w2 = (n2, n3), w3 = (n2, n4).
NetworkTopology y_network(double area1 = 1.0, double area2 = 0.5, double area3 = 0.75);
/// Driven Y network with density, flow and pressure-only density ports.
Scenario y_network_scenario();
/// Constant state at rest on the Y network with closed ports, 100 steps.
Scenario equilibrium_scenario();

/// Synthetic gas network (not a published instance): six ports n1..n6,
/// four junctions j1..j4 and one loop, 195 km of pipe.
NetworkTopology pipeline_network();
/// Isothermal pipeline run with ramped densities at n1, n2, n4, fixed
/// densities at n5, n6 and a 100 kg/s draw at n3, from the steady state.
Scenario pipeline_scenario(double lambda);

/// Writes the shipped files for "dam-break", "pipeline", "y-network",
/// "equilibrium" or "all" into `dir`; returns the paths written. Throws Error
/// for an unknown name.
std::vector<std::string> write_benchmark(const std::string& which, const std::string& dir);

}  // namespace phnet
