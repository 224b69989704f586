#pragma once

#include <string>
#include <vector>

#include "unitrack/flow.hpp"
#include "unitrack/graph.hpp"
#include "unitrack/loss.hpp"

namespace unitrack {

struct GradCheckConfig {
  int trials = 100;
  uint64_t seed = 42;
  double h = 1e-6;
  double rel_tol = 1e-5;
  double abs_tol = 1e-8;
  bool fault_spatial_sign = false;  // negative control: flip the spatial
                                    // position gradient before comparing
};

struct GradCheckReport {
  int trials = 0;
  int checks = 0;
  double max_rel_err = 0.0;
  std::string worst_component;
  int bound_violations = 0;  // |flow part of dL/df| > w before scaling
  bool pass = false;
};

/// Random window graph for gradient checking: up to `max_objects` smooth
/// trajectories over 3..5 frames, randomized flows on the per-node
/// simplices, randomized quality factor and component weights.
struct RandomGraphSpec {
  int max_objects = 5;
  uint64_t seed = 0;
};

TrackingGraph random_window_graph(const RandomGraphSpec& spec, std::vector<double>& flows,
                                  DetectionQuality& quality);

/// Central finite differences of the log-normalized loss versus the
/// analytic GradientSet: flows, positions (chained), velocities — under
/// flow-only, flow+spatial, flow+temporal, and mixed weight configurations.
GradCheckReport run_gradcheck(const GradCheckConfig& cfg);

}  // namespace unitrack
