#pragma once

#include <vector>

#include "unitrack/graph.hpp"
#include "unitrack/loss.hpp"
#include "unitrack/spectral.hpp"

namespace unitrack {

/// Optimizable flow parameterization. Each real node owns a softmax over
/// its outgoing edges (real candidates plus its sink edge), so outgoing
/// flow sums to 1 by construction. Source-edge flows are derived, topping
/// incoming flow up to 1 where real inflow falls short.
struct FlowState {
  std::vector<double> logits;  // per edge; source entries unused
  std::vector<double> flows;   // per edge
  double eta = 0.01;
  double tau = 0.1;
  int step = 0;
};

struct ConservationReport {
  std::vector<double> residuals;  // per real node: out - in - b
  double max_abs = 0.0;
  bool satisfied = true;
  double tol = 1e-6;
};

struct DecodedWindow {
  struct Link {
    int from = -1;  // node indices within the window graph
    int to = -1;
  };
  std::vector<Link> links;
  std::vector<int> births;  // nodes with no incoming link
  std::vector<int> deaths;  // nodes decoded onto their sink edge
};

struct DescendOptions {
  double eta = 0.01;
  double eta_decay = 1.0;  // per-step multiplier; 1 keeps eta constant
  WeightsMode mode = WeightsMode::Adaptive;
  double fixed_lambda_s = 0.5;
  double fixed_lambda_t = 0.5;
  bool record_flow_history = false;
  bool check_divergence = true;
  int lipschitz_samples = 8;  // 0 disables the eta-vs-2/L guard
  uint64_t lipschitz_seed = 17;
};

struct DescendResult {
  FlowState state;
  std::vector<LossBreakdown> trajectory;  // loss at the start of each step
  std::vector<std::vector<double>> flow_history;
  double lipschitz_estimate = 0.0;
};

/// Per-node softmax of logits/tau (numerically stable form).
std::vector<double> softmax_flows(const std::vector<double>& logits, double tau);

/// logits = log(w + 1e-9) on real edges, log(sink_prior) on sink edges;
/// flows from the per-node softmax, then derived source top-up.
FlowState init_flows(const TrackingGraph& g, double tau);

void apply_source_topup(const TrackingGraph& g, std::vector<double>& flows);

/// Recompute flows of every node softmax from the state's logits.
void refresh_flows(const TrackingGraph& g, FlowState& state);

ConservationReport conservation_residual(const TrackingGraph& g,
                                         const std::vector<double>& flows,
                                         const std::vector<int>& balance,
                                         double tol = 1e-6);

/// Birth/death labels from ground-truth identities: +1 on a track's first
/// in-window frame, -1 on its last, 0 otherwise (single-frame tracks keep
/// the +1). Requires gt_id on every node.
std::vector<int> balance_from_gt(const TrackingGraph& g);

/// Chain the per-flow gradient through each node's softmax Jacobian into
/// logit space. Sink logits participate; source edges carry no parameters.
std::vector<double> logit_gradients(const TrackingGraph& g, const FlowState& state,
                                    const std::vector<double>& d_flow);

/// Empirical Lipschitz estimate of the logit-space gradient: max ratio
/// ||grad(a)-grad(b)|| / ||a-b|| over sampled logit pairs near the state.
double estimate_lipschitz(const TrackingGraph& g, const DetectionQuality& q,
                          const AdaptiveWeights& w, int samples,
                          const FlowState& state, uint64_t seed = 17);

/// Gradient-descent loop with per-step adaptive-weight recomputation.
/// Raises DivergenceDetected when eta is too large for the local gradient
/// Lipschitz constant (eta >= 2/L-hat) or when the final loss overshoots
/// the initial loss by 10x its magnitude.
DescendResult descend(const TrackingGraph& g, const DetectionQuality& q, int steps,
                      const GraphConfig& cfg, const DescendOptions& opt = {});

/// Hard one-to-one assignment per frame pair maximizing sum of log-flows,
/// with the sink as per-node fallback.
DecodedWindow decode_assignments(const FlowState& state, const TrackingGraph& g);

/// Hard 0/1 flow vector realizing a decoded assignment (links and window-end
/// continuations carry 1, sinks absorb deaths, source tops up births).
std::vector<double> hard_flows_from_decode(const TrackingGraph& g,
                                           const DecodedWindow& decoded);

/// Hard ground-truth flows: 1 on same-identity consecutive edges.
std::vector<double> gt_hard_flows(const TrackingGraph& g);

}  // namespace unitrack
