#pragma once

#include <vector>

#include "unitrack/graph.hpp"
#include "unitrack/spectral.hpp"

namespace unitrack {

/// Detection-quality factor exp(-alpha*fp/n_pred - alpha*fn/n_gt).
/// Counts are treated as constants (stop-gradient) everywhere downstream.
struct DetectionQuality {
  int fp = 0;
  int fn = 0;
  int n_pred = 0;
  int n_gt = 0;
  double alpha = 0.9;
  double factor = 1.0;
  bool degenerate = false;  // one side empty; its error ratio taken as 0
};

/// Greedy one-to-one matching by ascending distance under match_radius;
/// unmatched predictions are FP, unmatched ground truth are FN.
DetectionQuality detection_quality(const std::vector<Vec2>& predictions,
                                   const std::vector<Vec2>& ground_truth,
                                   double match_radius, double alpha);

struct LossBreakdown {
  double flow = 0.0;
  double spatial = 0.0;
  double temporal = 0.0;
  double lambda_s = 0.0;
  double lambda_t = 0.0;
  double total = 0.0;
  int n_edges = 0;        // real edges only
  double final_loss = 0.0;  // total * log(n_edges + 1)
  double quality_factor = 1.0;
};

struct GradientSet {
  std::vector<double> d_flow;  // per edge; zero on virtual edges
  std::vector<Vec2> d_pos;     // per real node
  std::vector<Vec2> d_vel;     // per real node; zero where no velocity
  bool chain_pos = false;
  std::vector<int> coincident_edges;  // spatial subgradient zeroed (d < 1e-12)
};

/// Velocity bookkeeping along the current argmax-predecessor chain of each
/// node, recomputed at every evaluation. A node's velocity exists once its
/// chain is two frames deep; the velocity difference needs three.
struct ChainContext {
  std::vector<int> pred;       // predecessor node or -1
  std::vector<char> has_vel;
  std::vector<Vec2> vel;
  std::vector<char> has_dvel;
  std::vector<Vec2> dvel;      // vel[u] - vel[pred[u]]
  std::vector<double> out_flow;  // sum of real outgoing flows per node
  double prefactor = 0.0;        // temporal normalization constant
};

ChainContext build_chain_context(const TrackingGraph& g, const std::vector<double>& flows,
                                 const std::vector<Vec2>& positions);

/// Same chains/out-flows but with externally supplied velocities (values
/// only; which nodes carry one still follows the flow-derived chains).
ChainContext chain_context_with_velocities(const TrackingGraph& g,
                                           const std::vector<double>& flows,
                                           const std::vector<Vec2>& velocities,
                                           const std::vector<char>& has_vel);

// Loss components over explicit flow/position vectors. Edge weights stay
// frozen at their graph values: they stand in for externally learned
// attention and do not receive gradients.
double flow_loss_given(const TrackingGraph& g, const std::vector<double>& flows,
                       double quality_factor);
double spatial_loss_given(const TrackingGraph& g, const std::vector<double>& flows,
                          const std::vector<Vec2>& positions);
double temporal_loss_given(const TrackingGraph& g, const ChainContext& ctx);

LossBreakdown assemble_losses(const TrackingGraph& g, const std::vector<double>& flows,
                              const std::vector<Vec2>& positions,
                              const DetectionQuality& q, const AdaptiveWeights& w,
                              const ChainContext& ctx);

// Spec-surface operations over the graph's own flows.
double flow_loss(const TrackingGraph& g, const DetectionQuality& q);
double spatial_loss(const TrackingGraph& g);
double temporal_loss(const TrackingGraph& g, double dt);
LossBreakdown total_loss(const TrackingGraph& g, const DetectionQuality& q,
                         const AdaptiveWeights& w);

/// Analytic partials of the log-normalized total loss with respect to
/// flows, positions, and velocities. With chain_pos the velocity partials
/// are propagated into positions via v_t = (p_t - p_{t-1})/dt.
GradientSet gradients(const TrackingGraph& g, const DetectionQuality& q,
                      const AdaptiveWeights& w, bool chain_pos);

GradientSet gradients_given(const TrackingGraph& g, const std::vector<double>& flows,
                            const std::vector<Vec2>& positions, const DetectionQuality& q,
                            const AdaptiveWeights& w, bool chain_pos);

}  // namespace unitrack
