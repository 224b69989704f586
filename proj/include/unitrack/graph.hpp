#pragma once

#include <optional>
#include <vector>

#include "unitrack/matrix.hpp"
#include "unitrack/types.hpp"

namespace unitrack {

enum class EdgeKind { Real, Source, Sink };

struct GraphNode {
  int frame = 0;      // window-local frame index
  int det_frame = 0;  // original frame stamp
  int det_index = 0;  // index within its frame
  Vec2 pos;
  double confidence = 1.0;
  std::vector<double> embedding;
  std::optional<int> gt_id;
};

struct GraphEdge {
  int from = -1;  // node index; source/sink use the virtual ids
  int to = -1;
  double weight = 0.0;
  EdgeKind kind = EdgeKind::Real;
};

/// Windowed tracking graph: detection nodes per frame, directed edges
/// between consecutive frames, one virtual source (birth flow) and one
/// virtual sink (termination flow). Immutable after construction; flow
/// updates are carried in separate vectors aligned with `edges`.
struct TrackingGraph {
  GraphConfig config;
  int n_frames = 0;
  std::vector<GraphNode> nodes;  // real nodes, sorted by (frame, det_index)
  std::vector<GraphEdge> edges;  // real edges first, then sink, then source
  std::vector<double> flows;     // per edge, initialized by init_flows
  std::vector<int> balance;      // per real node; +-1/0 from ground truth

  int n_real_edges = 0;
  std::vector<std::vector<int>> out_real;  // per node: real edge indices
  std::vector<std::vector<int>> in_real;
  std::vector<int> sink_edge;    // per node: its sink edge index
  std::vector<int> source_edge;  // per node: its source edge index

  Matrix spatial_adj;   // proximity within each frame pair, whole window
  Matrix temporal_adj;  // f*w mirrored over consecutive-frame node pairs

  int source_id() const { return static_cast<int>(nodes.size()); }
  int sink_id() const { return static_cast<int>(nodes.size()) + 1; }

  /// Deterministic size accounting used by sweep reports.
  size_t approx_bytes() const;
};

/// Similarity-weight of a candidate association between consecutive-frame
/// detections: beta * cos01(embeddings) + (1-beta) * exp(-d^2 / (2 sigma_w^2)).
double edge_weight(const Detection& a, const Detection& b, const GraphConfig& cfg);

/// Cosine similarity mapped from [-1,1] to [0,1]; zero vectors map to 0.5.
double cos_sim01(const std::vector<double>& a, const std::vector<double>& b);

double adjacency_kernel(double dist, const AdjacencySpec& spec);

/// Pairwise adjacency of a point set under the configured mode. Symmetric,
/// zero diagonal; a single position yields the 1x1 zero matrix.
Matrix spatial_adjacency(const std::vector<Vec2>& positions, const AdjacencySpec& spec);

/// L = D - A. Requires a symmetric nonnegative matrix with zero diagonal.
Matrix laplacian(const Matrix& adjacency);

/// Temporal adjacency rebuilt from the given flows: A[u][v] = f_uv * w_uv
/// mirrored across each consecutive-frame edge.
Matrix temporal_adjacency_from(const TrackingGraph& g, const std::vector<double>& flows);

/// Assemble the window graph from detections grouped by frame. Creates all
/// consecutive-frame candidate edges (optionally pruned by gating_radius),
/// computes edge weights, initializes flows, and populates the adjacency
/// matrices.
TrackingGraph build_graph(const std::vector<std::vector<Detection>>& frames,
                          const GraphConfig& cfg);

std::vector<Vec2> node_positions(const TrackingGraph& g);

}  // namespace unitrack
