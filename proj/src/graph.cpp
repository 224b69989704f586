#include "unitrack/graph.hpp"

#include <algorithm>
#include <cmath>

#include "unitrack/flow.hpp"

namespace unitrack {

double cos_sim01(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("embedding dims differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na < 1e-300 || nb < 1e-300) return 0.5;
  double c = dot / std::sqrt(na * nb);
  c = std::clamp(c, -1.0, 1.0);
  return 0.5 * (c + 1.0);
}

namespace {

double pair_weight(const Vec2& pa, const std::vector<double>& ea, const Vec2& pb,
                   const std::vector<double>& eb, const GraphConfig& cfg) {
  double d2 = (pa - pb).norm2();
  double geo = std::exp(-d2 / (2.0 * cfg.sigma_w * cfg.sigma_w));
  double beta = cfg.embed_weight_mix;
  double w = beta * cos_sim01(ea, eb) + (1.0 - beta) * geo;
  return std::clamp(w, 0.0, 1.0);
}

}  // namespace

double edge_weight(const Detection& a, const Detection& b, const GraphConfig& cfg) {
  return pair_weight(a.position, a.embedding, b.position, b.embedding, cfg);
}

double adjacency_kernel(double dist, const AdjacencySpec& spec) {
  if (spec.mode == AdjacencyMode::HardThreshold)
    return dist < spec.radius ? 1.0 : 0.0;
  return 1.0 / (1.0 + std::exp(-spec.k * (spec.d0 - dist)));
}

Matrix spatial_adjacency(const std::vector<Vec2>& positions, const AdjacencySpec& spec) {
  const int n = static_cast<int>(positions.size());
  Matrix a(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double v = adjacency_kernel(distance(positions[i], positions[j]), spec);
      a.at(i, j) = v;
      a.at(j, i) = v;
    }
  return a;
}

Matrix laplacian(const Matrix& adjacency) {
  if (!adjacency.is_symmetric()) throw AsymmetricInput("adjacency must be symmetric");
  const int n = adjacency.n();
  Matrix l(n);
  for (int i = 0; i < n; ++i) {
    double deg = 0.0;
    for (int j = 0; j < n; ++j) deg += adjacency.at(i, j);
    for (int j = 0; j < n; ++j) l.at(i, j) = -adjacency.at(i, j);
    l.at(i, i) = deg - adjacency.at(i, i);
  }
  return l;
}

Matrix temporal_adjacency_from(const TrackingGraph& g, const std::vector<double>& flows) {
  const int n = static_cast<int>(g.nodes.size());
  Matrix a(n);
  for (int e = 0; e < g.n_real_edges; ++e) {
    double v = flows[e] * g.edges[e].weight;
    a.at(g.edges[e].from, g.edges[e].to) = v;
    a.at(g.edges[e].to, g.edges[e].from) = v;
  }
  return a;
}

namespace {

std::vector<int> balance_labels(const TrackingGraph& g) {
  // +1 on a track's first in-window frame, -1 on its last; a track seen in
  // a single frame keeps the +1 (birth with immediate sink termination).
  std::vector<int> b(g.nodes.size(), 0);
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    if (!g.nodes[i].gt_id) continue;
    int id = *g.nodes[i].gt_id;
    int fr = g.nodes[i].frame;
    bool seen_before = false, seen_after = false;
    for (size_t j = 0; j < g.nodes.size(); ++j) {
      if (j == i || !g.nodes[j].gt_id || *g.nodes[j].gt_id != id) continue;
      if (g.nodes[j].frame < fr) seen_before = true;
      if (g.nodes[j].frame > fr) seen_after = true;
    }
    if (!seen_before)
      b[i] = 1;
    else if (!seen_after)
      b[i] = -1;
  }
  return b;
}

}  // namespace

TrackingGraph build_graph(const std::vector<std::vector<Detection>>& frames,
                          const GraphConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(frames.size()) < 2) throw EmptyWindow("need at least 2 frames");
  if (static_cast<int>(frames.size()) > cfg.window)
    throw ConfigError("frame count exceeds configured window");

  TrackingGraph g;
  g.config = cfg;
  g.n_frames = static_cast<int>(frames.size());

  size_t embed_dim = 0;
  bool embed_dim_set = false;
  for (size_t f = 0; f < frames.size(); ++f) {
    for (size_t k = 0; k < frames[f].size(); ++k) {
      const Detection& d = frames[f][k];
      if (d.frame < 0) throw ConfigError("detection frame index must be >= 0");
      if (d.confidence < 0.0 || d.confidence > 1.0)
        throw ConfigError("detection confidence must lie in [0,1]");
      if (!embed_dim_set) {
        embed_dim = d.embedding.size();
        embed_dim_set = true;
      } else if (d.embedding.size() != embed_dim) {
        throw DimensionMismatch("embedding dims differ within the sequence");
      }
      GraphNode node;
      node.frame = static_cast<int>(f);
      node.det_frame = d.frame;
      node.det_index = static_cast<int>(k);
      node.pos = d.position;
      node.confidence = d.confidence;
      node.embedding = d.embedding;
      node.gt_id = d.gt_id;
      g.nodes.push_back(std::move(node));
    }
  }

  const int n = static_cast<int>(g.nodes.size());

  // Real edges: all consecutive-frame pairs, optionally gated by distance.
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (g.nodes[v].frame != g.nodes[u].frame + 1) continue;
      double d = distance(g.nodes[u].pos, g.nodes[v].pos);
      if (cfg.gating_radius && d >= *cfg.gating_radius) continue;
      double w = pair_weight(g.nodes[u].pos, g.nodes[u].embedding, g.nodes[v].pos,
                             g.nodes[v].embedding, cfg);
      g.edges.push_back({u, v, w, EdgeKind::Real});
    }
  }
  g.n_real_edges = static_cast<int>(g.edges.size());

  g.sink_edge.assign(n, -1);
  g.source_edge.assign(n, -1);
  for (int u = 0; u < n; ++u) {
    g.sink_edge[u] = static_cast<int>(g.edges.size());
    g.edges.push_back({u, g.sink_id(), 0.0, EdgeKind::Sink});
  }
  for (int u = 0; u < n; ++u) {
    g.source_edge[u] = static_cast<int>(g.edges.size());
    g.edges.push_back({g.source_id(), u, 0.0, EdgeKind::Source});
  }

  g.out_real.assign(n, {});
  g.in_real.assign(n, {});
  for (int e = 0; e < g.n_real_edges; ++e) {
    g.out_real[g.edges[e].from].push_back(e);
    g.in_real[g.edges[e].to].push_back(e);
  }

  FlowState st = init_flows(g, cfg.tau);
  g.flows = st.flows;

  // Spatial proximity inside every frame pair: same-frame crowding plus
  // cross-frame displacement, assembled into one window-level matrix.
  g.spatial_adj = Matrix(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(g.nodes[i].frame - g.nodes[j].frame) > 1) continue;
      double v = adjacency_kernel(distance(g.nodes[i].pos, g.nodes[j].pos), cfg.adjacency);
      g.spatial_adj.at(i, j) = v;
      g.spatial_adj.at(j, i) = v;
    }
  g.temporal_adj = temporal_adjacency_from(g, g.flows);

  bool all_gt = !g.nodes.empty();
  for (const auto& node : g.nodes)
    if (!node.gt_id) all_gt = false;
  g.balance = all_gt ? balance_labels(g) : std::vector<int>(n, 0);

  return g;
}

std::vector<Vec2> node_positions(const TrackingGraph& g) {
  std::vector<Vec2> p;
  p.reserve(g.nodes.size());
  for (const auto& node : g.nodes) p.push_back(node.pos);
  return p;
}

size_t TrackingGraph::approx_bytes() const {
  size_t bytes = 0;
  for (const auto& node : nodes)
    bytes += sizeof(GraphNode) + node.embedding.size() * sizeof(double);
  bytes += edges.size() * (sizeof(GraphEdge) + 2 * sizeof(double));  // + flow + logit
  bytes += 2 * nodes.size() * nodes.size() * sizeof(double);         // adjacency pair
  return bytes;
}

}  // namespace unitrack
