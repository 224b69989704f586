#include "unitrack/loss.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace unitrack {

namespace {
constexpr double kCoincidentTol = 1e-12;
}

DetectionQuality detection_quality(const std::vector<Vec2>& predictions,
                                   const std::vector<Vec2>& ground_truth,
                                   double match_radius, double alpha) {
  if (match_radius <= 0.0) throw RadiusNonPositive("match_radius must be > 0");
  DetectionQuality q;
  q.n_pred = static_cast<int>(predictions.size());
  q.n_gt = static_cast<int>(ground_truth.size());
  q.alpha = alpha;

  std::vector<std::tuple<double, int, int>> cand;
  for (int i = 0; i < q.n_pred; ++i)
    for (int j = 0; j < q.n_gt; ++j) {
      double d = distance(predictions[i], ground_truth[j]);
      if (d < match_radius) cand.emplace_back(d, i, j);
    }
  std::sort(cand.begin(), cand.end());

  std::vector<char> pred_used(q.n_pred, 0), gt_used(q.n_gt, 0);
  int matched = 0;
  for (const auto& [d, i, j] : cand) {
    (void)d;
    if (pred_used[i] || gt_used[j]) continue;
    pred_used[i] = 1;
    gt_used[j] = 1;
    ++matched;
  }
  q.fp = q.n_pred - matched;
  q.fn = q.n_gt - matched;

  double fp_ratio = q.n_pred > 0 ? double(q.fp) / q.n_pred : 0.0;
  double fn_ratio = q.n_gt > 0 ? double(q.fn) / q.n_gt : 0.0;
  q.degenerate = q.n_pred == 0 || q.n_gt == 0;
  q.factor = std::exp(-alpha * fp_ratio - alpha * fn_ratio);
  return q;
}

namespace {

double temporal_prefactor(const TrackingGraph& g, const std::vector<int>& pred,
                          const std::vector<Vec2>& positions) {
  switch (g.config.temporal_norm) {
    case TemporalNorm::Linear:
      return 1.0 / g.config.dt;
    case TemporalNorm::None:
      return 1.0;
    case TemporalNorm::Adaptive: {
      // Scale by the measured mean inter-frame displacement along chains.
      double sum = 0.0;
      int cnt = 0;
      for (size_t u = 0; u < pred.size(); ++u) {
        if (pred[u] < 0) continue;
        sum += distance(positions[u], positions[pred[u]]);
        ++cnt;
      }
      double mean = cnt > 0 ? sum / cnt : 0.0;
      return 1.0 / std::max(mean, 1e-9);
    }
  }
  return 1.0;
}

std::vector<int> argmax_predecessors(const TrackingGraph& g,
                                     const std::vector<double>& flows) {
  std::vector<int> pred(g.nodes.size(), -1);
  for (size_t u = 0; u < g.nodes.size(); ++u) {
    double best = -1.0;
    for (int e : g.in_real[u]) {
      if (flows[e] > best) {  // ties resolve to the lowest-indexed edge
        best = flows[e];
        pred[u] = g.edges[e].from;
      }
    }
  }
  return pred;
}

void fill_out_flows(const TrackingGraph& g, const std::vector<double>& flows,
                    ChainContext& ctx) {
  ctx.out_flow.assign(g.nodes.size(), 0.0);
  for (size_t u = 0; u < g.nodes.size(); ++u)
    for (int e : g.out_real[u]) ctx.out_flow[u] += flows[e];
}

}  // namespace

ChainContext build_chain_context(const TrackingGraph& g, const std::vector<double>& flows,
                                 const std::vector<Vec2>& positions) {
  const size_t n = g.nodes.size();
  ChainContext ctx;
  ctx.pred = argmax_predecessors(g, flows);
  ctx.has_vel.assign(n, 0);
  ctx.vel.assign(n, Vec2{});
  ctx.has_dvel.assign(n, 0);
  ctx.dvel.assign(n, Vec2{});
  for (size_t u = 0; u < n; ++u) {
    if (ctx.pred[u] < 0) continue;
    ctx.has_vel[u] = 1;
    ctx.vel[u] = (positions[u] - positions[ctx.pred[u]]) / g.config.dt;
  }
  for (size_t u = 0; u < n; ++u) {
    int p = ctx.pred[u];
    if (p < 0 || !ctx.has_vel[u] || !ctx.has_vel[p]) continue;
    ctx.has_dvel[u] = 1;
    ctx.dvel[u] = ctx.vel[u] - ctx.vel[p];
  }
  fill_out_flows(g, flows, ctx);
  ctx.prefactor = temporal_prefactor(g, ctx.pred, positions);
  return ctx;
}

ChainContext chain_context_with_velocities(const TrackingGraph& g,
                                           const std::vector<double>& flows,
                                           const std::vector<Vec2>& velocities,
                                           const std::vector<char>& has_vel) {
  const size_t n = g.nodes.size();
  ChainContext ctx;
  ctx.pred = argmax_predecessors(g, flows);
  ctx.has_vel = has_vel;
  ctx.vel = velocities;
  ctx.has_dvel.assign(n, 0);
  ctx.dvel.assign(n, Vec2{});
  for (size_t u = 0; u < n; ++u) {
    int p = ctx.pred[u];
    if (p < 0 || !ctx.has_vel[u] || !ctx.has_vel[p]) continue;
    ctx.has_dvel[u] = 1;
    ctx.dvel[u] = ctx.vel[u] - ctx.vel[p];
  }
  fill_out_flows(g, flows, ctx);
  ctx.prefactor = temporal_prefactor(g, ctx.pred, node_positions(g));
  return ctx;
}

double flow_loss_given(const TrackingGraph& g, const std::vector<double>& flows,
                       double quality_factor) {
  double s = 0.0;
  for (int e = 0; e < g.n_real_edges; ++e)
    s += g.edges[e].weight * flows[e] * quality_factor;
  return -s;
}

double spatial_loss_given(const TrackingGraph& g, const std::vector<double>& flows,
                          const std::vector<Vec2>& positions) {
  double s = 0.0;
  for (int e = 0; e < g.n_real_edges; ++e) {
    double d = distance(positions[g.edges[e].from], positions[g.edges[e].to]);
    s += g.edges[e].weight * d * flows[e];
  }
  return s;
}

double temporal_loss_given(const TrackingGraph& g, const ChainContext& ctx) {
  double s = 0.0;
  for (size_t u = 0; u < g.nodes.size(); ++u) {
    if (!ctx.has_dvel[u]) continue;
    s += ctx.dvel[u].norm2() * ctx.out_flow[u];
  }
  return ctx.prefactor * s;
}

LossBreakdown assemble_losses(const TrackingGraph& g, const std::vector<double>& flows,
                              const std::vector<Vec2>& positions,
                              const DetectionQuality& q, const AdaptiveWeights& w,
                              const ChainContext& ctx) {
  LossBreakdown b;
  b.flow = flow_loss_given(g, flows, q.factor);
  b.spatial = spatial_loss_given(g, flows, positions);
  b.temporal = temporal_loss_given(g, ctx);
  b.lambda_s = w.lambda_s;
  b.lambda_t = w.lambda_t;
  b.total = b.flow + b.lambda_s * b.spatial + b.lambda_t * b.temporal;
  b.n_edges = g.n_real_edges;
  b.final_loss = b.total * std::log(double(b.n_edges) + 1.0);
  b.quality_factor = q.factor;
  return b;
}

double flow_loss(const TrackingGraph& g, const DetectionQuality& q) {
  return flow_loss_given(g, g.flows, q.factor);
}

double spatial_loss(const TrackingGraph& g) {
  return spatial_loss_given(g, g.flows, node_positions(g));
}

double temporal_loss(const TrackingGraph& g, double dt) {
  if (dt <= 0.0) throw InvalidDt("dt must be > 0");
  if (g.n_frames < 3) return 0.0;
  TrackingGraph tmp = g;  // honor the explicit dt without mutating the input
  tmp.config.dt = dt;
  ChainContext ctx = build_chain_context(tmp, g.flows, node_positions(g));
  return temporal_loss_given(tmp, ctx);
}

LossBreakdown total_loss(const TrackingGraph& g, const DetectionQuality& q,
                         const AdaptiveWeights& w) {
  ChainContext ctx = build_chain_context(g, g.flows, node_positions(g));
  return assemble_losses(g, g.flows, node_positions(g), q, w, ctx);
}

GradientSet gradients_given(const TrackingGraph& g, const std::vector<double>& flows,
                            const std::vector<Vec2>& positions, const DetectionQuality& q,
                            const AdaptiveWeights& w, bool chain_pos) {
  const size_t n = g.nodes.size();
  ChainContext ctx = build_chain_context(g, flows, positions);
  const double log_factor = std::log(double(g.n_real_edges) + 1.0);

  GradientSet gs;
  gs.chain_pos = chain_pos;
  gs.d_flow.assign(g.edges.size(), 0.0);
  gs.d_pos.assign(n, Vec2{});
  gs.d_vel.assign(n, Vec2{});

  for (int e = 0; e < g.n_real_edges; ++e) {
    const GraphEdge& ed = g.edges[e];
    double d = distance(positions[ed.from], positions[ed.to]);
    double dv2 = ctx.has_dvel[ed.from] ? ctx.dvel[ed.from].norm2() : 0.0;
    gs.d_flow[e] = (-ed.weight * q.factor + w.lambda_s * ed.weight * d +
                    w.lambda_t * ctx.prefactor * dv2) *
                   log_factor;
  }

  // Spatial: both endpoints of an edge receive the unit-direction term.
  for (int e = 0; e < g.n_real_edges; ++e) {
    const GraphEdge& ed = g.edges[e];
    double d = distance(positions[ed.from], positions[ed.to]);
    if (d < kCoincidentTol) {
      if (w.lambda_s > 0.0) gs.coincident_edges.push_back(e);
      continue;  // zero subgradient at coincident endpoints
    }
    Vec2 dir = (positions[ed.from] - positions[ed.to]) / d;
    Vec2 term = w.lambda_s * log_factor * ed.weight * flows[e] * dir;
    gs.d_pos[ed.from] += term;
    gs.d_pos[ed.to] -= term;
  }

  // Temporal velocity partials: a node's velocity enters its own squared
  // difference and, negated, the differences of nodes chained onto it.
  double tcoef = 2.0 * ctx.prefactor * w.lambda_t * log_factor;
  for (size_t u = 0; u < n; ++u) {
    if (!ctx.has_dvel[u]) continue;
    Vec2 contrib = tcoef * ctx.out_flow[u] * ctx.dvel[u];
    gs.d_vel[u] += contrib;
    gs.d_vel[ctx.pred[u]] -= contrib;
  }

  if (chain_pos) {
    for (size_t u = 0; u < n; ++u) {
      if (!ctx.has_vel[u]) continue;
      Vec2 through = gs.d_vel[u] / g.config.dt;
      gs.d_pos[u] += through;
      gs.d_pos[ctx.pred[u]] -= through;
    }
  }

  return gs;
}

GradientSet gradients(const TrackingGraph& g, const DetectionQuality& q,
                      const AdaptiveWeights& w, bool chain_pos) {
  return gradients_given(g, g.flows, node_positions(g), q, w, chain_pos);
}

}  // namespace unitrack
