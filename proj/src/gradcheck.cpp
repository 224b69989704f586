#include "unitrack/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "unitrack/rng.hpp"
#include "unitrack/scenario.hpp"

namespace unitrack {

namespace {

// Finite-difference reference evaluated in long double. Reimplements the
// loss independently of loss.cpp at higher precision, so central-difference
// roundoff at the pinned h = 1e-6 stays well below the 1e-8 absolute
// tolerance even for window losses in the hundreds.
long double eval_loss_ld(const TrackingGraph& g, const std::vector<double>& flows,
                         const std::vector<Vec2>& positions, const DetectionQuality& q,
                         const AdaptiveWeights& w, const std::vector<Vec2>* vel_override,
                         const std::vector<char>* has_vel_override) {
  const size_t n = g.nodes.size();
  const long double dt = g.config.dt;

  // Argmax predecessor chains, identical tie rule to the production path.
  std::vector<int> pred(n, -1);
  for (size_t u = 0; u < n; ++u) {
    double best = -1.0;
    for (int e : g.in_real[u]) {
      if (flows[e] > best) {
        best = flows[e];
        pred[u] = g.edges[e].from;
      }
    }
  }

  std::vector<long double> vx(n, 0.0L), vy(n, 0.0L);
  std::vector<char> hv(n, 0);
  if (vel_override) {
    for (size_t u = 0; u < n; ++u) {
      hv[u] = (*has_vel_override)[u];
      vx[u] = (*vel_override)[u].x;
      vy[u] = (*vel_override)[u].y;
    }
  } else {
    for (size_t u = 0; u < n; ++u) {
      if (pred[u] < 0) continue;
      hv[u] = 1;
      vx[u] = ((long double)positions[u].x - positions[pred[u]].x) / dt;
      vy[u] = ((long double)positions[u].y - positions[pred[u]].y) / dt;
    }
  }

  long double flow_sum = 0.0L, spatial = 0.0L, temporal = 0.0L;
  for (int e = 0; e < g.n_real_edges; ++e) {
    const GraphEdge& ed = g.edges[e];
    long double dx = (long double)positions[ed.from].x - positions[ed.to].x;
    long double dy = (long double)positions[ed.from].y - positions[ed.to].y;
    flow_sum += (long double)ed.weight * flows[e];
    spatial += (long double)ed.weight * sqrtl(dx * dx + dy * dy) * flows[e];
  }
  for (size_t u = 0; u < n; ++u) {
    int p = pred[u];
    if (p < 0 || !hv[u] || !hv[p]) continue;
    long double dvx = vx[u] - vx[p], dvy = vy[u] - vy[p];
    long double out = 0.0L;
    for (int e : g.out_real[u]) out += flows[e];
    temporal += (dvx * dvx + dvy * dvy) * out;
  }
  long double prefactor =
      g.config.temporal_norm == TemporalNorm::None ? 1.0L : 1.0L / dt;
  temporal *= prefactor;

  long double total = -flow_sum * (long double)q.factor +
                      (long double)w.lambda_s * spatial +
                      (long double)w.lambda_t * temporal;
  return total * logl((long double)g.n_real_edges + 1.0L);
}

struct ErrTracker {
  double max_rel = 0.0;
  std::string worst;
  int checks = 0;

  void record(double analytic, double numeric, double abs_tol, const std::string& what) {
    ++checks;
    double diff = std::abs(analytic - numeric);
    if (diff < abs_tol) return;
    double rel = diff / std::max({std::abs(analytic), std::abs(numeric), abs_tol});
    if (rel > max_rel) {
      max_rel = rel;
      worst = what;
    }
  }
};

}  // namespace

TrackingGraph random_window_graph(const RandomGraphSpec& spec, std::vector<double>& flows,
                                  DetectionQuality& quality) {
  Rng rng(spec.seed);
  const int n_frames = 3 + static_cast<int>(rng.uniform_int(3));  // 3..5
  const int n_objects = 2 + static_cast<int>(rng.uniform_int(spec.max_objects - 1));

  GraphConfig cfg;
  const double dts[] = {0.5, 1.0};
  cfg.dt = dts[rng.uniform_int(2)];

  std::vector<std::vector<Detection>> frames(n_frames);
  for (int obj = 0; obj < n_objects; ++obj) {
    Vec2 p{rng.uniform(0.25, 0.75), rng.uniform(0.25, 0.75)};
    std::vector<double> emb = rng.unit_vector(kEmbedDim);
    for (int f = 0; f < n_frames; ++f) {
      Detection d;
      d.frame = f;
      d.position = p;
      d.embedding = emb;
      d.gt_id = obj;
      frames[f].push_back(d);
      p += Vec2{rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02)};
    }
  }

  // Keep edge endpoints separated: the spatial norm's curvature grows as
  // 1/d, and the FD truncation term must stay below the absolute tolerance.
  TrackingGraph g = build_graph(frames, cfg);
  bool retry = false;
  for (int e = 0; e < g.n_real_edges; ++e)
    if (distance(g.nodes[g.edges[e].from].pos, g.nodes[g.edges[e].to].pos) < 5e-3)
      retry = true;
  if (retry) {
    RandomGraphSpec next = spec;
    next.seed = spec.seed + 0x9E37;
    return random_window_graph(next, flows, quality);
  }

  // Random point on each node's outgoing simplex, with incoming flows kept
  // apart so the argmax predecessor is stable under the FD step.
  FlowState st = init_flows(g, 1.0);
  for (;;) {
    for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
      if (g.edges[e].kind == EdgeKind::Source) continue;
      st.logits[e] = rng.gaussian();
    }
    refresh_flows(g, st);
    bool ok = true;
    for (size_t u = 0; u < g.nodes.size(); ++u) {
      std::vector<double> in;
      for (int e : g.in_real[u]) in.push_back(st.flows[e]);
      std::sort(in.rbegin(), in.rend());
      if (in.size() >= 2 && in[0] - in[1] < 1e-3) ok = false;
    }
    if (ok) break;
  }
  flows = st.flows;

  quality = DetectionQuality{};
  quality.n_pred = n_objects * n_frames;
  quality.n_gt = quality.n_pred;
  quality.fp = static_cast<int>(rng.uniform_int(3));
  quality.fn = static_cast<int>(rng.uniform_int(3));
  quality.alpha = 0.9;
  quality.factor = std::exp(-0.9 * double(quality.fp) / quality.n_pred -
                            0.9 * double(quality.fn) / quality.n_gt);
  return g;
}

GradCheckReport run_gradcheck(const GradCheckConfig& cfg) {
  GradCheckReport rep;
  rep.trials = cfg.trials;
  ErrTracker err;

  for (int trial = 0; trial < cfg.trials; ++trial) {
    RandomGraphSpec spec;
    spec.seed = Rng::derive(cfg.seed, trial);
    std::vector<double> flows;
    DetectionQuality q;
    TrackingGraph g = random_window_graph(spec, flows, q);
    std::vector<Vec2> pos = node_positions(g);
    Rng wrng(Rng::derive(cfg.seed, 1000000 + trial));
    double mix = wrng.uniform(0.2, 0.8);

    AdaptiveWeights configs[4];
    configs[0].lambda_s = 0.0, configs[0].lambda_t = 0.0;  // flow only
    configs[1].lambda_s = 1.0, configs[1].lambda_t = 0.0;  // + spatial
    configs[2].lambda_s = 0.0, configs[2].lambda_t = 1.0;  // + temporal
    configs[3].lambda_s = mix, configs[3].lambda_t = 1.0 - mix;

    // Bound: the flow component of dL/df never exceeds the edge weight.
    for (int e = 0; e < g.n_real_edges; ++e)
      if (g.edges[e].weight * q.factor > g.edges[e].weight + 1e-15)
        ++rep.bound_violations;

    for (const auto& w : configs) {
      GradientSet gs = gradients_given(g, flows, pos, q, w, true);
      if (cfg.fault_spatial_sign && w.lambda_s > 0.0) {
        // Negative control: corrupt the analytic side before comparing.
        for (auto& v : gs.d_pos) v = v * -1.0;
      }

      for (int e = 0; e < g.n_real_edges; ++e) {
        std::vector<double> fp = flows, fm = flows;
        fp[e] = flows[e] + cfg.h;
        fm[e] = flows[e] - cfg.h;
        double denom = fp[e] - fm[e];
        long double lp = eval_loss_ld(g, fp, pos, q, w, nullptr, nullptr);
        long double lm = eval_loss_ld(g, fm, pos, q, w, nullptr, nullptr);
        err.record(gs.d_flow[e], double((lp - lm) / denom), cfg.abs_tol, "d_flow");
      }

      for (size_t u = 0; u < g.nodes.size(); ++u) {
        for (int axis = 0; axis < 2; ++axis) {
          std::vector<Vec2> pp = pos, pm = pos;
          double& cp = axis == 0 ? pp[u].x : pp[u].y;
          double& cm = axis == 0 ? pm[u].x : pm[u].y;
          double denom = (cp + cfg.h) - (cm - cfg.h);
          cp += cfg.h;
          cm -= cfg.h;
          long double lp = eval_loss_ld(g, flows, pp, q, w, nullptr, nullptr);
          long double lm = eval_loss_ld(g, flows, pm, q, w, nullptr, nullptr);
          double analytic = axis == 0 ? gs.d_pos[u].x : gs.d_pos[u].y;
          err.record(analytic, double((lp - lm) / denom), cfg.abs_tol, "d_pos");
        }
      }

      {
        ChainContext ctx = build_chain_context(g, flows, pos);
        for (size_t u = 0; u < g.nodes.size(); ++u) {
          if (!ctx.has_vel[u]) continue;
          for (int axis = 0; axis < 2; ++axis) {
            std::vector<Vec2> vp = ctx.vel, vm = ctx.vel;
            double& cp = axis == 0 ? vp[u].x : vp[u].y;
            double& cm = axis == 0 ? vm[u].x : vm[u].y;
            double denom = (cp + cfg.h) - (cm - cfg.h);
            cp += cfg.h;
            cm -= cfg.h;
            long double lp = eval_loss_ld(g, flows, pos, q, w, &vp, &ctx.has_vel);
            long double lm = eval_loss_ld(g, flows, pos, q, w, &vm, &ctx.has_vel);
            double analytic = axis == 0 ? gs.d_vel[u].x : gs.d_vel[u].y;
            err.record(analytic, double((lp - lm) / denom), cfg.abs_tol, "d_vel");
          }
        }
      }
    }
  }

  rep.checks = err.checks;
  rep.max_rel_err = err.max_rel;
  rep.worst_component = err.worst;
  rep.pass = rep.max_rel_err < cfg.rel_tol && rep.bound_violations == 0;
  return rep;
}

}  // namespace unitrack
