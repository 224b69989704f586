#include "unitrack/flow.hpp"

#include <algorithm>
#include <cmath>

#include "unitrack/hungarian.hpp"
#include "unitrack/rng.hpp"

namespace unitrack {

std::vector<double> softmax_flows(const std::vector<double>& logits, double tau) {
  std::vector<double> f(logits.size());
  if (logits.empty()) return f;
  double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    f[i] = std::exp((logits[i] - m) / tau);
    z += f[i];
  }
  for (auto& v : f) v /= z;
  return f;
}

namespace {

void node_softmax(const TrackingGraph& g, const std::vector<double>& logits, double tau,
                  std::vector<double>& flows) {
  for (size_t u = 0; u < g.nodes.size(); ++u) {
    std::vector<double> l;
    l.reserve(g.out_real[u].size() + 1);
    for (int e : g.out_real[u]) l.push_back(logits[e]);
    l.push_back(logits[g.sink_edge[u]]);
    std::vector<double> f = softmax_flows(l, tau);
    size_t k = 0;
    for (int e : g.out_real[u]) flows[e] = f[k++];
    flows[g.sink_edge[u]] = f[k];
  }
}

}  // namespace

void apply_source_topup(const TrackingGraph& g, std::vector<double>& flows) {
  for (size_t u = 0; u < g.nodes.size(); ++u) {
    double in = 0.0;
    for (int e : g.in_real[u]) in += flows[e];
    flows[g.source_edge[u]] = std::max(0.0, 1.0 - in);
  }
}

FlowState init_flows(const TrackingGraph& g, double tau) {
  FlowState st;
  st.tau = tau;
  st.logits.assign(g.edges.size(), 0.0);
  st.flows.assign(g.edges.size(), 0.0);
  for (int e = 0; e < g.n_real_edges; ++e)
    st.logits[e] = std::log(g.edges[e].weight + 1e-9);
  for (size_t u = 0; u < g.nodes.size(); ++u)
    st.logits[g.sink_edge[u]] = std::log(g.config.sink_prior);
  refresh_flows(g, st);
  return st;
}

void refresh_flows(const TrackingGraph& g, FlowState& state) {
  node_softmax(g, state.logits, state.tau, state.flows);
  apply_source_topup(g, state.flows);
}

ConservationReport conservation_residual(const TrackingGraph& g,
                                         const std::vector<double>& flows,
                                         const std::vector<int>& balance, double tol) {
  if (balance.size() != g.nodes.size())
    throw MissingBalance("balance vector does not cover all nodes");
  ConservationReport r;
  r.tol = tol;
  r.residuals.assign(g.nodes.size(), 0.0);
  for (size_t u = 0; u < g.nodes.size(); ++u) {
    double out = flows[g.sink_edge[u]];
    for (int e : g.out_real[u]) out += flows[e];
    double in = flows[g.source_edge[u]];
    for (int e : g.in_real[u]) in += flows[e];
    r.residuals[u] = out - in - balance[u];
    r.max_abs = std::max(r.max_abs, std::abs(r.residuals[u]));
  }
  r.satisfied = r.max_abs < tol;
  return r;
}

std::vector<int> balance_from_gt(const TrackingGraph& g) {
  for (const auto& node : g.nodes)
    if (!node.gt_id) throw MissingGtId("ground-truth id missing on a detection");
  std::vector<int> b(g.nodes.size(), 0);
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    int id = *g.nodes[i].gt_id;
    bool before = false, after = false;
    for (size_t j = 0; j < g.nodes.size(); ++j) {
      if (j == i || *g.nodes[j].gt_id != id) continue;
      if (g.nodes[j].frame < g.nodes[i].frame) before = true;
      if (g.nodes[j].frame > g.nodes[i].frame) after = true;
    }
    if (!before)
      b[i] = 1;
    else if (!after)
      b[i] = -1;
  }
  return b;
}

std::vector<double> logit_gradients(const TrackingGraph& g, const FlowState& state,
                                    const std::vector<double>& d_flow) {
  std::vector<double> grad(state.logits.size(), 0.0);
  for (size_t u = 0; u < g.nodes.size(); ++u) {
    double expect = 0.0;
    for (int e : g.out_real[u]) expect += d_flow[e] * state.flows[e];
    expect += d_flow[g.sink_edge[u]] * state.flows[g.sink_edge[u]];
    auto chain = [&](int e) {
      grad[e] = state.flows[e] / state.tau * (d_flow[e] - expect);
    };
    for (int e : g.out_real[u]) chain(e);
    chain(g.sink_edge[u]);
  }
  return grad;
}

namespace {

std::vector<double> loss_logit_gradient(const TrackingGraph& g, const DetectionQuality& q,
                                        const AdaptiveWeights& w, const FlowState& state) {
  GradientSet gs = gradients_given(g, state.flows, node_positions(g), q, w, false);
  return logit_gradients(g, state, gs.d_flow);
}

double vec_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

double estimate_lipschitz(const TrackingGraph& g, const DetectionQuality& q,
                          const AdaptiveWeights& w, int samples, const FlowState& state,
                          uint64_t seed) {
  if (samples < 2) return 0.0;
  if (g.n_real_edges == 0) return 0.0;
  Rng rng(seed);
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    FlowState a = state;
    for (size_t i = 0; i < a.logits.size(); ++i) a.logits[i] += 0.3 * rng.gaussian();
    FlowState b = a;
    for (size_t i = 0; i < b.logits.size(); ++i) b.logits[i] += 0.05 * rng.gaussian();
    refresh_flows(g, a);
    refresh_flows(g, b);
    double dl = vec_dist(a.logits, b.logits);
    if (dl < 1e-12) continue;
    double dg = vec_dist(loss_logit_gradient(g, q, w, a), loss_logit_gradient(g, q, w, b));
    best = std::max(best, dg / dl);
  }
  return best;
}

DescendResult descend(const TrackingGraph& g, const DetectionQuality& q, int steps,
                      const GraphConfig& cfg, const DescendOptions& opt) {
  if (steps < 1) throw ConfigError("descend needs steps >= 1");

  DescendResult res;
  res.state = init_flows(g, cfg.tau);
  res.state.eta = opt.eta;

  const Matrix laplacian_s = laplacian(g.spatial_adj);
  const std::vector<Vec2> positions = node_positions(g);

  auto weights_for = [&](const std::vector<double>& flows) -> AdaptiveWeights {
    if (opt.mode == WeightsMode::Fixed) {
      AdaptiveWeights w;
      w.lambda_s = opt.fixed_lambda_s;
      w.lambda_t = opt.fixed_lambda_t;
      return w;
    }
    Matrix lt = laplacian(temporal_adjacency_from(g, flows));
    return adaptive_weights(laplacian_s, lt, cfg.epsilon_sigma);
  };

  AdaptiveWeights frozen = weights_for(res.state.flows);

  if (opt.check_divergence && opt.lipschitz_samples >= 2 && g.n_real_edges > 0) {
    res.lipschitz_estimate = estimate_lipschitz(g, q, frozen, opt.lipschitz_samples,
                                                res.state, opt.lipschitz_seed);
    if (res.lipschitz_estimate > 0.0 && opt.eta >= 2.0 / res.lipschitz_estimate)
      throw DivergenceDetected("eta >= 2/L with empirical L = " +
                               std::to_string(res.lipschitz_estimate));
  }

  double eta = opt.eta;
  for (int k = 0; k < steps; ++k) {
    AdaptiveWeights w =
        opt.mode == WeightsMode::FrozenInit ? frozen : weights_for(res.state.flows);

    ChainContext ctx = build_chain_context(g, res.state.flows, positions);
    res.trajectory.push_back(
        assemble_losses(g, res.state.flows, positions, q, w, ctx));
    if (opt.record_flow_history) res.flow_history.push_back(res.state.flows);

    GradientSet gs = gradients_given(g, res.state.flows, positions, q, w, false);
    std::vector<double> grad = logit_gradients(g, res.state, gs.d_flow);
    for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
      if (g.edges[e].kind == EdgeKind::Source) continue;
      res.state.logits[e] -= eta * grad[e];
    }
    refresh_flows(g, res.state);
    res.state.step = k + 1;
    eta *= opt.eta_decay;
  }

  if (opt.check_divergence && res.trajectory.size() >= 2) {
    double first = res.trajectory.front().final_loss;
    double last = res.trajectory.back().final_loss;
    if (last > first + 10.0 * std::max(1e-9, std::abs(first)))
      throw DivergenceDetected("final loss exceeds initial by more than 10x");
  }

  return res;
}

DecodedWindow decode_assignments(const FlowState& state, const TrackingGraph& g) {
  DecodedWindow out;
  const auto& flows = state.flows;

  std::vector<char> has_in(g.nodes.size(), 0);
  auto log_flow = [&](double f) { return std::log(std::max(f, 1e-300)); };

  for (int fr = 0; fr + 1 < g.n_frames; ++fr) {
    std::vector<int> senders, receivers;
    for (size_t u = 0; u < g.nodes.size(); ++u) {
      if (g.nodes[u].frame == fr) senders.push_back(static_cast<int>(u));
      if (g.nodes[u].frame == fr + 1) receivers.push_back(static_cast<int>(u));
    }
    if (senders.empty()) continue;

    const int ns = static_cast<int>(senders.size());
    const int nr = static_cast<int>(receivers.size());
    // Columns: receivers, then one private death column per sender.
    std::vector<std::vector<double>> cost(ns, std::vector<double>(nr + ns, kAssignBig));
    for (int i = 0; i < ns; ++i) {
      int u = senders[i];
      for (int e : g.out_real[u]) {
        int j = -1;
        for (int r = 0; r < nr; ++r)
          if (receivers[r] == g.edges[e].to) j = r;
        if (j >= 0) cost[i][j] = -log_flow(flows[e]);
      }
      cost[i][nr + i] = -log_flow(flows[g.sink_edge[u]]);
    }

    std::vector<int> rowsol = solve_assignment(cost);
    for (int i = 0; i < ns; ++i) {
      int u = senders[i];
      int j = rowsol[i];
      if (j >= 0 && j < nr && cost[i][j] < kAssignBig) {
        out.links.push_back({u, receivers[j]});
        has_in[receivers[j]] = 1;
      } else {
        out.deaths.push_back(u);
      }
    }
  }

  for (size_t u = 0; u < g.nodes.size(); ++u)
    if (!has_in[u]) out.births.push_back(static_cast<int>(u));
  return out;
}

std::vector<double> hard_flows_from_decode(const TrackingGraph& g,
                                           const DecodedWindow& decoded) {
  std::vector<double> flows(g.edges.size(), 0.0);
  std::vector<char> has_link_out(g.nodes.size(), 0);
  for (const auto& link : decoded.links) {
    for (int e : g.out_real[link.from]) {
      if (g.edges[e].to == link.to) {
        flows[e] = 1.0;
        has_link_out[link.from] = 1;
      }
    }
  }
  for (size_t u = 0; u < g.nodes.size(); ++u)
    if (!has_link_out[u]) flows[g.sink_edge[u]] = 1.0;
  apply_source_topup(g, flows);
  return flows;
}

std::vector<double> gt_hard_flows(const TrackingGraph& g) {
  std::vector<double> flows(g.edges.size(), 0.0);
  std::vector<char> has_out(g.nodes.size(), 0);
  for (int e = 0; e < g.n_real_edges; ++e) {
    const auto& a = g.nodes[g.edges[e].from];
    const auto& b = g.nodes[g.edges[e].to];
    if (a.gt_id && b.gt_id && *a.gt_id == *b.gt_id) {
      flows[e] = 1.0;
      has_out[g.edges[e].from] = 1;
    }
  }
  for (size_t u = 0; u < g.nodes.size(); ++u)
    if (!has_out[u]) flows[g.sink_edge[u]] = 1.0;
  apply_source_topup(g, flows);
  return flows;
}

}  // namespace unitrack
