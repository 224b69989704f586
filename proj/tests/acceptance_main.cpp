// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.
// Runs the full property checks at their stated tolerances on seeded
// scenario batches.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "unitrack/experiment.hpp"
#include "unitrack/gradcheck.hpp"
#include "unitrack/rng.hpp"
#include "unitrack/serialize.hpp"

using namespace unitrack;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const auto start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

ExperimentConfig default_config(const std::string& scenario, uint64_t seed) {
  ExperimentConfig cfg;
  cfg.scenario = scenario;
  cfg.noise.pos_sigma = 0.0015;
  cfg.seed = seed;
  if (scenario == "occlusion") cfg.occlusion_gap = 2;
  return cfg;
}

// ---------------------------------------------------------------- C1 / C2
GradCheckReport gradcheck_report() {
  GradCheckConfig cfg;  // 100 trials, h = 1e-6
  static GradCheckReport rep = run_gradcheck(cfg);
  return rep;
}

Outcome c1_gradient_correctness() {
  double t0 = now_seconds();
  GradCheckReport rep = gradcheck_report();
  double elapsed = now_seconds() - t0;
  std::ostringstream ss;
  ss << "max_rel_err=" << rep.max_rel_err << " over " << rep.checks << " checks in "
     << elapsed << "s";
  return {rep.max_rel_err < 1e-5 && elapsed < 30.0, ss.str()};
}

Outcome c2_bounded_gradients() {
  GradCheckReport rep = gradcheck_report();
  std::ostringstream ss;
  ss << rep.bound_violations << " violations of |dLflow/df| <= w";
  return {rep.bound_violations == 0, ss.str()};
}

// -------------------------------------------------------------------- C3
Outcome c3_flow_conservation() {
  double worst_soft = 0.0, worst_decoded = 0.0;
  for (const char* name : {"crossing", "occlusion", "posture"}) {
    ExperimentResult r = run_experiment(default_config(name, 11));
    for (double v : r.decoded_residual_per_window) worst_decoded = std::max(worst_decoded, v);
    for (double v : r.soft_residual_per_window) worst_soft = std::max(worst_soft, v);
  }
  std::ostringstream ss;
  ss << "decoded residual max=" << worst_decoded << " (exact 0 required), soft residual max="
     << worst_soft << " (< 0.1)";
  return {worst_decoded == 0.0 && worst_soft < 0.1, ss.str()};
}

// -------------------------------------------------------------------- C4
std::vector<double> eigen_reference(const Matrix& m) {
  Eigen::MatrixXd a(m.n(), m.n());
  for (int i = 0; i < m.n(); ++i)
    for (int j = 0; j < m.n(); ++j) a(i, j) = m.at(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  std::vector<double> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + m.n());
  std::sort(ev.begin(), ev.end());
  return ev;
}

Outcome c4_spectral_oracle() {
  double worst = 0.0;
  int graphs = 0;
  auto check = [&](const Matrix& adj) {
    Matrix l = laplacian(adj);
    double mine = algebraic_connectivity(l);
    double ref = l.n() >= 2 ? eigen_reference(l)[1] : 0.0;
    worst = std::max(worst, std::abs(mine - ref));
    ++graphs;
  };

  for (int n = 1; n <= 6; ++n) {
    Matrix path(n), cycle(n), complete(n), disc(n), empty(n);
    for (int i = 0; i + 1 < n; ++i) path.at(i, i + 1) = path.at(i + 1, i) = 1.0;
    cycle = path;
    if (n >= 3) cycle.at(0, n - 1) = cycle.at(n - 1, 0) = 1.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) complete.at(i, j) = 1.0;
    for (int i = 0; i + 2 < n; ++i) disc.at(i, i + 1) = disc.at(i + 1, i) = 1.0;
    check(path);
    check(cycle);
    check(complete);
    check(disc);
    check(empty);
  }
  Rng rng(404);
  for (int t = 0; t < 50; ++t) {
    int n = 2 + int(rng.uniform_int(5));
    Matrix a(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double w = rng.uniform() < 0.35 ? 0.0 : rng.uniform();
        a.at(i, j) = a.at(j, i) = w;
      }
    check(a);
  }
  std::ostringstream ss;
  ss << "max |sigma2 - oracle| = " << worst << " over " << graphs << " graphs";
  return {worst < 1e-8, ss.str()};
}

// -------------------------------------------------------------------- C5
Outcome c5_weight_identities() {
  double worst_sum = 0.0;
  for (const char* name : {"crossing", "occlusion", "posture"}) {
    ExperimentResult r = run_experiment(default_config(name, 23));
    for (const auto& row : r.trajectory)
      worst_sum = std::max(worst_sum, std::abs(row.lambda_s + row.lambda_t - 1.0));
  }

  Matrix k3(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) k3.at(i, j) = 1.0;
  AdaptiveWeights sym = adaptive_weights(laplacian(k3), laplacian(k3), 1e-6);
  bool sym_ok = sym.lambda_s == 0.5 && sym.lambda_t == 0.5;

  Matrix p3(3);
  p3.at(0, 1) = p3.at(1, 0) = 1.0;
  p3.at(1, 2) = p3.at(2, 1) = 1.0;
  Matrix disconnected(3);
  AdaptiveWeights disc = adaptive_weights(laplacian(disconnected), laplacian(p3), 1e-6);

  std::ostringstream ss;
  ss << "max |lambda_s + lambda_t - 1| = " << worst_sum << ", symmetric=(" << sym.lambda_s
     << "," << sym.lambda_t << "), disconnected lambda_s=" << disc.lambda_s;
  return {worst_sum < 1e-12 && sym_ok && disc.lambda_s > 0.99, ss.str()};
}

// -------------------------------------------------------------------- C6
Outcome c6_error_types() {
  double t0 = now_seconds();
  const int seeds = 20;
  int cross_ok = 0, occl_ok = 0, posture_ok = 0;

  for (int s = 0; s < seeds; ++s) {
    ExperimentConfig uni = default_config("crossing", 1000 + s);
    ExperimentConfig greedy = uni;
    greedy.tracker = TrackerKind::GreedyNN;
    MetricsReport mu = run_experiment(uni).metrics;
    MetricsReport mg = run_experiment(greedy).metrics;
    if (mu.ids == 0 && mg.ids >= 2 && mu.ids < mg.ids) ++cross_ok;
  }

  for (int s = 0; s < seeds; ++s) {
    ExperimentConfig uni = default_config("occlusion", 2000 + s);
    ExperimentConfig greedy = uni;
    greedy.tracker = TrackerKind::GreedyNN;
    MetricsReport mu = run_experiment(uni).metrics;
    MetricsReport mg = run_experiment(greedy).metrics;
    if (mu.ids == 0 && mg.frag >= 1) ++occl_ok;
  }

  for (int s = 0; s < seeds; ++s) {
    // Constant-velocity motion with per-seed appearance drift: the temporal
    // loss on the ground-truth assignment must vanish.
    double drift = 0.02 + 0.01 * s;
    Scenario sc = gen_posture_change(drift, 20);
    auto frames = corrupt(sc, NoiseModel{});
    GraphConfig gcfg;
    std::vector<std::vector<Detection>> window(frames.begin(), frames.begin() + 5);
    TrackingGraph g = build_graph(window, gcfg);
    TrackingGraph h = g;
    h.flows = gt_hard_flows(g);
    if (std::abs(temporal_loss(h, gcfg.dt)) < 1e-12) ++posture_ok;
  }

  double elapsed = now_seconds() - t0;
  std::ostringstream ss;
  ss << "crossing " << cross_ok << "/20, occlusion " << occl_ok << "/20, posture "
     << posture_ok << "/20 in " << elapsed << "s";
  bool pass = cross_ok >= 18 && occl_ok >= 18 && posture_ok >= 18 && elapsed < 120.0;
  return {pass, ss.str()};
}

// -------------------------------------------------------------------- C7
Outcome c7_framerate_direction() {
  const int seeds = 20;
  int ok = 0;
  double sample_low = 0.0, sample_high = 0.0;
  for (int s = 0; s < seeds; ++s) {
    ExperimentConfig cfg = default_config("crossing", 3000 + s);
    cfg.duration = 90;
    cfg.speed = 0.006;
    double low = lambda_s_at_fps(cfg, 1.0);
    double high = lambda_s_at_fps(cfg, 30.0);
    if (s == 0) {
      sample_low = low;
      sample_high = high;
    }
    if (low > high) ++ok;
  }
  std::ostringstream ss;
  ss << ok << "/20 seeds with lambda_s(1fps) > lambda_s(30fps), e.g. " << sample_low
     << " vs " << sample_high;
  return {ok >= 18, ss.str()};
}

// -------------------------------------------------------------------- C8
Outcome c8_convergence() {
  double worst_fraction = 1.0;
  for (const char* name : {"crossing", "occlusion", "posture"}) {
    ExperimentResult r = run_experiment(default_config(name, 31));
    worst_fraction =
        std::min(worst_fraction, monotone_fraction(r.trajectory, r.window_of_row));
  }

  bool divergence_fires = false;
  try {
    ExperimentConfig wild = default_config("crossing", 31);
    wild.eta = 1.0;  // 100x the passing default
    run_experiment(wild);
  } catch (const DivergenceDetected&) {
    divergence_fires = true;
  }

  std::ostringstream ss;
  ss << "min non-increasing fraction = " << worst_fraction
     << ", DivergenceDetected at eta=1.0: " << (divergence_fires ? "yes" : "no");
  return {worst_fraction >= 0.95 && divergence_fires, ss.str()};
}

// -------------------------------------------------------------------- C9
Outcome c9_degenerate_inputs() {
  std::ostringstream ss;
  bool ok = true;

  // Empty edge set: final loss is exactly zero.
  GraphConfig cfg;
  std::vector<std::vector<Detection>> frames{
      {Detection{0, {0.2, 0.2}, 1.0, identity_embedding(0, 0), 0}}, {}};
  TrackingGraph g = build_graph(frames, cfg);
  DetectionQuality q;
  AdaptiveWeights w;
  LossBreakdown b = total_loss(g, q, w);
  ok &= b.final_loss == 0.0;
  ss << "empty |E| final=" << b.final_loss;

  // alpha = 0 ignores detector errors entirely.
  DetectionQuality qz = detection_quality({{0.1, 0.1}}, {{0.9, 0.9}}, 0.05, 0.0);
  ok &= qz.factor == 1.0;
  ss << ", alpha0 factor=" << qz.factor;

  // Constant velocity: temporal loss vanishes on the true assignment.
  Scenario sc = gen_posture_change(0.1, 10);
  auto pframes = corrupt(sc, NoiseModel{});
  std::vector<std::vector<Detection>> window(pframes.begin(), pframes.begin() + 5);
  TrackingGraph pg = build_graph(window, cfg);
  TrackingGraph ph = pg;
  ph.flows = gt_hard_flows(pg);
  double tl = temporal_loss(ph, cfg.dt);
  ok &= std::abs(tl) < 1e-12;
  ss << ", const-velocity temporal=" << tl;

  // Coincident points: flagged zero subgradient, all values finite.
  std::vector<std::vector<Detection>> coincident{
      {Detection{0, {0.4, 0.4}, 1.0, identity_embedding(0, 0), 0}},
      {Detection{1, {0.4, 0.4}, 1.0, identity_embedding(0, 0), 0}}};
  TrackingGraph cg = build_graph(coincident, cfg);
  cg.flows[0] = 1.0;
  AdaptiveWeights ws;
  ws.lambda_s = 1.0;
  ws.lambda_t = 0.0;
  GradientSet gs = gradients(cg, q, ws, true);
  bool flagged = gs.coincident_edges.size() == 1;
  bool finite = true;
  for (const auto& v : gs.d_pos) finite &= std::isfinite(v.x) && std::isfinite(v.y);
  for (double v : gs.d_flow) finite &= std::isfinite(v);
  ok &= flagged && finite && gs.d_pos[0].x == 0.0 && gs.d_pos[0].y == 0.0;
  ss << ", coincident flagged=" << (flagged ? "yes" : "no");

  return {ok, ss.str()};
}

// ------------------------------------------------------------------- C10
Outcome c10_determinism() {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "unitrack_acceptance_det";
  ExperimentConfig cfg = default_config("crossing", 7);
  cfg.out_dir = (dir / "run1").string();
  run_experiment(cfg);
  cfg.out_dir = (dir / "run2").string();
  run_experiment(cfg);

  bool same = true;
  for (const char* name : {"losses.csv", "metrics.json"}) {
    std::string a = read_text_file((dir / "run1" / name).string());
    std::string b = read_text_file((dir / "run2" / name).string());
    same &= !a.empty() && a == b;
  }
  fs::remove_all(dir);
  return {same, same ? "losses.csv and metrics.json byte-identical" : "artifacts differ"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"C1 gradient correctness (FD oracle, h=1e-6, rel<1e-5)", c1_gradient_correctness},
      {"C2 bounded flow gradients", c2_bounded_gradients},
      {"C3 flow conservation (decoded exact, soft <0.1)", c3_flow_conservation},
      {"C4 spectral oracle agreement (1e-8, n<=6)", c4_spectral_oracle},
      {"C5 adaptive weight identities", c5_weight_identities},
      {"C6 error-type qualitative reproduction", c6_error_types},
      {"C7 frame-rate adaptation direction", c7_framerate_direction},
      {"C8 convergence and divergence detection", c8_convergence},
      {"C9 degenerate-input suite", c9_degenerate_inputs},
      {"C10 determinism (byte-identical artifacts)", c10_determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Outcome out;
    double t0 = now_seconds();
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    double elapsed = now_seconds() - t0;
    std::printf("[%s] %s — %s (%.2fs)\n", out.pass ? "PASS" : "FAIL", c.name,
                out.detail.c_str(), elapsed);
    if (!out.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
