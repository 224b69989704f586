// Command-line front end: scenario generation, tracking runs, weight
// inspection, gradient verification, hyperparameter sweeps, and loss-surface
// export. Exit codes: 0 success, 1 check failure, 2 usage/config error.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "unitrack/experiment.hpp"
#include "unitrack/gradcheck.hpp"
#include "unitrack/rng.hpp"
#include "unitrack/serialize.hpp"

using namespace unitrack;

namespace {

struct CommonOpts {
  ExperimentConfig cfg;
  std::string weights_mode = "adaptive";
  std::string adjacency = "sigmoid";
  std::string tracker = "unitrack";
  std::string norm = "linear";
  double gating = 0.0;
};

void add_scenario_opts(CLI::App* app, CommonOpts& o) {
  app->add_option("--scenario", o.cfg.scenario, "crossing | occlusion | posture");
  app->add_option("--input", o.cfg.input_file, "detection-sequence JSON file");
  app->add_option("--frames", o.cfg.duration, "scenario length in frames");
  app->add_option("--speed", o.cfg.speed, "per-frame displacement");
  app->add_option("--angle", o.cfg.crossing_angle, "crossing angle (radians)");
  app->add_option("--gap", o.cfg.occlusion_gap, "occluded frames");
  app->add_option("--drift", o.cfg.posture_drift, "embedding rotation per frame");
  app->add_option("--fps", o.cfg.fps, "nominal frame rate");
  app->add_option("--target-fps", o.cfg.target_fps, "subsample to this frame rate");
  app->add_option("--pos-sigma", o.cfg.noise.pos_sigma, "positional jitter");
  app->add_option("--fp-rate", o.cfg.noise.fp_rate, "spurious-detection rate");
  app->add_option("--fn-rate", o.cfg.noise.fn_rate, "drop rate");
  app->add_option("--embed-drift", o.cfg.noise.embed_drift, "extra embedding rotation");
  app->add_option("--seed", o.cfg.seed, "RNG seed");
}

void add_solver_opts(CLI::App* app, CommonOpts& o) {
  app->add_option("--steps", o.cfg.steps, "gradient-descent steps per window");
  app->add_option("--eta", o.cfg.eta, "learning rate");
  app->add_option("--eta-decay", o.cfg.eta_decay, "per-step learning-rate multiplier");
  app->add_option("--tau", o.cfg.graph.tau, "softmax temperature");
  app->add_option("--window", o.cfg.graph.window, "window size W");
  app->add_option("--alpha", o.cfg.graph.alpha, "detection-quality weighting");
  app->add_option("--weights-mode", o.weights_mode, "adaptive | fixed | frozen");
  app->add_option("--fixed-ls", o.cfg.fixed_lambda_s, "lambda_s for fixed mode");
  app->add_option("--fixed-lt", o.cfg.fixed_lambda_t, "lambda_t for fixed mode");
  app->add_option("--adjacency", o.adjacency, "sigmoid | threshold");
  app->add_option("--gating", o.gating, "gating radius (0 = off)");
  app->add_option("--norm", o.norm, "temporal normalization: linear | none | adaptive");
  app->add_option("--tracker", o.tracker, "unitrack | greedy_nn | hungarian_dist");
  app->add_option("--match-radius", o.cfg.match_radius, "gt match radius");
}

void finalize(CommonOpts& o) {
  if (o.weights_mode == "adaptive")
    o.cfg.weights_mode = WeightsMode::Adaptive;
  else if (o.weights_mode == "fixed")
    o.cfg.weights_mode = WeightsMode::Fixed;
  else if (o.weights_mode == "frozen")
    o.cfg.weights_mode = WeightsMode::FrozenInit;
  else
    throw ConfigError("unknown weights mode: " + o.weights_mode);

  if (o.adjacency == "sigmoid")
    o.cfg.graph.adjacency.mode = AdjacencyMode::Sigmoid;
  else if (o.adjacency == "threshold")
    o.cfg.graph.adjacency.mode = AdjacencyMode::HardThreshold;
  else
    throw ConfigError("unknown adjacency mode: " + o.adjacency);

  if (o.norm == "linear")
    o.cfg.graph.temporal_norm = TemporalNorm::Linear;
  else if (o.norm == "none")
    o.cfg.graph.temporal_norm = TemporalNorm::None;
  else if (o.norm == "adaptive")
    o.cfg.graph.temporal_norm = TemporalNorm::Adaptive;
  else
    throw ConfigError("unknown temporal norm: " + o.norm);

  if (o.tracker == "unitrack")
    o.cfg.tracker = TrackerKind::UniTrack;
  else if (o.tracker == "greedy_nn")
    o.cfg.tracker = TrackerKind::GreedyNN;
  else if (o.tracker == "hungarian_dist")
    o.cfg.tracker = TrackerKind::HungarianDist;
  else
    throw ConfigError("unknown tracker: " + o.tracker);

  if (o.gating > 0.0) o.cfg.graph.gating_radius = o.gating;
}

int cmd_gen(CommonOpts& o, const std::string& out) {
  finalize(o);
  Scenario s = make_scenario(o.cfg);
  if (o.cfg.target_fps > 0.0) s = subsample_fps(s, o.cfg.target_fps);
  auto frames = corrupt(s, s.noise);
  std::string text = detections_to_json(frames);
  if (out.empty())
    std::cout << text << "\n";
  else
    write_text_file(out, text);
  std::cerr << "wrote " << frames.size() << " frames (" << s.name << ")\n";
  return 0;
}

int cmd_weights(CommonOpts& o) {
  finalize(o);
  std::vector<std::vector<Detection>> frames;
  if (!o.cfg.input_file.empty()) {
    frames = detections_from_json(read_text_file(o.cfg.input_file));
  } else {
    Scenario s = make_scenario(o.cfg);
    frames = corrupt(s, s.noise);
  }
  GraphConfig gcfg = o.cfg.graph;
  gcfg.dt = 1.0 / o.cfg.fps;
  auto spans = window_spans(static_cast<int>(frames.size()), gcfg.window);
  if (spans.empty()) throw EmptyWindow("need at least 2 frames");
  std::vector<std::vector<Detection>> window(frames.begin() + spans[0].first,
                                             frames.begin() + spans[0].second);
  TrackingGraph g = build_graph(window, gcfg);
  AdaptiveWeights w = adaptive_weights(laplacian(g.spatial_adj),
                                       laplacian(g.temporal_adj), gcfg.epsilon_sigma);
  std::printf("sigma2_s = %.12g\nsigma2_t = %.12g\nlambda_s = %.12g\nlambda_t = %.12g\n",
              w.sigma2_s, w.sigma2_t, w.lambda_s, w.lambda_t);
  return 0;
}

int cmd_run(CommonOpts& o, bool dump_loss, bool dump_graph) {
  finalize(o);
  ExperimentResult res = run_experiment(o.cfg);
  const auto& m = res.metrics;
  std::printf("ids=%d frag=%d fp=%d fn=%d mota_lite=%.4f idf1_lite=%.4f assoc_acc=%.4f\n",
              m.ids, m.frag, m.fp, m.fn, m.mota_lite, m.idf1_lite, m.assoc_acc);
  if (!res.trajectory.empty()) {
    std::printf("loss: first=%.6g last=%.6g windows=%zu\n",
                res.trajectory.front().final_loss, res.trajectory.back().final_loss,
                res.soft_residual_per_window.size());
  }
  if ((dump_loss || dump_graph) && !o.cfg.out_dir.empty()) {
    auto spans = window_spans(static_cast<int>(res.frames.size()), o.cfg.graph.window);
    GraphConfig gcfg = o.cfg.graph;
    gcfg.dt = 1.0 / res.scenario.fps;
    std::vector<std::vector<Detection>> window(res.frames.begin() + spans[0].first,
                                               res.frames.begin() + spans[0].second);
    TrackingGraph g = build_graph(window, gcfg);
    if (dump_graph) write_text_file(o.cfg.out_dir + "/graph.json", graph_to_json(g));
    if (dump_loss && !res.trajectory.empty()) {
      write_text_file(o.cfg.out_dir + "/loss.json",
                      breakdown_to_json(res.trajectory.back()));
      AdaptiveWeights w = adaptive_weights(laplacian(g.spatial_adj),
                                           laplacian(g.temporal_adj), gcfg.epsilon_sigma);
      write_text_file(o.cfg.out_dir + "/gradients.json",
                      gradients_to_json(gradients(g, res.quality_first_window, w, true)));
    }
  }
  return 0;
}

int cmd_gradcheck(int trials, uint64_t seed, double h, bool fault) {
  GradCheckConfig cfg;
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.h = h;
  cfg.fault_spatial_sign = fault;
  GradCheckReport rep = run_gradcheck(cfg);
  std::printf("trials=%d checks=%d max_rel_err=%.3e worst=%s bound_violations=%d\n",
              rep.trials, rep.checks, rep.max_rel_err,
              rep.worst_component.empty() ? "-" : rep.worst_component.c_str(),
              rep.bound_violations);
  std::printf("%s\n", rep.pass ? "GRADCHECK PASS" : "GRADCHECK FAIL");
  return rep.pass ? 0 : 1;
}

int cmd_sweep(CommonOpts& o, const std::vector<double>& taus, const std::vector<int>& windows,
              const std::vector<std::string>& norms, int seeds, int jobs,
              const std::string& out) {
  finalize(o);
  struct Cell {
    double tau;
    int window;
    std::string norm;
    uint64_t seed;
  };
  std::vector<Cell> cells;
  for (double tau : taus)
    for (int w : windows)
      for (const auto& n : norms)
        for (int s = 0; s < seeds; ++s)
          cells.push_back({tau, w, n, Rng::derive(o.cfg.seed, cells.size())});

  std::vector<std::string> rows(cells.size());
  std::atomic<size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      size_t i = cursor.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& c = cells[i];
      ExperimentConfig cfg = o.cfg;
      cfg.graph.tau = c.tau;
      cfg.graph.window = c.window;
      cfg.graph.temporal_norm = c.norm == "none"
                                    ? TemporalNorm::None
                                    : (c.norm == "adaptive" ? TemporalNorm::Adaptive
                                                            : TemporalNorm::Linear);
      cfg.seed = c.seed;
      cfg.out_dir.clear();
      std::ostringstream row;
      auto t0 = std::chrono::steady_clock::now();
      size_t graph_bytes = 0;
      try {
        // Size accounting from the first window at this cell's W.
        Scenario s = make_scenario(cfg);
        auto frames = corrupt(s, s.noise);
        GraphConfig gcfg = cfg.graph;
        gcfg.dt = 1.0 / s.fps;
        auto spans = window_spans(static_cast<int>(frames.size()), gcfg.window);
        if (!spans.empty()) {
          std::vector<std::vector<Detection>> window(frames.begin() + spans[0].first,
                                                     frames.begin() + spans[0].second);
          graph_bytes = build_graph(window, gcfg).approx_bytes();
        }
        ExperimentResult res = run_experiment(cfg);
        double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
        row << c.tau << ',' << c.window << ',' << c.norm << ',' << c.seed << ','
            << res.metrics.ids << ',' << res.metrics.frag << ','
            << fmt_g17(res.metrics.mota_lite) << ',' << fmt_g17(res.metrics.idf1_lite)
            << ',' << fmt_g17(res.metrics.assoc_acc) << ','
            << (res.trajectory.empty() ? "0" : fmt_g17(res.trajectory.back().final_loss))
            << ',' << graph_bytes << ',' << fmt_g17(ms) << ",ok";
      } catch (const Error& e) {
        double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
        row << c.tau << ',' << c.window << ',' << c.norm << ',' << c.seed
            << ",,,,,,," << graph_bytes << ',' << fmt_g17(ms) << ',' << e.what();
      }
      rows[i] = row.str();
    }
  };

  int n_threads = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "tau,window,norm,seed,ids,frag,mota_lite,idf1_lite,assoc_acc,final_loss,"
         "graph_bytes,wall_ms,status\n";
  for (const auto& r : rows) csv << r << '\n';
  if (out.empty())
    std::cout << csv.str();
  else
    write_text_file(out, csv.str());
  return 0;
}

int cmd_surface(CommonOpts& o, int grid_n, double span, int window_index,
                const std::string& out) {
  finalize(o);
  Scenario s = make_scenario(o.cfg);
  auto frames = corrupt(s, s.noise);
  GraphConfig gcfg = o.cfg.graph;
  gcfg.dt = 1.0 / s.fps;
  auto spans = window_spans(static_cast<int>(frames.size()), gcfg.window);
  if (spans.empty()) throw EmptyWindow("need at least 2 frames");
  // Default to the middle window; scenarios put their interaction there.
  size_t widx = window_index >= 0 ? static_cast<size_t>(window_index) : spans.size() / 2;
  if (widx >= spans.size()) throw ConfigError("window index out of range");
  std::vector<std::vector<Detection>> window(frames.begin() + spans[widx].first,
                                             frames.begin() + spans[widx].second);
  TrackingGraph g = build_graph(window, gcfg);

  std::vector<Vec2> preds;
  for (const auto& fr : window)
    for (const auto& d : fr) preds.push_back(d.position);
  std::vector<Vec2> gt;
  for (int f = spans[widx].first; f < spans[widx].second; ++f)
    for (const auto& [id, p] : s.gt_at(f)) {
      (void)id;
      gt.push_back(p);
    }
  DetectionQuality q = detection_quality(preds, gt, o.cfg.match_radius, gcfg.alpha);

  DescendOptions opt;
  opt.eta = o.cfg.eta;
  opt.mode = o.cfg.weights_mode;
  DescendResult dr = descend(g, q, o.cfg.steps, gcfg, opt);

  Rng rng(o.cfg.seed ^ 0x517FACEULL);
  auto random_dir = [&](size_t dim) {
    std::vector<double> d(dim);
    double n2 = 0.0;
    for (auto& v : d) {
      v = rng.gaussian();
      n2 += v * v;
    }
    double inv = 1.0 / std::sqrt(std::max(n2, 1e-300));
    for (auto& v : d) v *= inv;
    return d;
  };
  auto d1 = random_dir(dr.state.logits.size());
  auto d2 = random_dir(dr.state.logits.size());

  auto grid = loss_surface(g, q, gcfg, dr.state, d1, d2, grid_n, span);
  std::ostringstream csv;
  for (const auto& rowv : grid) {
    for (size_t j = 0; j < rowv.size(); ++j)
      csv << (j ? "," : "") << fmt_g17(rowv[j]);
    csv << '\n';
  }
  if (out.empty())
    std::cout << csv.str();
  else
    write_text_file(out, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale graph-flow tracking laboratory"};
  app.require_subcommand(1);

  CommonOpts gen_o, run_o, weights_o, sweep_o, surface_o;
  std::string gen_out, sweep_out, surface_out;
  bool dump_loss = false, dump_graph = false;

  auto* gen = app.add_subcommand("gen", "generate a detection-sequence JSON");
  add_scenario_opts(gen, gen_o);
  gen->add_option("--out", gen_out, "output file (stdout if omitted)");

  auto* run = app.add_subcommand("run", "optimize, decode, and score a scenario");
  add_scenario_opts(run, run_o);
  add_solver_opts(run, run_o);
  run->add_option("--out", run_o.cfg.out_dir, "output directory");
  run->add_flag("--dump-loss", dump_loss, "write final LossBreakdown JSON");
  run->add_flag("--dump-graph", dump_graph, "write first-window graph JSON");

  auto* weights = app.add_subcommand("weights", "print sigma2 and lambda for a scenario");
  add_scenario_opts(weights, weights_o);
  add_solver_opts(weights, weights_o);

  int gc_trials = 100;
  uint64_t gc_seed = 42;
  double gc_h = 1e-6;
  bool gc_fault = false;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  gradcheck->add_option("--trials", gc_trials, "random graphs to check");
  gradcheck->add_option("--seed", gc_seed, "RNG seed");
  gradcheck->add_option("--fd-step", gc_h, "finite-difference step");
  gradcheck->add_flag("--inject-spatial-sign-flip", gc_fault,
                      "negative control: corrupt the spatial gradient");

  std::vector<double> sweep_taus{0.1};
  std::vector<int> sweep_windows{5};
  std::vector<std::string> sweep_norms{"linear"};
  int sweep_seeds = 3, sweep_jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "cartesian hyperparameter sweep");
  add_scenario_opts(sweep, sweep_o);
  add_solver_opts(sweep, sweep_o);
  sweep->add_option("--tau-grid", sweep_taus, "tau values")->delimiter(',');
  sweep->add_option("--window-grid", sweep_windows, "window sizes")->delimiter(',');
  sweep->add_option("--norm-grid", sweep_norms, "normalization modes")->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "seeds per cell");
  sweep->add_option("--jobs", sweep_jobs, "concurrent cells");
  sweep->add_option("--out", sweep_out, "CSV path (stdout if omitted)");

  int surf_grid = 9;
  double surf_span = 2.0;
  int surf_window = -1;
  auto* surface = app.add_subcommand("surface", "loss surface around a converged state");
  add_scenario_opts(surface, surface_o);
  add_solver_opts(surface, surface_o);
  surface->add_option("--grid-n", surf_grid, "grid resolution");
  surface->add_option("--span", surf_span, "half-width in logit space");
  surface->add_option("--window-index", surf_window, "window to probe (default: middle)");
  surface->add_option("--out", surface_out, "CSV path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_o, gen_out);
    if (run->parsed()) return cmd_run(run_o, dump_loss, dump_graph);
    if (weights->parsed()) return cmd_weights(weights_o);
    if (gradcheck->parsed()) return cmd_gradcheck(gc_trials, gc_seed, gc_h, gc_fault);
    if (sweep->parsed())
      return cmd_sweep(sweep_o, sweep_taus, sweep_windows, sweep_norms, sweep_seeds,
                       sweep_jobs, sweep_out);
    if (surface->parsed())
      return cmd_surface(surface_o, surf_grid, surf_span, surf_window, surface_out);
  } catch (const DivergenceDetected& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
