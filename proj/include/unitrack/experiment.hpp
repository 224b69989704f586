#pragma once

#include <string>
#include <vector>

#include "unitrack/flow.hpp"
#include "unitrack/graph.hpp"
#include "unitrack/metrics.hpp"
#include "unitrack/scenario.hpp"

namespace unitrack {

enum class TrackerKind { UniTrack, GreedyNN, HungarianDist };

struct ExperimentConfig {
  std::string scenario = "crossing";  // crossing | occlusion | posture
  std::string input_file;             // detection JSON overrides the generator
  GraphConfig graph;
  int steps = 200;
  double eta = 0.01;
  double eta_decay = 1.0;
  WeightsMode weights_mode = WeightsMode::Adaptive;
  double fixed_lambda_s = 0.5;
  double fixed_lambda_t = 0.5;
  TrackerKind tracker = TrackerKind::UniTrack;
  uint64_t seed = 1;

  // Scenario shape.
  int duration = 20;
  double speed = 0.02;
  double crossing_angle = 0.0;
  int occlusion_gap = 2;
  double posture_drift = 0.0785398163397448;  // pi/40 per frame
  double fps = 30.0;
  double target_fps = 0.0;  // 0: no subsampling
  NoiseModel noise;

  // Evaluation.
  double match_radius = 0.05;
  double baseline_gate = 0.1;
  bool stitch = true;
  double stitch_similarity = 0.75;

  std::string out_dir;
};

struct ExperimentResult {
  std::vector<std::vector<Detection>> frames;
  Scenario scenario;
  DecodedSequence decoded;
  std::vector<HypTrack> tracks;
  MetricsReport metrics;
  std::vector<LossBreakdown> trajectory;  // all windows, concatenated
  std::vector<int> window_of_row;
  std::vector<double> soft_residual_per_window;  // max_abs at convergence
  std::vector<double> decoded_residual_per_window;
  double lipschitz_max = 0.0;
  DetectionQuality quality_first_window;
};

Scenario make_scenario(const ExperimentConfig& cfg);

/// Window tiling: [0,W-1], [W-1,2W-2], ... so every consecutive frame pair
/// is optimized and decoded exactly once.
std::vector<std::pair<int, int>> window_spans(int n_frames, int window);

DecodedSequence greedy_nn_links(const std::vector<std::vector<Detection>>& frames,
                                double gate);
DecodedSequence hungarian_dist_links(const std::vector<std::vector<Detection>>& frames,
                                     double gate);

/// Full pipeline: generate/load detections, optimize flows per window (for
/// the UniTrack tracker), decode, assemble tracks, score. Writes
/// config.json, losses.csv, metrics.json, assignments.json when out_dir is
/// set.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// lambda_s of the first window at initialization after subsampling the
/// scenario to target_fps; used by the frame-rate adaptation study.
double lambda_s_at_fps(const ExperimentConfig& cfg, double target_fps);

/// Fraction of consecutive same-window steps whose loss did not increase,
/// up to a 1e-4 relative slack that absorbs the adaptive-weight
/// recomputation microdrift without masking real step-size failures.
double monotone_fraction(const std::vector<LossBreakdown>& rows,
                         const std::vector<int>& window_of_row);

/// Final loss over a (grid_n x grid_n) logit-space grid spanned by two
/// direction vectors around the given state.
std::vector<std::vector<double>> loss_surface(const TrackingGraph& g,
                                              const DetectionQuality& q,
                                              const GraphConfig& cfg,
                                              const FlowState& center,
                                              const std::vector<double>& dir1,
                                              const std::vector<double>& dir2,
                                              int grid_n, double span);

std::string experiment_config_json(const ExperimentConfig& cfg);

}  // namespace unitrack
