#pragma once

#include <optional>
#include <vector>

#include "unitrack/errors.hpp"
#include "unitrack/vec2.hpp"

namespace unitrack {

/// One observed object instance in one frame. Positions live in scene
/// units normalized to [0,1]^2; embeddings are fixed-dimension appearance
/// vectors (unit vectors in the synthetic scenarios).
struct Detection {
  int frame = 0;
  Vec2 position;
  double confidence = 1.0;
  std::vector<double> embedding;
  std::optional<int> gt_id;
};

enum class AdjacencyMode { HardThreshold, Sigmoid };

struct AdjacencySpec {
  AdjacencyMode mode = AdjacencyMode::Sigmoid;
  double radius = 0.1;  // HardThreshold cutoff
  double k = 50.0;      // Sigmoid steepness
  double d0 = 0.1;      // Sigmoid midpoint
};

enum class TemporalNorm { Linear, None, Adaptive };

struct GraphConfig {
  int window = 5;
  double alpha = 0.9;
  double tau = 0.1;
  double dt = 1.0 / 30.0;
  AdjacencySpec adjacency;
  std::optional<double> gating_radius;
  double epsilon_sigma = 1e-6;
  double embed_weight_mix = 0.5;  // beta: appearance vs geometric share
  double sigma_w = 0.1;           // geometric kernel width
  double sink_prior = 0.05;       // prior weight on the termination edge
  TemporalNorm temporal_norm = TemporalNorm::Linear;

  void validate() const {
    if (window < 2) throw ConfigError("window must be >= 2");
    if (tau <= 0.0) throw ConfigError("tau must be > 0");
    if (dt <= 0.0) throw ConfigError("dt must be > 0");
    if (epsilon_sigma <= 0.0) throw ConfigError("epsilon_sigma must be > 0");
    if (embed_weight_mix < 0.0 || embed_weight_mix > 1.0)
      throw ConfigError("embed_weight_mix must lie in [0,1]");
    if (sigma_w <= 0.0) throw ConfigError("sigma_w must be > 0");
    if (sink_prior <= 0.0) throw ConfigError("sink_prior must be > 0");
  }
};

}  // namespace unitrack
