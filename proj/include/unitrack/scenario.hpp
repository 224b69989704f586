#pragma once

#include <string>
#include <vector>

#include "unitrack/types.hpp"

namespace unitrack {

struct TrajPoint {
  int frame = 0;
  Vec2 pos;
  std::vector<double> embedding;
  bool visible = true;  // occluded points stay in the ground truth but
                        // produce no detection (forced miss)
};

struct Trajectory {
  int id = 0;
  std::vector<TrajPoint> points;  // sorted by frame, at most one per frame
};

struct NoiseModel {
  double pos_sigma = 0.0;
  double fp_rate = 0.0;    // probability of one spurious detection per frame
  double fn_rate = 0.0;    // probability of dropping a true detection
  double embed_drift = 0.0;  // extra per-frame embedding rotation (radians)
  uint64_t seed = 0;
};

/// Deterministic synthetic multi-object sequence; positions in [0,1]^2.
struct Scenario {
  std::string name;
  std::vector<Trajectory> trajectories;
  double fps = 30.0;
  int duration = 20;  // frames
  NoiseModel noise;

  /// Ground-truth (id, position) pairs present at a frame.
  std::vector<std::pair<int, Vec2>> gt_at(int frame) const;
  int gt_point_count() const;
};

constexpr int kEmbedDim = 8;

/// Unit embedding of an identity at a given cumulative rotation angle.
/// The first two identities are antipodal (cos01 = 0: maximally dissimilar
/// under the [0,1]-mapped cosine); further identities occupy disjoint
/// coordinate planes and stay exactly orthogonal under rotation.
std::vector<double> identity_embedding(int id, double angle);

/// Rotate every (even, odd) coordinate pair of an embedding by `angle`.
void rotate_embedding(std::vector<double>& e, double angle);

/// Two identities on straight paths crossing at (0.5, 0.5) around the
/// middle frame. The second track runs half a frame out of phase, so at the
/// crossing the tracks are separated by speed/2: a per-frame displacement
/// of `speed` then exceeds half that separation and forces the greedy
/// nearest-neighbor swap.
Scenario gen_crossing(double angle, double speed, int n_frames);

/// One identity with `gap` consecutive mid-sequence detections removed
/// (forced misses); a parallel distractor identity nearby throughout.
Scenario gen_occlusion(int gap, int n_frames);

/// Identities moving at constant velocity while their embeddings rotate by
/// drift_per_frame each frame (appearance change, consistent motion).
Scenario gen_posture_change(double drift_per_frame, int n_frames);

/// Apply the noise model: Gaussian positional jitter (clamped to [0,1]^2),
/// Bernoulli drops, uniform spurious detections, extra embedding rotation.
/// Ground-truth ids are retained on true detections only.
std::vector<std::vector<Detection>> corrupt(const Scenario& scenario, const NoiseModel& noise);

/// Keep every round(fps/target_fps)-th frame and reindex; dt downstream
/// becomes 1/target_fps.
Scenario subsample_fps(const Scenario& scenario, double target_fps);

}  // namespace unitrack
