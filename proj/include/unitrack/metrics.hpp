#pragma once

#include <map>
#include <string>
#include <vector>

#include "unitrack/scenario.hpp"
#include "unitrack/types.hpp"

namespace unitrack {

/// Reference to a detection by global frame and index within that frame.
struct DetRef {
  int frame = -1;
  int index = -1;
  bool operator==(const DetRef& o) const { return frame == o.frame && index == o.index; }
  bool operator<(const DetRef& o) const {
    return frame != o.frame ? frame < o.frame : index < o.index;
  }
};

/// Sequence-level decode: frame-pair association links plus track
/// births/deaths, in detection coordinates.
struct DecodedSequence {
  struct Link {
    DetRef from, to;
  };
  std::vector<Link> links;
  std::vector<DetRef> births;
  std::vector<DetRef> deaths;
};

struct HypTrack {
  int id = 0;
  std::vector<DetRef> points;  // sorted by frame
};

struct MetricsReport {
  int ids = 0;   // identity switches (one event per gt track per change frame)
  int frag = 0;  // coverage interruptions per gt track
  int fp = 0;
  int fn = 0;
  int gt_count = 0;
  double mota_lite = 1.0;   // 1 - (fp + fn + ids) / gt_count
  double idf1_lite = 1.0;   // identity-F1 over point matches
  double assoc_acc = 1.0;   // decoded links matching gt continuation pairs
  std::map<std::string, int> per_error_type;  // scenario name -> ids, for batches
};

/// Follow links into hypothesis tracks. Every detection lands in exactly
/// one track (one-to-one decode); isolated detections become singletons.
std::vector<HypTrack> build_tracks(const DecodedSequence& decoded,
                                   const std::vector<std::vector<Detection>>& frames);

/// Re-identification bridge: a track born shortly after another died gets
/// merged into it when the endpoint embeddings agree (cos01 similarity).
/// Operationalizes identity bridging across short occlusions.
void stitch_reentries(std::vector<HypTrack>& tracks,
                      const std::vector<std::vector<Detection>>& frames, int max_gap,
                      double sim_threshold);

MetricsReport score_tracks(const std::vector<HypTrack>& tracks,
                           const DecodedSequence& decoded,
                           const std::vector<std::vector<Detection>>& frames,
                           const Scenario& scenario, double match_radius);

/// Score a decode against ground truth (tracks built without stitching).
MetricsReport score(const DecodedSequence& decoded,
                    const std::vector<std::vector<Detection>>& frames,
                    const Scenario& scenario, double match_radius);

}  // namespace unitrack
