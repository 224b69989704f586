#pragma once

#include <string>
#include <vector>

#include "unitrack/flow.hpp"
#include "unitrack/graph.hpp"
#include "unitrack/loss.hpp"
#include "unitrack/metrics.hpp"
#include "unitrack/scenario.hpp"

namespace unitrack {

/// Detection-sequence JSON: an array of frames, each an array of
/// {frame, x, y, confidence, embedding: [...], gt_id?}.
std::string detections_to_json(const std::vector<std::vector<Detection>>& frames);
std::vector<std::vector<Detection>> detections_from_json(const std::string& text);

std::string graph_to_json(const TrackingGraph& g);
std::string breakdown_to_json(const LossBreakdown& b);
std::string gradients_to_json(const GradientSet& gs);
std::string metrics_to_json(const MetricsReport& m);
std::string decoded_to_json(const DecodedSequence& d, const std::vector<HypTrack>& tracks);

/// Trajectory CSV: one row per (window, step) with loss components and
/// weights. Deterministic formatting (%.17g).
std::string losses_to_csv(const std::vector<LossBreakdown>& rows,
                          const std::vector<int>& window_of_row);

std::string fmt_g17(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace unitrack
