#pragma once

#include <vector>

#include "unitrack/graph.hpp"
#include "unitrack/scenario.hpp"

namespace unitrack::test {

inline Detection det(int frame, double x, double y, std::vector<double> emb,
                     std::optional<int> gt = std::nullopt) {
  Detection d;
  d.frame = frame;
  d.position = {x, y};
  d.embedding = std::move(emb);
  d.gt_id = gt;
  return d;
}

inline std::vector<double> e0() { return identity_embedding(0, 0.0); }
inline std::vector<double> e1() { return identity_embedding(1, 0.0); }

/// Two parallel constant-velocity tracks, one detection each per frame.
inline std::vector<std::vector<Detection>> parallel_frames(int n_frames, double sep = 0.5,
                                                           double speed = 0.02) {
  std::vector<std::vector<Detection>> frames(n_frames);
  for (int f = 0; f < n_frames; ++f) {
    frames[f].push_back(det(f, 0.1 + speed * f, 0.5 - sep / 2, e0(), 0));
    frames[f].push_back(det(f, 0.1 + speed * f, 0.5 + sep / 2, e1(), 1));
  }
  return frames;
}

}  // namespace unitrack::test
