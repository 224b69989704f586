#include "unitrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "unitrack/errors.hpp"
#include "unitrack/graph.hpp"
#include "unitrack/hungarian.hpp"

namespace unitrack {

namespace {

const Detection& det_at(const std::vector<std::vector<Detection>>& frames, DetRef r) {
  return frames[r.frame][r.index];
}

}  // namespace

std::vector<HypTrack> build_tracks(const DecodedSequence& decoded,
                                   const std::vector<std::vector<Detection>>& frames) {
  std::map<DetRef, DetRef> next;
  std::map<DetRef, char> has_in;
  for (const auto& link : decoded.links) {
    next[link.from] = link.to;
    has_in[link.to] = 1;
  }

  std::vector<HypTrack> tracks;
  for (int f = 0; f < static_cast<int>(frames.size()); ++f) {
    for (int i = 0; i < static_cast<int>(frames[f].size()); ++i) {
      DetRef head{f, i};
      if (has_in.count(head)) continue;  // continuation, not a track head
      HypTrack t;
      t.id = static_cast<int>(tracks.size());
      DetRef cur = head;
      t.points.push_back(cur);
      while (next.count(cur)) {
        cur = next[cur];
        t.points.push_back(cur);
      }
      tracks.push_back(std::move(t));
    }
  }
  return tracks;
}

void stitch_reentries(std::vector<HypTrack>& tracks,
                      const std::vector<std::vector<Detection>>& frames, int max_gap,
                      double sim_threshold) {
  // Process births in frame order; each dead track can absorb one rebirth.
  std::vector<int> order(tracks.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return tracks[a].points.front().frame < tracks[b].points.front().frame;
  });

  std::vector<int> merged_into(tracks.size(), -1);
  for (int ti : order) {
    HypTrack& born = tracks[ti];
    int birth = born.points.front().frame;
    if (birth == 0) continue;

    int best = -1;
    double best_sim = sim_threshold;
    for (size_t dj = 0; dj < tracks.size(); ++dj) {
      if (static_cast<int>(dj) == ti || merged_into[dj] >= 0) continue;
      const HypTrack& dead = tracks[dj];
      int death = dead.points.back().frame;
      if (death >= birth || birth - death > max_gap) continue;
      double sim = cos_sim01(det_at(frames, dead.points.back()).embedding,
                             det_at(frames, born.points.front()).embedding);
      if (sim > best_sim) {
        best_sim = sim;
        best = static_cast<int>(dj);
      }
    }
    if (best >= 0) {
      tracks[best].points.insert(tracks[best].points.end(), born.points.begin(),
                                 born.points.end());
      merged_into[ti] = best;
    }
  }

  std::vector<HypTrack> out;
  for (size_t i = 0; i < tracks.size(); ++i)
    if (merged_into[i] < 0) out.push_back(std::move(tracks[i]));
  tracks = std::move(out);
}

MetricsReport score_tracks(const std::vector<HypTrack>& tracks,
                           const DecodedSequence& decoded,
                           const std::vector<std::vector<Detection>>& frames,
                           const Scenario& scenario, double match_radius) {
  if (match_radius <= 0.0) throw RadiusNonPositive("match_radius must be > 0");

  MetricsReport rep;
  const int n_frames = scenario.duration;

  // Hypothesis points per frame: (track id, position).
  std::vector<std::vector<std::pair<int, Vec2>>> hyp(n_frames);
  int hyp_count = 0;
  for (const auto& t : tracks)
    for (const auto& p : t.points) {
      if (p.frame < 0 || p.frame >= n_frames) continue;
      hyp[p.frame].emplace_back(t.id, det_at(frames, p).position);
      ++hyp_count;
    }

  // Per frame, greedy ascending-distance one-to-one gt<->hypothesis match.
  std::map<int, std::map<int, int>> gt_match;  // gt id -> frame -> track id
  std::map<std::pair<int, int>, int> id_overlap;  // (gt id, track id) -> frames

  for (int f = 0; f < n_frames; ++f) {
    auto gt = scenario.gt_at(f);
    rep.gt_count += static_cast<int>(gt.size());
    std::vector<std::tuple<double, int, int>> cand;
    for (int i = 0; i < static_cast<int>(gt.size()); ++i)
      for (int j = 0; j < static_cast<int>(hyp[f].size()); ++j) {
        double d = distance(gt[i].second, hyp[f][j].second);
        if (d < match_radius) {
          cand.emplace_back(d, i, j);
          ++id_overlap[{gt[i].first, hyp[f][j].first}];
        }
      }
    std::sort(cand.begin(), cand.end());
    std::vector<char> gt_used(gt.size(), 0), hyp_used(hyp[f].size(), 0);
    int matched = 0;
    for (const auto& [d, i, j] : cand) {
      (void)d;
      if (gt_used[i] || hyp_used[j]) continue;
      gt_used[i] = 1;
      hyp_used[j] = 1;
      ++matched;
      gt_match[gt[i].first][f] = hyp[f][j].first;
    }
    rep.fn += static_cast<int>(gt.size()) - matched;
    rep.fp += static_cast<int>(hyp[f].size()) - matched;
  }

  // Scan each gt track's matched-hypothesis sequence for id changes and
  // coverage interruptions.
  for (const auto& traj : scenario.trajectories) {
    auto it = gt_match.find(traj.id);
    int last_id = -1;
    bool in_gap = false;
    bool covered_once = false;
    for (const auto& p : traj.points) {
      int cur = -1;
      if (it != gt_match.end()) {
        auto fit = it->second.find(p.frame);
        if (fit != it->second.end()) cur = fit->second;
      }
      if (cur < 0) {
        if (covered_once) in_gap = true;
        continue;
      }
      if (covered_once && in_gap) ++rep.frag;
      in_gap = false;
      if (last_id >= 0 && cur != last_id) ++rep.ids;
      last_id = cur;
      covered_once = true;
    }
  }

  rep.mota_lite =
      rep.gt_count > 0 ? 1.0 - double(rep.fp + rep.fn + rep.ids) / rep.gt_count : 1.0;

  // Identity-F1: optimal one-to-one gt-id/track-id pairing over per-frame
  // point matches.
  {
    std::vector<int> gt_ids, tr_ids;
    for (const auto& traj : scenario.trajectories) gt_ids.push_back(traj.id);
    for (const auto& t : tracks) tr_ids.push_back(t.id);
    double idtp = 0.0;
    if (!gt_ids.empty() && !tr_ids.empty()) {
      std::vector<std::vector<double>> cost(
          gt_ids.size(), std::vector<double>(tr_ids.size(), 0.0));
      for (size_t i = 0; i < gt_ids.size(); ++i)
        for (size_t j = 0; j < tr_ids.size(); ++j) {
          auto it = id_overlap.find({gt_ids[i], tr_ids[j]});
          if (it != id_overlap.end()) cost[i][j] = -double(it->second);
        }
      if (gt_ids.size() <= tr_ids.size()) {
        auto sol = solve_assignment(cost);
        for (size_t i = 0; i < sol.size(); ++i)
          if (sol[i] >= 0) idtp -= cost[i][sol[i]];
      } else {
        std::vector<std::vector<double>> t(tr_ids.size(),
                                           std::vector<double>(gt_ids.size(), 0.0));
        for (size_t i = 0; i < gt_ids.size(); ++i)
          for (size_t j = 0; j < tr_ids.size(); ++j) t[j][i] = cost[i][j];
        auto sol = solve_assignment(t);
        for (size_t j = 0; j < sol.size(); ++j)
          if (sol[j] >= 0) idtp -= t[j][sol[j]];
      }
    }
    double denom = double(rep.gt_count) + double(hyp_count);
    rep.idf1_lite = denom > 0.0 ? 2.0 * idtp / denom : 1.0;
  }

  // Association accuracy: decoded links recovering gt continuation pairs
  // (same identity detected in consecutive frames).
  {
    int gt_pairs = 0, correct = 0;
    std::map<std::pair<int, int>, DetRef> det_of;  // (frame, gt id) -> detection
    for (int f = 0; f < static_cast<int>(frames.size()); ++f)
      for (int i = 0; i < static_cast<int>(frames[f].size()); ++i)
        if (frames[f][i].gt_id) det_of[{f, *frames[f][i].gt_id}] = {f, i};
    for (const auto& [key, ref] : det_of) {
      (void)ref;
      if (det_of.count({key.first + 1, key.second})) ++gt_pairs;
    }
    for (const auto& link : decoded.links) {
      const auto& a = det_at(frames, link.from);
      const auto& b = det_at(frames, link.to);
      if (a.gt_id && b.gt_id && *a.gt_id == *b.gt_id) ++correct;
    }
    rep.assoc_acc = gt_pairs > 0 ? double(correct) / gt_pairs : 1.0;
  }

  return rep;
}

MetricsReport score(const DecodedSequence& decoded,
                    const std::vector<std::vector<Detection>>& frames,
                    const Scenario& scenario, double match_radius) {
  auto tracks = build_tracks(decoded, frames);
  return score_tracks(tracks, decoded, frames, scenario, match_radius);
}

}  // namespace unitrack
