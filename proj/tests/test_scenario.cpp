#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "unitrack/flow.hpp"
#include "unitrack/loss.hpp"
#include "unitrack/scenario.hpp"

using namespace unitrack;
using namespace unitrack::test;

TEST_CASE("crossing geometry") {
  SUBCASE("head-on tracks meet at the center frame") {
    Scenario s = gen_crossing(0.0, 0.1, 10);
    const auto& a = s.trajectories[0];
    CHECK(a.points[0].pos.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(a.points[0].pos.y == doctest::Approx(0.5));
    CHECK(a.points[5].pos.x == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a.points[5].pos.y == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("perpendicular crossing dips to half a step of separation") {
    Scenario s = gen_crossing(1.5707963267948966, 0.02, 20);
    double min_sep = 1e9;
    int min_frame = -1;
    for (int f = 0; f < 20; ++f) {
      double d = distance(s.trajectories[0].points[f].pos, s.trajectories[1].points[f].pos);
      if (d < min_sep) {
        min_sep = d;
        min_frame = f;
      }
    }
    CHECK(min_sep <= 0.02 * 0.5 + 1e-9);
    CHECK(min_frame == 10);
  }

  SUBCASE("identities are maximally dissimilar in embedding space") {
    Scenario s = gen_crossing(0.0, 0.02, 20);
    CHECK(cos_sim01(s.trajectories[0].points[0].embedding,
                    s.trajectories[1].points[0].embedding) == doctest::Approx(0.0));
  }

  CHECK_THROWS_AS(gen_crossing(0.0, 0.02, 3), ConfigError);
}

TEST_CASE("occlusion scenario") {
  SUBCASE("gap zero equals the no-occlusion baseline") {
    Scenario a = gen_occlusion(0, 20);
    for (const auto& traj : a.trajectories)
      for (const auto& p : traj.points) CHECK(p.visible);
  }

  SUBCASE("gap frames keep ground truth but emit no detections") {
    Scenario s = gen_occlusion(2, 20);
    auto frames = corrupt(s, NoiseModel{});
    CHECK(frames[9].size() == 1);
    CHECK(frames[10].size() == 1);
    CHECK(frames[8].size() == 2);
    CHECK(s.gt_at(9).size() == 2);  // the subject still exists while occluded
  }

  SUBCASE("gating severs all cross-identity edges") {
    Scenario s = gen_occlusion(2, 20);
    auto frames = corrupt(s, NoiseModel{});
    GraphConfig cfg;
    cfg.gating_radius = 0.05;  // below the distractor separation
    std::vector<std::vector<Detection>> window(frames.begin(), frames.begin() + 5);
    TrackingGraph g = build_graph(window, cfg);
    for (int e = 0; e < g.n_real_edges; ++e)
      CHECK(*g.nodes[g.edges[e].from].gt_id == *g.nodes[g.edges[e].to].gt_id);
  }

  CHECK_THROWS_AS(gen_occlusion(30, 20), GapTooLong);
}

TEST_CASE("posture change scenario") {
  SUBCASE("zero drift keeps embeddings constant") {
    Scenario s = gen_posture_change(0.0, 10);
    const auto& pts = s.trajectories[0].points;
    CHECK(cos_sim01(pts.front().embedding, pts.back().embedding) == doctest::Approx(1.0));
  }

  SUBCASE("cumulative rotation follows cos(n * drift)") {
    double drift = M_PI / 20.0;
    Scenario s = gen_posture_change(drift, 11);
    const auto& pts = s.trajectories[0].points;
    // Per-frame similarity stays high while the endpoints drift apart.
    double per_frame = 2.0 * cos_sim01(pts[0].embedding, pts[1].embedding) - 1.0;
    CHECK(per_frame == doctest::Approx(std::cos(drift)).epsilon(1e-12));
    double end_to_end = 2.0 * cos_sim01(pts[0].embedding, pts[10].embedding) - 1.0;
    CHECK(end_to_end == doctest::Approx(std::cos(10.0 * drift)).epsilon(1e-12));
  }

  SUBCASE("temporal loss on the true assignment vanishes for any drift") {
    Scenario s = gen_posture_change(M_PI / 8.0, 12);
    auto frames = corrupt(s, NoiseModel{});
    GraphConfig cfg;
    std::vector<std::vector<Detection>> window(frames.begin(), frames.begin() + 5);
    TrackingGraph g = build_graph(window, cfg);
    TrackingGraph h = g;
    h.flows = gt_hard_flows(g);
    CHECK(temporal_loss(h, cfg.dt) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("corrupt") {
  Scenario s = gen_crossing(0.0, 0.02, 20);

  SUBCASE("zero noise reproduces the ground truth exactly") {
    auto frames = corrupt(s, NoiseModel{});
    for (int f = 0; f < 20; ++f) {
      REQUIRE(frames[f].size() == 2);
      auto gt = s.gt_at(f);
      for (size_t i = 0; i < 2; ++i) {
        CHECK(frames[f][i].position == gt[i].second);
        CHECK(*frames[f][i].gt_id == gt[i].first);
      }
    }
  }

  SUBCASE("full drop rate leaves only ground truth misses") {
    NoiseModel noise;
    noise.fn_rate = 1.0;
    auto frames = corrupt(s, noise);
    int dets = 0;
    for (const auto& fr : frames) dets += static_cast<int>(fr.size());
    CHECK(dets == 0);
    // Eq-4-style factor at a total miss with alpha = 0.9.
    std::vector<Vec2> gt;
    for (int f = 0; f < 20; ++f)
      for (const auto& [id, p] : s.gt_at(f)) gt.push_back(p);
    DetectionQuality q = detection_quality({}, gt, 0.05, 0.9);
    CHECK(q.factor == doctest::Approx(std::exp(-0.9)).epsilon(1e-12));
  }

  SUBCASE("same seed reproduces identical detections") {
    NoiseModel noise;
    noise.pos_sigma = 0.01;
    noise.fp_rate = 0.3;
    noise.fn_rate = 0.2;
    noise.seed = 99;
    auto a = corrupt(s, noise);
    auto b = corrupt(s, noise);
    REQUIRE(a.size() == b.size());
    for (size_t f = 0; f < a.size(); ++f) {
      REQUIRE(a[f].size() == b[f].size());
      for (size_t i = 0; i < a[f].size(); ++i) {
        CHECK(a[f][i].position == b[f][i].position);
        CHECK(a[f][i].embedding == b[f][i].embedding);
      }
    }
  }

  SUBCASE("jittered positions stay inside the unit box") {
    NoiseModel noise;
    noise.pos_sigma = 0.3;
    noise.seed = 5;
    auto frames = corrupt(s, noise);
    for (const auto& fr : frames)
      for (const auto& d : fr) {
        CHECK(d.position.x >= 0.0);
        CHECK(d.position.x <= 1.0);
        CHECK(d.position.y >= 0.0);
        CHECK(d.position.y <= 1.0);
      }
  }
}

TEST_CASE("subsample_fps") {
  Scenario s = gen_crossing(0.0, 0.006, 90);
  s.fps = 30.0;

  SUBCASE("identity at the source rate") {
    Scenario t = subsample_fps(s, 30.0);
    CHECK(t.duration == s.duration);
    CHECK(t.fps == s.fps);
    CHECK(t.trajectories[0].points.size() == s.trajectories[0].points.size());
  }

  SUBCASE("30 to 1 fps keeps every 30th frame") {
    Scenario t = subsample_fps(s, 1.0);
    CHECK(t.fps == doctest::Approx(1.0));
    CHECK(t.duration == 3);
    REQUIRE(t.trajectories[0].points.size() == 3);
    CHECK(t.trajectories[0].points[1].pos == s.trajectories[0].points[30].pos);
    CHECK(t.trajectories[0].points[2].frame == 2);
  }

  CHECK_THROWS_AS(subsample_fps(s, 60.0), InvalidRate);
  CHECK_THROWS_AS(subsample_fps(s, 0.0), InvalidRate);
}

TEST_CASE("zero-noise scenarios give a perfect detection-quality factor") {
  for (Scenario s : {gen_crossing(0.0, 0.02, 12), gen_posture_change(0.05, 12)}) {
    auto frames = corrupt(s, NoiseModel{});
    std::vector<Vec2> pred, gt;
    for (int f = 0; f < s.duration; ++f) {
      for (const auto& d : frames[f]) pred.push_back(d.position);
      for (const auto& [id, p] : s.gt_at(f)) gt.push_back(p);
    }
    DetectionQuality q = detection_quality(pred, gt, 0.05, 0.9);
    CHECK(q.factor == 1.0);
    CHECK(q.fp == 0);
    CHECK(q.fn == 0);
  }
}

TEST_CASE("golden corruption output is pinned") {
  // Frozen from the reference run; any RNG or draw-order change shows here.
  Scenario s = gen_crossing(0.0, 0.02, 20);
  NoiseModel noise;
  noise.pos_sigma = 0.01;
  noise.fp_rate = 0.25;
  noise.fn_rate = 0.1;
  noise.embed_drift = 0.03;
  noise.seed = 12345;
  auto frames = corrupt(s, noise);

  int dets = 0;
  for (const auto& f : frames) dets += static_cast<int>(f.size());
  CHECK(dets == 46);
  CHECK(frames[0][0].position.x == doctest::Approx(0.31301652040538658).epsilon(1e-15));
  CHECK(frames[0][0].position.y == doctest::Approx(0.48138087649678718).epsilon(1e-15));
  CHECK(frames[5][0].position.x == doctest::Approx(0.40110305213364156).epsilon(1e-15));
  CHECK(frames[5][0].embedding[0] == doctest::Approx(0.98877107793604224).epsilon(1e-15));
  REQUIRE(frames[0].size() == 3);  // includes one spurious detection
  CHECK_FALSE(frames[0][2].gt_id.has_value());
  CHECK(frames[0][2].position.x == doctest::Approx(0.38023538337078688).epsilon(1e-15));
}

TEST_CASE("generators are pure functions of their parameters") {
  Scenario a = gen_occlusion(3, 24);
  Scenario b = gen_occlusion(3, 24);
  REQUIRE(a.trajectories.size() == b.trajectories.size());
  for (size_t t = 0; t < a.trajectories.size(); ++t) {
    REQUIRE(a.trajectories[t].points.size() == b.trajectories[t].points.size());
    for (size_t i = 0; i < a.trajectories[t].points.size(); ++i) {
      CHECK(a.trajectories[t].points[i].pos == b.trajectories[t].points[i].pos);
      CHECK(a.trajectories[t].points[i].embedding == b.trajectories[t].points[i].embedding);
    }
  }
}
