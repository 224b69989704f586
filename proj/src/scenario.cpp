#include "unitrack/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "unitrack/rng.hpp"

namespace unitrack {

std::vector<std::pair<int, Vec2>> Scenario::gt_at(int frame) const {
  std::vector<std::pair<int, Vec2>> out;
  for (const auto& traj : trajectories)
    for (const auto& p : traj.points)
      if (p.frame == frame) out.emplace_back(traj.id, p.pos);
  return out;
}

int Scenario::gt_point_count() const {
  int n = 0;
  for (const auto& traj : trajectories) n += static_cast<int>(traj.points.size());
  return n;
}

void rotate_embedding(std::vector<double>& e, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  for (size_t p = 0; p + 1 < e.size(); p += 2) {
    double a = e[p], b = e[p + 1];
    e[p] = c * a - s * b;
    e[p + 1] = s * a + c * b;
  }
}

std::vector<double> identity_embedding(int id, double angle) {
  std::vector<double> e(kEmbedDim, 0.0);
  if (id < 2) {
    double sign = id == 0 ? 1.0 : -1.0;
    e[0] = sign * std::cos(angle);
    e[1] = sign * std::sin(angle);
    return e;
  }
  int axis = (2 * (id - 1)) % kEmbedDim;
  e[axis] = std::cos(angle);
  e[axis + 1] = std::sin(angle);
  return e;
}

namespace {

Vec2 clamp01(Vec2 p) {
  return {std::clamp(p.x, 0.0, 1.0), std::clamp(p.y, 0.0, 1.0)};
}

Trajectory line_track(int id, Vec2 start, Vec2 step, int n_frames, double drift) {
  Trajectory t;
  t.id = id;
  for (int f = 0; f < n_frames; ++f) {
    TrajPoint p;
    p.frame = f;
    p.pos = clamp01(start + double(f) * step);
    p.embedding = identity_embedding(id, drift * f);
    t.points.push_back(std::move(p));
  }
  return t;
}

}  // namespace

Scenario gen_crossing(double angle, double speed, int n_frames) {
  if (n_frames < 5) throw ConfigError("crossing needs n_frames >= 5");
  Scenario s;
  s.name = "crossing";
  s.duration = n_frames;
  const Vec2 center{0.5, 0.5};
  const int mid = n_frames / 2;
  const Vec2 dir_a{std::cos(angle / 2.0), std::sin(angle / 2.0)};
  const Vec2 dir_b{-std::cos(angle / 2.0), std::sin(angle / 2.0)};

  Trajectory a, b;
  a.id = 0;
  b.id = 1;
  for (int f = 0; f < n_frames; ++f) {
    TrajPoint pa{f, clamp01(center + (double(f - mid) * speed) * dir_a),
                 identity_embedding(0, 0.0)};
    TrajPoint pb{f, clamp01(center + ((double(f - mid) - 0.5) * speed) * dir_b),
                 identity_embedding(1, 0.0)};
    a.points.push_back(std::move(pa));
    b.points.push_back(std::move(pb));
  }
  s.trajectories = {std::move(a), std::move(b)};
  return s;
}

Scenario gen_occlusion(int gap, int n_frames) {
  if (n_frames < 6) throw ConfigError("occlusion needs n_frames >= 6");
  if (gap < 0 || gap > n_frames - 4) throw GapTooLong("gap must satisfy gap <= n_frames - 4");
  Scenario s;
  s.name = "occlusion";
  s.duration = n_frames;

  // Distractor offset sits outside the geometric kernel's reach (w < sink
  // prior for an antipodal identity), so a terminated track prefers death
  // over adopting the distractor.
  const double speed = 0.02;
  const double start_x = 0.5 - 0.5 * speed * n_frames;
  Trajectory subject = line_track(0, {start_x, 0.40}, {speed, 0.0}, n_frames, 0.0);
  Trajectory distractor = line_track(1, {start_x, 0.65}, {speed, 0.0}, n_frames, 0.0);

  // The subject keeps existing during the gap (the metrics count misses);
  // only its detections are suppressed.
  const int gap_start = (n_frames - gap) / 2;
  for (auto& p : subject.points)
    if (p.frame >= gap_start && p.frame < gap_start + gap) p.visible = false;

  s.trajectories = {std::move(subject), std::move(distractor)};
  return s;
}

Scenario gen_posture_change(double drift_per_frame, int n_frames) {
  if (n_frames < 5) throw ConfigError("posture change needs n_frames >= 5");
  Scenario s;
  s.name = "posture_change";
  s.duration = n_frames;
  const double speed = 0.02;
  const double start_x = 0.5 - 0.5 * speed * n_frames;
  s.trajectories = {
      line_track(0, {start_x, 0.35}, {speed, 0.0}, n_frames, drift_per_frame),
      line_track(1, {start_x, 0.65}, {speed, 0.0}, n_frames, drift_per_frame),
  };
  return s;
}

std::vector<std::vector<Detection>> corrupt(const Scenario& scenario,
                                            const NoiseModel& noise) {
  Rng rng(noise.seed);
  std::vector<std::vector<Detection>> frames(scenario.duration);

  for (int f = 0; f < scenario.duration; ++f) {
    for (const auto& traj : scenario.trajectories) {
      const TrajPoint* pt = nullptr;
      for (const auto& p : traj.points)
        if (p.frame == f) pt = &p;
      if (!pt || !pt->visible) continue;
      if (noise.fn_rate > 0.0 && rng.uniform() < noise.fn_rate) continue;

      Detection d;
      d.frame = f;
      d.position = pt->pos;
      if (noise.pos_sigma > 0.0) {
        d.position.x += noise.pos_sigma * rng.gaussian();
        d.position.y += noise.pos_sigma * rng.gaussian();
        d.position = clamp01(d.position);
      }
      d.embedding = pt->embedding;
      if (noise.embed_drift != 0.0) rotate_embedding(d.embedding, noise.embed_drift * f);
      d.confidence = 1.0;
      d.gt_id = traj.id;
      frames[f].push_back(std::move(d));
    }

    if (noise.fp_rate > 0.0 && rng.uniform() < noise.fp_rate) {
      Detection d;
      d.frame = f;
      d.position = {rng.uniform(), rng.uniform()};
      d.embedding = rng.unit_vector(kEmbedDim);
      d.confidence = 0.5;
      frames[f].push_back(std::move(d));
    }
  }
  return frames;
}

Scenario subsample_fps(const Scenario& scenario, double target_fps) {
  if (target_fps <= 0.0 || target_fps > scenario.fps)
    throw InvalidRate("target_fps must lie in (0, fps]");
  const int stride = std::max(1, static_cast<int>(std::lround(scenario.fps / target_fps)));

  Scenario out;
  out.name = scenario.name;
  out.noise = scenario.noise;
  out.fps = scenario.fps / stride;
  out.duration = (scenario.duration + stride - 1) / stride;
  for (const auto& traj : scenario.trajectories) {
    Trajectory t;
    t.id = traj.id;
    for (const auto& p : traj.points) {
      if (p.frame % stride != 0) continue;
      TrajPoint q = p;
      q.frame = p.frame / stride;
      t.points.push_back(std::move(q));
    }
    out.trajectories.push_back(std::move(t));
  }
  return out;
}

}  // namespace unitrack
