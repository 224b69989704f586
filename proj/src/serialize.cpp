#include "unitrack/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace unitrack {

using nlohmann::json;

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string detections_to_json(const std::vector<std::vector<Detection>>& frames) {
  json root = json::array();
  for (const auto& frame : frames) {
    json jf = json::array();
    for (const auto& d : frame) {
      json jd = {{"frame", d.frame},
                 {"x", d.position.x},
                 {"y", d.position.y},
                 {"confidence", d.confidence},
                 {"embedding", d.embedding}};
      if (d.gt_id) jd["gt_id"] = *d.gt_id;
      jf.push_back(std::move(jd));
    }
    root.push_back(std::move(jf));
  }
  return root.dump(2);
}

std::vector<std::vector<Detection>> detections_from_json(const std::string& text) {
  json root = json::parse(text);
  if (!root.is_array()) throw ConfigError("detection file must be an array of frames");
  std::vector<std::vector<Detection>> frames;
  for (const auto& jf : root) {
    std::vector<Detection> frame;
    for (const auto& jd : jf) {
      Detection d;
      d.frame = jd.at("frame").get<int>();
      d.position = {jd.at("x").get<double>(), jd.at("y").get<double>()};
      d.confidence = jd.value("confidence", 1.0);
      d.embedding = jd.at("embedding").get<std::vector<double>>();
      if (jd.contains("gt_id")) d.gt_id = jd["gt_id"].get<int>();
      if (d.confidence < 0.0 || d.confidence > 1.0)
        throw ConfigError("confidence out of [0,1]");
      frame.push_back(std::move(d));
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::string graph_to_json(const TrackingGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    json jn = {{"frame", n.frame},
               {"det_frame", n.det_frame},
               {"det_index", n.det_index},
               {"x", n.pos.x},
               {"y", n.pos.y}};
    if (n.gt_id) jn["gt_id"] = *n.gt_id;
    nodes.push_back(std::move(jn));
  }
  json edges = json::array();
  for (size_t e = 0; e < g.edges.size(); ++e) {
    const char* kind = g.edges[e].kind == EdgeKind::Real
                           ? "real"
                           : (g.edges[e].kind == EdgeKind::Source ? "source" : "sink");
    edges.push_back({{"from", g.edges[e].from},
                     {"to", g.edges[e].to},
                     {"weight", g.edges[e].weight},
                     {"flow", g.flows[e]},
                     {"kind", kind}});
  }
  json root = {{"n_frames", g.n_frames},
               {"source", g.source_id()},
               {"sink", g.sink_id()},
               {"nodes", std::move(nodes)},
               {"edges", std::move(edges)},
               {"balance", g.balance}};
  return root.dump(2);
}

std::string breakdown_to_json(const LossBreakdown& b) {
  json root = {{"flow", b.flow},         {"spatial", b.spatial},
               {"temporal", b.temporal}, {"lambda_s", b.lambda_s},
               {"lambda_t", b.lambda_t}, {"total", b.total},
               {"n_edges", b.n_edges},   {"final", b.final_loss},
               {"quality_factor", b.quality_factor}};
  return root.dump(2);
}

std::string gradients_to_json(const GradientSet& gs) {
  json dpos = json::array(), dvel = json::array();
  for (const auto& v : gs.d_pos) dpos.push_back({v.x, v.y});
  for (const auto& v : gs.d_vel) dvel.push_back({v.x, v.y});
  json root = {{"d_flow", gs.d_flow},
               {"d_pos", std::move(dpos)},
               {"d_vel", std::move(dvel)},
               {"chain_pos", gs.chain_pos},
               {"coincident_edges", gs.coincident_edges}};
  return root.dump(2);
}

std::string metrics_to_json(const MetricsReport& m) {
  json root = {{"ids", m.ids},
               {"frag", m.frag},
               {"fp", m.fp},
               {"fn", m.fn},
               {"gt_count", m.gt_count},
               {"mota_lite", m.mota_lite},
               {"idf1_lite", m.idf1_lite},
               {"assoc_acc", m.assoc_acc}};
  if (!m.per_error_type.empty()) root["per_error_type"] = m.per_error_type;
  return root.dump(2);
}

std::string decoded_to_json(const DecodedSequence& d, const std::vector<HypTrack>& tracks) {
  json links = json::array(), births = json::array(), deaths = json::array();
  for (const auto& l : d.links)
    links.push_back({{"from", {l.from.frame, l.from.index}}, {"to", {l.to.frame, l.to.index}}});
  for (const auto& b : d.births) births.push_back({b.frame, b.index});
  for (const auto& x : d.deaths) deaths.push_back({x.frame, x.index});
  json jtracks = json::array();
  for (const auto& t : tracks) {
    json pts = json::array();
    for (const auto& p : t.points) pts.push_back({p.frame, p.index});
    jtracks.push_back({{"id", t.id}, {"points", std::move(pts)}});
  }
  json root = {{"links", std::move(links)},
               {"births", std::move(births)},
               {"deaths", std::move(deaths)},
               {"tracks", std::move(jtracks)}};
  return root.dump(2);
}

std::string losses_to_csv(const std::vector<LossBreakdown>& rows,
                          const std::vector<int>& window_of_row) {
  std::ostringstream out;
  out << "window,step,flow,spatial,temporal,lambda_s,lambda_t,total,n_edges,final\n";
  int step = 0, prev_window = -1;
  for (size_t i = 0; i < rows.size(); ++i) {
    int w = i < window_of_row.size() ? window_of_row[i] : 0;
    if (w != prev_window) {
      step = 0;
      prev_window = w;
    }
    const auto& b = rows[i];
    out << w << ',' << step++ << ',' << fmt_g17(b.flow) << ',' << fmt_g17(b.spatial)
        << ',' << fmt_g17(b.temporal) << ',' << fmt_g17(b.lambda_s) << ','
        << fmt_g17(b.lambda_t) << ',' << fmt_g17(b.total) << ',' << b.n_edges << ','
        << fmt_g17(b.final_loss) << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace unitrack
