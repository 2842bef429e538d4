#include "ssg/segmentation.hpp"

#include <algorithm>
#include <functional>
#include <regex>

#include "ssg/util.hpp"

namespace ssg::segmentation {

namespace {

std::string box_text(long long x, long long y, long long w, long long h) {
  return "[" + std::to_string(x) + ", " + std::to_string(y) + ", " + std::to_string(w) + ", " + std::to_string(h) + "]";
}

}  // namespace

std::pair<std::string, std::array<long long, 4>> parse_region_reply(const std::string& text) {
  static const std::regex result_re(
      R"(<result>\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s*</result>)");
  static const std::regex reason_re(R"(<reason>([\s\S]*?)</reason>)");
  std::smatch m;
  if (!std::regex_search(text, m, result_re))
    throw model::FormatError("reply has no <result>[x, y, w, h]</result> block", text);
  std::array<long long, 4> raw{};
  try {
    for (int i = 0; i < 4; ++i) raw[static_cast<std::size_t>(i)] = std::stoll(m[i + 1].str());
  } catch (const std::out_of_range&) {
    throw model::FormatError("bounding box coordinate out of range", text);
  }
  std::string reason;
  if (std::smatch r; std::regex_search(text, r, reason_re)) reason = std::string(trim(r[1].str()));
  return {reason, raw};
}

std::optional<BoundingBox> clamp_box(std::array<long long, 4> raw, int width, int height) {
  auto [x, y, w, h] = raw;
  auto axis = [](long long pos, long long len, int limit) {
    long long lo = std::max(pos, 0LL);
    long long hi = std::min(pos + std::max(len, 1LL), static_cast<long long>(limit));
    if (hi <= lo) {
      lo = std::clamp(pos, 0LL, static_cast<long long>(limit) - 1);
      hi = lo + 1;
    }
    return std::pair{static_cast<int>(lo), static_cast<int>(hi - lo)};
  };
  auto [cx, cw] = axis(x, w, width);
  auto [cy, ch] = axis(y, h, height);
  if (cx == x && cy == y && cw == w && ch == h) return std::nullopt;
  return BoundingBox{cx, cy, cw, ch};
}

SegmentationResponse propose_region(const SegmentationRequest& req, model::ModelBackend& backend) {
  const int width = req.artifact.width(), height = req.artifact.height();
  std::string snips;
  for (const auto& [path, snippet] : req.code_snippets) snips += path + ":\n" + snippet + "\n";
  auto [system, user] = model::PromptTemplate::named("segmentation.txt")
                            .render_messages({{"resolution", std::to_string(width) + "x" + std::to_string(height)},
                                              {"problem_statement", req.issue_text},
                                              {"code_snips", snips},
                                              {"artifact", req.artifact_text}});
  model::ModelRequest mreq{system, user, {{"image/x-portable-graymap", encode_pgm(req.artifact)}}, req.scenario_key};
  auto reply = backend.complete(mreq);
  auto [reason, raw] = parse_region_reply(reply.text);
  SegmentationResponse out{reason, {}};
  if (auto clamped = clamp_box(raw, width, height)) {
    out.bbox = *clamped;
    out.reason += (out.reason.empty() ? "" : " ") + std::string("[clamped from ") +
                  box_text(raw[0], raw[1], raw[2], raw[3]) + " to " +
                  box_text(clamped->x, clamped->y, clamped->w, clamped->h) + "]";
  } else {
    out.bbox = {static_cast<int>(raw[0]), static_cast<int>(raw[1]), static_cast<int>(raw[2]), static_cast<int>(raw[3])};
  }
  return out;
}

CropResult crop(const SceneGraph& g, const RasterImage& img, const BoundingBox& box) {
  auto image = crop_image(img, box);
  const bool any_bbox = std::any_of(g.nodes().begin(), g.nodes().end(), [](const SceneNode& n) { return n.bbox.has_value(); });
  if (!any_bbox) return {g, std::move(image), "graph has no node bounding boxes; returned uncropped"};

  const auto parents = hierarchy_parents(g);
  std::map<std::string, bool> kept;
  std::function<bool(const std::string&, int)> keep = [&](const std::string& id, int depth) -> bool {
    if (auto it = kept.find(id); it != kept.end()) return it->second;
    const auto* n = g.find(id);
    bool k = false;
    if (n->bbox) {
      k = box.contains(n->bbox->center_x(), n->bbox->center_y());
    } else if (auto p = parents.find(id); p != parents.end() && depth < static_cast<int>(g.node_count())) {
      k = keep(p->second, depth + 1);
    }
    kept[id] = k;
    return k;
  };
  std::set<std::string> ids;
  for (const auto& n : g.nodes())
    if (keep(n.id, 0)) ids.insert(n.id);
  if (ids.empty())
    throw EmptyRegion("no node centre lies inside " + box_text(box.x, box.y, box.w, box.h));
  return {induced_subgraph(g, ids), std::move(image), std::nullopt};
}

Gate iteration_gate(int round, int max_rounds) {
  if (round < 1) throw std::invalid_argument("iteration_gate: round must be >= 1");
  return round <= max_rounds ? Gate::Proceed : Gate::Stop;
}

}  // namespace ssg::segmentation
