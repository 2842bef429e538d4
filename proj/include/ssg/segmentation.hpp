// Bounding-box segmentation feedback: region proposal, crop, round gate.
#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ssg/graph.hpp"
#include "ssg/model.hpp"
#include "ssg/raster.hpp"

namespace ssg::segmentation {

struct SegmentationRequest {
  RasterImage artifact;
  std::string issue_text;
  std::vector<std::pair<std::string, std::string>> code_snippets;  // (path, snippet)
  std::string artifact_text;  // optional Mermaid rendering of the artifact's SSG
  std::string scenario_key;
};

struct SegmentationResponse {
  std::string reason;
  BoundingBox bbox;
};

/// Parses "<result>[x, y, w, h]</result>" (and an optional <reason> block).
/// Throws model::FormatError carrying the raw text.
std::pair<std::string, std::array<long long, 4>> parse_region_reply(const std::string& text);

/// Clamps a model box into [0,width) x [0,height) keeping w, h >= 1.
/// Returns nullopt when no change was needed.
std::optional<BoundingBox> clamp_box(std::array<long long, 4> raw, int width, int height);

SegmentationResponse propose_region(const SegmentationRequest& req, model::ModelBackend& backend);

class EmptyRegion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CropResult {
  SceneGraph graph;
  RasterImage image;
  /// Set when the graph was returned uncropped (no node carries a bbox).
  std::optional<std::string> notice;
};

/// Keeps nodes whose bbox centre lies in `box`; bbox-less nodes follow their
/// nearest hierarchy ancestor. Image is the exact pixel sub-rectangle.
CropResult crop(const SceneGraph& g, const RasterImage& img, const BoundingBox& box);

inline constexpr int kDefaultMaxRounds = 3;

enum class Gate { Proceed, Stop };

/// Proceed iff 1 <= round <= max_rounds.
Gate iteration_gate(int round, int max_rounds = kDefaultMaxRounds);

}  // namespace ssg::segmentation
