// Grayscale rasters, a layered SSG rasterizer, and windowed SSIM.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "ssg/graph.hpp"

namespace ssg {

using PixelMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-major 8-bit grayscale image; pixels(y, x).
struct RasterImage {
  PixelMatrix pixels;

  RasterImage() = default;
  RasterImage(int width, int height, std::uint8_t fill = 255);
  explicit RasterImage(PixelMatrix m) : pixels(std::move(m)) {}

  int width() const { return static_cast<int>(pixels.cols()); }
  int height() const { return static_cast<int>(pixels.rows()); }
  std::uint8_t at(int x, int y) const { return pixels(y, x); }
  std::uint8_t& at(int x, int y) { return pixels(y, x); }
  bool operator==(const RasterImage& o) const { return pixels == o.pixels; }
};

class CanvasTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Canvas {
  int width = 640;
  int height = 480;
};

inline constexpr std::uint8_t kBackground = 255;
inline constexpr int kMinCellWidth = 12;
inline constexpr int kMinCellHeight = 8;

/// Node rectangles of the layered layout, keyed by node id.
///
/// Layer = longest path from a source over control-flow and hierarchy edges
/// after DFS back-edge removal (node-id order); nodes spread horizontally in
/// id order within their layer.
std::map<std::string, BoundingBox> layout(const SceneGraph& g, Canvas canvas);

/// Edges as 1-px lines between rectangle centres, then nodes as black-bordered
/// rectangles filled by kind (64, 128 or 192). Pure: same input, same bytes.
RasterImage rasterize(const SceneGraph& g, Canvas canvas);

/// Fill intensity for a node kind.
std::uint8_t kind_fill(std::string_view kind);

/// Copy of a node's lacking bboxes filled from layout(g, canvas).
SceneGraph with_layout_boxes(const SceneGraph& g, Canvas canvas);

inline constexpr int kSsimWindow = 8;
inline constexpr double kSsimC1 = (0.01 * 255) * (0.01 * 255);
inline constexpr double kSsimC2 = (0.03 * 255) * (0.03 * 255);

/// Mean SSIM over all 8x8 windows (stride 1, uniform weights). Both images
/// must share dimensions, each at least 8x8.
double ssim(const RasterImage& a, const RasterImage& b);

/// Sub-image, no resampling. The box must lie inside the image.
RasterImage crop_image(const RasterImage& img, const BoundingBox& box);

// Binary PGM (P5, maxval 255).
std::string encode_pgm(const RasterImage& img);
RasterImage decode_pgm(std::string_view data);
void save_pgm(const RasterImage& img, const std::string& path);
RasterImage load_pgm(const std::string& path);

}  // namespace ssg
