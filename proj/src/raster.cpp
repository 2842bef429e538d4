#include "ssg/raster.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "ssg/util.hpp"

namespace ssg {

RasterImage::RasterImage(int width, int height, std::uint8_t fill) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("raster dimensions must be positive, got " + std::to_string(width) + "x" +
                                std::to_string(height));
  pixels = PixelMatrix::Constant(height, width, fill);
}

std::uint8_t kind_fill(std::string_view kind) {
  static constexpr std::uint8_t fills[] = {64, 128, 192};
  return fills[fnv1a(kind) % 3];
}

namespace {

bool layered_relation(RelationType r) { return r == RelationType::ControlFlow || r == RelationType::Hierarchy; }

std::map<std::string, int> assign_layers(const SceneGraph& g) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& n : g.nodes()) adj[n.id];
  for (const auto& e : g.edges())
    if (layered_relation(e.relation)) adj[e.src].push_back(e.dst);
  for (auto& [_, v] : adj) std::sort(v.begin(), v.end());

  // DFS in id order; edges into an on-stack node are back edges and dropped.
  std::map<std::string, int> color;
  std::map<std::string, std::vector<std::string>> dag;
  std::vector<std::string> finish;
  std::function<void(const std::string&)> dfs = [&](const std::string& u) {
    color[u] = 1;
    for (const auto& v : adj[u]) {
      if (color[v] == 1) continue;
      dag[u].push_back(v);
      if (color[v] == 0) dfs(v);
    }
    color[u] = 2;
    finish.push_back(u);
  };
  for (const auto& [id, _] : adj)
    if (color[id] == 0) dfs(id);

  std::map<std::string, int> layer;
  for (const auto& [id, _] : adj) layer[id] = 0;
  for (auto it = finish.rbegin(); it != finish.rend(); ++it)
    for (const auto& v : dag[*it]) layer[v] = std::max(layer[v], layer[*it] + 1);
  return layer;
}

void draw_line(RasterImage& img, int x0, int y0, int x1, int y1, std::uint8_t value) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    if (x0 >= 0 && y0 >= 0 && x0 < img.width() && y0 < img.height()) img.at(x0, y0) = value;
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

using Sums = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Sums integral(const RasterImage& a, const RasterImage& b, int mode) {
  const int h = a.height(), w = a.width();
  Sums s = Sums::Zero(h + 1, w + 1);
  for (int y = 0; y < h; ++y) {
    std::int64_t row = 0;
    for (int x = 0; x < w; ++x) {
      const std::int64_t pa = a.at(x, y), pb = b.at(x, y);
      row += mode == 0 ? pa : mode == 1 ? pa * pa : pa * pb;
      s(y + 1, x + 1) = s(y, x + 1) + row;
    }
  }
  return s;
}

std::int64_t window_sum(const Sums& s, int x, int y) {
  constexpr int k = kSsimWindow;
  return s(y + k, x + k) - s(y, x + k) - s(y + k, x) + s(y, x);
}

}  // namespace

std::map<std::string, BoundingBox> layout(const SceneGraph& g, Canvas canvas) {
  std::map<std::string, BoundingBox> out;
  if (g.nodes().empty()) return out;
  auto layer = assign_layers(g);
  int layers = 0;
  std::map<int, std::vector<std::string>> rows;
  for (const auto& [id, l] : layer) {
    rows[l].push_back(id);  // map iteration keeps id order
    layers = std::max(layers, l + 1);
  }
  std::size_t widest = 0;
  for (const auto& [_, r] : rows) widest = std::max(widest, r.size());

  const int cell_h = canvas.height / layers;
  const int min_cell_w = canvas.width / static_cast<int>(widest);
  if (cell_h < kMinCellHeight || min_cell_w < kMinCellWidth)
    throw CanvasTooSmall("canvas " + std::to_string(canvas.width) + "x" + std::to_string(canvas.height) +
                         " cannot hold " + std::to_string(layers) + " layers of up to " + std::to_string(widest) +
                         " nodes");
  for (const auto& [l, ids] : rows) {
    const int cell_w = canvas.width / static_cast<int>(ids.size());
    const int mx = cell_w / 6, my = cell_h / 4;
    for (std::size_t i = 0; i < ids.size(); ++i)
      out[ids[i]] = {static_cast<int>(i) * cell_w + mx, l * cell_h + my, cell_w - 2 * mx, cell_h - 2 * my};
  }
  return out;
}

RasterImage rasterize(const SceneGraph& g, Canvas canvas) {
  if (canvas.width < 64 || canvas.height < 64)
    throw CanvasTooSmall("canvas must be at least 64x64, got " + std::to_string(canvas.width) + "x" +
                         std::to_string(canvas.height));
  if (auto v = validate(g); !v.empty()) throw GraphError("cannot rasterize invalid graph: " + v.front());
  auto boxes = layout(g, canvas);
  RasterImage img(canvas.width, canvas.height, kBackground);
  auto centre = [](const BoundingBox& b) { return std::pair{b.x + b.w / 2, b.y + b.h / 2}; };
  for (const auto& e : g.edges()) {
    auto [x0, y0] = centre(boxes.at(e.src));
    auto [x1, y1] = centre(boxes.at(e.dst));
    draw_line(img, x0, y0, x1, y1, 0);
  }
  for (const auto& n : g.nodes()) {
    const auto& b = boxes.at(n.id);
    img.pixels.block(b.y, b.x, b.h, b.w).setConstant(0);
    if (b.w > 2 && b.h > 2) img.pixels.block(b.y + 1, b.x + 1, b.h - 2, b.w - 2).setConstant(kind_fill(n.kind));
  }
  return img;
}

SceneGraph with_layout_boxes(const SceneGraph& g, Canvas canvas) {
  auto boxes = layout(g, canvas);
  SceneGraph out;
  for (auto n : g.nodes()) {
    if (!n.bbox) n.bbox = boxes.at(n.id);
    out.add_node(std::move(n));
  }
  for (const auto& e : g.edges()) out.add_edge(e);
  out.meta() = g.meta();
  return out;
}

double ssim(const RasterImage& a, const RasterImage& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw std::invalid_argument("ssim: dimension mismatch " + std::to_string(a.width()) + "x" +
                                std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                                std::to_string(b.height()));
  if (a.width() < kSsimWindow || a.height() < kSsimWindow)
    throw std::invalid_argument("ssim: images must be at least 8x8");

  const auto sa = integral(a, a, 0), sb = integral(b, b, 0);
  const auto saa = integral(a, a, 1), sbb = integral(b, b, 1), sab = integral(a, b, 2);

  // Window statistics scaled by N (count) so everything stays in exact
  // integers until the final ratio: mu = s/N, var = (N*ss - s*s)/N^2.
  constexpr double n2 = double(kSsimWindow * kSsimWindow) * double(kSsimWindow * kSsimWindow);
  constexpr std::int64_t n = kSsimWindow * kSsimWindow;
  double total = 0.0;
  long count = 0;
  for (int y = 0; y + kSsimWindow <= a.height(); ++y) {
    for (int x = 0; x + kSsimWindow <= a.width(); ++x) {
      const std::int64_t ma = window_sum(sa, x, y), mb = window_sum(sb, x, y);
      const std::int64_t va = n * window_sum(saa, x, y) - ma * ma;
      const std::int64_t vb = n * window_sum(sbb, x, y) - mb * mb;
      const std::int64_t cov = n * window_sum(sab, x, y) - ma * mb;
      const double num = (2.0 * double(ma * mb) + kSsimC1 * n2) * (2.0 * double(cov) + kSsimC2 * n2);
      const double den = (double(ma * ma + mb * mb) + kSsimC1 * n2) * (double(va + vb) + kSsimC2 * n2);
      total += num / den;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

RasterImage crop_image(const RasterImage& img, const BoundingBox& box) {
  if (!box.valid() || box.x + box.w > img.width() || box.y + box.h > img.height())
    throw std::invalid_argument("crop box outside image");
  return RasterImage(PixelMatrix(img.pixels.block(box.y, box.x, box.h, box.w)));
}

std::string encode_pgm(const RasterImage& img) {
  std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::size_t>(img.pixels.size()));
  return out;
}

RasterImage decode_pgm(std::string_view data) {
  std::size_t pos = 0;
  auto token = [&]() -> std::string {
    for (;;) {
      while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
      if (pos < data.size() && data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    auto start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return std::string(data.substr(start, pos - start));
  };
  if (token() != "P5") throw std::invalid_argument("not a binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed PGM header");
  }
  if (maxval != 255) throw std::invalid_argument("only 8-bit PGM is supported");
  ++pos;  // single whitespace after maxval
  const auto need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (w < 1 || h < 1 || data.size() < pos + need) throw std::invalid_argument("truncated PGM data");
  RasterImage img(w, h);
  std::copy_n(reinterpret_cast<const std::uint8_t*>(data.data() + pos), need, img.pixels.data());
  return img;
}

void save_pgm(const RasterImage& img, const std::string& path) { write_file(path, encode_pgm(img)); }

RasterImage load_pgm(const std::string& path) { return decode_pgm(read_file(path)); }

}  // namespace ssg
