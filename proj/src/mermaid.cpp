#include "ssg/mermaid.hpp"

#include <charconv>
#include <map>
#include <optional>

#include "ssg/util.hpp"

namespace ssg::mermaid {

namespace {

constexpr std::string_view kHeader = "graph TD";

struct Entity {
  char ch;
  std::string_view code;
};
constexpr Entity kEntities[] = {{'#', "#35;"},  {'"', "#quot;"}, {'\n', "#br;"},
                                {'|', "#pipe;"}, {'@', "#64;"},   {'\r', "#13;"}};

std::string_view arrow_for(RelationType r) {
  switch (r) {
    case RelationType::ControlFlow: return "-->";
    case RelationType::DataFlow: return "-.->";
    case RelationType::Hierarchy: return "==>";
  }
  return "-->";
}

std::size_t scan_id(std::string_view s, std::size_t pos) {
  if (pos >= s.size() || s[pos] != 'n') return pos;
  auto p = pos + 1;
  while (p < s.size() && s[p] >= '0' && s[p] <= '9') ++p;
  return p == pos + 1 ? pos : p;
}

std::size_t skip_ws(std::string_view s, std::size_t pos) {
  while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  return pos;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

struct PendingEdge {
  int line;
  std::string src, dst;
  RelationType rel;
  std::optional<std::string> label;
};

}  // namespace

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    bool done = false;
    for (const auto& e : kEntities)
      if (e.ch == c) {
        out += e.code;
        done = true;
        break;
      }
    if (!done) out += c;
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    bool done = false;
    if (s[i] == '#')
      for (const auto& e : kEntities)
        if (s.substr(i, e.code.size()) == e.code) {
          out += e.ch;
          i += e.code.size();
          done = true;
          break;
        }
    if (!done) out += s[i++];
  }
  return out;
}

std::string serialize(const SceneGraph& g) {
  if (auto v = validate(g); !v.empty()) {
    std::string msg = "cannot serialize invalid graph:";
    for (const auto& s : v) msg += "\n  " + s;
    throw GraphError(msg);
  }
  std::map<std::string, std::string> local;
  std::string out(kHeader);
  out += '\n';
  for (std::size_t i = 0; i < g.nodes().size(); ++i) {
    const auto& n = g.nodes()[i];
    auto id = "n" + std::to_string(i);
    local[n.id] = id;
    out += "  " + id + "[\"" + escape(n.id) + "|" + escape(n.kind) + "|" + escape(n.content);
    if (n.bbox)
      out += "@" + std::to_string(n.bbox->x) + "," + std::to_string(n.bbox->y) + "," + std::to_string(n.bbox->w) +
             "," + std::to_string(n.bbox->h);
    out += "\"]\n";
  }
  for (const auto& e : g.edges()) {
    out += "  " + local[e.src] + " ";
    out += arrow_for(e.relation);
    if (e.label) out += "|" + escape(*e.label) + "|";
    out += " " + local[e.dst] + "\n";
  }
  return out;
}

SceneGraph parse(std::string_view doc) {
  auto lines = split_lines(doc);
  std::size_t i = 0;
  while (i < lines.size() && trim(lines[i]).empty()) ++i;
  if (i == lines.size()) throw ParseError(1, "missing header");
  if (trim(lines[i]) != kHeader) throw ParseError(static_cast<int>(i + 1), "unsupported header");

  SceneGraph g;
  std::map<std::string, std::string> declared;  // local id -> original id
  std::vector<PendingEdge> edges;

  for (++i; i < lines.size(); ++i) {
    const int lineno = static_cast<int>(i + 1);
    auto line = trim(lines[i]);
    if (line.empty()) continue;

    auto id_end = scan_id(line, 0);
    if (id_end == 0) throw ParseError(lineno, "unrecognized line");
    std::string id(line.substr(0, id_end));

    if (line.substr(id_end, 2) == "[\"") {
      auto close = line.find("\"]", id_end + 2);
      if (close == std::string_view::npos) throw ParseError(lineno, "unbalanced brackets");
      if (close + 2 != line.size()) throw ParseError(lineno, "trailing text after node label");
      auto label = line.substr(id_end + 2, close - id_end - 2);
      auto bar1 = label.find('|');
      auto bar2 = bar1 == std::string_view::npos ? bar1 : label.find('|', bar1 + 1);
      if (bar2 == std::string_view::npos) throw ParseError(lineno, "malformed label");
      auto content = label.substr(bar2 + 1);
      SceneNode n{unescape(label.substr(0, bar1)), unescape(label.substr(bar1 + 1, bar2 - bar1 - 1)), {}, {}};
      if (auto at = content.find('@'); at != std::string_view::npos) {
        auto spec = content.substr(at + 1);
        int vals[4];
        std::size_t start = 0;
        for (int k = 0; k < 4; ++k) {
          auto comma = k < 3 ? spec.find(',', start) : spec.size();
          if (comma == std::string_view::npos) throw ParseError(lineno, "malformed bbox");
          auto v = parse_int(spec.substr(start, comma - start));
          if (!v) throw ParseError(lineno, "malformed bbox");
          vals[k] = *v;
          start = comma + 1;
        }
        n.bbox = BoundingBox{vals[0], vals[1], vals[2], vals[3]};
        if (!n.bbox->valid()) throw ParseError(lineno, "malformed bbox");
        content = content.substr(0, at);
      }
      n.content = unescape(content);
      if (!declared.emplace(id, n.id).second) throw ParseError(lineno, "duplicate node " + id);
      g.add_node(std::move(n));
      continue;
    }

    if (line.find('[') != std::string_view::npos || line.find(']') != std::string_view::npos)
      throw ParseError(lineno, "unbalanced brackets");

    auto pos = skip_ws(line, id_end);
    if (pos == id_end) throw ParseError(lineno, "unrecognized line");
    std::optional<RelationType> rel;
    for (auto r : {RelationType::DataFlow, RelationType::ControlFlow, RelationType::Hierarchy}) {
      auto a = arrow_for(r);
      if (line.substr(pos, a.size()) == a) {
        rel = r;
        pos += a.size();
        break;
      }
    }
    if (!rel) throw ParseError(lineno, "unknown arrow");
    pos = skip_ws(line, pos);
    std::optional<std::string> label;
    if (pos < line.size() && line[pos] == '|') {
      auto close = line.find('|', pos + 1);
      if (close == std::string_view::npos) throw ParseError(lineno, "unterminated edge label");
      label = unescape(line.substr(pos + 1, close - pos - 1));
      pos = skip_ws(line, close + 1);
    }
    auto dst_end = scan_id(line, pos);
    if (dst_end == pos || dst_end != line.size()) throw ParseError(lineno, "malformed edge");
    edges.push_back({lineno, id, std::string(line.substr(pos)), *rel, std::move(label)});
  }

  for (auto& pe : edges) {
    for (const auto* end : {&pe.src, &pe.dst})
      if (!declared.contains(*end)) throw ParseError(pe.line, "undeclared node " + *end);
    if (!g.try_add_edge({declared[pe.src], declared[pe.dst], pe.rel, std::move(pe.label)}))
      throw ParseError(pe.line, "duplicate edge");
  }
  if (auto v = validate(g); !v.empty()) throw ParseError(static_cast<int>(lines.size()), v.front());
  return g;
}

double rendering_accuracy(std::span<const std::string> docs) {
  if (docs.empty()) throw std::invalid_argument("rendering_accuracy: no documents");
  std::size_t ok = 0;
  for (const auto& d : docs) {
    try {
      parse(d);
      ++ok;
    } catch (const ParseError&) {
    }
  }
  return static_cast<double>(ok) / static_cast<double>(docs.size());
}

}  // namespace ssg::mermaid
