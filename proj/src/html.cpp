#include "ssg/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "ssg/util.hpp"

namespace ssg::html {

namespace {

constexpr std::array<std::string_view, 13> kVoid = {"br",    "img",  "input", "hr",     "meta",  "link", "area",
                                                     "base",  "col",  "embed", "source", "track", "wbr"};

bool is_raw_text(std::string_view tag) { return tag == "script" || tag == "style"; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

class Parser {
 public:
  explicit Parser(std::string_view in) : in_(in) {}

  DomNode run() {
    if (in_.empty()) throw ParseError(0, "empty input");
    while (pos_ < in_.size()) {
      if (starts("<!--")) {
        auto end = in_.find("-->", pos_ + 4);
        if (end == std::string_view::npos) throw ParseError(pos_, "unterminated comment");
        pos_ = end + 3;
      } else if (starts("<!")) {
        auto end = in_.find('>', pos_);
        if (end == std::string_view::npos) throw ParseError(pos_, "unterminated declaration");
        pos_ = end + 1;
      } else if (starts("</")) {
        close_tag();
      } else if (in_[pos_] == '<' && pos_ + 1 < in_.size() && std::isalpha(static_cast<unsigned char>(in_[pos_ + 1]))) {
        open_tag();
      } else {
        text();
      }
    }
    if (!stack_.empty()) throw ParseError(in_.size(), "unclosed element <" + stack_.back().tag + ">");
    if (roots_.empty()) throw ParseError(in_.size(), "no root element");
    return std::move(roots_.front());
  }

 private:
  bool starts(std::string_view s) const { return in_.substr(pos_, s.size()) == s; }

  void finish(DomNode node) {
    if (!stack_.empty()) {
      stack_.back().children.push_back(std::move(node));
      return;
    }
    if (!roots_.empty()) throw ParseError(node.source_span.start, "multiple root elements");
    roots_.push_back(std::move(node));
  }

  void open_tag() {
    const auto start = pos_;
    auto p = pos_ + 1;
    while (p < in_.size() && is_name_char(in_[p])) ++p;
    DomNode node;
    node.tag = lower(in_.substr(pos_ + 1, p - pos_ - 1));
    bool self_closing = false;
    for (;;) {
      while (p < in_.size() && is_space(in_[p])) ++p;
      if (p >= in_.size()) throw ParseError(start, "unterminated tag <" + node.tag + ">");
      if (in_[p] == '>') {
        ++p;
        break;
      }
      if (in_.substr(p, 2) == "/>") {
        self_closing = true;
        p += 2;
        break;
      }
      auto name_start = p;
      while (p < in_.size() && !is_space(in_[p]) && in_[p] != '=' && in_[p] != '>' && in_[p] != '/' &&
             in_[p] != '"' && in_[p] != '\'')
        ++p;
      if (p == name_start) throw ParseError(p, "malformed attribute in <" + node.tag + ">");
      auto name = lower(in_.substr(name_start, p - name_start));
      auto q = p;
      while (q < in_.size() && is_space(in_[q])) ++q;
      std::string value;
      if (q < in_.size() && in_[q] == '=') {
        ++q;
        while (q < in_.size() && is_space(in_[q])) ++q;
        if (q >= in_.size()) throw ParseError(q, "missing attribute value");
        if (in_[q] == '"' || in_[q] == '\'') {
          auto close = in_.find(in_[q], q + 1);
          if (close == std::string_view::npos) throw ParseError(q, "unterminated attribute value");
          value = std::string(in_.substr(q + 1, close - q - 1));
          p = close + 1;
        } else {
          auto vs = q;
          while (q < in_.size() && !is_space(in_[q]) && in_[q] != '>') ++q;
          if (q == vs) throw ParseError(q, "missing attribute value");
          value = std::string(in_.substr(vs, q - vs));
          p = q;
        }
      }
      node.attributes.emplace_back(std::move(name), std::move(value));
    }
    node.open_tag = std::string(in_.substr(start, p - start));
    node.source_span.start = start;
    pos_ = p;

    if (self_closing || is_void_element(node.tag)) {
      node.source_span.end = pos_;
      finish(std::move(node));
      return;
    }
    if (is_raw_text(node.tag)) {
      auto lowered = lower(in_.substr(pos_));
      auto rel = lowered.find("</" + node.tag);
      if (rel == std::string::npos) throw ParseError(in_.size(), "unclosed element <" + node.tag + ">");
      auto body = in_.substr(pos_, rel);
      if (!trim(body).empty()) {
        DomNode t;
        t.tag = "text";
        t.text = std::string(body);
        t.source_span = {pos_, pos_ + rel};
        node.children.push_back(std::move(t));
      }
      pos_ += rel;
    }
    stack_.push_back(std::move(node));
  }

  void close_tag() {
    const auto start = pos_;
    auto end = in_.find('>', pos_);
    if (end == std::string_view::npos) throw ParseError(start, "unterminated close tag");
    auto name = lower(trim(in_.substr(pos_ + 2, end - pos_ - 2)));
    if (stack_.empty()) throw ParseError(start, "unexpected close tag " + name);
    if (stack_.back().tag != name)
      throw ParseError(start, "mismatched close tag: expected " + stack_.back().tag + ", found " + name);
    pos_ = end + 1;
    DomNode node = std::move(stack_.back());
    stack_.pop_back();
    node.source_span.end = pos_;
    finish(std::move(node));
  }

  void text() {
    const auto start = pos_;
    auto p = pos_ + 1;
    for (; p < in_.size(); ++p) {
      if (in_[p] != '<') continue;
      if (p + 1 < in_.size() && (in_[p + 1] == '/' || in_[p + 1] == '!' ||
                                 std::isalpha(static_cast<unsigned char>(in_[p + 1]))))
        break;
    }
    pos_ = p;
    auto body = in_.substr(start, p - start);
    if (trim(body).empty()) return;
    if (stack_.empty()) throw ParseError(start, "text outside root element");
    DomNode t;
    t.tag = "text";
    t.text = std::string(body);
    t.source_span = {start, p};
    stack_.back().children.push_back(std::move(t));
  }

  std::string_view in_;
  std::size_t pos_ = 0;
  std::vector<DomNode> stack_;
  std::vector<DomNode> roots_;
};

void to_ssg(const DomNode& n, const std::string& id, SceneGraph& g) {
  g.add_node({id, n.is_text() ? "text" : n.tag, n.is_text() ? n.text : n.open_tag, std::nullopt});
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    auto child = (id == "/" ? "/" : id + "/") + std::to_string(i);
    to_ssg(n.children[i], child, g);
    g.add_edge({id, child, RelationType::Hierarchy, std::nullopt});
  }
}

void render_into(const DomNode& n, int depth, std::string& out) {
  if (n.is_text()) {
    out += n.text;
    return;
  }
  out += "<" + n.tag;
  for (const auto& [k, v] : n.attributes) {
    const char q = v.find('"') == std::string::npos ? '"' : '\'';
    out += " " + k + "=" + q + v + q;
  }
  out += ">";
  if (is_void_element(n.tag)) return;
  const bool block = !n.children.empty() && std::none_of(n.children.begin(), n.children.end(),
                                                          [](const DomNode& c) { return c.is_text(); });
  for (const auto& c : n.children) {
    if (block) out += "\n" + std::string(static_cast<std::size_t>(depth + 1) * 2, ' ');
    render_into(c, depth + 1, out);
  }
  if (block) out += "\n" + std::string(static_cast<std::size_t>(depth) * 2, ' ');
  out += "</" + n.tag + ">";
}

}  // namespace

bool is_void_element(std::string_view tag) {
  return std::find(kVoid.begin(), kVoid.end(), tag) != kVoid.end();
}

DomNode parse_html(std::string_view input) { return Parser(input).run(); }

SceneGraph dom_to_ssg(const DomNode& root) {
  SceneGraph g;
  to_ssg(root, "/", g);
  g.meta()["extractor"] = "html";
  return g;
}

const DomNode* locate(const DomNode& root, std::string_view path) {
  if (path.empty() || path[0] != '/') return nullptr;
  const DomNode* cur = &root;
  std::size_t pos = 1;
  while (pos < path.size()) {
    auto slash = path.find('/', pos);
    auto part = path.substr(pos, slash == std::string_view::npos ? std::string_view::npos : slash - pos);
    if (part.empty()) return nullptr;
    std::size_t idx = 0;
    for (char c : part) {
      if (c < '0' || c > '9') return nullptr;
      idx = idx * 10 + static_cast<std::size_t>(c - '0');
    }
    if (idx >= cur->children.size()) return nullptr;
    cur = &cur->children[idx];
    if (slash == std::string_view::npos) break;
    pos = slash + 1;
  }
  return cur;
}

std::size_t count_nodes(const DomNode& root) {
  std::size_t n = 1;
  for (const auto& c : root.children) n += count_nodes(c);
  return n;
}

std::string render(const DomNode& root) {
  std::string out;
  render_into(root, 0, out);
  out += "\n";
  return out;
}

bool same_tree(const DomNode& a, const DomNode& b) {
  if (a.tag != b.tag || a.attributes != b.attributes || a.text != b.text || a.children.size() != b.children.size())
    return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!same_tree(a.children[i], b.children[i])) return false;
  return true;
}

}  // namespace ssg::html
