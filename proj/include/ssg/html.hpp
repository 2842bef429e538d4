// Strict HTML-subset parser and DOM -> scene graph transform.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ssg/graph.hpp"

namespace ssg::html {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, std::string reason)
      : std::runtime_error("byte " + std::to_string(offset) + ": " + reason), offset_(offset), reason_(std::move(reason)) {}
  std::size_t offset() const { return offset_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t offset_;
  std::string reason_;
};

struct SourceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
};

/// Element (lowercased tag) or text node (tag == "text").
struct DomNode {
  std::string tag;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<DomNode> children;
  std::string text;
  SourceSpan source_span;
  /// Opening-tag source text for elements.
  std::string open_tag;

  bool is_text() const { return tag == "text"; }
};

bool is_void_element(std::string_view tag);

/// Not a recovering parser: mismatched or unclosed tags and multiple roots
/// are errors. Comments and doctype declarations are discarded;
/// whitespace-only text is dropped.
DomNode parse_html(std::string_view input);

/// One node per DOM node (id = child-index path, root "/"), one hierarchy
/// edge per parent/child pair.
SceneGraph dom_to_ssg(const DomNode& root);

/// Follows a path id produced by dom_to_ssg; nullptr if it does not resolve.
const DomNode* locate(const DomNode& root, std::string_view path);

std::size_t count_nodes(const DomNode& root);

/// Pretty-printed HTML; re-parsing yields a tree equal under same_tree().
std::string render(const DomNode& root);

/// Tag, attribute, text and child-structure equality (spans ignored).
bool same_tree(const DomNode& a, const DomNode& b);

}  // namespace ssg::html
