// Mermaid flowchart subset: deterministic serializer and strict line parser.
//
//   doc    := "graph TD" NL (nodeln | edgeln | blank)*
//   nodeln := WS id '["' label '"]' NL          ; id matches n[0-9]+
//   edgeln := WS id WS arrow (WS '|' text '|')? WS id NL
//   arrow  := "-->" | "-.->" | "==>"
//   label  := origId '|' kind '|' content ('@' int ',' int ',' int ',' int)?
//
// Arrows: control flow "-->", data flow "-.->", hierarchy "==>".
// Label fields escape '"' #quot;  newline #br;  '|' #pipe;  '#' #35;
// '@' #64;  CR #13;
#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ssg/graph.hpp"

namespace ssg::mermaid {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, std::string reason)
      : std::runtime_error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(std::move(reason)) {}
  int line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  int line_;
  std::string reason_;
};

std::string escape(std::string_view s);
std::string unescape(std::string_view s);

/// Throws GraphError listing violations if validate(g) is non-empty.
std::string serialize(const SceneGraph& g);

SceneGraph parse(std::string_view doc);

/// Fraction of documents that parse. Throws std::invalid_argument on empty input.
double rendering_accuracy(std::span<const std::string> docs);

}  // namespace ssg::mermaid
