#include <doctest.h>

#include <chrono>
#include <random>

#include "ssg/mermaid.hpp"
#include "support.hpp"

using namespace ssg;

TEST_CASE("serialize: exact output for small graphs") {
  SceneGraph g;
  g.add_node({"A", "div", "", std::nullopt});
  g.add_node({"B", "p", "", std::nullopt});
  g.add_edge({"A", "B", RelationType::Hierarchy, {}});
  CHECK(mermaid::serialize(g) == "graph TD\n  n0[\"A|div|\"]\n  n1[\"B|p|\"]\n  n0 ==> n1\n");
  CHECK(mermaid::serialize(SceneGraph{}) == "graph TD\n");

  SceneGraph c;
  c.add_node({"b0", "branch", "if (x < 1)", std::nullopt});
  c.add_node({"b1", "block", "y = 1;", std::nullopt});
  c.add_node({"b2", "block", "y = 2;", BoundingBox{1, 2, 30, 40}});
  c.add_edge({"b0", "b1", RelationType::ControlFlow, "true"});
  c.add_edge({"b0", "b2", RelationType::ControlFlow, "false"});
  c.add_edge({"b1", "b2", RelationType::DataFlow, {}});
  const auto doc = mermaid::serialize(c);
  CHECK(doc.find("\n  n0 -->|true| n1\n") != std::string::npos);
  CHECK(doc.find("\n  n1 -.-> n2\n") != std::string::npos);
  CHECK(doc.find("n2[\"b2|block|y = 2;@1,2,30,40\"]") != std::string::npos);
  CHECK(mermaid::serialize(c) == doc);
}

TEST_CASE("serialize refuses invalid graphs") {
  SceneGraph g;
  g.add_node({"A", "k", "", std::nullopt});
  g.add_edge({"A", "Z", RelationType::ControlFlow, {}});
  CHECK_THROWS_WITH_AS(mermaid::serialize(g), doctest::Contains("unknown node Z"), GraphError);
}

TEST_CASE("escaping") {
  const std::string nasty = "a\"b|c\nd#e@1,2,3,4\r#quot;";
  const auto esc = mermaid::escape(nasty);
  CHECK(esc.find_first_of("\"|\n\r@") == std::string::npos);
  CHECK(mermaid::unescape(esc) == nasty);
  CHECK(mermaid::escape("x\"y") == "x#quot;y");
  CHECK(mermaid::escape("a|b") == "a#pipe;b");
  CHECK(mermaid::escape("l1\nl2") == "l1#br;l2");
}

TEST_CASE("parse errors carry line and reason") {
  auto fails = [](const std::string& doc, int line, const std::string& reason) {
    try {
      mermaid::parse(doc);
      FAIL("accepted: " << doc);
    } catch (const mermaid::ParseError& e) {
      CHECK(e.line() == line);
      CHECK(e.reason() == reason);
    }
  };
  fails("graph TD\n  n0 --> n1\n", 2, "undeclared node n0");
  fails("flowchart LR\n  n0[\"a|b|c\"]\n", 1, "unsupported header");
  fails("", 1, "missing header");
  fails("graph TD\n  n0[\"a|k|c\"\n", 2, "unbalanced brackets");
  fails("graph TD\n  n0[\"a|k|c@1,2,x,4\"]\n", 2, "malformed bbox");
  fails("graph TD\n  n0[\"a|k|c@1,2,0,4\"]\n", 2, "malformed bbox");
  fails("graph TD\n  n0[\"ak\"]\n", 2, "malformed label");
  fails("graph TD\n  n0[\"a|k|\"]\n  n0[\"b|k|\"]\n", 3, "duplicate node n0");
  fails("graph TD\n  n0[\"a|k|\"]\n  n0 --> n0\n  n0 --> n0\n", 4, "duplicate edge");
  fails("graph TD\n  n0[\"a|k|\"]\n  n0 ~~> n0\n", 3, "unknown arrow");
  fails("graph TD\n  style n0 fill:#f9f\n", 2, "unrecognized line");
}

TEST_CASE("parse accepts blank lines and declarations after use order") {
  auto g = mermaid::parse("graph TD\n\n  n0 ==> n1\n  n1[\"B|p|\"]\n  n0[\"A|div|x\"]\n");
  CHECK(g.node_count() == 2);
  CHECK(g.count_edges(RelationType::Hierarchy) == 1);
  CHECK(g.find("A")->content == "x");
}

TEST_CASE("empty vs absent edge label") {
  SceneGraph g;
  g.add_node({"A", "k", "", std::nullopt});
  g.add_edge({"A", "A", RelationType::ControlFlow, ""});
  g.add_edge({"A", "A", RelationType::ControlFlow, std::nullopt});
  auto back = mermaid::parse(mermaid::serialize(g));
  CHECK(back.has_edge({"A", "A", RelationType::ControlFlow, ""}));
  CHECK(back.has_edge({"A", "A", RelationType::ControlFlow, std::nullopt}));
}

TEST_CASE("rendering_accuracy") {
  std::vector<std::string> docs = {"graph TD\n", "graph TD\n  n0[\"a|k|\"]\n", "graph LR\n", "graph TD\n  n0 --> n9\n"};
  CHECK(mermaid::rendering_accuracy(docs) == 0.5);
  CHECK_THROWS_AS(mermaid::rendering_accuracy(std::vector<std::string>{}), std::invalid_argument);
}

TEST_CASE("property: round trip over random graphs") {
  std::mt19937_64 rng(2024);
  const auto start = std::chrono::steady_clock::now();
  int ok = 0;
  std::vector<std::string> docs;
  for (int i = 0; i < 1000; ++i) {
    auto g = testing::random_graph(rng);
    const auto doc = mermaid::serialize(g);
    auto back = mermaid::parse(doc);
    ok += isomorphic(back, g);
    // parse . serialize . parse == parse
    CHECK(mermaid::serialize(back) == doc);
    docs.push_back(doc);
  }
  CHECK(ok == 1000);
  CHECK(mermaid::rendering_accuracy(docs) == 1.0);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(10));
}
