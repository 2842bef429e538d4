#include <doctest.h>

#include <random>
#include <regex>

#include "ssg/html.hpp"
#include "ssg/util.hpp"
#include "support.hpp"

using namespace ssg;

namespace {

// Independent count: opening tags plus non-blank text runs, after removing
// comments and the doctype. Valid only for documents without raw-text
// elements.
std::size_t regex_node_count(std::string s) {
  s = std::regex_replace(s, std::regex("<!--[\\s\\S]*?-->"), "");
  s = std::regex_replace(s, std::regex("<!DOCTYPE[^>]*>", std::regex::icase), "");
  const std::regex open("<[a-zA-Z]"), text(">([^<]*)<");
  std::size_t n = std::distance(std::sregex_iterator(s.begin(), s.end(), open), std::sregex_iterator());
  for (auto it = std::sregex_iterator(s.begin(), s.end(), text); it != std::sregex_iterator(); ++it)
    if (!std::string(trim((*it)[1].str())).empty()) ++n;
  return n;
}

bool hierarchy_is_tree(const SceneGraph& g) {
  if (g.node_count() == 0) return true;
  auto parents = hierarchy_parents(g);
  if (parents.size() != g.node_count() - 1) return false;
  // Every node reaches the root by following parents without revisiting.
  for (const auto& n : g.nodes()) {
    std::set<std::string> seen;
    std::string cur = n.id;
    while (parents.count(cur)) {
      if (!seen.insert(cur).second) return false;
      cur = parents.at(cur);
    }
    if (cur != "/") return false;
  }
  return true;
}

std::string random_html(std::mt19937_64& rng, int depth) {
  static const char* tags[] = {"div", "p", "span", "ul", "li", "section", "a"};
  static const char* voids[] = {"br", "img", "input", "hr"};
  const std::string tag = tags[testing::draw(rng, 7)];
  std::string s = "<" + tag;
  if (rng() % 2) s += " class=\"c" + std::to_string(rng() % 9) + "\"";
  if (rng() % 3 == 0) s += " data-x='" + std::to_string(rng() % 9) + "'";
  if (rng() % 4 == 0) s += " hidden";
  s += ">";
  const auto kids = depth > 0 ? testing::draw(rng, 4) : 0;
  for (std::size_t i = 0; i < kids; ++i) {
    switch (rng() % 4) {
      case 0: s += "text" + std::to_string(rng() % 100); break;
      case 1: s += std::string("<") + voids[testing::draw(rng, 4)] + ">"; break;
      case 2: s += "<!-- c -->"; break;
      default: s += random_html(rng, depth - 1);
    }
    if (rng() % 2) s += "\n  ";
  }
  return s + "</" + tag + ">";
}

}  // namespace

TEST_CASE("parse_html: tree shape") {
  auto root = html::parse_html("<div><p>hi</p></div>");
  CHECK(root.tag == "div");
  REQUIRE(root.children.size() == 1);
  CHECK(root.children[0].tag == "p");
  REQUIRE(root.children[0].children.size() == 1);
  CHECK(root.children[0].children[0].is_text());
  CHECK(root.children[0].children[0].text == "hi");

  auto v = html::parse_html("<div><img src=\"a.png\"><p>x</p></div>");
  REQUIRE(v.children.size() == 2);
  CHECK(v.children[0].tag == "img");
  CHECK(v.children[0].children.empty());
  CHECK(v.children[1].tag == "p");
}

TEST_CASE("parse_html: attributes in every form") {
  auto n = html::parse_html("<INPUT a=\"1\" b='two' c=three disabled>");
  CHECK(n.tag == "input");
  using A = std::vector<std::pair<std::string, std::string>>;
  CHECK(n.attributes == A{{"a", "1"}, {"b", "two"}, {"c", "three"}, {"disabled", ""}});
  CHECK(n.open_tag == "<INPUT a=\"1\" b='two' c=three disabled>");
}

TEST_CASE("parse_html: comments, doctype, raw text and whitespace") {
  auto n = html::parse_html("<!DOCTYPE html>\n<!-- x --><div>\n  <script>a < b</script>  <!-- y -->\n</div>\n");
  REQUIRE(n.children.size() == 1);
  CHECK(n.children[0].tag == "script");
  CHECK(n.children[0].children.at(0).text == "a < b");
}

TEST_CASE("parse_html: errors") {
  auto fails = [](std::string_view in, const std::string& reason) {
    try {
      html::parse_html(in);
      FAIL("accepted " << in);
    } catch (const html::ParseError& e) {
      CHECK(e.reason() == reason);
    }
  };
  fails("<div><p>hi</div>", "mismatched close tag: expected p, found div");
  fails("<div><p>hi</p>", "unclosed element <div>");
  fails("<p></p><p></p>", "multiple root elements");
  CHECK_THROWS_AS(html::parse_html(""), html::ParseError);
  CHECK_THROWS_AS(html::parse_html("<br></br>"), html::ParseError);
}

TEST_CASE("dom_to_ssg") {
  auto g = html::dom_to_ssg(html::parse_html("<div><p>hi</p></div>"));
  CHECK(g.node_count() == 3);
  CHECK(g.count_edges(RelationType::Hierarchy) == 2);
  CHECK(g.edge_count() == 2);
  CHECK(g.find("/")->kind == "div");
  CHECK(g.find("/0")->content == "<p>");
  CHECK(g.find("/0/0")->kind == "text");
  CHECK(g.find("/0/0")->content == "hi");

  auto br = html::dom_to_ssg(html::parse_html("<br>"));
  CHECK(br.node_count() == 1);
  CHECK(br.edge_count() == 0);
}

TEST_CASE("37-node landing page fixture") {
  const auto text = read_file(testing::fixtures() / "landing.html");
  REQUIRE(regex_node_count(text) == 37);
  auto dom = html::parse_html(text);
  auto g = html::dom_to_ssg(dom);
  CHECK(html::count_nodes(dom) == 37);
  CHECK(g.node_count() == 37);
  CHECK(g.count_edges(RelationType::Hierarchy) == 36);
  CHECK(hierarchy_is_tree(g));
  CHECK(validate(g).empty());
}

TEST_CASE("DOM tree law over every fixture") {
  for (const auto& e : std::filesystem::directory_iterator(testing::fixtures())) {
    if (e.path().extension() != ".html") continue;
    CAPTURE(e.path());
    auto dom = html::parse_html(read_file(e.path()));
    auto g = html::dom_to_ssg(dom);
    CHECK(g.node_count() == html::count_nodes(dom));
    CHECK(g.count_edges(RelationType::Hierarchy) == g.node_count() - 1);
    CHECK(g.edge_count() == g.count_edges(RelationType::Hierarchy));
    CHECK(hierarchy_is_tree(g));
    CHECK(validate(g).empty());
  }
}

TEST_CASE("property: node ids locate their DOM nodes") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    const auto doc = random_html(rng, 4);
    CAPTURE(doc);
    auto dom = html::parse_html(doc);
    auto g = html::dom_to_ssg(dom);
    CHECK(g.node_count() == html::count_nodes(dom));
    std::set<const html::DomNode*> hit;
    for (const auto& n : g.nodes()) {
      const auto* d = html::locate(dom, n.id);
      REQUIRE(d != nullptr);
      CHECK(d->tag == n.kind);
      CHECK((d->is_text() ? d->text : d->open_tag) == n.content);
      hit.insert(d);
    }
    CHECK(hit.size() == g.node_count());
    CHECK(html::locate(dom, "/99") == nullptr);
    CHECK(hierarchy_is_tree(g));
  }
}

TEST_CASE("property: render then reparse gives the same tree") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    auto dom = html::parse_html(random_html(rng, 4));
    auto again = html::parse_html(html::render(dom));
    CHECK(html::same_tree(dom, again));
    CHECK(html::render(again) == html::render(dom));
  }
  for (const auto& e : std::filesystem::directory_iterator(testing::fixtures())) {
    if (e.path().extension() != ".html") continue;
    auto dom = html::parse_html(read_file(e.path()));
    CHECK(html::same_tree(dom, html::parse_html(html::render(dom))));
  }
}
