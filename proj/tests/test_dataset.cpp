#include <doctest.h>

#include <set>

#include "ssg/dataset.hpp"
#include "ssg/mermaid.hpp"
#include "ssg/mini.hpp"
#include "ssg/util.hpp"
#include "support.hpp"

using namespace ssg;
using namespace ssg::dataset;

namespace {

std::string program_with_loc(int loc) {
  std::string s;
  for (int i = 0; i < loc; ++i) s += "x" + std::to_string(i) + " = " + std::to_string(i) + ";\n";
  return s;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
  return out;
}

}  // namespace

TEST_CASE("build_cfg_corpus: LOC threshold") {
  ScratchDir src, out, out0;
  write_file(src.path() / "big.mini", program_with_loc(25));
  write_file(src.path() / "small.mini", program_with_loc(10));
  write_file(src.path() / "notes.txt", program_with_loc(30));
  auto b = build_cfg_corpus(src.path(), 20, out.path());
  REQUIRE(b.entries.size() == 1);
  CHECK(b.entries[0].id == "big");
  CHECK(b.skipped.empty());
  auto g = load_graph(b.entries[0].golden_ssg_path.string());
  CHECK(isomorphic(mermaid::parse(read_file(b.entries[0].golden_mermaid_path)), g));
  CHECK(g.meta().at("source") == "big.mini");
  auto manifest = nlohmann::json::parse(read_file(out.path() / "manifest.json"));
  CHECK(manifest.size() == 1);

  CHECK(build_cfg_corpus(src.path(), 0, out0.path()).entries.size() == 2);
}

TEST_CASE("build_cfg_corpus: broken sources are skipped") {
  ScratchDir src, out;
  write_file(src.path() / "bad.mini", "x = ;\n" + program_with_loc(30));
  write_file(src.path() / "loose.mini", "break;\n" + program_with_loc(30));
  write_file(src.path() / "good.mini", program_with_loc(30));
  auto b = build_cfg_corpus(src.path(), 20, out.path());
  CHECK(b.entries.size() == 1);
  REQUIRE(b.skipped.size() == 2);
  CHECK(b.skipped[0].rfind("bad.mini: ", 0) == 0);
  CHECK(b.skipped[1].rfind("loose.mini: ", 0) == 0);
}

TEST_CASE("generate_mini_corpus: deterministic, parseable, LOC floor") {
  ScratchDir a, b;
  auto fa = generate_mini_corpus(20, 3, 21, a.path());
  generate_mini_corpus(20, 3, 21, b.path());
  CHECK(fa.size() == 20);
  CHECK(snapshot(a.path()) == snapshot(b.path()));
  for (const auto& f : fa) {
    const auto src = read_file(f);
    CHECK(mini::count_loc(src) >= 21);
    CHECK_NOTHROW(mini::parse_mini(src));
  }
}

TEST_CASE("run_mini_cases") {
  const std::string src = "r = a + b;\nreturn r;\n";
  auto cases = nlohmann::json::parse(R"([
    {"name": "sum", "input": {"a": 1, "b": 2}, "returns": 3, "env": {"r": 3}},
    {"name": "wrong", "input": {"a": 1, "b": 2}, "returns": 4},
    {"name": "undefined", "input": {"a": 1}, "returns": 1}
  ])");
  auto r = run_mini_cases(src, cases);
  CHECK(r.passed == 1);
  CHECK(r.failed == 2);
  CHECK_FALSE(r.ok());
  CHECK(r.text.find("ok   sum") != std::string::npos);
  CHECK(r.text.find("FAIL wrong") != std::string::npos);
  CHECK(r.text.find("1 passed, 2 failed") != std::string::npos);
}

TEST_CASE("templates pass their own tests") {
  for (const auto* name : {"pricing", "grading", "series", "ranges"}) {
    const auto dir = testing::templates() / name;
    auto r = run_mini_cases(read_file(dir / "main.mini"), nlohmann::json::parse(read_file(dir / "cases.json")));
    CAPTURE(name);
    CHECK(r.ok());
  }
}

TEST_CASE("seed_bugs: determinism and operator coverage") {
  ScratchDir a, b;
  auto bugs = seed_bugs(testing::templates(), 20, 7, a.path());
  seed_bugs(testing::templates(), 20, 7, b.path());
  REQUIRE(bugs.size() == 20);
  CHECK(snapshot(a.path()) == snapshot(b.path()));

  std::set<std::string> ops, tmpls;
  for (const auto& bug : bugs) {
    ops.insert(bug.defect.op);
    tmpls.insert(bug.template_name);
    CHECK(std::find(kOperators.begin(), kOperators.end(), bug.defect.op) != kOperators.end());
    REQUIRE(bug.golden_patch.edits.size() == 1);
    // The golden patch restores the template byte for byte.
    ScratchDir check;
    copy_tree(bug.task.codebase_root, check.path());
    repair::apply_patch(check.path(), bug.golden_patch);
    CHECK(read_file(check.path() / bug.defect.file) ==
          read_file(testing::templates() / bug.template_name / bug.defect.file));
    CHECK(bug.task.issue_text.find("fails:") != std::string::npos);
  }
  CHECK(ops.size() >= 4);
  CHECK(tmpls.size() == 5);

  auto manifest = nlohmann::json::parse(read_file(a.path() / "manifest.json"));
  REQUIRE(manifest.size() == 20);
  CHECK(manifest[0].at("codebase_root") == "bug-000/code");
  for (const auto* s : {"oracle.json", "wrong_then_right.json", "always_wrong.json"})
    CHECK(nlohmann::json::parse(read_file(a.path() / s)).contains("*/segment/*"));

  ScratchDir c;
  seed_bugs(testing::templates(), 20, 8, c.path());
  CHECK(snapshot(a.path()) != snapshot(c.path()));
}

TEST_CASE("seed_bugs: a template that fails before mutation is rejected") {
  ScratchDir t, out;
  fs::create_directories(t.path() / "broken");
  write_file(t.path() / "broken" / "main.mini", "return 1;\n");
  write_file(t.path() / "broken" / "cases.json", R"([{"name": "two", "input": {}, "returns": 2}])");
  write_file(t.path() / "broken" / "template.json",
             R"({"artifact": "main.mini", "test_command": ["{ssg}", "mini", "test", "main.mini", "cases.json"]})");
  CHECK_THROWS_WITH_AS(seed_bugs(t.path(), 1, 1, out.path()), doctest::Contains("broken"), BuildError);
  CHECK_THROWS_AS(seed_bugs(t.path() / "none", 1, 1, out.path()), BuildError);
}
