#include <doctest.h>

#include <cmath>
#include <random>

#include "ssg/dataset.hpp"
#include "ssg/repair.hpp"
#include "ssg/util.hpp"
#include "support.hpp"

using namespace ssg;
using namespace ssg::repair;
using namespace std::chrono_literals;

namespace {

RepairTask shell_task(const fs::path& root, const std::string& script, int timeout_s = 10) {
  RepairTask t;
  t.id = "t1";
  t.codebase_root = root;
  t.issue_text = "a is wrong";
  t.test_command = {"sh", "-c", script};
  t.timeout = std::chrono::seconds(timeout_s);
  return t;
}

std::string patch_text(const std::string& path, const std::string& search, const std::string& replace) {
  return "<<<<<<< SEARCH " + path + "\n" + search + "\n=======\n" + replace + "\n>>>>>>> REPLACE\n";
}

}  // namespace

TEST_CASE("parse_patch") {
  auto p = parse_patch("Here is the fix:\n" + patch_text("src/a.js", "a = 1", "a = 2") + "done");
  REQUIRE(p.edits.size() == 1);
  CHECK(p.edits[0] == Edit{"src/a.js", "a = 1", "a = 2"});

  auto two = parse_patch(patch_text("a.txt", "x\ny", "z") + patch_text("b.txt", "q", ""));
  REQUIRE(two.edits.size() == 2);
  CHECK(two.edits[0].search == "x\ny");
  CHECK(two.edits[1].path == "b.txt");
  CHECK(two.edits[1].replace.empty());
  CHECK(parse_patch(format_patch(two)) == two);
  CHECK(patch_from_json(to_json(two)) == two);

  CHECK_THROWS_AS(parse_patch("<<<<<<< SEARCH a.txt\nx\n>>>>>>> REPLACE\n"), model::FormatError);
  CHECK_THROWS_AS(parse_patch("no blocks here"), model::FormatError);
  CHECK_THROWS_AS(parse_patch("<<<<<<< SEARCH a.txt\nx\n=======\ny\n"), model::FormatError);
  CHECK_THROWS_AS(parse_patch(patch_text("../etc/passwd", "x", "y")), model::FormatError);
  CHECK_THROWS_AS(parse_patch("<<<<<<< SEARCH\nx\n=======\ny\n>>>>>>> REPLACE\n"), model::FormatError);
}

TEST_CASE("safe_relative_path") {
  CHECK(safe_relative_path("a/b.txt"));
  CHECK_FALSE(safe_relative_path("/etc/passwd"));
  CHECK_FALSE(safe_relative_path("a/../../b"));
  CHECK_FALSE(safe_relative_path(""));
}

TEST_CASE("apply_patch") {
  ScratchDir d;
  write_file(d.path() / "a.txt", "a=1\n");
  write_file(d.path() / "b.txt", "dup dup\n");
  apply_patch(d.path(), parse_patch(patch_text("a.txt", "a=1", "a=2")));
  CHECK(read_file(d.path() / "a.txt") == "a=2\n");

  auto expect = [&](const PatchCandidate& p, ApplyError::Kind k, std::size_t idx) {
    const auto before = tree_digest(d.path());
    try {
      apply_patch(d.path(), p);
      FAIL("applied");
    } catch (const ApplyError& e) {
      CHECK(e.kind() == k);
      CHECK(e.edit_index() == idx);
    }
    CHECK(tree_digest(d.path()) == before);
  };
  expect({{{"b.txt", "dup", "x"}}}, ApplyError::Kind::Ambiguous, 0);
  expect({{{"a.txt", "a=2", "a=3"}, {"a.txt", "nope", "x"}}}, ApplyError::Kind::NotFound, 1);
  expect({{{"a.txt", "a=2", "a=3"}, {"missing.txt", "x", "y"}}}, ApplyError::Kind::FileMissing, 1);
  expect({{{"../a.txt", "a", "b"}}}, ApplyError::Kind::UnsafePath, 0);
  // Overlapping occurrences count as ambiguous.
  write_file(d.path() / "c.txt", "aaa");
  expect({{{"c.txt", "aa", "b"}}}, ApplyError::Kind::Ambiguous, 0);
  // Later edits see earlier ones.
  apply_patch(d.path(), {{{"a.txt", "a=2", "a=3"}, {"a.txt", "a=3", "a=4"}}});
  CHECK(read_file(d.path() / "a.txt") == "a=4\n");
}

TEST_CASE("property: failed patches leave the tree untouched") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 100; ++i) {
    ScratchDir d;
    std::vector<std::string> names;
    for (int f = 0; f < 3; ++f) {
      names.push_back("f" + std::to_string(f) + ".txt");
      std::string body;
      for (int l = 0; l < 6; ++l) body += "line" + std::to_string(rng() % 4) + "\n";
      write_file(d.path() / names.back(), body);
    }
    PatchCandidate p;
    const auto edits = 1 + rng() % 4;
    for (std::size_t e = 0; e < edits; ++e)
      p.edits.push_back({names[rng() % 3], "line" + std::to_string(rng() % 6), "new" + std::to_string(e)});
    const auto before = tree_digest(d.path());
    try {
      apply_patch(d.path(), p);
      CHECK(tree_digest(d.path()) != before);
    } catch (const ApplyError&) {
      CHECK(tree_digest(d.path()) == before);
    }
  }
}

TEST_CASE("extract_terms") {
  SceneGraph g;
  g.add_node({"n", "div", "<div class=\"price\">totalPrice</div>", std::nullopt});
  auto t = extract_terms(g, "The totalPrice is wrong after applyDiscount. See cart.total.");
  CHECK(t == std::vector<std::string>{"price", "totalPrice", "applyDiscount", "cart.total"});
}

TEST_CASE("localize: tf-idf ranking") {
  ScratchDir d;
  write_file(d.path() / "a.js", "applyDiscount(x);\napplyDiscount(y);\nreturn total;\n");
  write_file(d.path() / "b.js", "let total = 0;\n");
  write_file(d.path() / "c.txt", "nothing here\n");
  write_file(d.path() / ".hidden", "applyDiscount total\n");
  write_file(d.path() / "bin.dat", std::string("total\0applyDiscount", 19));
  auto t = shell_task(d.path(), "true");
  t.issue_text = "applyDiscount total";
  auto hits = localize(t, SceneGraph{});
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].path == "a.js");
  CHECK(hits[1].path == "b.js");
  // Three text files: df(applyDiscount) = 1, df(total) = 2.
  CHECK(hits[0].score == doctest::Approx(2 * std::log(3.0) + std::log(1.5)));
  CHECK(hits[1].score == doctest::Approx(std::log(1.5)));
  CHECK(hits[0].lines == std::vector<std::string>{"1: applyDiscount(x);", "2: applyDiscount(y);", "3: return total;"});

  t.issue_text = "zebra";
  CHECK(localize(t, SceneGraph{}).empty());
  t.issue_text = "FromName";
  write_file(d.path() / "u.js", "function userFromName(n) {}\n");
  auto one = localize(t, SceneGraph{});
  REQUIRE(one.size() == 1);
  CHECK(one[0].path == "u.js");
  CHECK(localize(t, SceneGraph{}, 0).empty());
  t.codebase_root = d.path() / "nope";
  CHECK_THROWS_AS(localize(t, SceneGraph{}), IoError);
}

TEST_CASE("validate") {
  ScratchDir d;
  write_file(d.path() / "a.txt", "a=1\n");
  const auto before = tree_digest(d.path());
  auto ok = validate(shell_task(d.path(), "grep -q a=1 a.txt"));
  CHECK(ok.passed);
  CHECK(ok.exit_code == 0);

  auto bad = validate(shell_task(d.path(), "echo '2 tests failed' >&2; exit 1"));
  CHECK_FALSE(bad.passed);
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("2 tests failed") != std::string::npos);

  const auto start = std::chrono::steady_clock::now();
  auto slow = validate(shell_task(d.path(), "sleep 30", 1));
  CHECK(slow.timed_out);
  CHECK_FALSE(slow.passed);
  CHECK(slow.output.find("timeout") != std::string::npos);
  CHECK(std::chrono::steady_clock::now() - start < 10s);

  // Writes land in the scratch copy only.
  auto writer = validate(shell_task(d.path(), "echo junk > a.txt; rm -f a.txt; touch new.txt"));
  CHECK(writer.passed);
  CHECK(tree_digest(d.path()) == before);

  auto missing = validate({"t", d.path(), "", {}, {}, {"definitely-not-a-command-xyz"}, 5s, 3});
  CHECK(missing.exit_code == 127);
  CHECK(missing.output.find("command not found") != std::string::npos);
  CHECK(dependency_failure(missing));

  CHECK_THROWS_AS(validate(shell_task(d.path() / "nope", "true")), TaskError);
}

TEST_CASE("expand_command") {
  const auto saved = testing::ssg_exe();
  setenv("SSG_EXE", "/opt/bin/ssg", 1);
  CHECK(expand_command({"{ssg}", "mini", "{ssg}x"}) == std::vector<std::string>{"/opt/bin/ssg", "mini", "{ssg}x"});
  setenv("SSG_EXE", saved.c_str(), 1);
}

TEST_CASE("fallback validation") {
  ScratchDir d;
  write_file(d.path() / "a.txt", "a=2\n");
  auto task = shell_task(d.path(), "echo 'Error [ERR_MODULE_NOT_FOUND]: cannot find package' >&2; exit 1");
  auto v = validate(task);
  REQUIRE(dependency_failure(v));
  CHECK_FALSE(dependency_failure(validate(shell_task(d.path(), "exit 1"))));

  model::MockBackend pass(std::map<std::string, std::string>{{"t1/fallback/1", "```sh\ngrep -q a=2 a.txt\n```"}});
  auto fv = fallback_validate(task, pass, {"", v.output, 1});
  CHECK(fv.passed);
  CHECK(fv.via_fallback);

  model::MockBackend fail(std::map<std::string, std::string>{{"t1/fallback/1", "```py\nimport sys\nsys.exit(1)\n```"}});
  CHECK_FALSE(fallback_validate(task, fail, {"", v.output, 1}).passed);

  model::MockBackend prose(std::map<std::string, std::string>{{"t1/fallback/1", "just trust me"}});
  CHECK_THROWS_AS(fallback_validate(task, prose, {"", v.output, 1}), model::FormatError);
  model::MockBackend ruby(std::map<std::string, std::string>{{"t1/fallback/1", "```ruby\nexit 0\n```"}});
  CHECK_THROWS_AS(fallback_validate(task, ruby, {"", v.output, 1}), model::FormatError);
}

TEST_CASE("session: fallback path inside a round") {
  ScratchDir d;
  write_file(d.path() / "a.txt", "a=1\n");
  auto task = shell_task(d.path(), "echo 'ERR_MODULE_NOT_FOUND' >&2; exit 1");
  model::MockBackend m(std::map<std::string, std::string>{{"*/generate/*", patch_text("a.txt", "a=1", "a=2")},
                        {"*/fallback/*", "```sh\ngrep -q a=2 a.txt\n```"}});
  auto s = run_session(task, {&m});
  CHECK(s.resolved());
  bool saw = false;
  for (const auto& e : s.log) saw |= e.kind == "fallback";
  CHECK(saw);
  CHECK(read_file(d.path() / "a.txt") == "a=1\n");
}

TEST_CASE("session: no dependency signature means no fallback") {
  ScratchDir d;
  write_file(d.path() / "a.txt", "a=1\n");
  auto task = shell_task(d.path(), "exit 1");
  task.max_rounds = 1;
  model::MockBackend m(std::map<std::string, std::string>{{"*/generate/*", patch_text("a.txt", "a=1", "a=2")}});
  auto s = run_session(task, {&m});
  CHECK_FALSE(s.resolved());
  for (const auto& e : s.log) CHECK(e.kind != "fallback");
  CHECK(s.generate_calls == 1);
  CHECK(s.segmentation_events == 0);
}

TEST_CASE("session state machine") {
  RepairSession s;
  s.task.max_rounds = 2;
  CHECK_THROWS_AS(s.transition(SessionState::Generated), std::logic_error);
  s.transition(SessionState::Extracted);
  s.transition(SessionState::Localized);
  s.transition(SessionState::Generated);
  CHECK_THROWS_AS(s.transition(SessionState::DoneResolved), std::logic_error);
  s.transition(SessionState::ValidatedFail);
  s.round = 3;
  CHECK_THROWS_AS(s.transition(SessionState::Extracted), std::logic_error);
  s.transition(SessionState::DoneUnresolved);
  CHECK_THROWS_AS(s.transition(SessionState::DoneUnresolved), std::logic_error);
  CHECK(to_string(SessionState::ValidatedPass) == "Validated(pass)");
}

TEST_CASE("task manifests") {
  ScratchDir d;
  fs::create_directories(d.path() / "code");
  write_file(d.path() / "m.json", R"({"tasks": [{"id": "x", "codebase_root": "code", "issue_text": "i",
      "test_command": ["true"], "artifact": "shot.pgm"}]})");
  auto tasks = load_manifest(d.path() / "m.json");
  REQUIRE(tasks.size() == 1);
  CHECK(tasks[0].codebase_root == d.path() / "code");
  CHECK(tasks[0].artifact_raster == d.path() / "shot.pgm");
  CHECK_FALSE(tasks[0].artifact_ssg);
  CHECK(tasks[0].timeout == 60s);
  CHECK(tasks[0].max_rounds == 3);
  auto back = task_from_json(to_json(tasks[0]));
  CHECK(back.codebase_root == tasks[0].codebase_root);
  CHECK(back.test_command == tasks[0].test_command);

  write_file(d.path() / "bad.json", R"([{"id": 3}])");
  CHECK_THROWS_AS(load_manifest(d.path() / "bad.json"), TaskError);
  write_file(d.path() / "junk.json", "{");
  CHECK_THROWS_AS(load_manifest(d.path() / "junk.json"), TaskError);
  CHECK_THROWS_AS(check_task(RepairTask{}), TaskError);
}

TEST_CASE("truncate_feedback") {
  const std::string big(100, 'x');
  CHECK(truncate_feedback("short", 10) == "short");
  auto t = truncate_feedback(big + "END", 40);
  CHECK(t.size() == 40);
  CHECK(t.rfind("[...truncated...]\n", 0) == 0);
  CHECK(t.substr(t.size() - 3) == "END");
}

TEST_CASE("sessions on seeded bugs") {
  ScratchDir out;
  auto bugs = dataset::seed_bugs(testing::templates(), 5, 7, out.path());
  auto tasks = load_manifest(out.path() / "manifest.json");
  REQUIRE(tasks.size() == 5);
  auto run_all = [&](const std::string& scenario) {
    auto m = model::MockBackend::from_file(out.path() / scenario);
    std::vector<RepairSession> v;
    for (const auto& t : tasks) v.push_back(run_session(t, {m.get()}));
    return v;
  };

  for (const auto& s : run_all("oracle.json")) {
    CAPTURE(s.task.id);
    CHECK(s.resolved());
    CHECK(s.generate_calls == 1);
    CHECK(s.segmentation_events == 0);
    REQUIRE(s.final_patch);
  }
  const auto wtr = run_all("wrong_then_right.json");
  for (const auto& s : wtr) {
    CAPTURE(s.task.id);
    CHECK(s.resolved());
    CHECK(s.generate_calls == 2);
    CHECK(s.segmentation_events == 1);
  }
  for (const auto& s : run_all("always_wrong.json")) {
    CAPTURE(s.task.id);
    CHECK(s.state == SessionState::DoneUnresolved);
    CHECK(s.generate_calls == 3);
    CHECK(s.segmentation_events == 2);
  }
  const auto again = run_all("wrong_then_right.json");
  for (std::size_t i = 0; i < wtr.size(); ++i) CHECK(to_json(wtr[i]).dump() == to_json(again[i]).dump());
  for (const auto& t : tasks) CHECK_FALSE(validate(t).passed);
}

TEST_CASE("session errors end unresolved") {
  ScratchDir d;
  auto task = shell_task(d.path(), "true");
  model::MockBackend strict({});
  auto s = run_session(task, {&strict});
  CHECK(s.state == SessionState::DoneUnresolved);
  REQUIRE_FALSE(s.log.empty());
  CHECK(s.log.back().kind == "error");

  task.codebase_root = d.path() / "gone";
  auto s2 = run_session(task, {&strict});
  CHECK(s2.state == SessionState::DoneUnresolved);
  CHECK(s2.log.back().kind == "error");
}
