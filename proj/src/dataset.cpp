#include "ssg/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <regex>
#include <set>

#include "ssg/cfg.hpp"
#include "ssg/html.hpp"
#include "ssg/mermaid.hpp"
#include "ssg/mini.hpp"
#include "ssg/util.hpp"

namespace ssg::dataset {

CorpusBuild build_cfg_corpus(const fs::path& src_dir, int loc_threshold, const fs::path& out_dir) {
  if (!fs::is_directory(src_dir)) throw IoError("not a directory: " + src_dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(src_dir))
    if (e.is_regular_file() && e.path().extension() == ".mini") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  fs::create_directories(out_dir);
  CorpusBuild out;
  auto manifest = nlohmann::json::array();
  for (const auto& f : files) {
    const auto source = read_file(f);
    if (mini::count_loc(source) <= loc_threshold) continue;
    const auto id = f.stem().string();
    try {
      auto c = cfg::build_cfg(mini::parse_mini(source));
      auto g = cfg::cfg_to_ssg(c);
      g.meta()["source"] = f.filename().string();
      const auto doc = mermaid::serialize(g);
      if (!isomorphic(mermaid::parse(doc), g)) throw BuildError("Mermaid form does not round-trip");
      CorpusEntry e{id, out_dir / (id + ".mini"), out_dir / (id + ".ssg.json"), out_dir / (id + ".mmd")};
      write_file(e.artifact_path, source);
      save_graph(g, e.golden_ssg_path.string());
      write_file(e.golden_mermaid_path, doc);
      manifest.push_back({{"id", id},
                          {"artifact", e.artifact_path.filename().string()},
                          {"golden_ssg", e.golden_ssg_path.filename().string()},
                          {"golden_mermaid", e.golden_mermaid_path.filename().string()}});
      out.entries.push_back(std::move(e));
    } catch (const std::exception& err) {
      out.skipped.push_back(f.filename().string() + ": " + err.what());
    }
  }
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return out;
}

std::vector<fs::path> generate_mini_corpus(int n, std::uint64_t seed, int min_loc, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::mt19937_64 rng(seed);
  mini::GenOptions opt;
  opt.min_loc = min_loc;
  std::vector<fs::path> out;
  for (int i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "prog_%04d.mini", i);
    out.push_back(out_dir / name);
    write_file(out.back(), mini::random_program(rng, opt));
  }
  return out;
}

CaseReport run_mini_cases(const std::string& source, const nlohmann::json& cases) {
  CaseReport r;
  std::optional<mini::MiniProgram> prog;
  std::string parse_error;
  try {
    prog = mini::parse_mini(source);
  } catch (const std::exception& e) {
    parse_error = e.what();
  }
  for (const auto& c : cases) {
    const auto name = c.value("name", std::string("case"));
    std::string problem;
    if (!prog) {
      problem = "parse error: " + parse_error;
    } else {
      try {
        cfg::Env env = c.value("input", cfg::Env{});
        auto res = cfg::interpret(*prog, std::move(env), 1'000'000);
        if (c.contains("returns")) {
          const auto want = c["returns"].get<std::int64_t>();
          if (!res.returned)
            problem = "expected return " + std::to_string(want) + ", program returned nothing";
          else if (*res.returned != want)
            problem = "expected return " + std::to_string(want) + ", got " + std::to_string(*res.returned);
        }
        if (problem.empty() && c.contains("env")) {
          for (const auto& [var, val] : c["env"].items()) {
            auto it = res.env.find(var);
            const auto want = val.get<std::int64_t>();
            if (it == res.env.end()) {
              problem = "expected " + var + " = " + std::to_string(want) + ", but " + var + " is unset";
              break;
            }
            if (it->second != want) {
              problem = "expected " + var + " = " + std::to_string(want) + ", got " + std::to_string(it->second);
              break;
            }
          }
        }
      } catch (const std::exception& e) {
        problem = std::string("runtime error: ") + e.what();
      }
    }
    if (problem.empty()) {
      ++r.passed;
      r.text += "ok   " + name + "\n";
    } else {
      ++r.failed;
      r.text += "FAIL " + name + ": " + problem + "\n";
    }
  }
  r.text += std::to_string(r.passed) + " passed, " + std::to_string(r.failed) + " failed\n";
  return r;
}

namespace {

struct Site {
  std::size_t offset;
  std::size_t length;
  std::string replacement;
};

std::size_t match_close(const std::string& s, std::size_t open) {
  const char o = s[open], c = o == '(' ? ')' : '}';
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == o) ++depth;
    if (s[i] == c && --depth == 0) return i;
  }
  return std::string::npos;
}

std::size_t skip_ws(const std::string& s, std::size_t i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return i;
}

bool is_html(const std::string& file) {
  const auto ext = fs::path(file).extension();
  return ext == ".html" || ext == ".htm";
}

std::vector<Site> flip_comparison_sites(const std::string& s) {
  static const std::regex re(R"(<=|>=|==|!=|<|>)");
  std::vector<Site> out;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    const auto op = it->str();
    const std::string flipped = op == "<"    ? "<="
                                : op == "<=" ? "<"
                                : op == ">"  ? ">="
                                : op == ">=" ? ">"
                                : op == "==" ? "!="
                                             : "==";
    out.push_back({static_cast<std::size_t>(it->position()), op.size(), flipped});
  }
  return out;
}

std::vector<Site> off_by_one_sites(const std::string& s, std::mt19937_64& rng) {
  static const std::regex re(R"(\b[0-9]+\b)");
  std::vector<Site> out;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    const auto v = std::stoll(it->str());
    const bool down = v > 0 && rng() % 2 == 0;
    out.push_back({static_cast<std::size_t>(it->position()), it->str().size(), std::to_string(down ? v - 1 : v + 1)});
  }
  return out;
}

std::vector<Site> swap_branch_sites(const std::string& s) {
  static const std::regex re(R"(\bif\s*\()");
  std::vector<Site> out;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    const auto paren = static_cast<std::size_t>(it->position() + it->length() - 1);
    const auto paren_close = match_close(s, paren);
    if (paren_close == std::string::npos) continue;
    const auto then_open = skip_ws(s, paren_close + 1);
    if (then_open >= s.size() || s[then_open] != '{') continue;
    const auto then_close = match_close(s, then_open);
    if (then_close == std::string::npos) continue;
    const auto kw = skip_ws(s, then_close + 1);
    if (s.compare(kw, 4, "else") != 0) continue;
    const auto else_open = skip_ws(s, kw + 4);
    if (else_open >= s.size() || s[else_open] != '{') continue;
    const auto else_close = match_close(s, else_open);
    if (else_close == std::string::npos) continue;
    const auto then_body = s.substr(then_open + 1, then_close - then_open - 1);
    const auto else_body = s.substr(else_open + 1, else_close - else_open - 1);
    if (then_body == else_body) continue;
    out.push_back({then_open + 1, else_close - then_open - 1,
                   else_body + s.substr(then_close, else_open + 1 - then_close) + then_body});
  }
  return out;
}

std::vector<Site> delete_attribute_sites(const std::string& s) {
  static const std::regex re(R"(\s+[A-Za-z][A-Za-z0-9_-]*="[^"]*")");
  std::vector<Site> out;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    // Only inside a start tag: the nearest '<' before the match is not closed.
    const auto pos = static_cast<std::size_t>(it->position());
    const auto lt = s.rfind('<', pos), gt = s.rfind('>', pos);
    if (lt == std::string::npos || (gt != std::string::npos && gt > lt)) continue;
    out.push_back({pos, static_cast<std::size_t>(it->length()), ""});
  }
  return out;
}

std::string typo(const std::string& name) { return name + name.back(); }

std::vector<Site> rename_sites(const std::string& s, bool html) {
  std::vector<Site> out;
  if (html) {
    static const std::regex re(R"(\b(class|id|for|name)="([A-Za-z][A-Za-z0-9_-]*))");
    for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
      const auto word = (*it)[2].str();
      out.push_back({static_cast<std::size_t>(it->position(2)), word.size(), typo(word)});
    }
    return out;
  }
  static const std::set<std::string> keywords = {"if", "else", "while", "return", "break", "continue"};
  static const std::regex re(R"(\b[A-Za-z_][A-Za-z0-9_]*\b)");
  std::set<std::string> names;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it)
    names.insert(it->str());
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    const auto word = it->str();
    if (keywords.contains(word) || names.contains(typo(word))) continue;
    out.push_back({static_cast<std::size_t>(it->position()), word.size(), typo(word)});
  }
  return out;
}

std::vector<std::string> applicable_ops(const std::string& file) {
  if (is_html(file)) return {"delete_attribute", "rename_identifier", "off_by_one"};
  return {"flip_comparison", "off_by_one", "swap_branches", "rename_identifier"};
}

std::vector<Site> sites_for(const std::string& op, const std::string& file, const std::string& s,
                            std::mt19937_64& rng) {
  if (op == "flip_comparison") return flip_comparison_sites(s);
  if (op == "off_by_one") return off_by_one_sites(s, rng);
  if (op == "swap_branches") return swap_branch_sites(s);
  if (op == "delete_attribute") return delete_attribute_sites(s);
  if (op == "rename_identifier") return rename_sites(s, is_html(file));
  throw BuildError("unknown mutation operator " + op);
}

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

std::size_t count_overlapping(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

// Golden edit for a mutation: whole lines around the change, widened until
// the mutated snippet is unique in the mutated file.
repair::Edit inverse_edit(const std::string& file, const std::string& original, const std::string& mutated,
                          const Site& site) {
  const auto new_end = site.offset + site.replacement.size();
  auto start = mutated.rfind('\n', site.offset == 0 ? 0 : site.offset - 1);
  start = (site.offset == 0 || start == std::string::npos) ? 0 : start + 1;
  auto end = mutated.find('\n', new_end > site.offset ? new_end - 1 : site.offset);
  if (end == std::string::npos) end = mutated.size();
  bool grow_up = true;
  for (;;) {
    const auto snippet = mutated.substr(start, end - start);
    if (!snippet.empty() && count_overlapping(mutated, snippet) == 1) break;
    if (start == 0 && end == mutated.size()) break;
    if ((grow_up && start > 0) || end == mutated.size()) {
      start = start <= 1 ? 0 : mutated.rfind('\n', start - 2);
      start = start == std::string::npos || start == 0 ? 0 : start + 1;
    } else {
      end = mutated.find('\n', end + 1);
      if (end == std::string::npos) end = mutated.size();
    }
    grow_up = !grow_up;
  }
  const auto orig_len = end - start - site.replacement.size() + site.length;
  return {file, mutated.substr(start, end - start), original.substr(start, orig_len)};
}

struct Template {
  std::string name;
  fs::path dir;
  std::string artifact;
  std::vector<std::string> test_command;
  std::string summary;
};

std::vector<Template> load_templates(const fs::path& root) {
  if (!fs::is_directory(root)) throw BuildError("template directory not found: " + root.string());
  std::vector<Template> out;
  for (const auto& e : fs::directory_iterator(root)) {
    if (!e.is_directory() || !fs::exists(e.path() / "template.json")) continue;
    const auto j = nlohmann::json::parse(read_file(e.path() / "template.json"));
    Template t{e.path().filename().string(), e.path(), j.at("artifact").get<std::string>(),
               j.at("test_command").get<std::vector<std::string>>(), j.value("summary", std::string{})};
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(), [](const Template& a, const Template& b) { return a.name < b.name; });
  if (out.empty()) throw BuildError("no templates (subdirectories with template.json) in " + root.string());
  return out;
}

void copy_codebase(const Template& t, const fs::path& to) {
  fs::create_directories(to);
  for (const auto& e : fs::directory_iterator(t.dir)) {
    if (e.path().filename() == "template.json") continue;
    fs::copy(e.path(), to / e.path().filename(), fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  }
}

constexpr std::chrono::seconds kTestTimeout{20};

repair::ProcessResult run_tests(const std::vector<std::string>& cmd, const fs::path& dir) {
  return repair::run_process(repair::expand_command(cmd), dir, kTestTimeout);
}

SceneGraph artifact_graph(const fs::path& file) {
  const auto text = read_file(file);
  if (is_html(file.string())) return html::dom_to_ssg(html::parse_html(text));
  auto c = cfg::build_cfg(mini::parse_mini(text));
  return cfg::add_defuse_edges(cfg::cfg_to_ssg(c), c);
}

std::string issue_for(const Template& t, const std::string& output) {
  std::string cmd;
  for (const auto& a : t.test_command) cmd += (cmd.empty() ? "" : " ") + a;
  std::string text = t.summary.empty() ? std::string("The ") + t.name + " component misbehaves." : t.summary;
  text += "\n\nAfter a recent change `" + cmd + "` fails:\n";
  const auto lines = split_lines(output);
  for (std::size_t i = 0; i < lines.size() && i < 6; ++i) text += "    " + lines[i] + "\n";
  return text;
}

}  // namespace

std::vector<SeededBug> seed_bugs(const fs::path& templates, int n, std::uint64_t seed, const fs::path& out_dir) {
  if (n < 0) throw BuildError("task count must be non-negative");
  const auto tmpls = load_templates(templates);
  fs::create_directories(out_dir);

  for (const auto& t : tmpls) {
    ScratchDir probe("ssg-template");
    copy_codebase(t, probe.path());
    auto r = run_tests(t.test_command, probe.path());
    if (r.timed_out || r.exit_code != 0)
      throw BuildError("template " + t.name + ": test does not pass before mutation (exit " +
                       std::to_string(r.exit_code) + "): " + r.out + r.err);
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> op_offset(tmpls.size());
  for (auto& o : op_offset) o = rng() % 8;

  std::vector<SeededBug> bugs;
  for (int i = 0; i < n; ++i) {
    const auto ti = static_cast<std::size_t>(i) % tmpls.size();
    const auto& t = tmpls[ti];
    const auto original = read_file(t.dir / t.artifact);
    auto ops = applicable_ops(t.artifact);
    std::rotate(ops.begin(), ops.begin() + (op_offset[ti] + static_cast<std::size_t>(i) / tmpls.size()) % ops.size(),
                ops.end());

    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "bug-%03d", i);
    const std::string id = idbuf;
    const auto task_dir = out_dir / id;

    bool done = false;
    for (const auto& op : ops) {
      auto sites = sites_for(op, t.artifact, original, rng);
      shuffle(sites, rng);
      for (const auto& site : sites) {
        const auto mutated = original.substr(0, site.offset) + site.replacement +
                             original.substr(site.offset + site.length);
        if (mutated == original) continue;
        auto edit = inverse_edit(t.artifact, original, mutated, site);

        fs::remove_all(task_dir);
        copy_codebase(t, task_dir / "code");
        write_file(task_dir / "code" / t.artifact, mutated);
        const auto broken = run_tests(t.test_command, task_dir / "code");
        if (!broken.timed_out && broken.exit_code == 0) continue;  // equivalent mutant

        repair::PatchCandidate golden{{edit}};
        {
          ScratchDir check("ssg-golden");
          copy_tree(task_dir / "code", check.path());
          repair::apply_patch(check.path(), golden);
          if (read_file(check.path() / t.artifact) != original) continue;
          const auto fixed = run_tests(t.test_command, check.path());
          if (fixed.timed_out || fixed.exit_code != 0) continue;
        }

        SceneGraph g;
        try {
          g = artifact_graph(task_dir / "code" / t.artifact);
        } catch (const std::exception&) {
          continue;  // mutant no longer parses; pick a semantic mutation instead
        }
        save_graph(g, (task_dir / "artifact.ssg.json").string());

        SeededBug b;
        b.task.id = id;
        b.task.codebase_root = task_dir / "code";
        b.task.issue_text = issue_for(t, broken.out + broken.err);
        b.task.artifact_ssg = task_dir / "artifact.ssg.json";
        b.task.test_command = t.test_command;
        b.task.timeout = kTestTimeout;
        b.template_name = t.name;
        b.defect = {op, t.artifact, edit.replace, edit.search};
        b.golden_patch = std::move(golden);
        bugs.push_back(std::move(b));
        done = true;
        break;
      }
      if (done) break;
    }
    if (!done) {
      fs::remove_all(task_dir);
      throw BuildError("template " + t.name + ": no mutation site yields a failing test for task " + id);
    }
  }

  auto manifest = nlohmann::json::array();
  nlohmann::json oracle, wrong_then_right, always_wrong;
  const std::string full_box = "<reason>The whole artifact is relevant.</reason>\n<result>[0, 0, 640, 480]</result>\n";
  for (const auto& b : bugs) {
    auto j = repair::to_json(b.task);
    j["codebase_root"] = b.task.id + "/code";
    j["artifact"] = {{"ssg", b.task.id + "/artifact.ssg.json"}};
    j["template"] = b.template_name;
    j["operator"] = b.defect.op;
    j["defect"] = {{"file", b.defect.file}, {"original", b.defect.original}, {"mutated", b.defect.mutated}};
    j["golden_patch"] = repair::to_json(b.golden_patch);
    manifest.push_back(std::move(j));

    const auto golden = repair::format_patch(b.golden_patch);
    repair::PatchCandidate noop{{{b.defect.file, b.golden_patch.edits[0].search, b.golden_patch.edits[0].search}}};
    const auto wrong = repair::format_patch(noop);
    oracle[model::scenario_key(b.task.id, "generate", 1)] = golden;
    wrong_then_right[model::scenario_key(b.task.id, "generate", 1)] = wrong;
    wrong_then_right[model::scenario_key(b.task.id, "generate", 2)] = golden;
    always_wrong[b.task.id + "/generate/*"] = wrong;
  }
  for (auto* s : {&oracle, &wrong_then_right, &always_wrong}) (*s)["*/segment/*"] = full_box;
  if (bugs.empty())
    for (auto* s : {&oracle, &wrong_then_right, &always_wrong}) *s = nlohmann::json::object();

  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  write_file(out_dir / "oracle.json", oracle.dump(2) + "\n");
  write_file(out_dir / "wrong_then_right.json", wrong_then_right.dump(2) + "\n");
  write_file(out_dir / "always_wrong.json", always_wrong.dump(2) + "\n");
  return bugs;
}

}  // namespace ssg::dataset
