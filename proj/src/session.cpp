
#include "ssg/cfg.hpp"
#include "ssg/html.hpp"
#include "ssg/mermaid.hpp"
#include "ssg/mini.hpp"
#include "ssg/repair.hpp"
#include "ssg/segmentation.hpp"
#include "ssg/util.hpp"

namespace ssg::repair {

// Tasks -----------------------------------------------------------------------

void check_task(const RepairTask& t) {
  if (t.id.empty()) throw TaskError("task id is empty");
  if (!fs::is_directory(t.codebase_root))
    throw TaskError("task " + t.id + ": codebase_root does not exist: " + t.codebase_root.string());
  if (t.test_command.empty()) throw TaskError("task " + t.id + ": test_command is empty");
  if (t.timeout.count() <= 0) throw TaskError("task " + t.id + ": timeout must be positive");
  if (t.max_rounds < 1) throw TaskError("task " + t.id + ": max_rounds must be at least 1");
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

RepairTask task_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  RepairTask t;
  try {
    t.id = j.at("id").get<std::string>();
    t.codebase_root = resolve(base_dir, j.at("codebase_root").get<std::string>());
    t.issue_text = j.value("issue_text", std::string{});
    if (auto a = j.find("artifact"); a != j.end() && !a->is_null()) {
      if (a->is_string()) {
        const auto p = resolve(base_dir, a->get<std::string>());
        if (p.extension() == ".pgm")
          t.artifact_raster = p;
        else
          t.artifact_ssg = p;
      } else {
        if (a->contains("ssg")) t.artifact_ssg = resolve(base_dir, a->at("ssg").get<std::string>());
        if (a->contains("raster")) t.artifact_raster = resolve(base_dir, a->at("raster").get<std::string>());
      }
    }
    t.test_command = j.at("test_command").get<std::vector<std::string>>();
    t.timeout = std::chrono::seconds(j.value("timeout", 60));
    t.max_rounds = j.value("max_rounds", 3);
  } catch (const nlohmann::json::exception& e) {
    throw TaskError(std::string("malformed task: ") + e.what());
  }
  return t;
}

nlohmann::json to_json(const RepairTask& t) {
  nlohmann::json j = {{"id", t.id},
                      {"codebase_root", t.codebase_root.generic_string()},
                      {"issue_text", t.issue_text},
                      {"test_command", t.test_command},
                      {"timeout", t.timeout.count()},
                      {"max_rounds", t.max_rounds}};
  if (t.artifact_ssg || t.artifact_raster) {
    nlohmann::json a = nlohmann::json::object();
    if (t.artifact_ssg) a["ssg"] = t.artifact_ssg->generic_string();
    if (t.artifact_raster) a["raster"] = t.artifact_raster->generic_string();
    j["artifact"] = a;
  }
  return j;
}

std::vector<RepairTask> load_manifest(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw TaskError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  if (j.is_object() && j.contains("tasks")) j = j["tasks"];
  if (!j.is_array()) throw TaskError("manifest " + path.string() + " must be a JSON array of tasks");
  std::vector<RepairTask> out;
  for (const auto& e : j) out.push_back(task_from_json(e, path.parent_path()));
  return out;
}

// Generation ------------------------------------------------------------------

std::string truncate_feedback(const std::string& text, std::size_t budget) {
  if (text.size() <= budget) return text;
  static constexpr std::string_view marker = "[...truncated...]\n";
  if (budget <= marker.size()) return text.substr(text.size() - budget);
  return std::string(marker) + text.substr(text.size() - (budget - marker.size()));
}

PatchCandidate generate(const RepairTask& task, const SceneGraph& g, const GenerateContext& ctx,
                        model::ModelBackend& backend) {
  std::string code;
  if (ctx.localization) {
    std::size_t shown = 0;
    for (const auto& hit : *ctx.localization) {
      if (shown++ == 3) break;
      auto body = read_file(task.codebase_root / hit.path);
      if (body.size() > 16 * 1024) body = body.substr(0, 16 * 1024) + "\n[...]";
      code += "### " + hit.path + "\n" + body;
      if (!body.empty() && body.back() != '\n') code += '\n';
    }
  }
  auto [system, user] = model::PromptTemplate::named("coding_agent.txt")
                            .render_messages({{"problem_statement", task.issue_text},
                                              {"artifact", mermaid::serialize(g)},
                                              {"code_context", code.empty() ? "(no matching files)" : code},
                                              {"feedback", ctx.feedback.value_or("(none)")}});
  model::ModelRequest req{system, user, {}, model::scenario_key(task.id, "generate", ctx.round)};
  return parse_patch(backend.complete(req).text);
}

// Session ---------------------------------------------------------------------

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::Init: return "Init";
    case SessionState::Extracted: return "Extracted";
    case SessionState::Localized: return "Localized";
    case SessionState::Generated: return "Generated";
    case SessionState::ValidatedPass: return "Validated(pass)";
    case SessionState::ValidatedFail: return "Validated(fail)";
    case SessionState::DoneResolved: return "Done(resolved)";
    case SessionState::DoneUnresolved: return "Done(unresolved)";
  }
  return "?";
}

void RepairSession::transition(SessionState next) {
  using S = SessionState;
  bool ok = false;
  switch (state) {
    case S::Init: ok = next == S::Extracted; break;
    case S::Extracted: ok = next == S::Localized; break;
    case S::Localized: ok = next == S::Generated; break;
    case S::Generated: ok = next == S::ValidatedPass || next == S::ValidatedFail; break;
    case S::ValidatedPass: ok = next == S::DoneResolved; break;
    case S::ValidatedFail: ok = next == S::DoneUnresolved || next == S::Extracted; break;
    case S::DoneResolved:
    case S::DoneUnresolved: ok = false; break;
  }
  if (next == S::DoneUnresolved && state != S::DoneResolved && state != S::DoneUnresolved) ok = true;
  if (next == S::Extracted && round > task.max_rounds) ok = false;
  if (!ok)
    throw std::logic_error("illegal session transition " + std::string(to_string(state)) + " -> " +
                           std::string(to_string(next)));
  state = next;
}

nlohmann::json to_json(const RepairSession& s) {
  auto log = nlohmann::json::array();
  for (const auto& e : s.log) log.push_back({{"event", e.kind}, {"round", e.round}, {"detail", e.detail}});
  nlohmann::json j = {{"task_id", s.task.id},
                      {"state", to_string(s.state)},
                      {"resolved", s.resolved()},
                      {"round", s.round},
                      {"generate_calls", s.generate_calls},
                      {"segmentation_events", s.segmentation_events},
                      {"log", log}};
  if (s.final_patch) j["patch"] = to_json(*s.final_patch);
  return j;
}

SceneGraph extract_artifact(const RepairTask& task) {
  if (!task.artifact_ssg) {
    SceneGraph g;
    g.add_node({"issue", "issue", task.issue_text, std::nullopt});
    return g;
  }
  const auto& p = *task.artifact_ssg;
  const auto ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return html::dom_to_ssg(html::parse_html(read_file(p)));
  if (ext == ".mini") {
    auto prog = mini::parse_mini(read_file(p));
    auto c = cfg::build_cfg(prog);
    return cfg::add_defuse_edges(cfg::cfg_to_ssg(c), c);
  }
  if (ext == ".mmd") return mermaid::parse(read_file(p));
  return load_graph(p.string());
}

namespace {

std::string box_string(const BoundingBox& b) {
  return "[" + std::to_string(b.x) + ", " + std::to_string(b.y) + ", " + std::to_string(b.w) + ", " +
         std::to_string(b.h) + "]";
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

RepairSession run_session(const RepairTask& task, const Backends& backends, const SessionOptions& opt) {
  RepairSession s;
  s.task = task;
  auto& coder = *backends.coder;
  auto& segmenter = backends.segmenter ? *backends.segmenter : coder;
  auto& fallback = backends.fallback ? *backends.fallback : coder;

  auto fail = [&](const std::string& kind, const std::string& why) {
    s.note(kind, why);
    s.transition(SessionState::DoneUnresolved);
  };

  try {
    check_task(task);
    SceneGraph g = extract_artifact(task);
    RasterImage full;
    if (task.artifact_raster) {
      full = load_pgm(task.artifact_raster->string());
    } else {
      try {
        full = rasterize(g, opt.canvas);
        g = with_layout_boxes(g, opt.canvas);
      } catch (const CanvasTooSmall& e) {
        full = RasterImage(opt.canvas.width, opt.canvas.height);
        s.note("raster", std::string("layout unavailable: ") + e.what());
      }
    }
    BoundingBox region{0, 0, full.width(), full.height()};
    std::optional<std::string> feedback;

    for (;;) {
      s.transition(SessionState::Extracted);
      s.note("extract", "nodes=" + std::to_string(g.node_count()) + " edges=" + std::to_string(g.edge_count()));

      const auto hits = localize(task, g, opt.top_n);
      s.transition(SessionState::Localized);
      {
        std::string d = std::to_string(hits.size()) + " file(s)";
        for (std::size_t i = 0; i < hits.size() && i < 3; ++i) d += (i ? ", " : ": ") + hits[i].path;
        s.note("localize", d);
      }

      ++s.generate_calls;
      std::optional<PatchCandidate> patch;
      std::string failure;
      try {
        patch = generate(task, g, {&hits, feedback, s.round}, coder);
        s.note("generate", std::to_string(patch->edits.size()) + " edit(s)");
      } catch (const model::FormatError& e) {
        failure = std::string("patch format error: ") + e.what();
        s.note("generate", failure);
      }
      s.transition(SessionState::Generated);

      ValidationResult v;
      if (patch) {
        ScratchDir work("ssg-work");
        copy_tree(task.codebase_root, work.path());
        try {
          apply_patch(work.path(), *patch);
          s.note("apply", "ok");
          RepairTask patched = task;
          patched.codebase_root = work.path();
          v = validate(patched);
          s.note("validate", std::string(v.passed ? "pass" : "fail") + " exit=" + std::to_string(v.exit_code) +
                                 (v.timed_out ? " timeout" : ""));
          if (dependency_failure(v, opt.validation)) {
            s.note("fallback", "dependency failure: " + first_line(v.output));
            v = fallback_validate(patched, fallback, {format_patch(*patch), v.output, s.round});
            s.note("fallback", std::string(v.passed ? "pass" : "fail") + " exit=" + std::to_string(v.exit_code));
          }
          if (!v.passed) failure = v.output;
        } catch (const ApplyError& e) {
          failure = std::string("patch did not apply: ") + e.what();
          s.note("apply", e.what());
        }
      }

      if (v.passed) {
        s.transition(SessionState::ValidatedPass);
        s.final_patch = patch;
        s.transition(SessionState::DoneResolved);
        return s;
      }
      s.transition(SessionState::ValidatedFail);
      feedback = truncate_feedback(failure, opt.feedback_budget);

      if (segmentation::iteration_gate(s.round + 1, task.max_rounds) == segmentation::Gate::Stop) {
        s.note("gate", "stop after round " + std::to_string(s.round));
        s.transition(SessionState::DoneUnresolved);
        return s;
      }

      ++s.segmentation_events;
      try {
        std::vector<std::pair<std::string, std::string>> snippets;
        for (const auto& h : hits) {
          std::string text;
          for (const auto& l : h.lines) text += l + "\n";
          snippets.emplace_back(h.path, text);
        }
        segmentation::SegmentationRequest req{crop_image(full, region), task.issue_text, snippets,
                                              mermaid::serialize(g),
                                              model::scenario_key(task.id, "segment", s.round)};
        auto resp = segmentation::propose_region(req, segmenter);
        const BoundingBox abs{region.x + resp.bbox.x, region.y + resp.bbox.y, resp.bbox.w, resp.bbox.h};
        auto cropped = segmentation::crop(g, full, abs);
        region = abs;
        g = std::move(cropped.graph);
        s.note("segment", box_string(abs) + " nodes=" + std::to_string(g.node_count()) +
                              (cropped.notice ? " (" + *cropped.notice + ")" : ""));
      } catch (const model::FormatError& e) {
        s.note("segment", std::string("ignored: ") + e.what());
      } catch (const segmentation::EmptyRegion& e) {
        s.note("segment", std::string("ignored: ") + e.what());
      }
      ++s.round;
    }
  } catch (const std::exception& e) {
    if (s.state != SessionState::DoneResolved && s.state != SessionState::DoneUnresolved) fail("error", e.what());
  }
  return s;
}

}  // namespace ssg::repair
