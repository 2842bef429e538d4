// Localize -> generate -> validate repair loop with segmentation feedback.
#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssg/graph.hpp"
#include "ssg/model.hpp"
#include "ssg/raster.hpp"

namespace ssg::repair {

namespace fs = std::filesystem;

struct RepairTask {
  std::string id;
  fs::path codebase_root;
  std::string issue_text;
  std::optional<fs::path> artifact_ssg;     // SSG JSON, .html or .mini
  std::optional<fs::path> artifact_raster;  // PGM
  std::vector<std::string> test_command;
  std::chrono::seconds timeout{60};
  int max_rounds = 3;
};

class TaskError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws TaskError when the task violates its invariants.
void check_task(const RepairTask& t);
/// Relative paths resolve against `base_dir`.
RepairTask task_from_json(const nlohmann::json& j, const fs::path& base_dir = {});
nlohmann::json to_json(const RepairTask& t);
std::vector<RepairTask> load_manifest(const fs::path& path);

// Patches -------------------------------------------------------------------

struct Edit {
  std::string path;  // codebase-relative
  std::string search;
  std::string replace;
  bool operator==(const Edit&) const = default;
};

struct PatchCandidate {
  std::vector<Edit> edits;
  bool operator==(const PatchCandidate&) const = default;
};

/// Rejects absolute paths and any ".." component.
bool safe_relative_path(const std::string& p);

/// All SEARCH/REPLACE blocks in order of appearance:
///
///   <<<<<<< SEARCH path/to/file
///   (verbatim original lines)
///   =======
///   (replacement lines)
///   >>>>>>> REPLACE
///
/// Throws model::FormatError on a malformed block or when none is present.
PatchCandidate parse_patch(const std::string& text);
std::string format_patch(const PatchCandidate& p);
nlohmann::json to_json(const PatchCandidate& p);
PatchCandidate patch_from_json(const nlohmann::json& j);

class ApplyError : public std::runtime_error {
 public:
  enum class Kind { NotFound, Ambiguous, FileMissing, UnsafePath, Io };
  ApplyError(Kind k, std::size_t edit_index, const std::string& detail);
  Kind kind() const { return kind_; }
  std::size_t edit_index() const { return edit_index_; }

 private:
  Kind kind_;
  std::size_t edit_index_;
};

/// Each search text must occur exactly once in its file (after earlier edits
/// in the same candidate). All-or-nothing: on any failure no file changes.
void apply_patch(const fs::path& codebase_root, const PatchCandidate& p);

// Localization ----------------------------------------------------------------

struct LocalizationHit {
  std::string path;  // codebase-relative, generic form
  double score = 0.0;
  std::vector<std::string> lines;  // "lineno: text" excerpts
};

/// Candidate search terms from node contents and issue text, stopwords removed.
std::vector<std::string> extract_terms(const SceneGraph& g, const std::string& issue_text);

/// Files scored by sum over terms of tf * log(N / df); files matching any
/// term are returned, best first, at most top_n.
std::vector<LocalizationHit> localize(const RepairTask& task, const SceneGraph& g, std::size_t top_n = 10);

// Validation ------------------------------------------------------------------

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string out;
  std::string err;
};

/// fork/exec with captured stdout/stderr; the whole process group is killed
/// at the deadline. A missing executable yields exit 127 and a
/// "command not found" diagnostic on stderr.
ProcessResult run_process(const std::vector<std::string>& argv, const fs::path& cwd, std::chrono::milliseconds timeout);

struct ValidationResult {
  bool passed = false;
  int exit_code = -1;
  bool timed_out = false;
  std::string output;
  bool via_fallback = false;
};

struct ValidationConfig {
  std::vector<std::string> dependency_patterns = {"ERR_MODULE_NOT_FOUND", "command not found"};
};

/// Path substituted for a "{ssg}" argv element: $SSG_EXE, else "ssg".
std::string ssg_executable();
std::vector<std::string> expand_command(const std::vector<std::string>& argv);

/// Runs the test command in a scratch copy of the codebase.
ValidationResult validate(const RepairTask& task);

/// Nonzero exit whose output matches a dependency-failure pattern.
bool dependency_failure(const ValidationResult& r, const ValidationConfig& cfg = {});

struct FallbackContext {
  std::string patch_text;
  std::string test_output;
  int round = 1;
};

/// Asks the backend for a standalone test script (a fenced code block
/// tagged js / sh / py), writes it as test_fix.<ext> into a scratch copy and
/// uses its exit code.
ValidationResult fallback_validate(const RepairTask& task, model::ModelBackend& backend, const FallbackContext& ctx);

// Generation ------------------------------------------------------------------

struct GenerateContext {
  const std::vector<LocalizationHit>* localization = nullptr;
  std::optional<std::string> feedback;
  int round = 1;
};

PatchCandidate generate(const RepairTask& task, const SceneGraph& g, const GenerateContext& ctx,
                        model::ModelBackend& backend);

/// Tail-biased truncation to at most `budget` bytes.
std::string truncate_feedback(const std::string& text, std::size_t budget);

// Session -------------------------------------------------------------------

enum class SessionState { Init, Extracted, Localized, Generated, ValidatedPass, ValidatedFail, DoneResolved, DoneUnresolved };

std::string_view to_string(SessionState s);

struct LogEvent {
  std::string kind;
  int round = 0;
  std::string detail;
};

struct RepairSession {
  RepairTask task;
  int round = 1;
  SessionState state = SessionState::Init;
  std::vector<LogEvent> log;
  std::optional<PatchCandidate> final_patch;
  int generate_calls = 0;
  int segmentation_events = 0;

  /// Enforces the session state machine; throws std::logic_error otherwise.
  void transition(SessionState next);
  bool resolved() const { return state == SessionState::DoneResolved; }
  void note(std::string kind, std::string detail) { log.push_back({std::move(kind), round, std::move(detail)}); }
};

nlohmann::json to_json(const RepairSession& s);

struct Backends {
  model::ModelBackend* coder = nullptr;
  model::ModelBackend* segmenter = nullptr;  // defaults to coder
  model::ModelBackend* fallback = nullptr;   // defaults to coder
};

struct SessionOptions {
  Canvas canvas{640, 480};
  ValidationConfig validation;
  std::size_t feedback_budget = 8 * 1024;
  std::size_t top_n = 10;
};

/// Loads or extracts the task's scene graph (SSG JSON, HTML or mini source).
SceneGraph extract_artifact(const RepairTask& task);

/// Runs rounds until a patch validates or the round gate stops; any
/// unrecoverable error ends the session unresolved with the error logged.
RepairSession run_session(const RepairTask& task, const Backends& backends, const SessionOptions& opt = {});

}  // namespace ssg::repair
