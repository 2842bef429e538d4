// Corpus builders: CFG (artifact, golden SSG) pairs and seeded-bug repair tasks.
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssg/repair.hpp"

namespace ssg::dataset {

namespace fs = std::filesystem;

class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CorpusEntry {
  std::string id;
  fs::path artifact_path;
  fs::path golden_ssg_path;
  fs::path golden_mermaid_path;
};

struct CorpusBuild {
  std::vector<CorpusEntry> entries;
  std::vector<std::string> skipped;  // "<file>: <reason>"
};

/// Every *.mini file in `src_dir` (sorted) with LOC > loc_threshold becomes
/// <id>.mini, <id>.ssg.json and <id>.mmd in `out_dir`, plus manifest.json.
/// Unparseable files are skipped and reported, not fatal.
CorpusBuild build_cfg_corpus(const fs::path& src_dir, int loc_threshold, const fs::path& out_dir);

/// Writes n random programs (prog_0000.mini, ...) with at least min_loc LOC.
std::vector<fs::path> generate_mini_corpus(int n, std::uint64_t seed, int min_loc, const fs::path& out_dir);

// Mini-language test cases ---------------------------------------------------

/// cases.json: [{"name": ..., "input": {var: int}, "returns": int?,
///               "env": {var: int}?}, ...]
struct CaseReport {
  int passed = 0;
  int failed = 0;
  std::string text;  // one "ok"/"FAIL" line per case
  bool ok() const { return failed == 0; }
};

CaseReport run_mini_cases(const std::string& source, const nlohmann::json& cases);

// Seeded bugs ------------------------------------------------------------------

struct Defect {
  std::string op;
  std::string file;
  std::string original;  // snippet before mutation
  std::string mutated;   // snippet after mutation
};

struct SeededBug {
  repair::RepairTask task;
  std::string template_name;
  Defect defect;
  repair::PatchCandidate golden_patch;
};

inline const std::vector<std::string> kOperators = {"flip_comparison", "off_by_one", "swap_branches",
                                                     "delete_attribute", "rename_identifier"};

/// Templates are subdirectories holding template.json
///   {"artifact": "main.mini", "test_command": [...], "summary": "..."}
/// plus the files of a working codebase. Task i uses template i mod T; each
/// task carries one mutation whose inverse is the golden patch. Each task is
/// checked to fail as mutated and pass with the golden patch applied.
///
/// Writes <out_dir>/<id>/{code/, artifact.ssg.json}, manifest.json and the
/// scripted scenarios oracle.json, wrong_then_right.json, always_wrong.json.
std::vector<SeededBug> seed_bugs(const fs::path& templates, int n, std::uint64_t seed, const fs::path& out_dir);

}  // namespace ssg::dataset
