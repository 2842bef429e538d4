#include <map>

#include "ssg/repair.hpp"
#include "ssg/util.hpp"

namespace ssg::repair {

namespace {

constexpr std::string_view kSearch = "<<<<<<< SEARCH";
constexpr std::string_view kDivider = "=======";
constexpr std::string_view kReplace = ">>>>>>> REPLACE";

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

std::string kind_name(ApplyError::Kind k) {
  switch (k) {
    case ApplyError::Kind::NotFound: return "NotFound";
    case ApplyError::Kind::Ambiguous: return "Ambiguous";
    case ApplyError::Kind::FileMissing: return "FileMissing";
    case ApplyError::Kind::UnsafePath: return "UnsafePath";
    case ApplyError::Kind::Io: return "Io";
  }
  return "Io";
}

}  // namespace

bool safe_relative_path(const std::string& p) {
  if (p.empty()) return false;
  fs::path path(p);
  if (path.is_absolute() || path.has_root_name() || path.has_root_directory()) return false;
  for (const auto& part : path)
    if (part == "..") return false;
  return true;
}

PatchCandidate parse_patch(const std::string& text) {
  enum class State { Idle, Search, Replace } state = State::Idle;
  PatchCandidate p;
  Edit cur;
  std::vector<std::string> search, replace;
  for (auto line : split_lines(text)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view v(line);
    switch (state) {
      case State::Idle:
        if (v.substr(0, kSearch.size()) == kSearch) {
          cur = {};
          cur.path = std::string(trim(v.substr(kSearch.size())));
          if (cur.path.empty()) throw model::FormatError("SEARCH block without a file path", text);
          search.clear();
          replace.clear();
          state = State::Search;
        }
        break;
      case State::Search:
        if (v == kDivider) {
          state = State::Replace;
        } else if (v.substr(0, kReplace.size()) == kReplace || v.substr(0, kSearch.size()) == kSearch) {
          throw model::FormatError("SEARCH block for " + cur.path + " is missing its ======= divider", text);
        } else {
          search.push_back(line);
        }
        break;
      case State::Replace:
        if (v.substr(0, kReplace.size()) == kReplace) {
          cur.search = join(search);
          cur.replace = join(replace);
          if (cur.search.empty()) throw model::FormatError("empty SEARCH text for " + cur.path, text);
          if (!safe_relative_path(cur.path)) throw model::FormatError("unsafe patch path " + cur.path, text);
          p.edits.push_back(std::move(cur));
          state = State::Idle;
        } else {
          replace.push_back(line);
        }
        break;
    }
  }
  if (state != State::Idle) throw model::FormatError("unterminated SEARCH/REPLACE block", text);
  if (p.edits.empty()) throw model::FormatError("reply contains no SEARCH/REPLACE block", text);
  return p;
}

std::string format_patch(const PatchCandidate& p) {
  std::string out;
  for (const auto& e : p.edits) {
    out += std::string(kSearch) + " " + e.path + "\n" + e.search + "\n" + std::string(kDivider) + "\n";
    if (!e.replace.empty()) out += e.replace + "\n";
    out += std::string(kReplace) + "\n";
  }
  return out;
}

nlohmann::json to_json(const PatchCandidate& p) {
  auto arr = nlohmann::json::array();
  for (const auto& e : p.edits) arr.push_back({{"path", e.path}, {"search", e.search}, {"replace", e.replace}});
  return arr;
}

PatchCandidate patch_from_json(const nlohmann::json& j) {
  PatchCandidate p;
  for (const auto& e : j)
    p.edits.push_back({e.at("path").get<std::string>(), e.at("search").get<std::string>(),
                       e.at("replace").get<std::string>()});
  return p;
}

ApplyError::ApplyError(Kind k, std::size_t edit_index, const std::string& detail)
    : std::runtime_error(kind_name(k) + " at edit " + std::to_string(edit_index) + ": " + detail),
      kind_(k),
      edit_index_(edit_index) {}

void apply_patch(const fs::path& root, const PatchCandidate& p) {
  // Stage every edit in memory first; only a fully successful candidate
  // touches the disk.
  std::map<std::string, std::string> original, staged;
  for (std::size_t i = 0; i < p.edits.size(); ++i) {
    const auto& e = p.edits[i];
    if (!safe_relative_path(e.path)) throw ApplyError(ApplyError::Kind::UnsafePath, i, e.path);
    if (e.search.empty()) throw ApplyError(ApplyError::Kind::NotFound, i, "empty search text");
    if (!staged.contains(e.path)) {
      const auto file = root / e.path;
      if (!fs::is_regular_file(file)) throw ApplyError(ApplyError::Kind::FileMissing, i, e.path);
      try {
        original[e.path] = staged[e.path] = read_file(file);
      } catch (const IoError& err) {
        throw ApplyError(ApplyError::Kind::Io, i, err.what());
      }
    }
    auto& body = staged[e.path];
    std::size_t n = 0;
    for (auto pos = body.find(e.search); pos != std::string::npos; pos = body.find(e.search, pos + 1)) ++n;
    if (n == 0) throw ApplyError(ApplyError::Kind::NotFound, i, "search text not found in " + e.path);
    if (n > 1)
      throw ApplyError(ApplyError::Kind::Ambiguous, i,
                       "search text occurs " + std::to_string(n) + " times in " + e.path);
    body.replace(body.find(e.search), e.search.size(), e.replace);
  }

  std::vector<std::string> written;
  try {
    for (const auto& [path, body] : staged) {
      const auto perms = fs::status(root / path).permissions();
      write_file(root / path, body);
      fs::permissions(root / path, perms);
      written.push_back(path);
    }
  } catch (const IoError& err) {
    for (const auto& path : written) write_file(root / path, original[path]);
    throw ApplyError(ApplyError::Kind::Io, p.edits.size(), err.what());
  }
}

}  // namespace ssg::repair
