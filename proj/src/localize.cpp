#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <regex>
#include <set>

#include "ssg/repair.hpp"
#include "ssg/util.hpp"

namespace ssg::repair {

namespace {

const std::set<std::string> kStopwords = {
    "the",   "and",     "for",    "with",   "this",   "that",  "when",  "from",  "are",      "was",
    "not",   "but",     "have",   "has",    "had",    "into",  "should", "would", "could",   "its",
    "via",   "you",     "your",   "our",    "they",   "them",  "what",  "which", "there",    "then",
    "than",  "will",    "can",    "does",   "did",    "done",  "also",  "only",  "some",     "any",
    "all",   "each",    "more",   "most",   "other",  "such",  "very",  "just",  "too",      "out",
    "how",   "why",     "who",    "where",  "after",  "before", "while", "else", "return",  "true",
    "false", "null",    "none",   "var",    "let",    "const", "function", "new", "instead", "expected",
    "actual", "issue",  "bug",    "error",  "fails",  "failed", "wrong", "value", "shows",   "shown",
    "div",   "span",    "class",  "style",  "html",   "body",  "head",  "break", "continue", "entry",
    "exit",  "block",   "branch", "text",   "see",    "get",   "set",   "use",   "used",     "using"};

bool is_stopword(const std::string& t) {
  std::string lower(t);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return kStopwords.contains(lower);
}

void collect(const std::string& text, std::vector<std::string>& out, std::set<std::string>& seen) {
  static const std::regex term_re(R"([A-Za-z_][A-Za-z0-9_\.]{2,})");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), term_re); it != std::sregex_iterator(); ++it) {
    std::string t = it->str();
    while (!t.empty() && t.back() == '.') t.pop_back();
    if (t.size() < 3 || is_stopword(t)) continue;
    if (seen.insert(t).second) out.push_back(t);
  }
}

bool looks_binary(const std::string& s) { return s.find('\0') != std::string::npos; }

// glob: every regular, non-hidden, text file under the root.
std::vector<fs::path> discover(const fs::path& root) {
  std::vector<fs::path> out;
  for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
    const auto name = it->path().filename().string();
    if (!name.empty() && name[0] == '.') {
      if (it->is_directory()) it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file()) out.push_back(fs::relative(it->path(), root));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<std::string> extract_terms(const SceneGraph& g, const std::string& issue_text) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& n : g.nodes()) collect(n.content, out, seen);
  collect(issue_text, out, seen);
  return out;
}

std::vector<LocalizationHit> localize(const RepairTask& task, const SceneGraph& g, std::size_t top_n) {
  if (!fs::is_directory(task.codebase_root)) throw IoError("codebase root is not readable: " + task.codebase_root.string());
  const auto terms = extract_terms(g, task.issue_text);
  if (terms.empty()) return {};

  struct FileStats {
    std::string path;
    std::string body;
    std::vector<std::size_t> tf;
  };
  std::vector<FileStats> files;
  for (const auto& rel : discover(task.codebase_root)) {
    auto body = read_file(task.codebase_root / rel);
    if (looks_binary(body)) continue;
    FileStats f{rel.generic_string(), std::move(body), {}};
    for (const auto& t : terms) f.tf.push_back(count_occurrences(f.body, t));
    files.push_back(std::move(f));
  }
  const double total = static_cast<double>(files.size());
  std::vector<std::size_t> df(terms.size(), 0);
  for (const auto& f : files)
    for (std::size_t k = 0; k < terms.size(); ++k) df[k] += f.tf[k] > 0;

  struct Ranked {
    LocalizationHit hit;
    std::size_t matches;
  };
  std::vector<Ranked> ranked;
  for (const auto& f : files) {
    double score = 0.0;
    std::size_t matches = 0;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      if (!f.tf[k]) continue;
      score += static_cast<double>(f.tf[k]) * std::log(total / static_cast<double>(df[k]));
      matches += f.tf[k];
    }
    if (!matches) continue;
    LocalizationHit hit{f.path, score, {}};
    auto lines = split_lines(f.body);
    for (std::size_t ln = 0; ln < lines.size() && hit.lines.size() < 5; ++ln)
      for (std::size_t k = 0; k < terms.size(); ++k)
        if (f.tf[k] && lines[ln].find(terms[k]) != std::string::npos) {
          hit.lines.push_back(std::to_string(ln + 1) + ": " + lines[ln]);
          break;
        }
    ranked.push_back({std::move(hit), matches});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.hit.score != b.hit.score) return a.hit.score > b.hit.score;
    if (a.matches != b.matches) return a.matches > b.matches;
    return a.hit.path < b.hit.path;
  });
  std::vector<LocalizationHit> out;
  for (std::size_t i = 0; i < ranked.size() && i < top_n; ++i) out.push_back(std::move(ranked[i].hit));
  return out;
}

}  // namespace ssg::repair
