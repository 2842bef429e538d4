// Small shared helpers: file IO, hashing, string trimming.
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ssg {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& p);
/// Writes via a sibling temp file + rename.
void write_file(const std::filesystem::path& p, std::string_view data);

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 14695981039346656037ull);
std::string hex64(std::uint64_t v);

std::string_view trim(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
std::size_t count_occurrences(std::string_view hay, std::string_view needle);

/// Content digest of a directory tree: relative paths and file bytes in
/// sorted path order.
std::string tree_digest(const std::filesystem::path& root);

/// Fresh directory under the system temp dir; removed by the destructor.
class ScratchDir {
 public:
  explicit ScratchDir(std::string_view prefix = "ssg");
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  ScratchDir(ScratchDir&& o) noexcept;
  ScratchDir& operator=(ScratchDir&&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Recursive copy of `from` into (existing or new) directory `to`.
void copy_tree(const std::filesystem::path& from, const std::filesystem::path& to);

}  // namespace ssg
