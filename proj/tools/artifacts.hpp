#pragma once

// Output files are built in memory and written only after a command succeeds,
// each through a temporary file and a rename.

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cgmlab {

/// Shortest form that carries 17 significant digits, independent of the locale.
std::string format_number(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(std::span<const double> values);
  CsvTable& row(std::initializer_list<double> values) { return row(std::span<const double>(values.begin(), values.size())); }
  /// Leading text cell followed by numbers.
  CsvTable& row(const std::string& label, std::span<const double> values);

  std::size_t columns() const noexcept { return header_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::string body_;
};

class ArtifactSet {
 public:
  void add(const std::string& name, std::string content);
  const std::map<std::string, std::string>& files() const noexcept { return files_; }

  /// Creates `dir` if needed and writes every file atomically.
  void commit(const std::filesystem::path& dir) const;

 private:
  std::map<std::string, std::string> files_;
};

void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace cgmlab
