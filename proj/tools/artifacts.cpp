#include "artifacts.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace cgmlab {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw std::invalid_argument("csv table needs at least one column");
}

CsvTable& CsvTable::row(std::span<const double> values) {
  if (values.size() != header_.size()) throw std::invalid_argument("csv row has the wrong number of cells");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) body_ += ',';
    body_ += format_number(values[i]);
  }
  body_ += '\n';
  return *this;
}

CsvTable& CsvTable::row(const std::string& label, std::span<const double> values) {
  if (values.size() + 1 != header_.size()) throw std::invalid_argument("csv row has the wrong number of cells");
  body_ += label;
  for (double v : values) {
    body_ += ',';
    body_ += format_number(v);
  }
  body_ += '\n';
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out += ',';
    out += header_[i];
  }
  return out + '\n' + body_;
}

void ArtifactSet::add(const std::string& name, std::string content) { files_[name] = std::move(content); }

void ArtifactSet::commit(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : files_) write_atomic(dir / name, content);
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace cgmlab
