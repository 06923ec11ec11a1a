#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace nagcert {

/// 17 significant digits, '.' decimal separator; "nan" / "inf" / "-inf" for non-finite values.
std::string format_double(double x);

/// RFC-4180 quoting: fields containing ',', '"', CR or LF are quoted and quotes doubled.
std::string csv_escape(const std::string& field);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(const std::vector<std::string>& fields);
  void add_row(const std::vector<double>& values);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  /// Records are CRLF-terminated.
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes to a temporary sibling and renames it over `path`, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace nagcert
