#pragma once

#include <iosfwd>
#include <string>
#include <type_traits>
#include <vector>

#include "mpmlab/measure.hpp"
#include "mpmlab/paths.hpp"

namespace mpmlab {

/// Shortest round-trip-safe text form with 17 significant digits.
std::string format_double(double x);

/// CSV table with a header row; cells are stored preformatted.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  template <typename... Cells>
  void add(const Cells&... cells) {
    std::vector<std::string> row;
    (row.push_back(cell(cells)), ...);
    add_row(std::move(row));
  }
  void add_row(std::vector<std::string> row);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string str() const;
  void write(const std::string& file) const;

  static std::string cell(double x) { return format_double(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(bool b) { return b ? "true" : "false"; }
  template <typename I>
    requires std::is_integral_v<I>
  static std::string cell(I i) {
    return std::to_string(i);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Long format: path,time,x0,..,x{d-1}; time 0 rows carry the initial values
/// and the horizon is recorded in a trailing "horizon" row per path.
void write_paths_csv(const std::string& file, const std::vector<CadlagPath>& paths);
std::vector<CadlagPath> read_paths_csv(const std::string& file);
std::vector<CadlagPath> parse_paths_csv(std::istream& in);

/// Rows kind,time,value with kind in {segment, atom, horizon}.
void write_measure_csv(const std::string& file, const LocallyFiniteMeasure& q);
LocallyFiniteMeasure read_measure_csv(const std::string& file);

}  // namespace mpmlab
