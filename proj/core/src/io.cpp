#include "mpmlab/io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mpmlab {

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw std::invalid_argument("CsvTable: empty header");
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw std::invalid_argument("CsvTable: row width does not match header");
  rows_.push_back(std::move(row));
}

namespace {

void join(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
}

std::ofstream open_out(const std::string& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file + " for writing");
  return out;
}

std::ifstream open_in(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file);
  return in;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string c;
  while (std::getline(ss, c, ',')) cells.push_back(c);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

}  // namespace

std::string CsvTable::str() const {
  std::string out;
  join(out, header_);
  for (const auto& r : rows_) join(out, r);
  return out;
}

void CsvTable::write(const std::string& file) const {
  auto out = open_out(file);
  out << str();
}

void write_paths_csv(const std::string& file, const std::vector<CadlagPath>& paths) {
  const std::size_t d = paths.empty() ? 1 : paths.front().dim();
  std::vector<std::string> header{"path", "time"};
  for (std::size_t i = 0; i < d; ++i) header.push_back("x" + std::to_string(i));
  CsvTable t(header);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& path = paths[p];
    if (path.dim() != d) throw std::invalid_argument("write_paths_csv: mixed dimensions");
    for (std::size_t k = 0; k <= path.num_events(); ++k) {
      std::vector<std::string> row{std::to_string(p), format_double(k == 0 ? 0.0 : path.event_time(k - 1))};
      for (double v : path.value(k)) row.push_back(format_double(v));
      t.add_row(std::move(row));
    }
    std::vector<std::string> row{std::to_string(p), "horizon"};
    row.push_back(format_double(path.horizon()));
    row.resize(header.size());
    t.add_row(std::move(row));
  }
  t.write(file);
}

std::vector<CadlagPath> parse_paths_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("paths csv: missing header");
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "path" || header[1] != "time")
    throw std::invalid_argument("paths csv: header must start with path,time");
  const std::size_t d = header.size() - 2;
  struct Acc {
    std::vector<double> times, values;
    double horizon = -1.0;
  };
  std::map<long, Acc> acc;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw std::invalid_argument("paths csv: wrong column count on line " + std::to_string(lineno));
    Acc& a = acc[std::stol(cells[0])];
    if (cells[1] == "horizon") {
      a.horizon = to_double(cells[2]);
      continue;
    }
    const double t = to_double(cells[1]);
    if (!a.values.empty() || t != 0.0) a.times.push_back(t);
    for (std::size_t i = 0; i < d; ++i) a.values.push_back(to_double(cells[2 + i]));
  }
  std::vector<CadlagPath> out;
  for (auto& [id, a] : acc) {
    if (a.values.empty()) throw std::invalid_argument("paths csv: path " + std::to_string(id) + " has no values");
    if (a.times.size() + 1 != a.values.size() / d)
      throw std::invalid_argument("paths csv: path " + std::to_string(id) + " must start at time 0");
    if (a.horizon < 0.0) a.horizon = a.times.empty() ? 0.0 : a.times.back();
    out.emplace_back(d, std::move(a.times), std::move(a.values), a.horizon);
  }
  return out;
}

std::vector<CadlagPath> read_paths_csv(const std::string& file) {
  auto in = open_in(file);
  return parse_paths_csv(in);
}

void write_measure_csv(const std::string& file, const LocallyFiniteMeasure& q) {
  CsvTable t({"kind", "time", "value"});
  for (const auto& s : q.segments()) t.add("segment", s.start, s.rate);
  for (const auto& a : q.atoms()) t.add("atom", a.time, a.mass);
  t.add("horizon", q.horizon(), 0.0);
  t.write(file);
}

LocallyFiniteMeasure read_measure_csv(const std::string& file) {
  auto in = open_in(file);
  std::string line;
  if (!std::getline(in, line) || line != "kind,time,value")
    throw std::invalid_argument("measure csv: header must be kind,time,value");
  std::vector<RateSegment> segments;
  std::vector<Atom> atoms;
  double horizon = -1.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 3) throw std::invalid_argument("measure csv: expected 3 columns");
    if (c[0] == "segment") {
      segments.push_back({to_double(c[1]), to_double(c[2])});
    } else if (c[0] == "atom") {
      atoms.push_back({to_double(c[1]), to_double(c[2])});
    } else if (c[0] == "horizon") {
      horizon = to_double(c[1]);
    } else {
      throw std::invalid_argument("measure csv: unknown kind '" + c[0] + "'");
    }
  }
  if (horizon < 0.0) throw std::invalid_argument("measure csv: missing horizon row");
  return {std::move(segments), std::move(atoms), horizon};
}

}  // namespace mpmlab
