#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "generators.hpp"
#include "mpmlab/io.hpp"

using namespace mpmlab;

TEST(Io, SeventeenSignificantDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Io, CsvTableRejectsRaggedRows) {
  CsvTable t({"a", "b"});
  t.add(1.5, "x");
  EXPECT_EQ(t.str(), "a,b\n1.5,x\n");
  EXPECT_THROW(t.add(1.0), std::invalid_argument);
}

TEST(Io, PathsRoundTrip) {
  oracle::Gen gen(1);
  std::vector<CadlagPath> paths;
  for (int k = 0; k < 5; ++k) paths.push_back(gen.rough_path(2, 4, 1.5));
  const auto file = (std::filesystem::temp_directory_path() / "mpmlab_paths_roundtrip.csv").string();
  write_paths_csv(file, paths);
  const auto back = read_paths_csv(file);
  ASSERT_EQ(back.size(), paths.size());
  for (std::size_t k = 0; k < paths.size(); ++k) EXPECT_EQ(back[k], paths[k]);
  std::remove(file.c_str());
}

TEST(Io, MeasureRoundTrip) {
  oracle::Gen gen(2);
  const auto q = gen.measure(2.0);
  const auto file = (std::filesystem::temp_directory_path() / "mpmlab_measure_roundtrip.csv").string();
  write_measure_csv(file, q);
  EXPECT_EQ(read_measure_csv(file), q);
  std::remove(file.c_str());
}

TEST(Io, MalformedPathsCsv) {
  std::istringstream bad("path,time,x0\n0,abc,1\n");
  EXPECT_THROW(parse_paths_csv(bad), std::invalid_argument);
  std::istringstream header("foo\n");
  EXPECT_THROW(parse_paths_csv(header), std::invalid_argument);
}
