#include <cmath>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "hsgraph/error.hpp"
#include "hsgraph/textio.hpp"

using namespace hsgraph;

TEST_CASE("numbers round-trip through their text form") {
  for (double x : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 6.02214076e23, 5e-324}) {
    CHECK(parse_number(format_number(x)) == x);
  }
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "NA");
  CHECK(std::isnan(parse_number("NA")));
  CHECK(std::isnan(parse_number("")));
  CHECK(format_number(3.0) == "3");
  CHECK_THROWS_AS(parse_number("abc"), DataError);
  CHECK_THROWS_AS(parse_number("1.5x"), DataError);
}

TEST_CASE("csv quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  const auto cells = split_csv("x,\"a,b\",\"q\"\"q\",");
  REQUIRE(cells.size() == 4);
  CHECK(cells[1] == "a,b");
  CHECK(cells[2] == "q\"q");
  CHECK(cells[3].empty());
  CHECK(split_csv(csv_field("Forum (Legal), maybe"))[0] == "Forum (Legal), maybe");
}

TEST_CASE("atomic write leaves no temp file") {
  const auto dir = std::filesystem::temp_directory_path() / "hsgraph_textio_test";
  std::filesystem::remove_all(dir);
  const auto path = dir / "sub" / "out.txt";
  write_file_atomic(path, "hello\n");
  CHECK(read_file(path) == "hello\n");
  write_file_atomic(path, "again\n");
  CHECK(read_file(path) == "again\n");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(read_file(path), DataError);
}
