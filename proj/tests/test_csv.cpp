#include "weakfarima/csv.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace weakfarima;

TEST_CASE("parse handles BOM, CRLF, quotes and blank lines") {
  const auto t = csv::parse("\xEF\xBB\xBF\"date\",price\r\n2020-01-01,\"1.5\"\r\n\r\n2020-01-02,2\n");
  CHECK(t.header == std::vector<std::string>{"date", "price"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "1.5");
  CHECK(t.column_index("price") == 1);
  CHECK_THROWS_AS(t.column_index("close"), std::invalid_argument);
}

TEST_CASE("to_number") {
  CHECK(csv::to_number("2.5") == 2.5);
  CHECK(csv::to_number("-1e-3") == -1e-3);
  CHECK(std::isnan(csv::to_number("")));
  CHECK(std::isnan(csv::to_number("NA")));
  CHECK(std::isnan(csv::to_number("abc")));
  CHECK(std::isnan(csv::to_number("1.2x")));
}

TEST_CASE("num round trips exactly") {
  for (double v : {0.1, -0.7, 1.0 / 3.0, 1e-300, 123456789.125, std::numeric_limits<double>::max()}) {
    CHECK(csv::to_number(csv::num(v)) == v);
  }
  CHECK(csv::num(0.5) == "0.5");
}

TEST_CASE("write then read") {
  csv::Table t;
  t.header = {"a", "b"};
  t.rows = {{"1", "x"}, {"2", "y"}};
  const auto path = std::filesystem::temp_directory_path() / "weakfarima-csv-test.csv";
  csv::write(path, t);
  const auto back = csv::read(path);
  std::filesystem::remove(path);
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(csv::format(t) == "a,b\n1,x\n2,y\n");
  CHECK_THROWS(csv::read("/nonexistent/weakfarima.csv"));
}
