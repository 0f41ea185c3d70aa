#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "outage/csv.hpp"
#include "outage/error.hpp"
#include "outage/rng.hpp"
#include "outage/time.hpp"

using namespace outage;

TEST_CASE("utc parse and format") {
  const auto t = parse_utc("2020-06-06T14:15:00Z");
  CHECK(format_utc(t) == "2020-06-06T14:15:00Z");
  CHECK(is_quarter_aligned(t));
  CHECK_FALSE(is_hour_aligned(t));
  CHECK(format_utc(floor_hour(t)) == "2020-06-06T14:00:00Z");
  CHECK_THROWS_AS(parse_utc("2020-06-06T14:15:00"), UserError);
  CHECK_THROWS_AS(parse_utc("2020-13-01T00:00:00Z"), UserError);
  CHECK_THROWS_AS(parse_utc("2021-02-29T00:00:00Z"), UserError);
  CHECK_THROWS_AS(parse_utc(""), UserError);
}

TEST_CASE("local month follows the fixed offset") {
  // 03:00 UTC on July 1 is still June 30 at UTC-5.
  CHECK(local_month(parse_utc("2020-07-01T03:00:00Z"), Hours{-5}) == 6);
  CHECK(local_month(parse_utc("2020-07-01T05:00:00Z"), Hours{-5}) == 7);
  CHECK(local_month(parse_utc("2021-01-01T02:00:00Z"), Hours{-5}) == 12);
  CHECK(local_day(parse_utc("2020-01-02T04:59:59Z"), Hours{-5}) ==
        local_day(parse_utc("2020-01-01T05:00:00Z"), Hours{-5}));
}

TEST_CASE("csv reader handles quotes, CRLF and blank lines") {
  std::istringstream in("a,b,c\r\n\"x,1\",\"say \"\"hi\"\"\",3\r\n\r\n4,5,6\n");
  const auto t = csv::read_stream(in, "mem");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].fields[0] == "x,1");
  CHECK(t.rows[0].fields[1] == "say \"hi\"");
  CHECK(t.rows[1].line == 4);
  CHECK(t.column("c") == 2);
  CHECK_THROWS(t.column("d"));
}

TEST_CASE("csv numeric fields report row and column") {
  std::istringstream in("id,v\nA,abc\n");
  const auto t = csv::read_stream(in, "mem");
  try {
    csv::parse_double(t, t.rows[0], 1);
    FAIL("accepted non-number");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
    CHECK(e.field() == "v");
  }
}

TEST_CASE("format_double round-trips") {
  Rng rng = derive_rng(1, 1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double v = u(rng) / 3.0;
    CHECK(std::stod(csv::format_double(v)) == v);
  }
  CHECK(csv::format_double(0.1 + 0.2) == "0.30000000000000004");
  CHECK(csv::escape("a,b") == "\"a,b\"");
  CHECK(csv::escape("plain") == "plain");
}
