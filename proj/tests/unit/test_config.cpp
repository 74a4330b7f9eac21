#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ccmvlc/config.hpp"
#include "ccmvlc/error.hpp"

using namespace ccmvlc;

TEST_CASE("key = value parsing") {
  std::istringstream in(
      "# comment\n"
      "  ibo = 10   # trailing comment\n"
      "\n"
      "ebn0=2, 4 ,6\n"
      "flag = on\n"
      "ibo = 12\n"
      "name = a b\n");
  const auto kv = KeyValueConfig::parse(in);
  CHECK(kv.get_double("ibo", 0) == 12.0);
  CHECK(kv.get_doubles("ebn0") == std::vector<double>{2, 4, 6});
  CHECK(kv.get_bool("flag", false));
  CHECK(kv.get_or("name", "") == "a b");
  CHECK(kv.get_int("missing", 7) == 7);
  CHECK_FALSE(kv.has("missing"));
}

TEST_CASE("malformed values") {
  std::istringstream no_eq("just words\n");
  CHECK_THROWS_AS(KeyValueConfig::parse(no_eq), ConfigError);
  std::istringstream no_key(" = 3\n");
  CHECK_THROWS_AS(KeyValueConfig::parse(no_key), ConfigError);
  KeyValueConfig kv;
  kv.set("x", "1.5.2");
  kv.set("n", "12abc");
  kv.set("b", "maybe");
  CHECK_THROWS_AS(kv.get_double("x", 0), ConfigError);
  CHECK_THROWS_AS(kv.get_int("n", 0), ConfigError);
  CHECK_THROWS_AS(kv.get_bool("b", false), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::load("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("number helpers") {
  CHECK(std::isinf(parse_double("inf", "x")));
  CHECK(parse_double(" -2.5e-3 ", "x") == -2.5e-3);
  CHECK(parse_double_list("1 2,3", "x").size() == 3);
  CHECK_THROWS_AS(parse_double_list(" , ", "x"), ConfigError);
  CHECK(trim("  a b \t") == "a b");
}
