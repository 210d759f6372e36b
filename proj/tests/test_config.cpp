// Copyright 2026 The OEL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sstream>

#include "doctest.h"
#include "oel/config.hpp"
#include "oel/errors.hpp"

using namespace oel;

TEST_SUITE("config") {
  TEST_CASE("parse keys, comments and whitespace") {
    std::istringstream in("# comment\n  krr.lambda = 0.01 \n\noel.p=5\nname = a = b\n");
    const Config cfg = Config::parse(in);
    CHECK(cfg.require("krr.lambda") == "0.01");
    CHECK(cfg.require("oel.p") == "5");
    CHECK(cfg.require("name") == "a = b");
    CHECK_FALSE(cfg.has("comment"));
  }

  TEST_CASE("malformed lines name the source and line") {
    std::istringstream in("a = 1\njunk\n");
    try {
      (void)Config::parse(in, "run.conf");
      FAIL("expected UsageError");
    } catch (const UsageError& e) {
      CHECK(std::string(e.what()).find("run.conf:2") != std::string::npos);
    }
    std::istringstream empty_key(" = 3\n");
    CHECK_THROWS_AS(Config::parse(empty_key), UsageError);
  }

  TEST_CASE("typed getters and recorded defaults") {
    Config cfg;
    cfg.set("x", "2.5");
    cfg.set("n", "7");
    cfg.set("flag", "yes");
    cfg.set("list", "1e-3, 0.5,2");
    CHECK(cfg.get_double("x", 0.0) == 2.5);
    CHECK(cfg.get_int("n", 0) == 7);
    CHECK(cfg.get_bool("flag", false));
    CHECK(cfg.get_double_list("list", {}) == std::vector<double>{1e-3, 0.5, 2.0});
    CHECK(cfg.get_int("missing", 42) == 42);
    CHECK(cfg.require("missing") == "42");
    CHECK(cfg.get_double("lambda", 0.1) == 0.1);
    CHECK(cfg.get_double("lambda", 9.0) == 0.1);
    CHECK(cfg.get_int_list("ps", {1, 2}) == std::vector<long long>{1, 2});
    CHECK(cfg.require("ps") == "1,2");
    CHECK_FALSE(cfg.get_bool("b", false));
    CHECK(cfg.require("b") == "false");
  }

  TEST_CASE("bad values are usage errors") {
    Config cfg;
    cfg.set("x", "2.5abc");
    cfg.set("n", "1.5");
    cfg.set("flag", "maybe");
    cfg.set("list", "1,two");
    CHECK_THROWS_AS(cfg.get_double("x", 0.0), UsageError);
    CHECK_THROWS_AS(cfg.get_int("n", 0), UsageError);
    CHECK_THROWS_AS(cfg.get_bool("flag", false), UsageError);
    CHECK_THROWS_AS(cfg.get_double_list("list", {}), UsageError);
    CHECK_THROWS_AS(cfg.require("absent"), UsageError);
    CHECK_THROWS_AS(Config::load("/nonexistent/oel.conf"), UsageError);
  }

  TEST_CASE("written snapshot parses back to the same entries") {
    Config cfg;
    cfg.set("b", "two words");
    (void)cfg.get_double("a", 1e-7);
    std::ostringstream out;
    cfg.write(out);
    CHECK(out.str() == "a = 1e-07\nb = two words\n");
    std::istringstream in(out.str());
    const Config back = Config::parse(in);
    CHECK(back.entries() == cfg.entries());
    Config again = back;
    CHECK(again.get_double("a", 0.0) == 1e-7);
  }
}
