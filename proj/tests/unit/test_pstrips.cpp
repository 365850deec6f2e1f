#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "relpol/domains.hpp"

TEST_CASE("builtin domains parse") {
  for (const auto& name : relpol::builtin_domain_names())
    CHECK(relpol::builtin_domain(name).name == name);
}
