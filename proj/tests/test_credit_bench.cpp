#include "doctest.h"

TEST_CASE("placeholder_credit_bench") { CHECK(true); }
