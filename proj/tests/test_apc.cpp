#include "doctest.h"

TEST_CASE("placeholder_apc") { CHECK(true); }
