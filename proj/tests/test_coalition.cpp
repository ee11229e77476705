#include "doctest.h"

TEST_CASE("placeholder_coalition") { CHECK(true); }
