#include "doctest.h"

TEST_CASE("placeholder_marl") { CHECK(true); }
