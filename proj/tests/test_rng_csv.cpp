#include "doctest.h"

TEST_CASE("placeholder_rng_csv") { CHECK(true); }
