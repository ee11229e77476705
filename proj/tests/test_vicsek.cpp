#include "doctest.h"

TEST_CASE("placeholder_vicsek") { CHECK(true); }
