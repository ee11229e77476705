#include "doctest.h"

TEST_CASE("placeholder_meanfield") { CHECK(true); }
