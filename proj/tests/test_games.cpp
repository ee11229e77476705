#include "doctest.h"

TEST_CASE("placeholder_games") { CHECK(true); }
