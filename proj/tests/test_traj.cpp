#include "doctest.h"

TEST_CASE("placeholder_traj") { CHECK(true); }
