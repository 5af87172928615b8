#include <catch2/catch_amalgamated.hpp>
#include "phaseid/phaseid.hpp"
TEST_CASE("placeholder test_cli") { CHECK(true); }
