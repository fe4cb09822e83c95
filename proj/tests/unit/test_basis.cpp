#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "triwell/basis.hpp"

using namespace triwell;

TEST_CASE("basis dimensions match the combinatorial formula", "[basis]") {
    CHECK(SymmetrizedBasis(3, 4).dimension() == 20);        // C(6,3)
    CHECK(SymmetrizedBasis(1, 7).dimension() == 7);
    CHECK(SymmetrizedBasis(3, 127).dimension() == 349504);  // C(129,3)
    CHECK(SymmetrizedBasis(2, 63).dimension() == 2016);     // C(64,2)
    CHECK(SymmetrizedBasis(4, 12).dimension() == 1365);     // C(15,4)
}

TEST_CASE("capacity budget is enforced with a clear message", "[basis]") {
    try {
        SymmetrizedBasis b(3, 127, 100000);
        FAIL("expected capacity_error");
    } catch (const capacity_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("349504") != std::string::npos);
        CHECK(msg.find("100000") != std::string::npos);
    }
}

TEST_CASE("index <-> configuration is a bijection", "[basis]") {
    SymmetrizedBasis b(3, 9);
    // exhaustive: enumeration order equals rank order
    Config c = b.first_config();
    for (std::uint64_t i = 0; i < b.dimension(); ++i) {
        CHECK(b.index_of(c) == i);
        CHECK(b.config_at(i) == c);
        if (i + 1 < b.dimension()) REQUIRE(b.next_config(c));
    }
    CHECK_FALSE(b.next_config(c));
}

TEST_CASE("bijection holds on random configurations of a large basis", "[basis]") {
    SymmetrizedBasis b(3, 127);
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> orb(0, 126);
    for (int trial = 0; trial < 500; ++trial) {
        Config c = {orb(rng), orb(rng), orb(rng)};
        std::sort(c.begin(), c.end());
        const std::uint64_t i = b.index_of(c);
        REQUIRE(i < b.dimension());
        CHECK(b.config_at(i) == c);
    }
    // N=1: unit occupations in order
    SymmetrizedBasis one(1, 7);
    for (int k = 0; k < 7; ++k) CHECK(one.config_at(k) == Config{k});
}

TEST_CASE("occupation summary collapses repeated orbitals", "[basis]") {
    const auto occ = SymmetrizedBasis::occupations({2, 2, 5});
    REQUIRE(occ.size() == 2);
    CHECK(occ[0] == std::pair{2, 2});
    CHECK(occ[1] == std::pair{5, 1});
}
