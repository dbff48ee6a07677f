#include <doctest.h>

#include <cmath>
#include <vector>

#include "medgraph/entropy.hpp"
#include "medgraph/util.hpp"

using namespace medgraph;
using namespace medgraph::entropy;

TEST_CASE("component entropy analytic values") {
    CHECK(component_entropy({1, 2, 1}) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(component_entropy({2, 2, 2}) == doctest::Approx(std::log2(3.0)).epsilon(1e-15));
    CHECK(component_entropy({1, 1}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(component_entropy({0, 0, 0}) == 0.0);
    CHECK(component_entropy({}) == 0.0);
    CHECK_THROWS(component_entropy({1.0, -0.5}));
}

TEST_CASE("component entropy is capped by log2 of the node count") {
    DetRng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 2 + rng.next_below(10);
        std::vector<double> deg(n);
        for (double& d : deg) d = rng.next_unit() * 4.0 + 0.01;
        CHECK(component_entropy(deg) <= std::log2(static_cast<double>(n)) + kEps);
    }
}

TEST_CASE("structural entropy weights components by volume") {
    // path of 3 (Vol 4, H 1.5) plus one edge (Vol 2, H 1): (4*1.5 + 2*1)/6.
    double h = structural_entropy({{1, 2, 1}, {1, 1}});
    CHECK(h == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(structural_entropy({}) == 0.0);
    CHECK(structural_entropy({{0, 0}, {0}}) == 0.0);
    CHECK(structural_entropy({{1, 2, 1}}) == doctest::Approx(1.5));
}

TEST_CASE("structural entropy is invariant under weight scaling") {
    DetRng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::vector<double>> comps;
        std::size_t c = 1 + rng.next_below(4);
        for (std::size_t i = 0; i < c; ++i) {
            std::vector<double> deg(1 + rng.next_below(6));
            for (double& d : deg) d = rng.next_unit() * 3.0 + 0.001;
            comps.push_back(deg);
        }
        double base = structural_entropy(comps);
        for (double scale : {1e-3, 1e3}) {
            auto scaled = comps;
            for (auto& comp : scaled)
                for (double& d : comp) d *= scale;
            CHECK(structural_entropy(scaled) == doctest::Approx(base).epsilon(1e-9));
        }
    }
}

TEST_CASE("connected remainder floor values") {
    CHECK(connected_floor(2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(connected_floor(3) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(connected_floor(4) == doctest::Approx(1.7924812503605781).epsilon(1e-15));
    CHECK(connected_floor(5) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(connected_floor(9) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK_THROWS(connected_floor(1));
    for (std::size_t n = 2; n < 12; ++n) CHECK(connected_floor(n) < connected_floor(n + 1));
}

TEST_CASE("minimum connected remainder entropy") {
    CHECK(contradiction_lower_bound(2, {2, 2}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(contradiction_lower_bound(3, {2, 3, 3}) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK_THROWS(contradiction_lower_bound(1, {2}));
    CHECK_THROWS(contradiction_lower_bound(2, {2}));          // size mismatch
    CHECK_THROWS(contradiction_lower_bound(2, {0.5, 2.0}));   // degree below 1
}

TEST_CASE("maximum split remainder entropy for a degree-2 removal") {
    auto none = denial_upper_bound({1, 1}, 4.0);
    REQUIRE(none.has_value());
    CHECK(*none == doctest::Approx(0.0));

    auto two = denial_upper_bound({2, 2}, 8.0);
    REQUIRE(two.has_value());
    CHECK(*two == doctest::Approx(0.5).epsilon(1e-15));

    auto three = denial_upper_bound({1, 1, 1}, 8.0);
    REQUIRE(three.has_value());
    CHECK(*three == doctest::Approx(0.5).epsilon(1e-15));

    CHECK_THROWS(denial_upper_bound({2}, 6.0));
}

TEST_CASE("maximum split remainder entropy for larger removals") {
    // Survivors (1,2,3,3), removed degree 3: drop the degree-1 survivor,
    // decrement the two largest of the rest, masses (2,2,2) over volume 6.
    auto iso = isolation_upper_bound({1, 2, 3, 3}, 3);
    REQUIRE(iso.has_value());
    CHECK(*iso == doctest::Approx(std::log2(3.0)).epsilon(1e-12));

    CHECK_FALSE(isolation_upper_bound({2, 2, 2}, 1).has_value());  // no leaf survivor
    CHECK_FALSE(isolation_upper_bound({1, 2}, 0).has_value());
    CHECK_FALSE(isolation_upper_bound({1, 1}, 4).has_value());  // k-1 exceeds the rest
}

TEST_CASE("split/connected separation holds through ten survivors") {
    SeparationReport rep = verify_separation(10);
    CHECK(rep.violations == 0);
    CHECK(rep.floor_monotone);
    for (const SeparationRow& row : rep.rows) {
        CHECK(row.pass);
        CHECK(row.margin > 0.0);
        CHECK(row.lower > row.upper);
    }
}

TEST_CASE("separation row counts per survivor total") {
    CHECK(verify_separation(2).rows.size() == 1);
    CHECK(verify_separation(5).rows.size() == 7);    // 1 + 1 + 2 + 3
    CHECK(verify_separation(7).rows.size() == 19);   // ... + 5 + 7
}
