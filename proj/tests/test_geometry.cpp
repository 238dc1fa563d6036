#include "catch2/catch_amalgamated.hpp"

#include <algorithm>

#include "hypfpp/geometry.hpp"

using namespace hypfpp;

namespace {

std::vector<Element> axis_ray(const GroupModel& model, const std::string& letter, int64_t len) {
    Element step = parse_element(model, letter);
    std::vector<Element> ray{model.identity()};
    for (int64_t i = 0; i < len; ++i) ray.push_back(model.multiply(ray.back(), step));
    return ray;
}

} // namespace

TEST_CASE("the Gromov product counts the shared prefix on the tree") {
    GroupModel f2 = make_free(2);
    Element base = f2.identity();
    REQUIRE(gromov_product(f2, base, parse_element(f2, "a^2 b"), parse_element(f2, "a^2 b^-1")) ==
            2.0);
    REQUIRE(gromov_product(f2, base, parse_element(f2, "a"), parse_element(f2, "b")) == 0.0);
    REQUIRE(gromov_product(f2, base, parse_element(f2, "a^3"), parse_element(f2, "a^2")) == 2.0);
    // The product equals the distance from the base to the geodesic exactly.
    std::vector<Element> ball = f2.ball(base, 5);
    SplitMix64 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const Element& x = ball[rng.next() % ball.size()];
        const Element& y = ball[rng.next() % ball.size()];
        int64_t nearest = std::numeric_limits<int64_t>::max();
        for (const Element& v : f2.word_geodesic(x, y))
            nearest = std::min(nearest, f2.word_length(v));
        REQUIRE(gromov_product(f2, base, x, y) == double(nearest));
    }
}

TEST_CASE("trees are zero hyperbolic and the mixed model is not") {
    GroupModel f2 = make_free(2);
    DeltaEstimate tree = delta_estimate(f2, 4, 0, 0);
    REQUIRE(tree.exhaustive);
    REQUIRE(tree.delta == 0.0);
    REQUIRE(tree.triples > 0);
    REQUIRE(four_point_violations(f2, 5, 0.0, 20000, 3) == 0);

    GroupModel fm = make_free_mixed_f2();
    DeltaEstimate mixed = delta_estimate(fm, 3, 0, 0);
    REQUIRE(mixed.exhaustive);
    // Witness triple at the base w = 1: y = b^2, z = b^-1, u = b gives
    // (y.z) = 0 while both (y.u) and (u.z) equal 1/2.
    REQUIRE(mixed.delta >= 0.5);
    REQUIRE(mixed.delta <= 2.0);
    // Sampling the same ball can never beat the exhaustive maximum.
    DeltaEstimate sampled = delta_estimate(fm, 3, 20000, 17);
    REQUIRE_FALSE(sampled.exhaustive);
    REQUIRE(sampled.delta <= mixed.delta);
    REQUIRE(four_point_violations(fm, 3, mixed.delta, 20000, 5) == 0);
}

TEST_CASE("exhaustive hyperbolicity scans refuse oversized balls") {
    GroupModel f2 = make_free(2);
    REQUIRE_THROWS_AS(delta_estimate(f2, 8, 0, 0), ResourceError);
}

TEST_CASE("projection to the axis strips the overhanging branch") {
    GroupModel f2 = make_free(2);
    std::vector<Element> ray = axis_ray(f2, "a", 8);
    for (int64_t k = 0; k <= 5; ++k) {
        for (int64_t j = 1; j <= 3; ++j) {
            Element x = parse_element(f2, "a^" + std::to_string(k) + " b^" + std::to_string(j));
            ProjectionInfo p = project_to_ray(f2, ray, x);
            REQUIRE(p.dist == j);
            REQUIRE(p.jmin == k);
            REQUIRE(p.jmax == k);
        }
        ProjectionInfo on = project_to_ray(f2, ray, ray[size_t(k)]);
        REQUIRE(on.dist == 0);
        REQUIRE(on.jmin == k);
        REQUIRE(on.jmax == k);
    }
    REQUIRE_THROWS_AS(project_to_ray(f2, {}, f2.identity()), DomainError);
}

TEST_CASE("projections onto a chorded axis can tie across indices") {
    GroupModel fm = make_free_mixed_f2();
    Element target = parse_element(fm, "b^12");
    std::vector<Element> ray = fm.word_geodesic(fm.identity(), target);
    // b sits one step from both 1 and b^2; b^3 ties between b^2 and b^4.
    ProjectionInfo p1 = project_to_ray(fm, ray, parse_element(fm, "b"));
    REQUIRE(p1.dist == 1);
    REQUIRE(p1.jmin == 0);
    REQUIRE(p1.jmax == 1);
    ProjectionInfo p3 = project_to_ray(fm, ray, parse_element(fm, "b^3"));
    REQUIRE(p3.dist == 1);
    REQUIRE(p3.jmin == 1);
    REQUIRE(p3.jmax == 2);
}

TEST_CASE("hyperplanes collect exactly the branches rooted at their index") {
    GroupModel f2 = make_free(2);
    std::vector<Element> ray = axis_ray(f2, "a", ray_length_for_radius(4));
    std::vector<Element> wall = hyperplane(f2, ray, 2, 4);
    // a^2 itself, two branch roots, and six branch extensions within radius 4.
    REQUIRE(wall.size() == 9);
    auto has = [&](const std::string& w) {
        Element e = parse_element(f2, w);
        return std::find(wall.begin(), wall.end(), e) != wall.end();
    };
    REQUIRE(has("a^2"));
    REQUIRE(has("a^2 b"));
    REQUIRE(has("a^2 b^-1 a"));
    REQUIRE_FALSE(has("a^3"));
    REQUIRE_FALSE(has("a"));
    REQUIRE_THROWS_AS(hyperplane(f2, ray, -1, 4), DomainError);

    REQUIRE(half_space_side(f2, ray, 2, f2.identity(), 0) == Side::minus);
    REQUIRE(half_space_side(f2, ray, 2, parse_element(f2, "a^4"), 0) == Side::plus);
    REQUIRE(half_space_side(f2, ray, 2, parse_element(f2, "a^2 b"), 0) == Side::on);
}

TEST_CASE("removing a hyperplane separates the tree") {
    GroupModel f2 = make_free(2);
    std::vector<Element> ray = axis_ray(f2, "a", ray_length_for_radius(6));
    for (int64_t i : {1, 2, 3, 4}) {
        SeparationReport rep = separation_check(f2, ray, i, 6, 0, 0);
        REQUIRE(rep.separated);
        REQUIRE(rep.plus_count > 0);
        REQUIRE(rep.minus_count > 0);
        REQUIRE(rep.wall_count > 0);
    }
}

TEST_CASE("half spaces nest after one scale step on the tree") {
    GroupModel f2 = make_free(2);
    std::vector<Element> ray = axis_ray(f2, "a", ray_length_for_radius(5));
    REQUIRE(nesting_threshold(f2, ray, 2, 5, 5, 0) == 1);
}

TEST_CASE("avoiding the axis disconnects the tree's hyperplanes") {
    GroupModel f2 = make_free(2);
    std::vector<Element> ray = axis_ray(f2, "a", ray_length_for_radius(6));
    for (int64_t avoid : {1, 2}) {
        DivergenceReport rep = divergence_profile(f2, ray, 2, 2, avoid, 6);
        REQUIRE(rep.sources > 0);
        REQUIRE(rep.targets > 0);
        REQUIRE_FALSE(rep.connected);
        REQUIRE(rep.detour_length == -1);
    }
    // With no avoidance requirement the ray itself connects the walls.
    DivergenceReport free_rep = divergence_profile(f2, ray, 2, 2, 0, 6);
    REQUIRE(free_rep.connected);
    REQUIRE(free_rep.detour_length == 2);
}

TEST_CASE("the band region keeps both walls and the slab between") {
    GroupModel f2 = make_free(2);
    std::vector<Element> ray = axis_ray(f2, "a", ray_length_for_radius(5));
    Domain band = band_region(f2, ray, 1, 2, 0, 5);
    for (const char* inside : {"a", "a^2", "a^3", "a b", "a^3 b^-1"})
        REQUIRE(band.contains(f2, parse_element(f2, inside)));
    for (const char* outside : {"1", "b", "a^4", "a^4 b"})
        REQUIRE_FALSE(band.contains(f2, parse_element(f2, outside)));
    REQUIRE_THROWS_AS(band_region(f2, ray, 1, 0, 0, 5), ConfigError);
}
