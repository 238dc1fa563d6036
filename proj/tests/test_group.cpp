#include "catch2/catch_amalgamated.hpp"

#include <algorithm>
#include <set>

#include "hypfpp/group.hpp"

using namespace hypfpp;

TEST_CASE("free group elements reduce and invert") {
    GroupModel f2 = make_free(2);
    Element a = parse_element(f2, "a");
    Element ab = parse_element(f2, "a b");
    REQUIRE(f2.element_to_string(f2.multiply(a, parse_element(f2, "a^-1"))) == "1");
    REQUIRE(f2.element_to_string(f2.multiply(ab, f2.inverse(ab))) == "1");
    REQUIRE(f2.element_to_string(f2.multiply(a, parse_element(f2, "a"))) == "a^2");
    REQUIRE(f2.element_to_string(f2.inverse(ab)) == "b^-1 a^-1");
    REQUIRE(parse_element(f2, "a b b^-1 a^-1").is_identity());
}

TEST_CASE("free group word lengths and spheres") {
    GroupModel f2 = make_free(2);
    REQUIRE(f2.word_length(parse_element(f2, "a^3 b^-2 a")) == 6);
    REQUIRE(f2.sphere(1).size() == 4);
    REQUIRE(f2.sphere(2).size() == 12);
    REQUIRE(f2.sphere(3).size() == 36);
    REQUIRE(f2.sphere(4).size() == 108);
    REQUIRE(f2.ball(f2.identity(), 3).size() == 53);
}

TEST_CASE("chord line distances") {
    GroupModel z2 = make_cyclic_multi(2);
    REQUIRE(z2.generator_count() == 4);
    for (int n = 1; n <= 9; ++n) {
        REQUIRE(z2.distance(z2.identity(), parse_element(z2, "a^" + std::to_string(2 * n))) == n);
        REQUIRE(z2.distance(z2.identity(), parse_element(z2, "a^" + std::to_string(2 * n - 1))) ==
                n);
    }
    // Exactly four elements at every positive distance.
    REQUIRE(z2.sphere(1).size() == 4);
    REQUIRE(z2.sphere(2).size() == 4);
    REQUIRE(z2.sphere(5).size() == 4);
    REQUIRE(z2.ball(z2.identity(), 6).size() == 25);
}

TEST_CASE("mixed free group distances") {
    GroupModel fm = make_free_mixed_f2();
    REQUIRE(fm.generator_count() == 6);
    REQUIRE(fm.distance(fm.identity(), parse_element(fm, "b^2")) == 1);
    REQUIRE(fm.distance(fm.identity(), parse_element(fm, "b^3")) == 2);
    REQUIRE(fm.distance(fm.identity(), parse_element(fm, "b^-5")) == 3);
    REQUIRE(fm.distance(fm.identity(), parse_element(fm, "a^3")) == 3);
    REQUIRE(fm.distance(fm.identity(), parse_element(fm, "a b^4 a^-2")) == 5);
    REQUIRE(fm.distance(parse_element(fm, "b"), parse_element(fm, "a")) == 2);
}

TEST_CASE("non-contiguous power sets cost by fewest terms") {
    // Steps {±1, ±3}: two steps reach {0, 2, 4, 6} on the positive side, so
    // d(0, 6) = 2 while d(0, 5) = 3 (3+1+1) and d(0, 2) = 2 (1+1 or 3-1).
    std::vector<Generator> gens;
    for (int64_t p : {int64_t(1), int64_t(3)}) {
        gens.push_back({0, p, generator_display_name(0, p)});
        gens.push_back({0, -p, generator_display_name(0, -p)});
    }
    GroupModel gap(ModelKind::free_mixed, 1, std::move(gens));
    REQUIRE_FALSE(gap.contiguous_powers());
    REQUIRE(gap.distance(gap.identity(), parse_element(gap, "a^6")) == 2);
    REQUIRE(gap.distance(gap.identity(), parse_element(gap, "a^5")) == 3);
    REQUIRE(gap.distance(gap.identity(), parse_element(gap, "a^2")) == 2);
}

TEST_CASE("canonical words expand syllables") {
    GroupModel z2 = make_cyclic_multi(2);
    Element a5 = parse_element(z2, "a^5");
    auto labels = z2.canonical_word(a5);
    REQUIRE(z2.word_to_string(labels) == "a^2 a^2 a");
    GroupModel fm = make_free_mixed_f2();
    REQUIRE(fm.word_to_string(fm.canonical_word(parse_element(fm, "a^2 b^-3"))) ==
            "a a b^-2 b^-1");
}

TEST_CASE("word geodesics step through adjacent vertices") {
    GroupModel fm = make_free_mixed_f2();
    Element x = parse_element(fm, "b^-2 a");
    Element y = parse_element(fm, "a b^5");
    auto path = fm.word_geodesic(x, y);
    REQUIRE(path.front() == x);
    REQUIRE(path.back() == y);
    REQUIRE(int64_t(path.size()) == fm.distance(x, y) + 1);
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        REQUIRE(fm.distance(path[i], path[i + 1]) == 1);
        REQUIRE(fm.distance(x, path[i]) == int64_t(i));
    }
}

TEST_CASE("element order is total and consistent") {
    GroupModel f2 = make_free(2);
    auto ball = f2.ball(f2.identity(), 3);
    std::sort(ball.begin(), ball.end(),
              [](const Element& a, const Element& b) { return a.compare(b) < 0; });
    for (size_t i = 0; i + 1 < ball.size(); ++i) {
        REQUIRE(ball[i].compare(ball[i + 1]) < 0);
        REQUIRE(ball[i + 1].compare(ball[i]) > 0);
    }
    REQUIRE(ball.front().compare(ball.front()) == 0);
}

TEST_CASE("element hashing separates a ball") {
    GroupModel fm = make_free_mixed_f2();
    auto ball = fm.ball(fm.identity(), 4);
    std::set<uint64_t> hashes;
    for (const auto& e : ball) hashes.insert(ElementHash{}(e));
    REQUIRE(hashes.size() == ball.size());
}

TEST_CASE("parsing rejects malformed words") {
    GroupModel f2 = make_free(2);
    REQUIRE_THROWS_AS(parse_element(f2, "c"), ConfigError);
    REQUIRE_THROWS_AS(parse_element(f2, "a^"), ConfigError);
    REQUIRE_THROWS_AS(parse_element(f2, "a^x"), ConfigError);
    REQUIRE_THROWS_AS(parse_word(f2, "a q"), ConfigError);
    REQUIRE(parse_word(f2, "a b a^-1").size() == 3);
    REQUIRE(parse_element(f2, "1").is_identity());
}

TEST_CASE("apply matches multiplication by a generator") {
    GroupModel fm = make_free_mixed_f2();
    uint64_t state = 12345;
    auto next = [&state]() {
        state += 0x9E3779B97F4A7C15ULL;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };
    Element cur = fm.identity();
    for (int step = 0; step < 200; ++step) {
        size_t gi = size_t(next() % fm.generator_count());
        Element via_apply = fm.apply(cur, gi);
        Element via_mul = fm.multiply(cur, parse_element(fm, fm.generator(gi).name));
        REQUIRE(via_apply == via_mul);
        REQUIRE(fm.distance(cur, via_apply) == 1);
        cur = via_apply;
    }
    REQUIRE(fm.multiply(cur, fm.inverse(cur)).is_identity());
}
