#include "catch2/catch_amalgamated.hpp"

#include <cmath>

#include "hypfpp/passage.hpp"

using namespace hypfpp;

namespace {

const PassageOptions kDefaultOpts{};

double path_weight(const GroupModel& model, const Environment& env,
                   const std::vector<Element>& path) {
    double t = 0;
    for (size_t i = 0; i + 1 < path.size(); ++i) t += env.weight(model, path[i], path[i + 1]);
    return t;
}

} // namespace

TEST_CASE("on the tree the passage time is the unique path's weight") {
    GroupModel f2 = make_free(2);
    Environment env(WeightDistribution::uniform(0, 1), 5);
    Domain dom = Domain::ball(f2, f2.identity(), 6);
    for (const Element& g : f2.sphere(4)) {
        PassageResult r = restricted_passage_time(f2, env, dom, f2.identity(), g);
        std::vector<Element> geo = f2.word_geodesic(f2.identity(), g);
        REQUIRE(r.path == geo);
        REQUIRE(r.hops() == 4);
        REQUIRE(r.time == Catch::Approx(path_weight(f2, env, geo)).epsilon(1e-12));
    }
}

TEST_CASE("passage time is symmetric bit for bit") {
    GroupModel fm = make_free_mixed_f2();
    Environment env(WeightDistribution::bounded_away(1, 2), 17);
    Domain dom = Domain::ball(fm, fm.identity(), 5);
    std::vector<Element> ball = fm.ball(fm.identity(), 4);
    SplitMix64 rng(3);
    for (int trial = 0; trial < 25; ++trial) {
        const Element& x = ball[rng.next() % ball.size()];
        const Element& y = ball[rng.next() % ball.size()];
        PassageResult fwd = restricted_passage_time(fm, env, dom, x, y);
        PassageResult bwd = restricted_passage_time(fm, env, dom, y, x);
        REQUIRE(fwd.time == bwd.time);
        REQUIRE(fwd.hops() == bwd.hops());
    }
}

TEST_CASE("restricting the domain can only slow the passage") {
    GroupModel fm = make_free_mixed_f2();
    Element b2 = parse_element(fm, "b^2");
    Element one = fm.identity();
    Domain wide = Domain::ball(fm, one, 2);
    // Keep only the endpoints: the two-step detour through b is walled off.
    Domain pair = Domain::custom(
        [one, b2](const GroupModel&, const Element& v) { return v == one || v == b2; }, one, 2);
    bool saw_strict = false;
    for (uint64_t seed = 0; seed < 40; ++seed) {
        Environment env(WeightDistribution::uniform(0, 1), seed);
        double direct = restricted_passage_time(fm, env, pair, one, b2).time;
        double open = restricted_passage_time(fm, env, wide, one, b2).time;
        REQUIRE(open <= direct);
        if (open < direct) saw_strict = true;
        double chord = env.weight(fm, one, b2);
        double detour = env.weight(fm, one, parse_element(fm, "b")) +
                        env.weight(fm, parse_element(fm, "b"), b2);
        REQUIRE(direct == chord);
        // The ball also offers longer routes (1, b^-1, b, b^2 among them), so
        // the open time can undercut both named paths but never exceed them.
        REQUIRE(open <= std::min(chord, detour) + 1e-15);
    }
    REQUIRE(saw_strict);
}

TEST_CASE("cylinder width beyond one is irrelevant along the chorded axis") {
    // The geodesic toward b^infinity walks b^2 chords, so width 0 misses the
    // odd powers and their two-step detours. Width 1 restores them; anything
    // past that only adds dead-end tree branches and changes nothing.
    GroupModel fm = make_free_mixed_f2();
    Element target = parse_element(fm, "b^10");
    std::vector<Element> base = fm.word_geodesic(fm.identity(), target);
    REQUIRE(int64_t(base.size()) == fm.distance(fm.identity(), target) + 1);
    bool narrow_hurt = false;
    for (uint64_t seed = 0; seed < 12; ++seed) {
        Environment env(WeightDistribution::uniform(0, 1), seed);
        auto time_at = [&](int64_t width) {
            Domain dom = Domain::cylinder_around(fm, base, width);
            return restricted_passage_time(fm, env, dom, fm.identity(), target).time;
        };
        double t0 = time_at(0);
        double t1 = time_at(1);
        REQUIRE(t1 <= t0);
        if (t1 < t0) narrow_hurt = true;
        REQUIRE(time_at(2) == t1);
        REQUIRE(time_at(3) == t1);
    }
    REQUIRE(narrow_hurt);
}

TEST_CASE("endpoints outside the domain are rejected") {
    GroupModel f2 = make_free(2);
    Environment env(WeightDistribution::uniform(0, 1), 1);
    Domain dom = Domain::ball(f2, f2.identity(), 2);
    Element far = parse_element(f2, "a b a b");
    REQUIRE_THROWS_AS(restricted_passage_time(f2, env, dom, f2.identity(), far), DomainError);
    REQUIRE_THROWS_AS(restricted_passage_time(f2, env, dom, far, f2.identity()), DomainError);
}

TEST_CASE("a separating wall makes the target unreachable") {
    GroupModel f2 = make_free(2);
    Environment env(WeightDistribution::uniform(0, 1), 1);
    Element a = parse_element(f2, "a");
    Element a3 = parse_element(f2, "a^3");
    // Remove the cut vertex a: in the tree nothing else joins 1 to a^3.
    Domain holed = Domain::custom(
        [a](const GroupModel& m, const Element& v) {
            return m.word_length(v) <= 4 && !(v == a);
        },
        f2.identity(), 4);
    REQUIRE_THROWS_AS(restricted_passage_time(f2, env, holed, f2.identity(), a3),
                      UnreachableError);
}

TEST_CASE("the relaxation budget aborts runaway searches") {
    GroupModel f2 = make_free(2);
    Environment env(WeightDistribution::uniform(0, 1), 1);
    Domain dom = Domain::ball(f2, f2.identity(), 5);
    PassageOptions tight;
    tight.max_relaxations = 1;
    REQUIRE_THROWS_AS(restricted_passage_time(f2, env, dom, f2.identity(),
                                              parse_element(f2, "a^5"), tight),
                      ResourceError);
}

TEST_CASE("materialized graphs replay the lazy search exactly") {
    GroupModel fm = make_free_mixed_f2();
    Domain dom = Domain::ball(fm, fm.identity(), 4);
    DomainGraph graph = DomainGraph::build(fm, dom, {fm.identity()});
    REQUIRE(graph.size() == fm.ball(fm.identity(), 4).size());
    std::vector<Element> ball = fm.ball(fm.identity(), 4);
    SplitMix64 rng(9);
    for (int trial = 0; trial < 30; ++trial) {
        const Element& x = ball[rng.next() % ball.size()];
        const Element& y = ball[rng.next() % ball.size()];
        Environment env(WeightDistribution::uniform(0, 1), trial);
        PassageResult lazy = restricted_passage_time(fm, env, dom, x, y);
        PassageResult fast = graph.shortest(env, graph.index_of(x), graph.index_of(y));
        REQUIRE(fast.time == lazy.time);
        REQUIRE(fast.heap_time == lazy.heap_time);
        REQUIRE(fast.path == lazy.path);
        REQUIRE(fast.settled == lazy.settled);
    }
    REQUIRE(graph.contains(fm.identity()));
    REQUIRE_FALSE(graph.contains(parse_element(fm, "a^5")));
    REQUIRE_THROWS_AS(graph.index_of(parse_element(fm, "a^5")), DomainError);
}

TEST_CASE("identical endpoints cost nothing") {
    GroupModel f2 = make_free(2);
    Environment env(WeightDistribution::uniform(0, 1), 4);
    Domain dom = Domain::ball(f2, f2.identity(), 2);
    PassageResult r = restricted_passage_time(f2, env, dom, f2.identity(), f2.identity());
    REQUIRE(r.time == 0.0);
    REQUIRE(r.hops() == 0);
    REQUIRE(r.path.size() == 1);
}
