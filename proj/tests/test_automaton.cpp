#include "catch2/catch_amalgamated.hpp"

#include <set>
#include <sstream>

#include "hypfpp/automaton.hpp"

using namespace hypfpp;

namespace {

std::set<uint32_t> targets(const GeodesicAutomaton& aut, uint32_t state) {
    std::set<uint32_t> out;
    for (const auto& [label, to] : aut.out_transitions(state)) out.insert(to);
    return out;
}

} // namespace

TEST_CASE("builtin free group automaton is the last-letter machine") {
    GroupModel f2 = make_free(2);
    GeodesicAutomaton aut = builtin_automaton(f2);
    REQUIRE(aut.state_count() == 5);
    REQUIRE(aut.initial_state() == 0);
    // States: 1/2 track the a run in either sign, 3/4 the b run. A reduced
    // word never follows a letter with its inverse.
    REQUIRE(targets(aut, 0) == std::set<uint32_t>{1, 2, 3, 4});
    REQUIRE(targets(aut, 1) == std::set<uint32_t>{1, 3, 4});
    REQUIRE(targets(aut, 2) == std::set<uint32_t>{2, 3, 4});
    REQUIRE(targets(aut, 3) == std::set<uint32_t>{1, 2, 3});
    REQUIRE(targets(aut, 4) == std::set<uint32_t>{1, 2, 4});
    REQUIRE(aut.label_targets_unique());
}

TEST_CASE("builtin mixed automaton closes syllables through remainder states") {
    GroupModel fm = make_free_mixed_f2();
    GeodesicAutomaton aut = builtin_automaton(fm);
    REQUIRE(aut.state_count() == 7);
    size_t row_sizes[7];
    for (uint32_t s = 0; s < 7; ++s) row_sizes[s] = aut.out_transitions(s).size();
    REQUIRE(row_sizes[0] == 6); // initial: any of the six generators
    REQUIRE(row_sizes[1] == 5); // a run: continue, or any b move
    REQUIRE(row_sizes[2] == 5);
    REQUIRE(row_sizes[3] == 4); // b^2 run: continue, close with b, or a moves
    REQUIRE(row_sizes[4] == 4);
    REQUIRE(row_sizes[5] == 2); // closed b syllable: only a moves
    REQUIRE(row_sizes[6] == 2);
    REQUIRE(aut.label_targets_unique());
    aut.check_labels(fm);
}

TEST_CASE("builtin automata accept exactly the geodesic ball") {
    struct Case {
        GroupModel model;
        int radius;
    };
    Case cases[] = {{make_free(2), 5}, {make_free_mixed_f2(), 6}, {make_cyclic_multi(1), 6},
                    {make_cyclic_multi(2), 7}};
    for (auto& c : cases) {
        GeodesicAutomaton aut = builtin_automaton(c.model);
        LanguageReport rep = verify_geodesic_language(aut, c.model, c.radius);
        INFO(c.model.name() << " radius " << c.radius);
        REQUIRE(rep.ok());
        REQUIRE(rep.words_checked == rep.ball_size);
    }
}

TEST_CASE("automatic models refuse the builtin and cite the supplied file") {
    REQUIRE_THROWS_AS(builtin_automaton(make_automatic(2, power_generators(2, {1, 1}), "x.aut")),
                      DomainError);
}

TEST_CASE("automaton files round-trip through save and parse") {
    GroupModel fm = make_free_mixed_f2();
    GeodesicAutomaton aut = builtin_automaton(fm);
    std::ostringstream saved;
    save_automaton(aut, saved);
    std::istringstream in(saved.str());
    GeodesicAutomaton reparsed = parse_automaton(in, "<memory>");
    REQUIRE(reparsed.state_count() == aut.state_count());
    REQUIRE(reparsed.initial_state() == aut.initial_state());
    REQUIRE(reparsed.transitions().size() == aut.transitions().size());
    LanguageReport rep = verify_geodesic_language(reparsed, fm, 5);
    REQUIRE(rep.ok());
}

TEST_CASE("automaton format violations are rejected with positions") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_automaton(in, "<test>");
    };
    REQUIRE_THROWS_AS(parse("1 a 1\n"), FormatError);                      // no header
    REQUIRE_THROWS_AS(parse("states 2 initial 3\n"), FormatError);         // bad initial
    REQUIRE_THROWS_AS(parse("states 2 initial 1\n1 a 5\n"), FormatError);  // range
    REQUIRE_THROWS_AS(parse("states 2 initial 1\n1 a 2\n1 a 1\n"),
                      FormatError);                                        // nondeterministic
    REQUIRE_THROWS_AS(parse("states 3 initial 1\n1 a 1\n"), FormatError);  // unreachable 2,3
    REQUIRE_THROWS_AS(parse("states 1 initial 1\nnot a line\n"), FormatError);
    // Comments and blank lines are fine.
    GeodesicAutomaton ok = parse("# two-state loop\nstates 2 initial 1\n\n1 a 2\n2 b 1 # back\n");
    REQUIRE(ok.state_count() == 2);
    REQUIRE(ok.step(0, "a") == 1);
    REQUIRE(ok.step(1, "a") == -1);
}

TEST_CASE("label checks catch generators missing from the model") {
    GroupModel f2 = make_free(2);
    GeodesicAutomaton aut(1, 0, {{0, 0, "c"}});
    REQUIRE_THROWS_AS(aut.check_labels(f2), FormatError);
}

TEST_CASE("language verification reports non-geodesic words") {
    // A machine that accepts a a^-1 is not a geodesic automaton.
    GroupModel f2 = make_free(2);
    std::vector<AutomatonTransition> ts;
    for (const char* l : {"a", "a^-1", "b", "b^-1"}) ts.push_back({0, 0, l});
    GeodesicAutomaton loop(1, 0, std::move(ts));
    LanguageReport rep = verify_geodesic_language(loop, f2, 3);
    REQUIRE_FALSE(rep.ok());
    REQUIRE_FALSE(rep.violations.empty());
}
