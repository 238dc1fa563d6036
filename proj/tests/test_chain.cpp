#include "catch2/catch_amalgamated.hpp"

#include <cmath>

#include "hypfpp/chain.hpp"

using namespace hypfpp;

namespace {

std::vector<size_t> label_word(const GroupModel& model, const std::vector<std::string>& names) {
    std::vector<size_t> w;
    for (const auto& n : names) w.push_back(model.generator_index(n));
    return w;
}

} // namespace

TEST_CASE("single-state blocks recover the stationary distribution") {
    GroupModel f2 = make_free(2);
    AutomatonAnalysis an = analyze_automaton(f2, builtin_automaton(f2));
    TupleChain tc = k_tuple_chain(an, 1);
    REQUIRE(tc.tuples.size() == 5);
    REQUIRE(tc.unique_recurrent);
    REQUIRE(tc.recurrent_classes.size() == 1);
    REQUIRE(tc.recurrent_classes[0].size() == 4);
    double total = 0;
    for (double p : tc.pi) total += p;
    REQUIRE(total == Catch::Approx(1.0).epsilon(1e-12));
    for (const auto& word : {label_word(f2, {"a"}), label_word(f2, {"b^-1"})})
        REQUIRE(predicted_frequency(an, f2, word, &tc) == Catch::Approx(0.25).epsilon(1e-11));
}

TEST_CASE("pair blocks weight each admissible two-step path equally") {
    GroupModel f2 = make_free(2);
    AutomatonAnalysis an = analyze_automaton(f2, builtin_automaton(f2));
    TupleChain tc = k_tuple_chain(an, 2);
    // 4 pairs leave the start and 4 * 3 connect letter states.
    REQUIRE(tc.tuples.size() == 16);
    REQUIRE(tc.unique_recurrent);
    REQUIRE(tc.recurrent_classes[0].size() == 12);
    REQUIRE(predicted_frequency(an, f2, label_word(f2, {"a", "a"}), &tc) ==
            Catch::Approx(1.0 / 12.0).epsilon(1e-11));
    REQUIRE(predicted_frequency(an, f2, label_word(f2, {"a", "b"}), &tc) ==
            Catch::Approx(1.0 / 12.0).epsilon(1e-11));
    // A letter never follows its inverse in the language.
    REQUIRE(predicted_frequency(an, f2, label_word(f2, {"a", "a^-1"}), &tc) == 0.0);
}

TEST_CASE("block frequencies follow the closed form on the free group") {
    GroupModel f2 = make_free(2);
    AutomatonAnalysis an = analyze_automaton(f2, builtin_automaton(f2));
    TupleChain tc = k_tuple_chain(an, 3);
    REQUIRE(tc.tuples.size() == 48);
    REQUIRE(tc.recurrent_classes[0].size() == 36);
    // P(block of length k spells a^k) = (1/4) (1/3)^{k-1}.
    REQUIRE(predicted_frequency(an, f2, label_word(f2, {"a", "a", "a"}), &tc) ==
            Catch::Approx(0.25 / 9.0).epsilon(1e-11));
}

TEST_CASE("single-letter predictions sum to one") {
    for (const GroupModel& model : {make_free(2), make_free_mixed_f2()}) {
        AutomatonAnalysis an = analyze_automaton(model, builtin_automaton(model));
        TupleChain tc = k_tuple_chain(an, 1);
        double total = 0;
        for (size_t gi = 0; gi < model.generator_count(); ++gi)
            total += predicted_frequency(an, model, {gi}, &tc);
        REQUIRE(total == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("prebuilt chains must match the word length") {
    GroupModel f2 = make_free(2);
    AutomatonAnalysis an = analyze_automaton(f2, builtin_automaton(f2));
    TupleChain tc = k_tuple_chain(an, 2);
    REQUIRE_THROWS_AS(predicted_frequency(an, f2, label_word(f2, {"a"}), &tc), DomainError);
    REQUIRE_THROWS_AS(predicted_frequency(an, f2, {}, &tc), DomainError);
    REQUIRE_THROWS_AS(k_tuple_chain(an, 0), DomainError);
    // Without a prebuilt chain the function builds its own and agrees.
    REQUIRE(predicted_frequency(an, f2, label_word(f2, {"a", "b"})) ==
            Catch::Approx(predicted_frequency(an, f2, label_word(f2, {"a", "b"}), &tc))
                .epsilon(1e-13));
}

TEST_CASE("the line's two runs leave per-ray frequencies undefined") {
    GroupModel line = make_cyclic_multi(1);
    AutomatonAnalysis an = analyze_automaton(line, builtin_automaton(line));
    TupleChain tc = k_tuple_chain(an, 1);
    REQUIRE_FALSE(tc.unique_recurrent);
    REQUIRE(tc.recurrent_classes.size() == 2);
    REQUIRE_THROWS_AS(predicted_frequency(an, line, label_word(line, {"a"})), DomainError);
}

TEST_CASE("a periodic machine rejects misaligned block lengths") {
    // Two states exchanging a and b accept only (ab)^* prefixes: period 2.
    GroupModel f2 = make_free(2);
    GeodesicAutomaton alt(2, 0, {{0, 1, "a"}, {1, 0, "b"}});
    AutomatonAnalysis an = analyze_automaton(f2, alt);
    REQUIRE(an.comps.d == 2);
    REQUIRE_THROWS_AS(k_tuple_chain(an, 1), DomainError);
    // Even aligned blocks split into two phase classes.
    TupleChain tc = k_tuple_chain(an, 2);
    REQUIRE_FALSE(tc.unique_recurrent);
}

TEST_CASE("ray sampling is reproducible and follows the machine") {
    GroupModel fm = make_free_mixed_f2();
    AutomatonAnalysis an = analyze_automaton(fm, builtin_automaton(fm));
    SampledRay r1 = sample_ray(an, 400, 99);
    SampledRay r2 = sample_ray(an, 400, 99);
    REQUIRE(r1.labels == r2.labels);
    REQUIRE(r1.states == r2.states);
    SampledRay r3 = sample_ray(an, 400, 100);
    REQUIRE(r1.labels != r3.labels);
    REQUIRE(r1.states.size() == 401);
    for (size_t i = 0; i < r1.labels.size(); ++i) {
        int64_t to = an.aut.step(r1.states[i], fm.generator(r1.labels[i]).name);
        REQUIRE(to == int64_t(r1.states[i + 1]));
    }
}

TEST_CASE("sampled letter frequencies approach the prediction") {
    GroupModel f2 = make_free(2);
    AutomatonAnalysis an = analyze_automaton(f2, builtin_automaton(f2));
    SampledRay ray = sample_ray(an, 30000, 7);
    double emp = empirical_frequency(ray.labels, label_word(f2, {"a"}));
    REQUIRE(std::abs(emp - 0.25) < 0.02);
}

TEST_CASE("empirical counts use disjoint aligned blocks") {
    std::vector<size_t> ray{0, 1, 0, 1, 0, 1};
    REQUIRE(empirical_frequency(ray, {0, 1}) == 1.0);
    REQUIRE(empirical_frequency(ray, {1, 0}) == 0.0);
    REQUIRE(empirical_frequency(ray, {0}) == Catch::Approx(0.5));
    REQUIRE(empirical_frequency(ray, {0, 1, 0, 1, 0, 1, 0}) == 0.0);
    REQUIRE_THROWS_AS(empirical_frequency(ray, {}), DomainError);
}
