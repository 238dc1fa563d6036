#include "catch2/catch_amalgamated.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hypfpp/automaton.hpp"
#include "hypfpp/config.hpp"

using namespace hypfpp;

namespace {

IniFile parse_text(const std::string& text) {
    std::istringstream in(text);
    return IniFile::parse(in, "<test>");
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content)
        : path("/tmp/hypfpp_test_" + name) {
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("ini parsing accepts sections, comments, and typed values") {
    IniFile ini = parse_text(
        "# leading comment\n"
        "[experiment]\n"
        "kind = velocity\n"
        "seed = 12\n"
        "  n_values = 10, 20, 30  \n"
        "epsilon = 0.25\n"
        "; another comment style\n"
        "bridge_check = yes\n"
        "[empty]\n");
    REQUIRE(ini.get("experiment", "kind") == "velocity");
    REQUIRE(ini.get_int("experiment", "seed") == 12);
    REQUIRE(ini.get_u64("experiment", "seed") == 12);
    REQUIRE(ini.get_double("experiment", "epsilon") == 0.25);
    REQUIRE(ini.get_int_list("experiment", "n_values") == std::vector<int64_t>{10, 20, 30});
    REQUIRE(ini.get_bool_or("experiment", "bridge_check", false));
    REQUIRE(ini.get_bool_or("experiment", "missing", true));
    REQUIRE(ini.get_or("experiment", "missing", "fallback") == "fallback");
    REQUIRE(ini.get_int_or("experiment", "missing", 7) == 7);
    REQUIRE(ini.has("empty"));
    REQUIRE_FALSE(ini.has("absent"));
    REQUIRE(ini.origin() == "<test>");
}

TEST_CASE("ini parsing rejects malformed input with the offending line") {
    REQUIRE_THROWS_AS(parse_text("key = 1\n"), ConfigError); // outside any section
    REQUIRE_THROWS_AS(parse_text("[s]\nno equals sign\n"), ConfigError);
    REQUIRE_THROWS_AS(parse_text("[s\nk = 1\n"), ConfigError);
    REQUIRE_THROWS_AS(parse_text("[]\n"), ConfigError);
    REQUIRE_THROWS_AS(parse_text("[s]\n= 1\n"), ConfigError);
    REQUIRE_THROWS_AS(parse_text("[s]\nk = 1\nk = 2\n"), ConfigError);
    try {
        parse_text("[s]\nk = 1\nbroken line\n");
        FAIL("expected a parse error");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("<test>:3") != std::string::npos);
    }
}

TEST_CASE("typed getters reject values of the wrong shape") {
    IniFile ini = parse_text("[s]\nk = abc\nf = 1.5x\nn = -3\nlist = ,\nflag = maybe\n");
    REQUIRE_THROWS_AS(ini.get_int("s", "k"), ConfigError);
    REQUIRE_THROWS_AS(ini.get_double("s", "f"), ConfigError);
    REQUIRE_THROWS_AS(ini.get_u64("s", "n"), ConfigError);
    REQUIRE_THROWS_AS(ini.get_int_list("s", "list"), ConfigError);
    REQUIRE_THROWS_AS(ini.get_bool_or("s", "flag", false), ConfigError);
    REQUIRE_THROWS_AS(ini.get("s", "missing"), ConfigError);
    REQUIRE_THROWS_AS(ini.section("missing"), ConfigError);
}

TEST_CASE("the digest tracks content, not formatting") {
    IniFile a = parse_text("[s]\nk = 1\n");
    IniFile b = parse_text("# comment\n[s]\n  k   =   1\n");
    IniFile c = parse_text("[s]\nk = 2\n");
    REQUIRE(a.digest() == b.digest());
    REQUIRE(a.digest() != c.digest());
}

TEST_CASE("model configs build every catalog member") {
    IniFile free_ini = parse_text("[model]\nkind = free\nrank = 3\n");
    GroupModel f3 = model_from_config(free_ini);
    REQUIRE(f3.kind() == ModelKind::free_group);
    REQUIRE(f3.generator_count() == 6);

    IniFile default_rank = parse_text("[model]\nkind = free\n");
    REQUIRE(model_from_config(default_rank).generator_count() == 4);

    IniFile cm = parse_text("[model]\nkind = cyclic-multi\nm = 2\n");
    GroupModel z2 = model_from_config(cm);
    REQUIRE(z2.kind() == ModelKind::cyclic_multi);
    REQUIRE(z2.max_power(0) == 2);

    IniFile fm = parse_text("[model]\nkind = free-mixed\npowers = 1, 2\n");
    GroupModel mixed = model_from_config(fm);
    REQUIRE(mixed.kind() == ModelKind::free_mixed);
    REQUIRE(mixed.generator_count() == 6);

    TempFile aut("machine.aut",
                 "states 5 initial 1\n"
                 "1 a 2\n1 a^-1 3\n1 b 4\n1 b^-1 5\n"
                 "2 a 2\n2 b 4\n2 b^-1 5\n"
                 "3 a^-1 3\n3 b 4\n3 b^-1 5\n"
                 "4 a 2\n4 a^-1 3\n4 b 4\n"
                 "5 a 2\n5 a^-1 3\n5 b^-1 5\n");
    IniFile am = parse_text("[model]\nkind = automatic\nrank = 2\nautomaton = " + aut.path + "\n");
    GroupModel automatic = model_from_config(am);
    REQUIRE(automatic.kind() == ModelKind::automatic);
    REQUIRE(automatic.automaton_path() == aut.path);
    GeodesicAutomaton machine = load_automaton(automatic.automaton_path());
    REQUIRE(machine.state_count() == 5);

    REQUIRE_THROWS_AS(model_from_config(parse_text("[model]\nkind = dihedral\n")), ConfigError);
    REQUIRE_THROWS_AS(model_from_config(parse_text("[model]\nkind = free\nrank = 0\n")),
                      ConfigError);
    REQUIRE_THROWS_AS(
        model_from_config(parse_text("[model]\nkind = automatic\nrank = 2\npowers = 1\n"
                                     "automaton = x.aut\n")),
        ConfigError);
}

TEST_CASE("distribution configs pass their parameters through") {
    IniFile u = parse_text("[distribution]\nkind = uniform\nlo = 0\nhi = 2\n");
    WeightDistribution du = distribution_from_config(u);
    REQUIRE(du.name() == "uniform");
    REQUIRE(du.upper() == 2.0);

    IniFile ba = parse_text("[distribution]\nkind = bounded-away\nlo = 1\nhi = 2\n");
    REQUIRE(distribution_from_config(ba).lower() == 1.0);

    IniFile ex = parse_text("[distribution]\nkind = exponential\nrate = 2\n");
    REQUIRE(distribution_from_config(ex).mean() == Catch::Approx(0.5));

    IniFile tg = parse_text("[distribution]\nkind = truncated-gaussian\nmean = 1\nsd = 0.5\n");
    REQUIRE(distribution_from_config(tg).name() == "truncated-gaussian");

    REQUIRE_THROWS_AS(distribution_from_config(parse_text("[distribution]\nkind = cauchy\n")),
                      ConfigError);
    REQUIRE_THROWS_AS(distribution_from_config(parse_text("[distribution]\nkind = uniform\n")),
                      ConfigError);
}

TEST_CASE("loading a missing config file reports the path") {
    try {
        IniFile::load("/nonexistent/path.ini");
        FAIL("expected a load error");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("/nonexistent/path.ini") != std::string::npos);
    }
}
