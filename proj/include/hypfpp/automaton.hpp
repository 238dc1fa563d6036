#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hypfpp/errors.hpp"
#include "hypfpp/group.hpp"

namespace hypfpp {

// ---------------------------------------------------------------------------
// Geodesic automaton: deterministic, prefix-closed (all states accepting),
// every state reachable from the initial state. Labels are generator names;
// they are resolved against a model's GeneratorSet when the two are paired.
// ---------------------------------------------------------------------------

struct AutomatonTransition {
    uint32_t from;
    uint32_t to;
    std::string label;
};

class GeodesicAutomaton {
public:
    GeodesicAutomaton(uint32_t n_states, uint32_t initial,
                      std::vector<AutomatonTransition> transitions)
        : n_states_(n_states), initial_(initial), transitions_(std::move(transitions)) {
        if (initial_ >= n_states_) throw FormatError("initial state out of range");
        delta_.assign(n_states_, {});
        for (const auto& t : transitions_) {
            if (t.from >= n_states_ || t.to >= n_states_)
                throw FormatError("transition endpoint out of range: " + describe(t));
            auto [it, inserted] = delta_[t.from].emplace(t.label, t.to);
            if (!inserted)
                throw FormatError("nondeterministic automaton: duplicate transition for state " +
                                  std::to_string(t.from + 1) + " label '" + t.label + "'");
        }
        check_reachability();
    }

    uint32_t state_count() const { return n_states_; }
    uint32_t initial_state() const { return initial_; }
    const std::vector<AutomatonTransition>& transitions() const { return transitions_; }

    // -1 when no transition exists (partial map).
    int64_t step(uint32_t state, const std::string& label) const {
        auto it = delta_.at(state).find(label);
        return it == delta_.at(state).end() ? -1 : int64_t(it->second);
    }

    const std::map<std::string, uint32_t>& out_transitions(uint32_t state) const {
        return delta_.at(state);
    }

    // Collects every distinct label (sorted for reproducibility).
    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        for (const auto& t : transitions_) out.push_back(t.label);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    // Checks every label names a generator of the model.
    void check_labels(const GroupModel& model) const {
        for (const auto& l : labels())
            if (!model.has_generator(l))
                throw FormatError("automaton label '" + l + "' is not a generator of " +
                                  model.name());
    }

    // True when each label has one target state regardless of source. All
    // builtin automata are last-move automata, so this holds for them; word
    // frequency predictions rely on it.
    bool label_targets_unique() const {
        std::unordered_map<std::string, uint32_t> target;
        for (const auto& t : transitions_) {
            auto [it, inserted] = target.emplace(t.label, t.to);
            if (!inserted && it->second != t.to) return false;
        }
        return true;
    }

private:
    static std::string describe(const AutomatonTransition& t) {
        return std::to_string(t.from + 1) + " " + t.label + " " + std::to_string(t.to + 1);
    }

    void check_reachability() const {
        std::vector<char> seen(n_states_, 0);
        std::deque<uint32_t> q{initial_};
        seen[initial_] = 1;
        while (!q.empty()) {
            uint32_t s = q.front();
            q.pop_front();
            for (const auto& [label, to] : delta_[s]) {
                (void)label;
                if (!seen[to]) {
                    seen[to] = 1;
                    q.push_back(to);
                }
            }
        }
        std::string missing;
        for (uint32_t s = 0; s < n_states_; ++s)
            if (!seen[s]) missing += (missing.empty() ? "" : ", ") + std::to_string(s + 1);
        if (!missing.empty())
            throw FormatError("states unreachable from the initial state: " + missing);
    }

    uint32_t n_states_;
    uint32_t initial_;
    std::vector<AutomatonTransition> transitions_;
    std::vector<std::map<std::string, uint32_t>> delta_;
};

// ---------------------------------------------------------------------------
// File format: line-oriented text. Header "states N initial I" (states are
// named 1..N in the file), then one "from label to" line per transition.
// '#' starts a comment.
// ---------------------------------------------------------------------------

inline GeodesicAutomaton parse_automaton(std::istream& in, const std::string& origin) {
    std::string line;
    uint32_t n_states = 0, initial = 0;
    bool header_seen = false;
    std::vector<AutomatonTransition> transitions;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (!header_seen) {
            if (first != "states")
                throw FormatError(origin + ":" + std::to_string(lineno) +
                                  ": expected header 'states N initial I'");
            std::string kw;
            long long n = 0, init = 0;
            if (!(ls >> n >> kw >> init) || kw != "initial" || n < 1 || init < 1 || init > n)
                throw FormatError(origin + ":" + std::to_string(lineno) + ": malformed header");
            n_states = static_cast<uint32_t>(n);
            initial = static_cast<uint32_t>(init - 1);
            header_seen = true;
            continue;
        }
        long long from = 0, to = 0;
        std::string label;
        std::istringstream ts(line);
        if (!(ts >> from >> label >> to))
            throw FormatError(origin + ":" + std::to_string(lineno) +
                              ": expected 'from label to'");
        if (from < 1 || from > n_states || to < 1 || to > n_states)
            throw FormatError(origin + ":" + std::to_string(lineno) + ": state id out of range");
        transitions.push_back({static_cast<uint32_t>(from - 1), static_cast<uint32_t>(to - 1), label});
    }
    if (!header_seen) throw FormatError(origin + ": missing 'states N initial I' header");
    return GeodesicAutomaton(n_states, initial, std::move(transitions));
}

inline GeodesicAutomaton load_automaton(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open automaton file: " + path);
    return parse_automaton(in, path);
}

inline void save_automaton(const GeodesicAutomaton& aut, std::ostream& out) {
    out << "states " << aut.state_count() << " initial " << (aut.initial_state() + 1) << "\n";
    for (const auto& t : aut.transitions())
        out << (t.from + 1) << " " << t.label << " " << (t.to + 1) << "\n";
}

// ---------------------------------------------------------------------------
// Builtin automata for the catalog models. Canonical representative of a
// syllable letter^e (e > 0, max power m): (letter^m)^k then optionally one
// letter^r with 0 < r < m. States track the last move: a "run" state per
// (letter, sign) continues the full-power run; a "closed" state per
// (letter, sign, r) ends the syllable. No two transitions share (from, to),
// so the 0/1 transition matrix counts words exactly.
// ---------------------------------------------------------------------------

inline GeodesicAutomaton builtin_automaton(const GroupModel& model) {
    if (model.kind() == ModelKind::automatic)
        throw DomainError("automatic models carry a supplied automaton; no builtin available");
    if (!model.contiguous_powers())
        throw DomainError("builtin automata need contiguous power sets {1..m} per letter");

    // State 0 is initial. Enumerate run/closed states per letter.
    uint32_t next = 1;
    struct LetterStates {
        int64_t m;
        uint32_t run_pos, run_neg;                 // entered by letter^{±m}
        std::vector<uint32_t> closed_pos, closed_neg; // entered by letter^{±r}, r=1..m-1
    };
    std::vector<LetterStates> ls(model.rank());
    for (uint32_t l = 0; l < model.rank(); ++l) {
        ls[l].m = model.max_power(l);
        ls[l].run_pos = next++;
        ls[l].run_neg = next++;
        for (int64_t r = 1; r < ls[l].m; ++r) {
            ls[l].closed_pos.push_back(next++);
            ls[l].closed_neg.push_back(next++);
        }
    }

    auto gen_name = [&model](uint32_t letter, int64_t power) {
        return model.generator(model.generator_index(generator_display_name(letter, power))).name;
    };

    std::vector<AutomatonTransition> ts;
    // Moves that start a fresh syllable in letter l, from state `from`.
    auto add_fresh = [&](uint32_t from, uint32_t l) {
        int64_t m = ls[l].m;
        ts.push_back({from, ls[l].run_pos, gen_name(l, m)});
        ts.push_back({from, ls[l].run_neg, gen_name(l, -m)});
        for (int64_t r = 1; r < m; ++r) {
            ts.push_back({from, ls[l].closed_pos[size_t(r - 1)], gen_name(l, r)});
            ts.push_back({from, ls[l].closed_neg[size_t(r - 1)], gen_name(l, -r)});
        }
    };

    for (uint32_t l = 0; l < model.rank(); ++l) add_fresh(0, l);
    for (uint32_t l = 0; l < model.rank(); ++l) {
        int64_t m = ls[l].m;
        // Run states: continue the same-sign run, close with a remainder, or
        // switch to any other letter.
        for (int sign = 0; sign < 2; ++sign) {
            uint32_t run = sign == 0 ? ls[l].run_pos : ls[l].run_neg;
            int64_t sgn = sign == 0 ? 1 : -1;
            ts.push_back({run, run, gen_name(l, sgn * m)});
            for (int64_t r = 1; r < m; ++r) {
                uint32_t closed = sign == 0 ? ls[l].closed_pos[size_t(r - 1)]
                                            : ls[l].closed_neg[size_t(r - 1)];
                ts.push_back({run, closed, gen_name(l, sgn * r)});
            }
            for (uint32_t l2 = 0; l2 < model.rank(); ++l2)
                if (l2 != l) add_fresh(run, l2);
        }
        // Closed states: the syllable is complete, only other letters follow.
        for (int64_t r = 1; r < m; ++r) {
            for (uint32_t closed : {ls[l].closed_pos[size_t(r - 1)], ls[l].closed_neg[size_t(r - 1)]})
                for (uint32_t l2 = 0; l2 < model.rank(); ++l2)
                    if (l2 != l) add_fresh(closed, l2);
        }
    }
    return GeodesicAutomaton(next, 0, std::move(ts));
}

// ---------------------------------------------------------------------------
// Language verification against a model: accepted words of length <= radius
// must be geodesic and in bijection with ball(1, radius).
// ---------------------------------------------------------------------------

struct LanguageViolation {
    std::string word;
    std::string detail;
};

struct LanguageReport {
    int radius = 0;
    uint64_t words_checked = 0;
    uint64_t ball_size = 0;
    std::vector<LanguageViolation> violations;
    bool bijective = false;
    bool ok() const { return violations.empty() && bijective; }
};

// Enumerates accepted words up to `radius` letters alongside their group
// evaluations. Callback: (labels, element, automaton state).
template <typename F>
inline void enumerate_accepted(const GeodesicAutomaton& aut, const GroupModel& model,
                               int radius, F&& visit) {
    std::vector<size_t> labels;
    std::function<void(uint32_t, const Element&)> rec = [&](uint32_t state, const Element& elem) {
        visit(labels, elem, state);
        if (int(labels.size()) >= radius) return;
        for (const auto& [label, to] : aut.out_transitions(state)) {
            size_t gi = model.generator_index(label);
            labels.push_back(gi);
            rec(to, model.apply(elem, gi));
            labels.pop_back();
        }
    };
    rec(aut.initial_state(), model.identity());
}

inline LanguageReport verify_geodesic_language(const GeodesicAutomaton& aut,
                                               const GroupModel& model, int radius) {
    aut.check_labels(model);
    LanguageReport report;
    report.radius = radius;
    std::unordered_map<Element, std::string, ElementHash> seen;
    enumerate_accepted(aut, model, radius, [&](const std::vector<size_t>& labels,
                                               const Element& elem, uint32_t) {
        ++report.words_checked;
        std::string word = model.word_to_string(labels);
        int64_t wl = model.word_length(elem);
        if (wl != int64_t(labels.size()))
            report.violations.push_back(
                {word, "non-geodesic: word length " + std::to_string(labels.size()) +
                           " but distance " + std::to_string(wl)});
        auto [it, inserted] = seen.emplace(elem, word);
        if (!inserted)
            report.violations.push_back(
                {word, "duplicate representative: element already produced by '" + it->second + "'"});
    });
    auto ball = model.ball(model.identity(), radius);
    report.ball_size = ball.size();
    bool surjective = true;
    for (const auto& e : ball) {
        if (!seen.count(e)) {
            surjective = false;
            report.violations.push_back({model.element_to_string(e),
                                         "element not represented by any accepted word"});
            if (report.violations.size() > 200) break; // keep reports bounded
        }
    }
    report.bijective = surjective && seen.size() == ball.size();
    return report;
}

} // namespace hypfpp
