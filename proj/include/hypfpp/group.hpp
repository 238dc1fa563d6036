#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hypfpp/errors.hpp"
#include "hypfpp/hashing.hpp"

namespace hypfpp {

// ---------------------------------------------------------------------------
// Elements: reduced words over a free basis, stored as syllables letter^exp.
// Every supported model lives inside a free group (Z is the rank-1 case), so
// the normal form is the freely reduced word and equality is structural.
// ---------------------------------------------------------------------------

struct Syllable {
    uint32_t letter;
    int64_t exp; // nonzero
    bool operator==(const Syllable& o) const { return letter == o.letter && exp == o.exp; }
};

class Element {
public:
    Element() = default;
    explicit Element(std::vector<Syllable> syl) : syl_(std::move(syl)) {}

    const std::vector<Syllable>& syllables() const { return syl_; }
    bool is_identity() const { return syl_.empty(); }

    bool operator==(const Element& o) const { return syl_ == o.syl_; }
    bool operator!=(const Element& o) const { return !(*this == o); }

    // Cached S-word-length, filled by the owning model on first query.
    // Shared containers (balls, domain graphs) prefill it before any
    // concurrent phase starts, so multithreaded access is read-only.
    mutable int64_t word_length_cache = -1;

    // Platform-stable total order: by syllable count, then lexicographically
    // by (letter, exponent). Used for canonical edge orientation and as the
    // deterministic tie-break key in searches.
    int compare(const Element& o) const {
        if (syl_.size() != o.syl_.size()) return syl_.size() < o.syl_.size() ? -1 : 1;
        for (size_t i = 0; i < syl_.size(); ++i) {
            if (syl_[i].letter != o.syl_[i].letter)
                return syl_[i].letter < o.syl_[i].letter ? -1 : 1;
            if (syl_[i].exp != o.syl_[i].exp)
                return syl_[i].exp < o.syl_[i].exp ? -1 : 1;
        }
        return 0;
    }
    bool operator<(const Element& o) const { return compare(o) < 0; }

    // Canonical byte serialization; the unit the weight PRF hashes.
    void append_bytes(std::vector<unsigned char>& out) const {
        auto put32 = [&out](uint32_t v) {
            for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
        };
        auto put64 = [&out](uint64_t v) {
            for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
        };
        put32(static_cast<uint32_t>(syl_.size()));
        for (const auto& s : syl_) {
            put32(s.letter);
            put64(static_cast<uint64_t>(s.exp));
        }
    }

    uint64_t hash() const {
        uint64_t h = 0x243f6a8885a308d3ULL;
        for (const auto& s : syl_) {
            h = fmix64(h ^ (uint64_t(s.letter) * 0x9e3779b97f4a7c15ULL));
            h = fmix64(h ^ static_cast<uint64_t>(s.exp));
        }
        return h;
    }

private:
    std::vector<Syllable> syl_;
};

struct ElementHash {
    size_t operator()(const Element& e) const { return static_cast<size_t>(e.hash()); }
};

// ---------------------------------------------------------------------------
// Generators: powers of free-basis letters, e.g. b^2 is the single generator
// (letter b, exponent +2). Declaration order is the canonical tie-break order.
// ---------------------------------------------------------------------------

struct Generator {
    uint32_t letter;
    int64_t power;    // signed, nonzero
    std::string name; // e.g. "a", "a^-1", "b^2"
};

enum class ModelKind { free_group, cyclic_multi, free_mixed, automatic };

inline const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::free_group: return "free";
        case ModelKind::cyclic_multi: return "cyclic-multi";
        case ModelKind::free_mixed: return "free-mixed";
        case ModelKind::automatic: return "automatic";
    }
    return "?";
}

// Canonical letter names a, b, c, ... (single letters up to rank 26, then x5).
inline std::string letter_name(uint32_t letter) {
    if (letter < 26) return std::string(1, char('a' + letter));
    return "x" + std::to_string(letter);
}

inline std::string generator_display_name(uint32_t letter, int64_t power) {
    std::string base = letter_name(letter);
    if (power == 1) return base;
    return base + "^" + std::to_string(power);
}

class GroupModel {
public:
    GroupModel(ModelKind kind, uint32_t rank, std::vector<Generator> gens,
               std::string automaton_path = "")
        : kind_(kind), rank_(rank), gens_(std::move(gens)),
          automaton_path_(std::move(automaton_path)) {
        if (rank_ == 0) throw ConfigError("group model needs rank >= 1");
        if (gens_.empty()) throw ConfigError("group model needs a nonempty generating set");
        letter_powers_.assign(rank_, {});
        for (size_t i = 0; i < gens_.size(); ++i) {
            const auto& g = gens_[i];
            if (g.letter >= rank_) throw ConfigError("generator letter out of range: " + g.name);
            if (g.power == 0) throw ConfigError("generator with zero power: " + g.name);
            if (g.power > 0) letter_powers_[g.letter].push_back(g.power);
            name_index_[g.name] = i;
        }
        // Symmetry: each generator's inverse must also be declared.
        for (size_t i = 0; i < gens_.size(); ++i) {
            inverse_index_.push_back(find_generator(gens_[i].letter, -gens_[i].power));
        }
        for (auto& ps : letter_powers_) {
            std::sort(ps.begin(), ps.end());
            ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
        }
        contiguous_powers_ = true;
        for (uint32_t l = 0; l < rank_; ++l) {
            const auto& ps = letter_powers_[l];
            if (ps.empty()) throw ConfigError("letter " + letter_name(l) + " has no generators");
            for (size_t i = 0; i < ps.size(); ++i) {
                if (ps[i] != int64_t(i) + 1) contiguous_powers_ = false;
            }
        }
    }

    ModelKind kind() const { return kind_; }
    uint32_t rank() const { return rank_; }
    const std::vector<Generator>& generators() const { return gens_; }
    size_t generator_count() const { return gens_.size(); }
    const Generator& generator(size_t i) const { return gens_.at(i); }
    size_t inverse_generator(size_t i) const { return inverse_index_.at(i); }
    const std::vector<int64_t>& letter_powers(uint32_t letter) const { return letter_powers_.at(letter); }
    int64_t max_power(uint32_t letter) const { return letter_powers_.at(letter).back(); }
    bool contiguous_powers() const { return contiguous_powers_; }
    const std::string& automaton_path() const { return automaton_path_; }

    // True when the Cayley graph is a tree (every letter only has power-1
    // generators); trees are the exact oracles throughout the experiments.
    bool is_tree() const {
        for (uint32_t l = 0; l < rank_; ++l)
            if (letter_powers_[l].size() != 1 || letter_powers_[l][0] != 1) return false;
        return true;
    }

    std::string name() const {
        std::ostringstream os;
        os << model_kind_name(kind_) << "(rank=" << rank_ << ", S={";
        for (size_t i = 0; i < gens_.size(); ++i) {
            if (i) os << ",";
            os << gens_[i].name;
        }
        os << "})";
        return os.str();
    }

    size_t generator_index(const std::string& name) const {
        auto it = name_index_.find(name);
        if (it == name_index_.end()) throw ConfigError("unknown generator label: " + name);
        return it->second;
    }
    bool has_generator(const std::string& name) const { return name_index_.count(name) > 0; }

    Element identity() const { return Element{}; }

    // Right multiplication by one generator, with free reduction at the seam.
    Element apply(const Element& x, size_t gen_index) const {
        const Generator& g = generator(gen_index);
        std::vector<Syllable> syl = x.syllables();
        if (!syl.empty() && syl.back().letter == g.letter) {
            syl.back().exp += g.power;
            if (syl.back().exp == 0) syl.pop_back();
        } else {
            syl.push_back({g.letter, g.power});
        }
        return Element(std::move(syl));
    }

    Element multiply(const Element& x, const Element& y) const {
        std::vector<Syllable> syl = x.syllables();
        for (const auto& s : y.syllables()) {
            if (!syl.empty() && syl.back().letter == s.letter) {
                syl.back().exp += s.exp;
                if (syl.back().exp == 0) syl.pop_back();
            } else {
                syl.push_back(s);
            }
        }
        return Element(std::move(syl));
    }

    Element inverse(const Element& x) const {
        std::vector<Syllable> syl;
        syl.reserve(x.syllables().size());
        for (auto it = x.syllables().rbegin(); it != x.syllables().rend(); ++it)
            syl.push_back({it->letter, -it->exp});
        return Element(std::move(syl));
    }

    // S-word length of one syllable letter^e: fewest signed powers from the
    // letter's power set summing to e. Closed form for contiguous {1..m};
    // shortest path on the integer line otherwise.
    int64_t syllable_cost(uint32_t letter, int64_t e) const {
        if (e == 0) return 0;
        int64_t a = e < 0 ? -e : e;
        const auto& ps = letter_powers_.at(letter);
        if (contiguous_powers_) {
            int64_t m = ps.back();
            return (a + m - 1) / m;
        }
        return min_coins(ps, a);
    }

    // Word length in the S-metric. Syllables are independent because the
    // Cayley graph of a free product is a tree of factor copies: every path
    // between elements with different leading syllables passes the branch
    // vertex, so per-factor costs add.
    int64_t word_length(const Element& x) const {
        if (x.word_length_cache >= 0) return x.word_length_cache;
        int64_t total = 0;
        for (const auto& s : x.syllables()) total += syllable_cost(s.letter, s.exp);
        x.word_length_cache = total;
        return total;
    }

    int64_t distance(const Element& x, const Element& y) const {
        return word_length(multiply(inverse(x), y));
    }

    // BFS ball; throws ResourceError when the vertex cap is hit.
    std::vector<Element> ball(const Element& center, int radius,
                              size_t vertex_cap = kDefaultBallCap) const {
        if (radius < 0) throw DomainError("ball radius must be >= 0");
        std::unordered_set<Element, ElementHash> seen;
        std::vector<Element> out;
        std::deque<std::pair<Element, int>> frontier;
        seen.insert(center);
        out.push_back(center);
        frontier.emplace_back(center, 0);
        while (!frontier.empty()) {
            auto [v, dist] = frontier.front();
            frontier.pop_front();
            if (dist == radius) continue;
            for (size_t gi = 0; gi < gens_.size(); ++gi) {
                Element w = apply(v, gi);
                if (seen.insert(w).second) {
                    if (out.size() >= vertex_cap)
                        throw ResourceError("ball enumeration exceeded the vertex cap (" +
                                            std::to_string(vertex_cap) + " vertices)");
                    out.push_back(w);
                    frontier.emplace_back(std::move(w), dist + 1);
                }
            }
        }
        return out;
    }

    // Exact sphere: ball(1,n) minus ball(1,n-1), realized as a distance filter.
    std::vector<Element> sphere(int n, size_t vertex_cap = kDefaultBallCap) const {
        auto b = ball(identity(), n, vertex_cap);
        std::vector<Element> out;
        for (auto& e : b)
            if (word_length(e) == n) out.push_back(std::move(e));
        return out;
    }

    // Canonical word geodesic: at each step take the first generator (in
    // declaration order) that strictly decreases the distance to the target.
    std::vector<size_t> word_geodesic_labels(const Element& x, const Element& y) const {
        std::vector<size_t> labels;
        Element cur = x;
        int64_t dist = distance(cur, y);
        labels.reserve(static_cast<size_t>(dist));
        while (dist > 0) {
            bool advanced = false;
            for (size_t gi = 0; gi < gens_.size(); ++gi) {
                Element nxt = apply(cur, gi);
                if (distance(nxt, y) == dist - 1) {
                    labels.push_back(gi);
                    cur = std::move(nxt);
                    --dist;
                    advanced = true;
                    break;
                }
            }
            if (!advanced)
                throw NumericError("geodesic step failed to decrease distance", double(dist));
        }
        return labels;
    }

    std::vector<Element> word_geodesic(const Element& x, const Element& y) const {
        std::vector<Element> path{x};
        Element cur = x;
        for (size_t gi : word_geodesic_labels(x, y)) {
            cur = apply(cur, gi);
            path.push_back(cur);
        }
        return path;
    }

    // Canonical geodesic word for g in the S-metric: syllable by syllable,
    // full-power letters first, then one remainder letter. Matches the
    // builtin automaton's accepted representative. Contiguous powers only.
    std::vector<size_t> canonical_word(const Element& g) const {
        if (!contiguous_powers_)
            throw DomainError("canonical words need contiguous power sets {1..m} per letter");
        std::vector<size_t> labels;
        for (const auto& s : g.syllables()) {
            int64_t m = max_power(s.letter);
            int64_t a = s.exp < 0 ? -s.exp : s.exp;
            int64_t sign = s.exp < 0 ? -1 : 1;
            size_t big = find_generator_checked(s.letter, sign * m);
            for (int64_t i = 0; i < a / m; ++i) labels.push_back(big);
            int64_t r = a % m;
            if (r > 0) labels.push_back(find_generator_checked(s.letter, sign * r));
        }
        return labels;
    }

    std::string word_to_string(const std::vector<size_t>& labels) const {
        if (labels.empty()) return "1";
        std::string out;
        for (size_t i = 0; i < labels.size(); ++i) {
            if (i) out += " ";
            out += generator(labels[i]).name;
        }
        return out;
    }

    std::string element_to_string(const Element& e) const {
        if (e.is_identity()) return "1";
        std::string out;
        for (size_t i = 0; i < e.syllables().size(); ++i) {
            const auto& s = e.syllables()[i];
            if (i) out += " ";
            out += letter_name(s.letter);
            if (s.exp != 1) out += "^" + std::to_string(s.exp);
        }
        return out;
    }

    static constexpr size_t kDefaultBallCap = 2000000;

private:
    size_t find_generator(uint32_t letter, int64_t power) const {
        for (size_t i = 0; i < gens_.size(); ++i)
            if (gens_[i].letter == letter && gens_[i].power == power) return i;
        throw ConfigError("generating set is not symmetric: missing " +
                          generator_display_name(letter, power));
    }
    size_t find_generator_checked(uint32_t letter, int64_t power) const {
        return find_generator(letter, power);
    }

    // Fewest terms from {±p : p in powers} summing to target > 0. BFS on the
    // integer line restricted to a safe window around [0, target].
    static int64_t min_coins(const std::vector<int64_t>& powers, int64_t target) {
        int64_t maxp = powers.back();
        int64_t lo = -2 * maxp, hi = target + 2 * maxp;
        std::vector<int32_t> dist(static_cast<size_t>(hi - lo + 1), -1);
        auto idx = [lo](int64_t v) { return static_cast<size_t>(v - lo); };
        std::deque<int64_t> q;
        dist[idx(0)] = 0;
        q.push_back(0);
        while (!q.empty()) {
            int64_t v = q.front();
            q.pop_front();
            if (v == target) return dist[idx(v)];
            for (int64_t p : powers) {
                for (int64_t step : {p, -p}) {
                    int64_t w = v + step;
                    if (w < lo || w > hi) continue;
                    if (dist[idx(w)] < 0) {
                        dist[idx(w)] = dist[idx(v)] + 1;
                        q.push_back(w);
                    }
                }
            }
        }
        throw NumericError("syllable cost search failed", double(target));
    }

    ModelKind kind_;
    uint32_t rank_;
    std::vector<Generator> gens_;
    std::vector<size_t> inverse_index_;
    std::vector<std::vector<int64_t>> letter_powers_;
    bool contiguous_powers_ = true;
    std::string automaton_path_;
    std::unordered_map<std::string, size_t> name_index_;
};

// ---------------------------------------------------------------------------
// Model factories for the catalog.
// ---------------------------------------------------------------------------

inline std::vector<Generator> power_generators(uint32_t rank, const std::vector<int64_t>& max_powers) {
    std::vector<Generator> gens;
    for (uint32_t l = 0; l < rank; ++l) {
        for (int64_t p = 1; p <= max_powers[l]; ++p) {
            gens.push_back({l, p, generator_display_name(l, p)});
            gens.push_back({l, -p, generator_display_name(l, -p)});
        }
    }
    return gens;
}

// Free group of rank k with the standard symmetric generating set.
inline GroupModel make_free(uint32_t rank) {
    return GroupModel(ModelKind::free_group, rank,
                      power_generators(rank, std::vector<int64_t>(rank, 1)));
}

// Z with generators {±1, ..., ±m}: the integer line with chord edges.
inline GroupModel make_cyclic_multi(int64_t m) {
    if (m < 1) throw ConfigError("cyclic-multi needs max power >= 1");
    return GroupModel(ModelKind::cyclic_multi, 1, power_generators(1, {m}));
}

// Free group with per-letter power generators, e.g. {a^±1, b^±1, b^±2}.
inline GroupModel make_free_mixed(const std::vector<int64_t>& max_powers) {
    return GroupModel(ModelKind::free_mixed, static_cast<uint32_t>(max_powers.size()),
                      power_generators(static_cast<uint32_t>(max_powers.size()), max_powers));
}

// The stock mixed example: rank 2, S = {a^±1, b^±1, b^±2}.
inline GroupModel make_free_mixed_f2() { return make_free_mixed({1, 2}); }

// Automaton-presented model: free-basis word problem with the geodesic
// automaton supplied externally.
inline GroupModel make_automatic(uint32_t rank, std::vector<Generator> gens,
                                 std::string automaton_path) {
    return GroupModel(ModelKind::automatic, rank, std::move(gens), std::move(automaton_path));
}

// ---------------------------------------------------------------------------
// Canonical edges.
// ---------------------------------------------------------------------------

struct EdgeId {
    Element lo, hi;  // lo < hi in the canonical element order
    size_t label;    // generator index with lo * gen = hi

    std::vector<unsigned char> bytes() const {
        std::vector<unsigned char> out;
        lo.append_bytes(out);
        hi.append_bytes(out);
        return out;
    }
    bool operator==(const EdgeId& o) const { return lo == o.lo && hi == o.hi; }
};

inline EdgeId canonical_edge(const GroupModel& model, const Element& x, const Element& y) {
    const Element& lo = (x.compare(y) <= 0) ? x : y;
    const Element& hi = (x.compare(y) <= 0) ? y : x;
    Element diff = model.multiply(model.inverse(lo), hi);
    const auto& syl = diff.syllables();
    if (syl.size() != 1)
        throw DomainError("canonical_edge: endpoints are not adjacent");
    for (size_t gi = 0; gi < model.generator_count(); ++gi) {
        const auto& g = model.generator(gi);
        if (g.letter == syl[0].letter && g.power == syl[0].exp)
            return EdgeId{lo, hi, gi};
    }
    throw DomainError("canonical_edge: endpoints are not adjacent under S");
}

// Parses elements written as generator-ish words: "1", "a^3", "ab", "a b^-2".
// Letters are single characters from the model's basis; exponents optional.
inline Element parse_element(const GroupModel& model, const std::string& text) {
    Element cur = model.identity();
    size_t i = 0;
    auto skip_ws = [&]() { while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i; };
    skip_ws();
    if (i < text.size() && text[i] == '1' && i + 1 >= text.size()) return cur;
    while (i < text.size()) {
        skip_ws();
        if (i >= text.size()) break;
        char c = text[i];
        if (c < 'a' || c > 'z')
            throw ConfigError("cannot parse element '" + text + "': unexpected '" +
                              std::string(1, c) + "'");
        uint32_t letter = static_cast<uint32_t>(c - 'a');
        if (letter >= model.rank())
            throw ConfigError("cannot parse element '" + text + "': letter '" +
                              std::string(1, c) + "' outside the basis");
        ++i;
        int64_t exp = 1;
        if (i < text.size() && text[i] == '^') {
            ++i;
            bool neg = false;
            if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
                neg = text[i] == '-';
                ++i;
            }
            int64_t v = 0;
            bool any = false;
            while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
                v = v * 10 + (text[i] - '0');
                ++i;
                any = true;
            }
            if (!any) throw ConfigError("cannot parse element '" + text + "': bad exponent");
            exp = neg ? -v : v;
        }
        if (exp != 0) cur = model.multiply(cur, Element({{letter, exp}}));
    }
    return cur;
}

// Parses a label word: whitespace-separated generator names, each naming one
// step (so "a a" is two steps, not the element a^2).
inline std::vector<size_t> parse_word(const GroupModel& model, const std::string& text) {
    std::vector<size_t> word;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
        size_t start = i;
        while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
        if (i > start) word.push_back(model.generator_index(text.substr(start, i - start)));
    }
    if (word.empty()) throw ConfigError("cannot parse word '" + text + "': no labels found");
    return word;
}

} // namespace hypfpp
