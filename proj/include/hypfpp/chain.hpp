#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "hypfpp/analysis.hpp"
#include "hypfpp/errors.hpp"
#include "hypfpp/group.hpp"
#include "hypfpp/hashing.hpp"

namespace hypfpp {

// ---------------------------------------------------------------------------
// The chain of aligned k-blocks of automaton states along a random geodesic.
// A block y = (y_1..y_k) carries weight w(y) = prod N(y_i, y_{i+1}); the
// transition probability x -> y factors as N(x_k, y_1) * w(y), which keeps
// the stationary iteration linear in the number of blocks.
// ---------------------------------------------------------------------------

struct TupleChain {
    int k = 0;
    std::vector<std::vector<uint32_t>> tuples;
    std::unordered_map<uint64_t, size_t> index; // tuple hash -> id
    std::vector<double> weight;
    std::vector<int> comp_of;
    std::vector<std::vector<size_t>> recurrent_classes; // tuple ids per closed class
    bool unique_recurrent = false;
    std::vector<double> pi; // stationary distribution, zero off the recurrent class

    static uint64_t key_of(const std::vector<uint32_t>& t) {
        uint64_t h = 0x2545f4914f6cdd1dULL;
        for (uint32_t s : t) h = fmix64(h ^ (uint64_t(s) + 0x9e3779b97f4a7c15ULL));
        return h;
    }
};

namespace detail {

inline void enumerate_tuples(const AutomatonAnalysis& an, int k, size_t cap, TupleChain& tc) {
    uint32_t n = an.aut.state_count();
    std::vector<uint32_t> cur;
    std::function<void(uint32_t, int, double)> rec = [&](uint32_t s, int depth, double w) {
        cur.push_back(s);
        if (depth == k) {
            if (tc.tuples.size() >= cap)
                throw ResourceError("k-block chain exceeds the tuple cap of " + std::to_string(cap));
            tc.index.emplace(TupleChain::key_of(cur), tc.tuples.size());
            tc.tuples.push_back(cur);
            tc.weight.push_back(w);
        } else {
            for (uint32_t q = 0; q < n; ++q) {
                double p = an.markov.N[s][q];
                if (p > 0 && !an.markov.dead[q]) rec(q, depth + 1, w * p);
            }
        }
        cur.pop_back();
    };
    for (uint32_t s = 0; s < n; ++s)
        if (!an.markov.dead[s]) rec(s, 1, 1.0);
}

} // namespace detail

inline TupleChain k_tuple_chain(const AutomatonAnalysis& an, int k, size_t tuple_cap = 200000) {
    if (k < 1) throw DomainError("block length must be at least 1");
    if (k % an.comps.d != 0)
        throw DomainError("block length " + std::to_string(k) +
                          " is not a multiple of the period " + std::to_string(an.comps.d));
    TupleChain tc;
    tc.k = k;
    detail::enumerate_tuples(an, k, tuple_cap, tc);
    size_t m = tc.tuples.size();
    if (m == 0) throw DomainError("no admissible blocks: every state is dead");

    // Successors factor through the last state: x -> y iff N(x_k, y_1) > 0.
    // Group blocks by first state so component analysis touches each implicit
    // edge once.
    uint32_t n = an.aut.state_count();
    std::vector<std::vector<size_t>> by_first(n);
    for (size_t i = 0; i < m; ++i) by_first[tc.tuples[i][0]].push_back(i);
    std::vector<std::vector<uint32_t>> state_succ(n);
    for (uint32_t s = 0; s < n; ++s)
        for (uint32_t q = 0; q < n; ++q)
            if (an.markov.N[s][q] > 0 && !an.markov.dead[s] && !an.markov.dead[q])
                state_succ[s].push_back(q);

    size_t edge_budget = 20000000;
    std::vector<std::vector<uint32_t>> succ(m);
    size_t edges = 0;
    for (size_t i = 0; i < m; ++i) {
        uint32_t last = tc.tuples[i][k - 1];
        for (uint32_t q : state_succ[last]) {
            edges += by_first[q].size();
            if (edges > edge_budget)
                throw ResourceError("k-block chain exceeds the edge budget");
            for (size_t j : by_first[q]) succ[i].push_back(uint32_t(j));
        }
    }

    auto [comp_of, n_comps] = detail::tarjan_scc(uint32_t(m), succ);
    tc.comp_of = comp_of;
    std::vector<char> closed(n_comps, 1);
    std::vector<std::vector<size_t>> members(n_comps);
    for (size_t i = 0; i < m; ++i) {
        members[comp_of[i]].push_back(i);
        for (uint32_t j : succ[i])
            if (comp_of[j] != comp_of[i]) closed[comp_of[i]] = 0;
    }
    for (int c = 0; c < n_comps; ++c) {
        // A closed singleton without a self-loop is a dead end, which the
        // dead-state filter already excludes; closed components here always
        // carry probability.
        if (closed[c]) tc.recurrent_classes.push_back(members[c]);
    }
    tc.unique_recurrent = tc.recurrent_classes.size() == 1;

    tc.pi.assign(m, 0.0);
    if (tc.unique_recurrent) {
        const auto& cls = tc.recurrent_classes[0];
        std::vector<char> in_class(m, 0);
        for (size_t i : cls) in_class[i] = 1;
        for (size_t i : cls) tc.pi[i] = 1.0 / double(cls.size());
        // pi'(y) = w(y) * sum_s N(s, y_1) m(s) with m(s) the mass of blocks
        // ending at s. Blocks of length k (a multiple of the period) make the
        // restricted chain aperiodic, so plain iteration converges.
        std::vector<double> mass(n), next(m);
        double residual = 1;
        for (int iter = 0; iter < 500000; ++iter) {
            std::fill(mass.begin(), mass.end(), 0.0);
            for (size_t i : cls) mass[tc.tuples[i][k - 1]] += tc.pi[i];
            std::vector<double> inflow(n, 0.0);
            for (uint32_t y1 = 0; y1 < n; ++y1)
                for (uint32_t s = 0; s < n; ++s)
                    if (an.markov.N[s][y1] > 0) inflow[y1] += an.markov.N[s][y1] * mass[s];
            residual = 0;
            for (size_t i = 0; i < m; ++i) {
                next[i] = in_class[i] ? tc.weight[i] * inflow[tc.tuples[i][0]] : 0.0;
                residual = std::max(residual, std::abs(next[i] - tc.pi[i]));
            }
            double total = std::accumulate(next.begin(), next.end(), 0.0);
            for (size_t i = 0; i < m; ++i) tc.pi[i] = next[i] / total;
            if (residual <= 1e-13) break;
        }
        if (residual > 1e-12)
            throw NumericError("stationary iteration for the block chain did not converge",
                               residual);
    }
    return tc;
}

// ---------------------------------------------------------------------------
// Frequency prediction for a label word. Requires that each label determines
// its target state and that distinct labels have distinct targets, so label
// words and state blocks correspond bijectively.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<int64_t> label_target_map(const AutomatonAnalysis& an, const GroupModel& model) {
    std::vector<int64_t> target(model.generator_count(), -1);
    for (const auto& e : an.markov.edges) {
        if (target[e.gen] == -1) {
            target[e.gen] = e.to;
        } else if (target[e.gen] != int64_t(e.to)) {
            throw DomainError("label '" + model.generator(e.gen).name +
                              "' targets several states; block frequencies do not determine "
                              "label words for this automaton");
        }
    }
    std::vector<char> used(an.aut.state_count(), 0);
    for (size_t g = 0; g < target.size(); ++g) {
        if (target[g] < 0) continue;
        if (used[target[g]])
            throw DomainError("two labels share the target state " +
                              std::to_string(target[g] + 1) +
                              "; block frequencies do not determine label words");
        used[target[g]] = 1;
    }
    return target;
}

} // namespace detail

inline double predicted_frequency(const AutomatonAnalysis& an, const GroupModel& model,
                                  const std::vector<size_t>& word,
                                  const TupleChain* prebuilt = nullptr) {
    if (word.empty()) throw DomainError("frequency prediction needs a nonempty word");
    if (prebuilt && prebuilt->k != int(word.size()))
        throw DomainError("prebuilt block chain has the wrong block length");
    auto target = detail::label_target_map(an, model);
    std::vector<uint32_t> block;
    for (size_t i = 0; i < word.size(); ++i) {
        if (word[i] >= target.size() || target[word[i]] < 0) return 0.0;
        uint32_t t = uint32_t(target[word[i]]);
        if (i > 0) {
            // The step from block[i-1] must carry exactly this label.
            bool found = false;
            for (size_t ei : an.markov.out_edges[block[i - 1]]) {
                const auto& e = an.markov.edges[ei];
                if (e.gen == word[i] && e.to == t && e.prob > 0) found = true;
            }
            if (!found) return 0.0;
        }
        if (an.markov.dead[t]) return 0.0;
        block.push_back(t);
    }
    TupleChain local = prebuilt ? TupleChain{} : k_tuple_chain(an, int(word.size()));
    const TupleChain& tc = prebuilt ? *prebuilt : local;
    if (!tc.unique_recurrent)
        throw DomainError("the block chain has several recurrent classes; per-ray frequencies "
                          "depend on the class the ray enters");
    auto it = tc.index.find(TupleChain::key_of(block));
    if (it == tc.index.end()) return 0.0;
    return tc.pi[it->second];
}

// ---------------------------------------------------------------------------
// Ray sampling: start at the initial state and pick transitions with their
// chain probabilities. The resulting law on labeled rays is the boundary
// measure whose cylinder masses the cone measure reports.
// ---------------------------------------------------------------------------

struct SampledRay {
    std::vector<size_t> labels;    // generator indices, one per step
    std::vector<uint32_t> states;  // visited states, length labels.size() + 1
};

inline SampledRay sample_ray(const AutomatonAnalysis& an, size_t length, uint64_t seed) {
    SampledRay ray;
    SplitMix64 rng(seed);
    uint32_t state = an.aut.initial_state();
    ray.states.push_back(state);
    for (size_t step = 0; step < length; ++step) {
        if (an.markov.dead[state])
            throw DomainError("ray sampling reached a dead state after " +
                              std::to_string(step) + " steps");
        double u = rng.next_u01();
        double acc = 0;
        const auto& outs = an.markov.out_edges[state];
        size_t chosen = size_t(-1);
        for (size_t ei : outs) {
            acc += an.markov.edges[ei].prob;
            if (u <= acc) {
                chosen = ei;
                break;
            }
        }
        if (chosen == size_t(-1)) {
            // Rounding can leave u just above the accumulated sum; take the
            // last positive-probability edge.
            for (auto it = outs.rbegin(); it != outs.rend(); ++it)
                if (an.markov.edges[*it].prob > 0) {
                    chosen = *it;
                    break;
                }
        }
        if (chosen == size_t(-1))
            throw DomainError("ray sampling reached a state with no usable transition");
        const auto& e = an.markov.edges[chosen];
        ray.labels.push_back(e.gen);
        ray.states.push_back(e.to);
        state = e.to;
    }
    return ray;
}

// Aligned-block empirical frequency of a label word along a ray. Blocks are
// disjoint, so counts at different alignments never overlap.
inline double empirical_frequency(const std::vector<size_t>& ray_labels,
                                  const std::vector<size_t>& word) {
    if (word.empty()) throw DomainError("frequency estimation needs a nonempty word");
    size_t k = word.size();
    size_t blocks = ray_labels.size() / k;
    if (blocks == 0) return 0.0;
    size_t hits = 0;
    for (size_t b = 0; b < blocks; ++b) {
        bool match = true;
        for (size_t i = 0; i < k && match; ++i) match = ray_labels[b * k + i] == word[i];
        if (match) ++hits;
    }
    return double(hits) / double(blocks);
}

} // namespace hypfpp
