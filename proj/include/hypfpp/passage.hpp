#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "hypfpp/domain.hpp"
#include "hypfpp/environment.hpp"
#include "hypfpp/errors.hpp"
#include "hypfpp/group.hpp"

namespace hypfpp {

// ---------------------------------------------------------------------------
// Restricted first-passage times by Dijkstra search over the implicit Cayley
// graph. Everything is deterministic: the frontier is ordered by distance
// with ties broken by the canonical element order, and the reported time is
// re-summed along the path in a fixed orientation so T(x, y) and T(y, x)
// agree bitwise.
// ---------------------------------------------------------------------------

struct PassageOptions {
    uint64_t max_relaxations = 50000000;
    double near_tie_rtol = 1e-12;
};

struct PassageResult {
    double time = 0;              // canonical re-summed path weight
    double heap_time = 0;         // raw Dijkstra distance, kept as a cross-check
    std::vector<Element> path;    // from x to y inclusive
    uint64_t relaxations = 0;
    uint64_t settled = 0;         // vertices popped as final
    bool near_tie = false;        // some relaxation was decided within near_tie_rtol

    size_t hops() const { return path.empty() ? 0 : path.size() - 1; }
};

namespace detail {

inline bool near_equal(double a, double b, double rtol) {
    return std::abs(a - b) <= rtol * std::max({std::abs(a), std::abs(b), 1.0});
}

// Re-sum the path weights starting from the canonically smaller endpoint so
// both query directions add the same doubles in the same order.
template <typename WeightFn>
double canonical_path_time(const std::vector<Element>& path, WeightFn&& weight) {
    if (path.size() < 2) return 0.0;
    bool forward = path.front().compare(path.back()) <= 0;
    double t = 0;
    if (forward) {
        for (size_t i = 0; i + 1 < path.size(); ++i) t += weight(path[i], path[i + 1]);
    } else {
        for (size_t i = path.size() - 1; i > 0; --i) t += weight(path[i], path[i - 1]);
    }
    return t;
}

} // namespace detail

inline PassageResult restricted_passage_time(const GroupModel& model, const Environment& env,
                                             const Domain& domain, const Element& x,
                                             const Element& y, const PassageOptions& opts = {}) {
    if (!domain.contains(model, x) || !domain.contains(model, y))
        throw DomainError("passage endpoints must lie in the search domain");

    struct Item {
        double dist;
        Element v;
    };
    auto later = [](const Item& a, const Item& b) {
        if (a.dist != b.dist) return a.dist > b.dist;
        return a.v.compare(b.v) > 0;
    };
    std::priority_queue<Item, std::vector<Item>, decltype(later)> heap(later);
    std::unordered_map<Element, double, ElementHash> dist;
    std::unordered_map<Element, Element, ElementHash> pred;
    std::unordered_map<Element, char, ElementHash> done;

    PassageResult res;
    dist[x] = 0.0;
    heap.push({0.0, x});
    while (!heap.empty()) {
        Item it = heap.top();
        heap.pop();
        if (done.count(it.v)) continue;
        done[it.v] = 1;
        ++res.settled;
        if (it.v == y) break;
        for (size_t gi = 0; gi < model.generator_count(); ++gi) {
            Element n = model.apply(it.v, gi);
            if (done.count(n) || !domain.contains(model, n)) continue;
            if (++res.relaxations > opts.max_relaxations)
                throw ResourceError("passage search exceeded the relaxation budget of " +
                                    std::to_string(opts.max_relaxations));
            double w = env.weight(model, it.v, n);
            double nd = it.dist + w;
            auto cur = dist.find(n);
            if (cur == dist.end()) {
                dist.emplace(n, nd);
                pred.insert_or_assign(n, it.v);
                heap.push({nd, n});
            } else if (nd < cur->second) {
                if (detail::near_equal(nd, cur->second, opts.near_tie_rtol)) res.near_tie = true;
                cur->second = nd;
                pred.insert_or_assign(n, it.v);
                heap.push({nd, n});
            } else if (nd == cur->second) {
                // Exact ties have probability zero for atomless weights; when
                // one happens anyway, keep the canonically smaller parent.
                res.near_tie = true;
                auto p = pred.find(n);
                if (p != pred.end() && it.v.compare(p->second) < 0)
                    p->second = it.v;
            } else if (detail::near_equal(nd, cur->second, opts.near_tie_rtol)) {
                res.near_tie = true;
            }
        }
    }
    if (!done.count(y))
        throw UnreachableError("no path inside the domain connects the endpoints");

    res.heap_time = dist[y];
    Element cur = y;
    res.path.push_back(cur);
    while (!(cur == x)) {
        cur = pred.at(cur);
        res.path.push_back(cur);
    }
    std::reverse(res.path.begin(), res.path.end());
    res.time = detail::canonical_path_time(
        res.path, [&](const Element& a, const Element& b) { return env.weight(model, a, b); });
    if (!detail::near_equal(res.time, res.heap_time, 1e-9))
        throw NumericError("path re-summation drifted from the heap distance",
                           std::abs(res.time - res.heap_time));
    return res;
}

// ---------------------------------------------------------------------------
// Materialized domains for replication loops. The vertex set and adjacency
// are enumerated once; per-edge hash bases make any environment's weights a
// single mix away. Searches here replay the lazy version exactly: same
// frontier order, same tie handling, same re-summation.
// ---------------------------------------------------------------------------

class DomainGraph {
public:
    static DomainGraph build(const GroupModel& model, const Domain& domain,
                             const std::vector<Element>& seeds, size_t vertex_cap = 2000000) {
        DomainGraph g;
        g.model_ = &model;
        std::deque<uint32_t> queue;
        for (const auto& s : seeds) {
            if (!domain.contains(model, s))
                throw DomainError("domain graph seed lies outside the domain");
            if (g.index_.count(s)) continue;
            g.index_.emplace(s, uint32_t(g.verts_.size()));
            g.verts_.push_back(s);
            queue.push_back(uint32_t(g.verts_.size() - 1));
        }
        std::vector<std::vector<uint32_t>> adj;
        adj.resize(g.verts_.size());
        while (!queue.empty()) {
            uint32_t vi = queue.front();
            queue.pop_front();
            Element v = g.verts_[vi];
            for (size_t gi = 0; gi < model.generator_count(); ++gi) {
                Element n = model.apply(v, gi);
                if (!domain.contains(model, n)) continue;
                auto it = g.index_.find(n);
                uint32_t ni;
                if (it == g.index_.end()) {
                    if (g.verts_.size() >= vertex_cap)
                        throw ResourceError("domain graph exceeds the vertex cap of " +
                                            std::to_string(vertex_cap));
                    ni = uint32_t(g.verts_.size());
                    g.index_.emplace(n, ni);
                    g.verts_.push_back(n);
                    adj.resize(g.verts_.size());
                    queue.push_back(ni);
                } else {
                    ni = it->second;
                }
                adj[vi].push_back(ni);
            }
        }
        g.adj_start_.assign(g.verts_.size() + 1, 0);
        for (size_t i = 0; i < adj.size(); ++i) g.adj_start_[i + 1] = g.adj_start_[i] + uint32_t(adj[i].size());
        g.adj_to_.reserve(g.adj_start_.back());
        g.adj_base_.reserve(g.adj_start_.back());
        for (size_t i = 0; i < adj.size(); ++i)
            for (uint32_t ni : adj[i]) {
                g.adj_to_.push_back(ni);
                g.adj_base_.push_back(
                    Environment::edge_base(canonical_edge(model, g.verts_[i], g.verts_[ni])));
            }
        // Canonical-order ranks reproduce the lazy search's tie-breaking.
        std::vector<uint32_t> order(g.verts_.size());
        for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
            return g.verts_[a].compare(g.verts_[b]) < 0;
        });
        g.rank_.assign(g.verts_.size(), 0);
        for (uint32_t r = 0; r < order.size(); ++r) g.rank_[order[r]] = r;
        return g;
    }

    size_t size() const { return verts_.size(); }
    size_t edge_slots() const { return adj_to_.size(); }
    const Element& vertex(uint32_t i) const { return verts_[i]; }

    uint32_t index_of(const Element& v) const {
        auto it = index_.find(v);
        if (it == index_.end())
            throw DomainError("element is not a vertex of the materialized domain");
        return it->second;
    }

    bool contains(const Element& v) const { return index_.count(v) > 0; }

    PassageResult shortest(const Environment& env, uint32_t from, uint32_t to,
                           const PassageOptions& opts = {}) const {
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> dist(verts_.size(), inf);
        std::vector<uint32_t> pred(verts_.size(), uint32_t(-1));
        std::vector<char> done(verts_.size(), 0);
        struct Item {
            double dist;
            uint32_t rank;
            uint32_t v;
        };
        auto later = [](const Item& a, const Item& b) {
            if (a.dist != b.dist) return a.dist > b.dist;
            return a.rank > b.rank;
        };
        std::priority_queue<Item, std::vector<Item>, decltype(later)> heap(later);
        PassageResult res;
        dist[from] = 0;
        heap.push({0.0, rank_[from], from});
        while (!heap.empty()) {
            Item it = heap.top();
            heap.pop();
            if (done[it.v]) continue;
            done[it.v] = 1;
            ++res.settled;
            if (it.v == to) break;
            for (uint32_t k = adj_start_[it.v]; k < adj_start_[it.v + 1]; ++k) {
                uint32_t n = adj_to_[k];
                if (done[n]) continue;
                if (++res.relaxations > opts.max_relaxations)
                    throw ResourceError("passage search exceeded the relaxation budget of " +
                                        std::to_string(opts.max_relaxations));
                double nd = it.dist + env.weight_from_base(adj_base_[k]);
                if (dist[n] == inf) {
                    dist[n] = nd;
                    pred[n] = it.v;
                    heap.push({nd, rank_[n], n});
                } else if (nd < dist[n]) {
                    if (detail::near_equal(nd, dist[n], opts.near_tie_rtol)) res.near_tie = true;
                    dist[n] = nd;
                    pred[n] = it.v;
                    heap.push({nd, rank_[n], n});
                } else if (nd == dist[n]) {
                    res.near_tie = true;
                    if (pred[n] != uint32_t(-1) && verts_[it.v].compare(verts_[pred[n]]) < 0)
                        pred[n] = it.v;
                } else if (detail::near_equal(nd, dist[n], opts.near_tie_rtol)) {
                    res.near_tie = true;
                }
            }
        }
        if (!done[to])
            throw UnreachableError("no path inside the domain connects the endpoints");
        res.heap_time = dist[to];
        for (uint32_t cur = to;; cur = pred[cur]) {
            res.path.push_back(verts_[cur]);
            if (cur == from) break;
        }
        std::reverse(res.path.begin(), res.path.end());
        res.time = detail::canonical_path_time(res.path, [&](const Element& a, const Element& b) {
            return env.weight(*model_, a, b);
        });
        if (!detail::near_equal(res.time, res.heap_time, 1e-9))
            throw NumericError("path re-summation drifted from the heap distance",
                               std::abs(res.time - res.heap_time));
        return res;
    }

    PassageResult shortest(const Environment& env, const Element& from, const Element& to,
                           const PassageOptions& opts = {}) const {
        return shortest(env, index_of(from), index_of(to), opts);
    }

private:
    const GroupModel* model_ = nullptr;
    std::vector<Element> verts_;
    std::unordered_map<Element, uint32_t, ElementHash> index_;
    std::vector<uint32_t> adj_start_;
    std::vector<uint32_t> adj_to_;
    std::vector<uint64_t> adj_base_;
    std::vector<uint32_t> rank_;
};

} // namespace hypfpp
