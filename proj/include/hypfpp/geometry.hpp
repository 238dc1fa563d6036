#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hypfpp/domain.hpp"
#include "hypfpp/errors.hpp"
#include "hypfpp/group.hpp"
#include "hypfpp/hashing.hpp"

namespace hypfpp {

// ---------------------------------------------------------------------------
// Gromov products and hyperbolicity estimation.
// ---------------------------------------------------------------------------

// (y . z)_x = (d(x,y) + d(x,z) - d(y,z)) / 2, a half-integer for word metrics.
inline double gromov_product(const GroupModel& model, const Element& x, const Element& y,
                             const Element& z) {
    return 0.5 * double(model.distance(x, y) + model.distance(x, z) - model.distance(y, z));
}

struct DeltaEstimate {
    double delta = 0;      // max observed four-point deficit
    uint64_t triples = 0;  // triples checked
    bool exhaustive = false;
    int64_t radius = 0;
};

// Estimates the hyperbolicity constant from the four-point condition
//   (y . z)_w >= min((y . u)_w, (u . z)_w) - delta
// with the base w pinned at the identity; left translations are isometries,
// so the supremum over all four points equals the supremum over triples
// against a fixed base. max_triples == 0 scans every triple in the ball,
// otherwise that many are sampled.
inline DeltaEstimate delta_estimate(const GroupModel& model, int64_t radius, uint64_t max_triples,
                                    uint64_t seed) {
    std::vector<Element> ball = model.ball(model.identity(), radius);
    size_t n = ball.size();
    DeltaEstimate est;
    est.radius = radius;
    est.exhaustive = max_triples == 0;
    if (est.exhaustive) {
        if (n > 3000)
            throw ResourceError("exhaustive hyperbolicity scan over " + std::to_string(n) +
                                " vertices; use sampling for balls this large");
        std::vector<int32_t> dist0(n);
        std::vector<std::vector<int32_t>> d(n, std::vector<int32_t>(n, 0));
        for (size_t i = 0; i < n; ++i) {
            dist0[i] = int32_t(model.word_length(ball[i]));
            for (size_t j = i + 1; j < n; ++j) {
                int32_t dij = int32_t(model.distance(ball[i], ball[j]));
                d[i][j] = dij;
                d[j][i] = dij;
            }
        }
        auto gp = [&](size_t i, size_t j) { return 0.5 * double(dist0[i] + dist0[j] - d[i][j]); };
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i; j < n; ++j) {
                double gij = gp(i, j);
                for (size_t k = 0; k < n; ++k) {
                    double m = std::min(gp(i, k), gp(k, j));
                    if (m - gij > est.delta) est.delta = m - gij;
                    ++est.triples;
                }
            }
    } else {
        SplitMix64 rng(seed);
        for (uint64_t t = 0; t < max_triples; ++t) {
            const Element& y = ball[rng.next() % n];
            const Element& z = ball[rng.next() % n];
            const Element& u = ball[rng.next() % n];
            double gyz = gromov_product(model, model.identity(), y, z);
            double m = std::min(gromov_product(model, model.identity(), y, u),
                                gromov_product(model, model.identity(), u, z));
            if (m - gyz > est.delta) est.delta = m - gyz;
            ++est.triples;
        }
    }
    return est;
}

// Checks the four-point condition with a given delta over sampled triples;
// returns the number of violations.
inline uint64_t four_point_violations(const GroupModel& model, int64_t radius, double delta,
                                      uint64_t triples, uint64_t seed) {
    std::vector<Element> ball = model.ball(model.identity(), radius);
    size_t n = ball.size();
    SplitMix64 rng(seed);
    uint64_t bad = 0;
    for (uint64_t t = 0; t < triples; ++t) {
        const Element& y = ball[rng.next() % n];
        const Element& z = ball[rng.next() % n];
        const Element& u = ball[rng.next() % n];
        double gyz = gromov_product(model, model.identity(), y, z);
        double m = std::min(gromov_product(model, model.identity(), y, u),
                            gromov_product(model, model.identity(), u, z));
        if (gyz < m - delta - 1e-9) ++bad;
    }
    return bad;
}

// ---------------------------------------------------------------------------
// Projections to a geodesic ray and the hyperplanes they induce.
// ---------------------------------------------------------------------------

struct ProjectionInfo {
    int64_t dist = 0; // d(x, ray)
    int64_t jmin = 0; // first index attaining the minimum
    int64_t jmax = 0; // last index attaining the minimum
};

inline ProjectionInfo project_to_ray(const GroupModel& model, const std::vector<Element>& ray,
                                     const Element& x) {
    if (ray.empty()) throw DomainError("projection needs a nonempty ray");
    ProjectionInfo info;
    info.dist = std::numeric_limits<int64_t>::max();
    for (size_t j = 0; j < ray.size(); ++j) {
        int64_t dj = model.distance(ray[j], x);
        if (dj < info.dist) {
            info.dist = dj;
            info.jmin = info.jmax = int64_t(j);
        } else if (dj == info.dist) {
            info.jmax = int64_t(j);
        }
    }
    return info;
}

// Ray length needed so projections of ball(1, R) vertices never touch the
// truncation end: beyond index 2R the distance to x already exceeds d(x, 1).
inline size_t ray_length_for_radius(int64_t work_radius) { return size_t(2 * work_radius + 4); }

// The scale-i hyperplane: vertices of the working ball whose projection set
// contains index i.
inline std::vector<Element> hyperplane(const GroupModel& model, const std::vector<Element>& ray,
                                       int64_t i, int64_t work_radius) {
    if (i < 0 || size_t(i) >= ray.size()) throw DomainError("hyperplane scale outside the ray");
    std::vector<Element> members;
    for (const Element& x : model.ball(model.identity(), work_radius)) {
        ProjectionInfo p = project_to_ray(model, ray, x);
        if (p.jmin <= i && i <= p.jmax) members.push_back(x);
    }
    return members;
}

enum class Side { minus, on, plus };

inline const char* side_name(Side s) {
    switch (s) {
        case Side::minus: return "minus";
        case Side::on: return "on";
        case Side::plus: return "plus";
    }
    return "?";
}

// Which side of the scale-i hyperplane x falls on, with a buffer soaking up
// the projection ambiguity hyperbolicity allows (2 delta is the natural
// choice).
inline Side half_space_side(const GroupModel& model, const std::vector<Element>& ray, int64_t i,
                            const Element& x, int64_t buffer) {
    ProjectionInfo p = project_to_ray(model, ray, x);
    if (p.jmax < i - buffer) return Side::minus;
    if (p.jmin > i + buffer) return Side::plus;
    return Side::on;
}

// ---------------------------------------------------------------------------
// Separation: removing the thickened hyperplane must disconnect the two
// sides inside the working ball.
// ---------------------------------------------------------------------------

struct SeparationReport {
    bool separated = false;
    size_t plus_count = 0;
    size_t minus_count = 0;
    size_t wall_count = 0; // removed vertices (sides "on" plus the thickening)
};

inline SeparationReport separation_check(const GroupModel& model, const std::vector<Element>& ray,
                                         int64_t i, int64_t work_radius, int64_t buffer,
                                         int64_t thickening) {
    std::vector<Element> ball = model.ball(model.identity(), work_radius);
    std::unordered_map<Element, uint32_t, ElementHash> index;
    for (uint32_t k = 0; k < ball.size(); ++k) index.emplace(ball[k], k);
    std::vector<Side> side(ball.size());
    std::vector<char> wall(ball.size(), 0);
    std::vector<uint32_t> on_verts;
    for (uint32_t k = 0; k < ball.size(); ++k) {
        side[k] = half_space_side(model, ray, i, ball[k], buffer);
        if (side[k] == Side::on) {
            wall[k] = 1;
            on_verts.push_back(k);
        }
    }
    // Thicken the wall by the requested radius inside the ball graph.
    std::deque<std::pair<uint32_t, int64_t>> q;
    for (uint32_t k : on_verts) q.push_back({k, 0});
    while (!q.empty()) {
        auto [v, depth] = q.front();
        q.pop_front();
        if (depth == thickening) continue;
        for (size_t gi = 0; gi < model.generator_count(); ++gi) {
            auto it = index.find(model.apply(ball[v], gi));
            if (it == index.end() || wall[it->second]) continue;
            wall[it->second] = 1;
            q.push_back({it->second, depth + 1});
        }
    }
    SeparationReport rep;
    for (uint32_t k = 0; k < ball.size(); ++k) {
        if (wall[k]) {
            ++rep.wall_count;
        } else if (side[k] == Side::plus) {
            ++rep.plus_count;
        } else {
            ++rep.minus_count;
        }
    }
    // BFS from every surviving minus vertex; reaching a plus vertex breaks
    // separation.
    std::vector<char> seen(ball.size(), 0);
    rep.separated = true;
    std::deque<uint32_t> bfs;
    for (uint32_t k = 0; k < ball.size(); ++k)
        if (!wall[k] && side[k] == Side::minus) {
            seen[k] = 1;
            bfs.push_back(k);
        }
    while (!bfs.empty() && rep.separated) {
        uint32_t v = bfs.front();
        bfs.pop_front();
        for (size_t gi = 0; gi < model.generator_count(); ++gi) {
            auto it = index.find(model.apply(ball[v], gi));
            if (it == index.end() || wall[it->second] || seen[it->second]) continue;
            if (side[it->second] == Side::plus) {
                rep.separated = false;
                break;
            }
            seen[it->second] = 1;
            bfs.push_back(it->second);
        }
    }
    return rep;
}

// Smallest D >= 1 at which the scale-(i+D) half space nests inside the
// scale-i one over the working ball: the walls are disjoint and everything
// beyond scale i+D also lies beyond scale i. Returns -1 when no D up to
// d_max qualifies.
inline int64_t nesting_threshold(const GroupModel& model, const std::vector<Element>& ray,
                                 int64_t i, int64_t d_max, int64_t work_radius, int64_t buffer) {
    std::vector<Element> ball = model.ball(model.identity(), work_radius);
    std::vector<ProjectionInfo> proj;
    proj.reserve(ball.size());
    for (const Element& x : ball) proj.push_back(project_to_ray(model, ray, x));
    auto side_at = [&](const ProjectionInfo& p, int64_t scale) {
        if (p.jmax < scale - buffer) return Side::minus;
        if (p.jmin > scale + buffer) return Side::plus;
        return Side::on;
    };
    for (int64_t D = 1; D <= d_max; ++D) {
        bool ok = true;
        for (const auto& p : proj) {
            Side lo = side_at(p, i), hi = side_at(p, i + D);
            if (lo == Side::on && hi == Side::on) { ok = false; break; }      // walls overlap
            if (hi == Side::plus && lo != Side::plus) { ok = false; break; }  // not nested
        }
        if (ok) return D;
    }
    return -1;
}

// ---------------------------------------------------------------------------
// Divergence: how far apart the hyperplanes at scales i and i+D are when
// paths must stay R away from the ray. Trees disconnect for any R >= 1;
// in general the detour length grows with R.
// ---------------------------------------------------------------------------

struct DivergenceReport {
    bool connected = false;
    int64_t detour_length = -1;
    size_t sources = 0;
    size_t targets = 0;
};

inline DivergenceReport divergence_profile(const GroupModel& model,
                                           const std::vector<Element>& ray, int64_t i, int64_t D,
                                           int64_t avoid_radius, int64_t work_radius) {
    std::vector<Element> ball = model.ball(model.identity(), work_radius);
    std::unordered_map<Element, uint32_t, ElementHash> index;
    for (uint32_t k = 0; k < ball.size(); ++k) index.emplace(ball[k], k);
    std::vector<char> allowed(ball.size(), 0);
    std::vector<char> target(ball.size(), 0);
    std::vector<int64_t> depth(ball.size(), -1);
    DivergenceReport rep;
    std::deque<uint32_t> q;
    for (uint32_t k = 0; k < ball.size(); ++k) {
        ProjectionInfo p = project_to_ray(model, ray, ball[k]);
        allowed[k] = p.dist >= avoid_radius;
        if (!allowed[k]) continue;
        bool in_src = p.jmin <= i && i <= p.jmax;
        bool in_tgt = p.jmin <= i + D && i + D <= p.jmax;
        if (in_tgt) {
            target[k] = 1;
            ++rep.targets;
        }
        if (in_src) {
            ++rep.sources;
            depth[k] = 0;
            q.push_back(k);
            if (in_tgt) {
                rep.connected = true;
                rep.detour_length = 0;
            }
        }
    }
    while (!q.empty() && !rep.connected) {
        uint32_t v = q.front();
        q.pop_front();
        for (size_t gi = 0; gi < model.generator_count(); ++gi) {
            auto it = index.find(model.apply(ball[v], gi));
            if (it == index.end() || !allowed[it->second] || depth[it->second] >= 0) continue;
            depth[it->second] = depth[v] + 1;
            if (target[it->second]) {
                rep.connected = true;
                rep.detour_length = depth[it->second];
                break;
            }
            q.push_back(it->second);
        }
    }
    return rep;
}

// The band between scales i and i+D: both walls plus everything strictly
// between them, packaged as a search domain.
inline Domain band_region(const GroupModel& model, std::vector<Element> ray, int64_t i, int64_t D,
                          int64_t buffer, int64_t bounding_radius) {
    if (D < 1) throw ConfigError("band region needs D >= 1");
    auto pred = [ray = std::move(ray), i, D, buffer](const GroupModel& m, const Element& x) {
        Side lo = half_space_side(m, ray, i, x, buffer);
        if (lo == Side::minus) return false;
        Side hi = half_space_side(m, ray, i + D, x, buffer);
        return hi != Side::plus;
    };
    return Domain::custom(std::move(pred), model.identity(), bounding_radius);
}

} // namespace hypfpp
