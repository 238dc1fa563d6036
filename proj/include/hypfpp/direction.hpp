#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "hypfpp/analysis.hpp"
#include "hypfpp/chain.hpp"
#include "hypfpp/errors.hpp"
#include "hypfpp/group.hpp"

namespace hypfpp {

// ---------------------------------------------------------------------------
// Boundary directions. A direction is realized as a geodesic ray from the
// identity: vertices v_0 = 1, v_1, ... with d(1, v_i) = i.
// ---------------------------------------------------------------------------

struct DirectionSpec {
    enum class Kind { pole, eventually_periodic, boundary_sample, explicit_ray };
    Kind kind = Kind::pole;
    Element periodic;               // w, for pole and eventually_periodic
    Element prefix;                 // u, for eventually_periodic
    uint64_t seed = 0;              // for boundary samples
    std::vector<Element> vertices;  // for explicit rays

    static DirectionSpec pole(Element w) {
        if (w.is_identity()) throw ConfigError("a pole direction needs a nontrivial element");
        DirectionSpec d;
        d.kind = Kind::pole;
        d.periodic = std::move(w);
        return d;
    }
    static DirectionSpec eventually_periodic(Element u, Element w) {
        if (w.is_identity())
            throw ConfigError("an eventually periodic direction needs a nontrivial period");
        DirectionSpec d;
        d.kind = Kind::eventually_periodic;
        d.prefix = std::move(u);
        d.periodic = std::move(w);
        return d;
    }
    static DirectionSpec boundary_sample(uint64_t seed) {
        DirectionSpec d;
        d.kind = Kind::boundary_sample;
        d.seed = seed;
        return d;
    }
    static DirectionSpec explicit_ray(std::vector<Element> vertices) {
        DirectionSpec d;
        d.kind = Kind::explicit_ray;
        d.vertices = std::move(vertices);
        return d;
    }
};

struct RealizedRay {
    std::vector<Element> vertices; // length L + 1, starting at the identity
    std::vector<size_t> labels;    // generator indices, length L
};

inline std::vector<Element> labels_to_vertices(const GroupModel& model, const Element& base,
                                               const std::vector<size_t>& labels) {
    std::vector<Element> verts{base};
    Element cur = base;
    for (size_t g : labels) {
        cur = model.apply(cur, g);
        verts.push_back(cur);
    }
    return verts;
}

namespace detail {

// Geodesic labels for prefix * periodic^N, N large enough that the first
// `length` labels have stabilized. The canonical words of u w^N converge to
// the ray toward the boundary point u w^infinity, and stabilization certifies
// the prefix is final. Note the canonical word need not repeat the letters of
// w verbatim: the geodesic toward b^infinity in a model with generator b^2
// walks through b^2 steps.
inline std::vector<size_t> stable_power_labels(const GroupModel& model, const Element& prefix,
                                               const Element& periodic, size_t length) {
    auto labels_for = [&](int64_t n) {
        Element target = prefix;
        Element pw = model.identity();
        for (int64_t i = 0; i < n; ++i) pw = model.multiply(pw, periodic);
        target = model.multiply(target, pw);
        return model.canonical_word(target);
    };
    int64_t n = std::max<int64_t>(4, int64_t(length));
    std::vector<size_t> prev = labels_for(n);
    for (int round = 0; round < 24; ++round) {
        n *= 2;
        std::vector<size_t> next = labels_for(n);
        if (prev.size() >= length && next.size() >= length &&
            std::equal(prev.begin(), prev.begin() + length, next.begin()))
            return {next.begin(), next.begin() + length};
        prev = std::move(next);
    }
    throw DomainError("direction did not stabilize: " + model.element_to_string(periodic) +
                      " may have too short an axis for the requested length");
}

} // namespace detail

inline RealizedRay realize_ray(const GroupModel& model, const DirectionSpec& spec, size_t length,
                               const AutomatonAnalysis* analysis = nullptr) {
    RealizedRay ray;
    switch (spec.kind) {
        case DirectionSpec::Kind::pole:
            ray.labels = detail::stable_power_labels(model, model.identity(), spec.periodic, length);
            break;
        case DirectionSpec::Kind::eventually_periodic:
            ray.labels = detail::stable_power_labels(model, spec.prefix, spec.periodic, length);
            break;
        case DirectionSpec::Kind::boundary_sample: {
            if (!analysis)
                throw ConfigError("sampling a boundary direction needs an analyzed automaton");
            SampledRay s = sample_ray(*analysis, length, spec.seed);
            ray.labels = std::move(s.labels);
            break;
        }
        case DirectionSpec::Kind::explicit_ray: {
            if (spec.vertices.size() < length + 1)
                throw ConfigError("explicit ray is shorter than the requested length");
            for (size_t i = 0; i + 1 <= length + 1 && i < spec.vertices.size(); ++i)
                ray.vertices.push_back(spec.vertices[i]);
            ray.vertices.resize(length + 1);
            for (size_t i = 0; i + 1 < ray.vertices.size(); ++i) {
                size_t label = size_t(-1);
                for (size_t g = 0; g < model.generator_count(); ++g)
                    if (model.apply(ray.vertices[i], g) == ray.vertices[i + 1]) {
                        label = g;
                        break;
                    }
                if (label == size_t(-1))
                    throw DomainError("explicit ray vertices " + std::to_string(i) + " and " +
                                      std::to_string(i + 1) + " are not adjacent");
                ray.labels.push_back(label);
            }
            for (size_t i = 0; i < ray.vertices.size(); ++i)
                if (model.distance(ray.vertices.front(), ray.vertices[i]) != int64_t(i))
                    throw DomainError("explicit ray is not geodesic at index " + std::to_string(i));
            return ray;
        }
    }
    ray.vertices = labels_to_vertices(model, model.identity(), ray.labels);
    for (size_t i = 0; i < ray.vertices.size(); ++i)
        if (model.word_length(ray.vertices[i]) != int64_t(i))
            throw DomainError("realized ray failed the geodesic check at index " +
                              std::to_string(i));
    return ray;
}

} // namespace hypfpp
