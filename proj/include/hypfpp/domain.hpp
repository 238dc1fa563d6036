#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hypfpp/errors.hpp"
#include "hypfpp/group.hpp"

namespace hypfpp {

// ---------------------------------------------------------------------------
// Search domains: vertex sets that restrict passage-time computations. Every
// domain carries a bounding ball so enumeration stays finite even for custom
// membership predicates.
// ---------------------------------------------------------------------------

class Domain {
public:
    enum class Kind { ball, cylinder, custom };

    static Domain ball(const GroupModel& model, Element center, int64_t radius) {
        if (radius < 0) throw ConfigError("ball domain needs radius >= 0");
        (void)model;
        Domain d;
        d.kind_ = Kind::ball;
        d.center_ = std::move(center);
        d.radius_ = radius;
        return d;
    }

    // The thickness-B neighborhood of the canonical word geodesic [x, y].
    static Domain cylinder(const GroupModel& model, const Element& x, const Element& y,
                           int64_t thickness) {
        if (thickness < 0) throw ConfigError("cylinder domain needs thickness >= 0");
        Domain d;
        d.kind_ = Kind::cylinder;
        d.base_path_ = model.word_geodesic(x, y);
        d.thickness_ = thickness;
        d.center_ = x;
        d.radius_ = model.distance(x, y) + thickness;
        return d;
    }

    // Same shape, but around an explicitly supplied geodesic path.
    static Domain cylinder_around(const GroupModel& model, std::vector<Element> path,
                                  int64_t thickness) {
        if (path.empty()) throw ConfigError("cylinder domain needs a nonempty base path");
        if (thickness < 0) throw ConfigError("cylinder domain needs thickness >= 0");
        Domain d;
        d.kind_ = Kind::cylinder;
        d.base_path_ = std::move(path);
        d.thickness_ = thickness;
        d.center_ = d.base_path_.front();
        d.radius_ = model.distance(d.base_path_.front(), d.base_path_.back()) + thickness;
        return d;
    }

    static Domain custom(std::function<bool(const GroupModel&, const Element&)> pred,
                         Element bounding_center, int64_t bounding_radius) {
        if (bounding_radius < 0) throw ConfigError("custom domain needs a bounding radius >= 0");
        Domain d;
        d.kind_ = Kind::custom;
        d.pred_ = std::move(pred);
        d.center_ = std::move(bounding_center);
        d.radius_ = bounding_radius;
        return d;
    }

    // The union of two domains, bounded by a ball around the first center.
    static Domain union_of(const GroupModel& model, Domain a, Domain b) {
        int64_t radius =
            std::max(a.radius_, model.distance(a.center_, b.center_) + b.radius_);
        Element center = a.center_;
        auto pred = [a = std::move(a), b = std::move(b)](const GroupModel& m, const Element& v) {
            return a.contains(m, v) || b.contains(m, v);
        };
        return custom(std::move(pred), std::move(center), radius);
    }

    Kind kind() const { return kind_; }
    const Element& bounding_center() const { return center_; }
    int64_t bounding_radius() const { return radius_; }
    const std::vector<Element>& base_path() const { return base_path_; }
    int64_t thickness() const { return thickness_; }

    bool contains(const GroupModel& model, const Element& v) const {
        switch (kind_) {
            case Kind::ball: return model.distance(center_, v) <= radius_;
            case Kind::cylinder: {
                // Base vertices sit at distance i from the front, so only
                // indices within thickness of d(front, v) can be close enough.
                int64_t dv = model.distance(base_path_.front(), v);
                int64_t lo = std::max<int64_t>(0, dv - thickness_);
                int64_t hi = std::min<int64_t>(int64_t(base_path_.size()) - 1, dv + thickness_);
                for (int64_t i = lo; i <= hi; ++i)
                    if (model.distance(base_path_[size_t(i)], v) <= thickness_) return true;
                return false;
            }
            case Kind::custom:
                if (model.distance(center_, v) > radius_) return false;
                return pred_(model, v);
        }
        return false;
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::ball:
                return "ball(radius=" + std::to_string(radius_) + ")";
            case Kind::cylinder:
                return "cylinder(thickness=" + std::to_string(thickness_) +
                       ", base_length=" + std::to_string(base_path_.size() - 1) + ")";
            case Kind::custom:
                return "custom(bounding_radius=" + std::to_string(radius_) + ")";
        }
        return "?";
    }

private:
    Kind kind_ = Kind::ball;
    Element center_;
    int64_t radius_ = 0;
    std::vector<Element> base_path_;
    int64_t thickness_ = 0;
    std::function<bool(const GroupModel&, const Element&)> pred_;
};

} // namespace hypfpp
