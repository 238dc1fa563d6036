#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "hypfpp/errors.hpp"
#include "hypfpp/group.hpp"
#include "hypfpp/hashing.hpp"
#include "hypfpp/stats.hpp"

namespace hypfpp {

// ---------------------------------------------------------------------------
// Edge weight distributions: atomless laws on [0, infinity).
// ---------------------------------------------------------------------------

class WeightDistribution {
public:
    enum class Kind { uniform, bounded_away, exponential, truncated_gaussian };

    static WeightDistribution uniform(double lo, double hi) {
        if (!(lo >= 0 && hi > lo))
            throw ConfigError("uniform distribution needs 0 <= lo < hi");
        return WeightDistribution(Kind::uniform, lo, hi);
    }
    static WeightDistribution bounded_away(double lo, double hi) {
        if (!(lo > 0 && hi > lo))
            throw ConfigError("bounded-away distribution needs 0 < lo < hi");
        return WeightDistribution(Kind::bounded_away, lo, hi);
    }
    static WeightDistribution exponential(double rate) {
        if (!(rate > 0)) throw ConfigError("exponential distribution needs rate > 0");
        return WeightDistribution(Kind::exponential, rate, 0);
    }
    static WeightDistribution truncated_gaussian(double mean, double sd) {
        if (!(sd > 0)) throw ConfigError("truncated-gaussian distribution needs sd > 0");
        return WeightDistribution(Kind::truncated_gaussian, mean, sd);
    }

    Kind kind() const { return kind_; }

    std::string name() const {
        switch (kind_) {
            case Kind::uniform: return "uniform";
            case Kind::bounded_away: return "bounded-away";
            case Kind::exponential: return "exponential";
            case Kind::truncated_gaussian: return "truncated-gaussian";
        }
        return "?";
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::uniform:
            case Kind::bounded_away:
                return name() + "(" + std::to_string(p1_) + ", " + std::to_string(p2_) + ")";
            case Kind::exponential: return name() + "(rate=" + std::to_string(p1_) + ")";
            case Kind::truncated_gaussian:
                return name() + "(mean=" + std::to_string(p1_) + ", sd=" + std::to_string(p2_) + ")";
        }
        return "?";
    }

    // Exponential tails decay too slowly for the concentration machinery that
    // assumes sub-Gaussian weights; the law stays usable but callers should
    // surface this flag.
    bool subgaussian_tail() const { return kind_ != Kind::exponential; }

    bool bounded() const { return kind_ == Kind::uniform || kind_ == Kind::bounded_away; }

    double lower() const {
        switch (kind_) {
            case Kind::uniform:
            case Kind::bounded_away: return p1_;
            default: return 0.0;
        }
    }

    double upper() const {
        return bounded() ? p2_ : std::numeric_limits<double>::infinity();
    }

    double quantile(double u) const {
        if (!(u > 0 && u < 1)) throw DomainError("quantile needs u in (0, 1)");
        switch (kind_) {
            case Kind::uniform:
            case Kind::bounded_away: return p1_ + (p2_ - p1_) * u;
            case Kind::exponential: return -std::log1p(-u) / p1_;
            case Kind::truncated_gaussian: {
                double pa = normal_cdf(alpha_);
                return p1_ + p2_ * normal_quantile(pa + u * (1 - pa));
            }
        }
        return 0;
    }

    double cdf(double x) const {
        switch (kind_) {
            case Kind::uniform:
            case Kind::bounded_away:
                if (x <= p1_) return 0;
                if (x >= p2_) return 1;
                return (x - p1_) / (p2_ - p1_);
            case Kind::exponential: return x <= 0 ? 0.0 : -std::expm1(-p1_ * x);
            case Kind::truncated_gaussian: {
                if (x <= 0) return 0;
                double pa = normal_cdf(alpha_);
                return (normal_cdf((x - p1_) / p2_) - pa) / (1 - pa);
            }
        }
        return 0;
    }

    double pdf(double x) const {
        switch (kind_) {
            case Kind::uniform:
            case Kind::bounded_away:
                return (x < p1_ || x > p2_) ? 0.0 : 1.0 / (p2_ - p1_);
            case Kind::exponential: return x < 0 ? 0.0 : p1_ * std::exp(-p1_ * x);
            case Kind::truncated_gaussian: {
                if (x < 0) return 0;
                double pa = normal_cdf(alpha_);
                return normal_pdf((x - p1_) / p2_) / (p2_ * (1 - pa));
            }
        }
        return 0;
    }

    double mean() const {
        switch (kind_) {
            case Kind::uniform:
            case Kind::bounded_away: return (p1_ + p2_) / 2;
            case Kind::exponential: return 1 / p1_;
            case Kind::truncated_gaussian: {
                double z = 1 - normal_cdf(alpha_);
                return p1_ + p2_ * normal_pdf(alpha_) / z;
            }
        }
        return 0;
    }

    double variance() const {
        switch (kind_) {
            case Kind::uniform:
            case Kind::bounded_away: return (p2_ - p1_) * (p2_ - p1_) / 12.0;
            case Kind::exponential: return 1 / (p1_ * p1_);
            case Kind::truncated_gaussian: {
                double z = 1 - normal_cdf(alpha_);
                double h = normal_pdf(alpha_) / z;
                return p2_ * p2_ * (1 + alpha_ * h - h * h);
            }
        }
        return 0;
    }

private:
    WeightDistribution(Kind k, double p1, double p2) : kind_(k), p1_(p1), p2_(p2) {
        if (kind_ == Kind::truncated_gaussian) alpha_ = -p1_ / p2_;
    }

    Kind kind_;
    double p1_, p2_;
    double alpha_ = 0; // standardized truncation point for the gaussian
};

// Builds a distribution from a named descriptor, as config files supply it.
inline WeightDistribution make_distribution(const std::string& name,
                                            const std::map<std::string, double>& params) {
    auto get = [&](const char* key, const char* alt = nullptr) {
        auto it = params.find(key);
        if (it == params.end() && alt) it = params.find(alt);
        if (it == params.end())
            throw ConfigError("distribution '" + name + "' is missing parameter '" + key + "'");
        return it->second;
    };
    if (name == "uniform") return WeightDistribution::uniform(get("lo", "a"), get("hi", "b"));
    if (name == "bounded-away")
        return WeightDistribution::bounded_away(get("lo", "a"), get("hi", "b"));
    if (name == "exponential") return WeightDistribution::exponential(get("rate"));
    if (name == "truncated-gaussian")
        return WeightDistribution::truncated_gaussian(get("mean"), get("sd"));
    throw ConfigError("unknown distribution '" + name + "'");
}

// ---------------------------------------------------------------------------
// The random environment: an i.i.d. weight per undirected edge, realized as a
// pure function of (edge identity, seed) so lookups are reproducible and need
// no storage. Hashing the canonical edge bytes once gives a per-edge base
// that can be cached and combined with any seed later.
// ---------------------------------------------------------------------------

class Environment {
public:
    Environment(WeightDistribution dist, uint64_t seed)
        : dist_(std::move(dist)), seed_(seed),
          seed_mix_(seed * 0xBF58476D1CE4E5B9ULL + 0x94D049BB133111EBULL) {}

    uint64_t seed() const { return seed_; }
    const WeightDistribution& distribution() const { return dist_; }

    static uint64_t edge_base(const EdgeId& e) {
        auto b = e.bytes();
        return murmur64(b.data(), b.size(), kEdgeKey);
    }

    double weight_from_base(uint64_t base) const {
        double u = u01_from_bits(fmix64(base ^ seed_mix_));
        double w = dist_.quantile(u);
        if (truncated_) w = w < trunc_lo_ ? trunc_lo_ : (w > trunc_hi_ ? trunc_hi_ : w);
        return w;
    }

    double weight(const EdgeId& e) const { return weight_from_base(edge_base(e)); }

    double weight(const GroupModel& model, const Element& x, const Element& y) const {
        return weight(canonical_edge(model, x, y));
    }

    // The clamped environment: weights below eps rise to eps, weights above
    // cap drop to cap, everything between passes through unchanged.
    Environment truncated(double eps, double cap) const {
        if (!(eps > 0) || !(cap > eps))
            throw ConfigError("truncation needs 0 < eps < cap");
        Environment out = *this;
        out.truncated_ = true;
        out.trunc_lo_ = eps;
        out.trunc_hi_ = cap;
        return out;
    }

    bool is_truncated() const { return truncated_; }
    double truncation_lo() const { return trunc_lo_; }
    double truncation_hi() const { return trunc_hi_; }

private:
    static constexpr uint64_t kEdgeKey = 0xC2B2AE3D27D4EB4FULL;

    WeightDistribution dist_;
    uint64_t seed_;
    uint64_t seed_mix_;
    bool truncated_ = false;
    double trunc_lo_ = 0;
    double trunc_hi_ = std::numeric_limits<double>::infinity();
};

// Probability mass the clamp moves: P(w < eps) + P(w > cap).
inline double clamped_mass(const WeightDistribution& dist, double eps, double cap) {
    if (!(eps > 0) || !(cap > eps)) throw ConfigError("truncation needs 0 < eps < cap");
    return dist.cdf(eps) + (1 - dist.cdf(cap));
}

// E[min(X, Y1 + Y2)] for X, Y1, Y2 i.i.d. with this law, by nested quadrature
// of survival functions:
//   E = integral over t of P(X > t) P(Y1 + Y2 > t),
//   P(Y1 + Y2 <= t) = integral over y of F(t - y) dF(y).
// Kinks of piecewise densities are passed as explicit knots so the adaptive
// rule keeps its accuracy there.
inline double expected_min_vs_twofold_sum(const WeightDistribution& dist, double tol) {
    double lo = dist.lower();
    double hi = dist.bounded() ? dist.upper() : dist.quantile(1 - 1e-9);
    auto sum_cdf = [&](double t) {
        double a = std::max(lo, t - hi);
        double b = std::min(hi, t - lo);
        if (b <= a) return t >= 2 * hi ? 1.0 : 0.0;
        double v = integrate([&](double y) { return dist.cdf(t - y) * dist.pdf(y); }, a, b,
                             tol * 0.01, {t - lo, t - hi});
        return std::min(1.0, std::max(0.0, v));
    };
    double t_hi = hi; // min(X, .) <= X, so the X-survival kills the tail
    std::vector<double> knots{lo, 2 * lo, hi, 2 * hi, lo + hi};
    return integrate([&](double t) { return (1 - dist.cdf(t)) * (1 - sum_cdf(t)); }, 0.0, t_hi,
                     tol * 0.5, knots);
}

} // namespace hypfpp
