#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hypfpp/analysis.hpp"
#include "hypfpp/chain.hpp"
#include "hypfpp/direction.hpp"
#include "hypfpp/domain.hpp"
#include "hypfpp/environment.hpp"
#include "hypfpp/errors.hpp"
#include "hypfpp/geometry.hpp"
#include "hypfpp/group.hpp"
#include "hypfpp/passage.hpp"
#include "hypfpp/stats.hpp"

namespace hypfpp {

// ---------------------------------------------------------------------------
// Replication plumbing. Replications fan out to a worker pool; each writes
// only its own pre-sized slots, so results are identical for any worker
// count. The per-replication environment seed depends on the replication
// index alone.
// ---------------------------------------------------------------------------

inline void parallel_for(size_t count, int workers, const std::function<void(size_t)>& body) {
    if (workers <= 1) {
        for (size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::mutex error_mu;
    std::exception_ptr error;
    auto loop = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= count) return;
            {
                std::lock_guard<std::mutex> lk(error_mu);
                if (error) return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline Environment replication_environment(const WeightDistribution& dist, uint64_t master_seed,
                                           uint64_t rep) {
    return Environment(dist, mix_seed(master_seed, rep));
}

struct PassageSample {
    double time = 0;
    uint32_t hops = 0;
    uint32_t settled = 0;
    bool near_tie = false;
};

// One cylinder graph per target, seeded at both endpoints.
inline DomainGraph cylinder_graph(const GroupModel& model, const std::vector<Element>& base_path,
                                  int64_t thickness, size_t vertex_cap = 2000000) {
    Domain d = Domain::cylinder_around(model, base_path, thickness);
    return DomainGraph::build(model, d, {base_path.front(), base_path.back()}, vertex_cap);
}

inline std::vector<Element> ray_prefix(const RealizedRay& ray, int64_t n) {
    if (size_t(n) >= ray.vertices.size())
        throw DomainError("ray is shorter than the requested scale");
    return {ray.vertices.begin(), ray.vertices.begin() + n + 1};
}

namespace detail {

inline void check_increasing(const std::vector<int64_t>& ns) {
    if (ns.empty()) throw ConfigError("n grid must be nonempty");
    for (size_t i = 0; i + 1 < ns.size(); ++i)
        if (ns[i] >= ns[i + 1]) throw ConfigError("n grid must be strictly increasing");
    if (ns.front() < 1) throw ConfigError("n grid must start at 1 or above");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Velocity: E T_B(1, x_n) / n per n along one direction, with optional
// path-sum check (exact on trees and on bridge directions) and an optional
// spread report over boundary-sampled directions.
// ---------------------------------------------------------------------------

struct VelocityParams {
    DirectionSpec direction;
    std::vector<int64_t> n_values{10, 20, 30};
    int64_t cylinder = 2;
    size_t replications = 200;
    int workers = 1;
    uint64_t budget = 50000000;
    bool bridge_check = false;   // compare T against the base-path weight sum
    size_t nu_directions = 0;    // extra sampled directions for the constancy report
};

struct VelocityPerN {
    int64_t n = 0;
    double mean_time = 0;
    double se_time = 0;
    double velocity = 0;
    double velocity_se = 0;
};

struct DirectionVelocity {
    std::string label;
    double velocity = 0;
    double velocity_se = 0;
};

struct VelocityRecord {
    uint32_t rep = 0;
    int64_t n = 0;
    double time = 0;
    uint32_t hops = 0;
};

struct VelocityResult {
    std::vector<VelocityPerN> per_n;
    std::vector<double> cauchy_gaps;   // |v(n_{i+1}) - v(n_i)|
    double bridge_max_gap = -1;        // max |T - path sum|, -1 when unchecked
    std::vector<DirectionVelocity> nu_velocities;
    double nu_spread = 0;              // max - min sampled-direction velocity
    std::vector<VelocityRecord> records;
};

namespace detail {

struct MeanSe {
    double mean = 0, se = 0;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe m;
    m.mean = sample_mean(xs);
    m.se = xs.size() >= 2 ? std::sqrt(sample_variance(xs) / double(xs.size())) : 0.0;
    return m;
}

// Shared core: one direction, T_B(1, ray[n]) for each n and replication.
// Also reports the per-(rep,n) base-path weight sums when asked.
inline std::vector<std::vector<PassageSample>> direction_grid(
    const GroupModel& model, const RealizedRay& ray, const std::vector<int64_t>& ns,
    int64_t cylinder, const WeightDistribution& dist, uint64_t master_seed, size_t replications,
    int workers, uint64_t budget, std::vector<std::vector<double>>* path_sums = nullptr) {
    std::vector<DomainGraph> graphs;
    graphs.reserve(ns.size());
    for (int64_t n : ns) graphs.push_back(cylinder_graph(model, ray_prefix(ray, n), cylinder));
    std::vector<std::vector<PassageSample>> out(ns.size(),
                                                std::vector<PassageSample>(replications));
    if (path_sums)
        path_sums->assign(ns.size(), std::vector<double>(replications, 0.0));
    PassageOptions opts;
    opts.max_relaxations = budget;
    parallel_for(replications, workers, [&](size_t rep) {
        Environment env = replication_environment(dist, master_seed, rep);
        for (size_t ni = 0; ni < ns.size(); ++ni) {
            PassageResult r =
                graphs[ni].shortest(env, ray.vertices.front(), ray.vertices[size_t(ns[ni])], opts);
            out[ni][rep] = {r.time, uint32_t(r.hops()), uint32_t(r.settled), r.near_tie};
            if (path_sums) {
                double s = 0;
                for (int64_t i = 0; i < ns[ni]; ++i)
                    s += env.weight(model, ray.vertices[size_t(i)], ray.vertices[size_t(i) + 1]);
                (*path_sums)[ni][rep] = s;
            }
        }
    });
    return out;
}

} // namespace detail

inline VelocityResult velocity_experiment(const GroupModel& model,
                                          const AutomatonAnalysis* analysis,
                                          const WeightDistribution& dist, uint64_t master_seed,
                                          const VelocityParams& p) {
    detail::check_increasing(p.n_values);
    if (p.replications < 2) throw ConfigError("velocity experiment needs replications >= 2");
    int64_t n_max = p.n_values.back();
    RealizedRay ray = realize_ray(model, p.direction, size_t(n_max), analysis);

    VelocityResult res;
    std::vector<std::vector<double>> path_sums;
    auto grid = detail::direction_grid(model, ray, p.n_values, p.cylinder, dist, master_seed,
                                       p.replications, p.workers, p.budget,
                                       p.bridge_check ? &path_sums : nullptr);

    res.records.resize(p.n_values.size() * p.replications);
    for (size_t ni = 0; ni < p.n_values.size(); ++ni) {
        std::vector<double> times(p.replications);
        for (size_t r = 0; r < p.replications; ++r) {
            times[r] = grid[ni][r].time;
            res.records[r * p.n_values.size() + ni] = {uint32_t(r), p.n_values[ni],
                                                       grid[ni][r].time, grid[ni][r].hops};
        }
        auto ms = detail::mean_se(times);
        double n = double(p.n_values[ni]);
        res.per_n.push_back({p.n_values[ni], ms.mean, ms.se, ms.mean / n, ms.se / n});
    }
    for (size_t i = 0; i + 1 < res.per_n.size(); ++i)
        res.cauchy_gaps.push_back(std::abs(res.per_n[i + 1].velocity - res.per_n[i].velocity));

    if (p.bridge_check) {
        res.bridge_max_gap = 0;
        for (size_t ni = 0; ni < p.n_values.size(); ++ni)
            for (size_t r = 0; r < p.replications; ++r)
                res.bridge_max_gap =
                    std::max(res.bridge_max_gap, std::abs(grid[ni][r].time - path_sums[ni][r]));
    }

    if (p.nu_directions > 0) {
        if (!analysis)
            throw ConfigError("sampled-direction comparison needs an analyzed automaton");
        std::vector<int64_t> only_max{n_max};
        for (size_t k = 0; k < p.nu_directions; ++k) {
            DirectionSpec d = DirectionSpec::boundary_sample(mix_seed(master_seed ^ 0xA11CE5EEDULL, k));
            RealizedRay nu_ray = realize_ray(model, d, size_t(n_max), analysis);
            auto g = detail::direction_grid(model, nu_ray, only_max, p.cylinder, dist, master_seed,
                                            p.replications, p.workers, p.budget);
            std::vector<double> times(p.replications);
            for (size_t r = 0; r < p.replications; ++r) times[r] = g[0][r].time;
            auto ms = detail::mean_se(times);
            res.nu_velocities.push_back(
                {"nu" + std::to_string(k), ms.mean / double(n_max), ms.se / double(n_max)});
        }
        double lo = res.nu_velocities.front().velocity, hi = lo;
        for (const auto& dv : res.nu_velocities) {
            lo = std::min(lo, dv.velocity);
            hi = std::max(hi, dv.velocity);
        }
        res.nu_spread = hi - lo;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Restricted-velocity curves over the cylinder width B, with the per
// replication monotonicity check and the excess-fraction table
// P(T_B >= T_ref + eps n) against the widest feasible reference domain.
// ---------------------------------------------------------------------------

struct BVelocityParams {
    DirectionSpec direction;
    std::vector<int64_t> n_values{10, 20, 30};
    std::vector<int64_t> b_values{1, 2, 3, 4};
    int64_t fraction_b = -1;     // B used in the excess fraction; -1 = max of b_values
    int64_t reference_b = -1;    // -1 = widest B whose graph fits vertex_budget
    size_t vertex_budget = 150000;
    double epsilon = 0.05;
    size_t replications = 300;
    int workers = 1;
    uint64_t budget = 50000000;
};

struct BVelocityCell {
    int64_t n = 0;
    int64_t b = 0;
    double mean_time = 0;
    double se_time = 0;
};

struct BVelocityRecord {
    uint32_t rep = 0;
    int64_t n = 0;
    std::vector<double> times; // aligned with b_values
    double ref_time = 0;
};

struct BVelocityResult {
    std::vector<BVelocityCell> cells;
    int64_t reference_b = 0;
    std::string reference_domain;
    std::vector<std::pair<int64_t, double>> excess_fractions; // (n, fraction) at fraction_b
    size_t monotonicity_violations = 0;
    std::vector<BVelocityRecord> records;
};

inline BVelocityResult b_velocity_experiment(const GroupModel& model,
                                             const AutomatonAnalysis* analysis,
                                             const WeightDistribution& dist, uint64_t master_seed,
                                             const BVelocityParams& p) {
    detail::check_increasing(p.n_values);
    if (p.b_values.empty()) throw ConfigError("B grid must be nonempty");
    for (size_t i = 0; i + 1 < p.b_values.size(); ++i)
        if (p.b_values[i] >= p.b_values[i + 1])
            throw ConfigError("B grid must be strictly increasing");
    int64_t n_max = p.n_values.back();
    RealizedRay ray = realize_ray(model, p.direction, size_t(n_max), analysis);

    int64_t fraction_b = p.fraction_b > 0 ? p.fraction_b : p.b_values.back();
    if (std::find(p.b_values.begin(), p.b_values.end(), fraction_b) == p.b_values.end())
        throw ConfigError("fraction_b must be one of the B grid values");

    // Reference width: the widest cylinder whose vertex count stays within
    // budget at the largest n. A true ball containing x_n has radius >= n and
    // is hopeless beyond toy scales, so the reference domain is this cylinder
    // and the manifest says so.
    int64_t ref_b = p.reference_b;
    if (ref_b < 0) {
        ref_b = p.b_values.back();
        for (int64_t cand = p.b_values.back() + 1;; ++cand) {
            size_t per_vertex = model.ball(model.identity(), cand).size();
            if (per_vertex * size_t(n_max + 1) > p.vertex_budget) break;
            ref_b = cand;
            if (cand > p.b_values.back() + 8) break; // wide enough; keep builds bounded
        }
    }
    if (ref_b < p.b_values.back())
        throw ConfigError("reference width is narrower than the widest tested B");

    std::vector<int64_t> widths = p.b_values;
    widths.push_back(ref_b);
    // graphs[ni][bi]
    std::vector<std::vector<DomainGraph>> graphs(p.n_values.size());
    for (size_t ni = 0; ni < p.n_values.size(); ++ni) {
        auto base = ray_prefix(ray, p.n_values[ni]);
        for (int64_t b : widths) graphs[ni].push_back(cylinder_graph(model, base, b));
    }

    BVelocityResult res;
    res.reference_b = ref_b;
    res.reference_domain = "cylinder(B=" + std::to_string(ref_b) + ")";
    res.records.assign(p.replications * p.n_values.size(), {});
    PassageOptions opts;
    opts.max_relaxations = p.budget;
    std::atomic<size_t> mono_violations{0};
    parallel_for(p.replications, p.workers, [&](size_t rep) {
        Environment env = replication_environment(dist, master_seed, rep);
        for (size_t ni = 0; ni < p.n_values.size(); ++ni) {
            BVelocityRecord& rec = res.records[rep * p.n_values.size() + ni];
            rec.rep = uint32_t(rep);
            rec.n = p.n_values[ni];
            rec.times.resize(p.b_values.size());
            const Element& from = ray.vertices.front();
            const Element& to = ray.vertices[size_t(p.n_values[ni])];
            double prev = std::numeric_limits<double>::infinity();
            for (size_t bi = 0; bi < widths.size(); ++bi) {
                double t = graphs[ni][bi].shortest(env, from, to, opts).time;
                if (bi < p.b_values.size()) {
                    rec.times[bi] = t;
                } else {
                    rec.ref_time = t;
                }
                if (t > prev) mono_violations.fetch_add(1);
                prev = t;
            }
        }
    });
    res.monotonicity_violations = mono_violations.load();

    for (size_t ni = 0; ni < p.n_values.size(); ++ni) {
        for (size_t bi = 0; bi < p.b_values.size(); ++bi) {
            std::vector<double> times(p.replications);
            for (size_t r = 0; r < p.replications; ++r)
                times[r] = res.records[r * p.n_values.size() + ni].times[bi];
            auto ms = detail::mean_se(times);
            res.cells.push_back({p.n_values[ni], p.b_values[bi], ms.mean, ms.se});
        }
        size_t fb_index =
            size_t(std::find(p.b_values.begin(), p.b_values.end(), fraction_b) - p.b_values.begin());
        size_t exceed = 0;
        for (size_t r = 0; r < p.replications; ++r) {
            const auto& rec = res.records[r * p.n_values.size() + ni];
            if (rec.times[fb_index] >= rec.ref_time + p.epsilon * double(p.n_values[ni])) ++exceed;
        }
        res.excess_fractions.push_back({p.n_values[ni], double(exceed) / double(p.replications)});
    }
    return res;
}

// ---------------------------------------------------------------------------
// Coarse-grained velocity: segment times along aligned scale-k blocks of a
// ray, their running Cesaro averages, and the independent cross-check
// sum over words of f_w * E T_B(1, e(w)).
// ---------------------------------------------------------------------------

struct CoarseGrainParams {
    DirectionSpec direction;
    int64_t scale = 2;
    int64_t blocks = 20;
    int64_t cylinder = 2;
    size_t replications = 200;
    size_t crosscheck_replications = 200;
    int workers = 1;
    uint64_t budget = 50000000;
};

struct CoarseGrainRecord {
    uint32_t rep = 0;
    int64_t block = 0;
    double time = 0;
};

struct CoarseGrainResult {
    double cesaro_mean = 0;
    double cesaro_se = 0;
    std::vector<double> running_cesaro;  // averaged over replications, per block count
    double crosscheck_value = 0;
    double crosscheck_se = 0;
    size_t words_used = 0;
    std::vector<CoarseGrainRecord> records;
};

inline CoarseGrainResult coarse_grain_velocity(const GroupModel& model,
                                               const AutomatonAnalysis& analysis,
                                               const WeightDistribution& dist,
                                               uint64_t master_seed, const CoarseGrainParams& p) {
    if (p.scale < 1) throw ConfigError("scale must be >= 1");
    if (p.scale % analysis.comps.d != 0)
        throw DomainError("scale " + std::to_string(p.scale) +
                          " is not a multiple of the automaton period " +
                          std::to_string(analysis.comps.d));
    if (p.blocks < 1) throw ConfigError("blocks must be >= 1");
    int64_t length = p.scale * p.blocks;
    RealizedRay ray = realize_ray(model, p.direction, size_t(length), &analysis);

    // One graph per segment, reused across replications.
    std::vector<DomainGraph> graphs;
    graphs.reserve(size_t(p.blocks));
    for (int64_t b = 0; b < p.blocks; ++b) {
        std::vector<Element> seg(ray.vertices.begin() + b * p.scale,
                                 ray.vertices.begin() + (b + 1) * p.scale + 1);
        graphs.push_back(cylinder_graph(model, seg, p.cylinder));
    }

    CoarseGrainResult res;
    res.records.assign(p.replications * size_t(p.blocks), {});
    PassageOptions opts;
    opts.max_relaxations = p.budget;
    parallel_for(p.replications, p.workers, [&](size_t rep) {
        Environment env = replication_environment(dist, master_seed, rep);
        for (int64_t b = 0; b < p.blocks; ++b) {
            const Element& from = ray.vertices[size_t(b * p.scale)];
            const Element& to = ray.vertices[size_t((b + 1) * p.scale)];
            double t = graphs[size_t(b)].shortest(env, from, to, opts).time;
            res.records[rep * size_t(p.blocks) + size_t(b)] = {uint32_t(rep), b, t};
        }
    });

    std::vector<double> cesaro(p.replications);
    res.running_cesaro.assign(size_t(p.blocks), 0.0);
    for (size_t rep = 0; rep < p.replications; ++rep) {
        double acc = 0;
        for (int64_t b = 0; b < p.blocks; ++b) {
            acc += res.records[rep * size_t(p.blocks) + size_t(b)].time;
            res.running_cesaro[size_t(b)] += acc / double(b + 1);
        }
        cesaro[rep] = acc / double(p.blocks);
    }
    for (double& v : res.running_cesaro) v /= double(p.replications);
    auto ms = detail::mean_se(cesaro);
    res.cesaro_mean = ms.mean;
    res.cesaro_se = ms.se;

    // Independent side: enumerate the recurrent scale-k blocks, turn each
    // state block back into its label word, and weight fresh segment
    // estimates at the identity by the stationary frequencies.
    TupleChain chain = k_tuple_chain(analysis, int(p.scale));
    if (!chain.unique_recurrent)
        throw DomainError("coarse-graining needs a unique recurrent block class");
    auto target = detail::label_target_map(analysis, model);
    std::vector<int64_t> label_of_state(analysis.aut.state_count(), -1);
    for (size_t g = 0; g < target.size(); ++g)
        if (target[g] >= 0) label_of_state[size_t(target[g])] = int64_t(g);

    double value = 0, var = 0;
    size_t words = 0;
    for (size_t ti = 0; ti < chain.tuples.size(); ++ti) {
        if (chain.pi[ti] <= 0) continue;
        std::vector<size_t> word;
        for (uint32_t s : chain.tuples[ti]) {
            if (label_of_state[s] < 0)
                throw DomainError("block state has no unique generator label");
            word.push_back(size_t(label_of_state[s]));
        }
        Element e = model.identity();
        std::vector<Element> base{e};
        for (size_t g : word) {
            e = model.apply(e, g);
            base.push_back(e);
        }
        DomainGraph g = cylinder_graph(model, base, p.cylinder);
        std::vector<double> times(p.crosscheck_replications);
        parallel_for(p.crosscheck_replications, p.workers, [&](size_t rep) {
            Environment env =
                replication_environment(dist, master_seed ^ 0xCC0FFEEULL, rep);
            times[rep] = g.shortest(env, base.front(), base.back(), opts).time;
        });
        auto wms = detail::mean_se(times);
        value += chain.pi[ti] * wms.mean;
        var += chain.pi[ti] * chain.pi[ti] * wms.se * wms.se;
        ++words;
    }
    res.crosscheck_value = value;
    res.crosscheck_se = std::sqrt(var);
    res.words_used = words;
    return res;
}

// ---------------------------------------------------------------------------
// Frequencies: one long sampled ray versus the stationary block predictions.
// ---------------------------------------------------------------------------

struct FrequencyParams {
    size_t ray_length = 100000;
    size_t max_word_len = 2;
    double tolerance = 0.02;
    std::vector<std::vector<size_t>> extra_words; // checked in addition to the enumeration
};

struct FrequencyRow {
    std::string word;
    size_t length = 0;
    double predicted = 0;
    double empirical = 0;
    double abs_diff = 0;
};

struct FrequencyResult {
    std::vector<FrequencyRow> rows;
    double max_diff_admissible = 0; // over rows with predicted > 0
    size_t admissible_count = 0;
    double tolerance = 0;
};

inline FrequencyResult frequency_experiment(const GroupModel& model,
                                            const AutomatonAnalysis& analysis,
                                            uint64_t master_seed, const FrequencyParams& p) {
    if (p.max_word_len < 1) throw ConfigError("max word length must be >= 1");
    if (p.max_word_len > 4)
        throw ConfigError("word enumeration beyond length 4 is not supported; pass explicit words");
    SampledRay ray = sample_ray(analysis, p.ray_length, mix_seed(master_seed, 0x5EEDF00DULL));

    FrequencyResult res;
    res.tolerance = p.tolerance;
    std::vector<std::vector<size_t>> words;
    std::vector<size_t> cur;
    std::function<void(size_t)> enumerate = [&](size_t depth) {
        if (!cur.empty()) words.push_back(cur);
        if (depth == p.max_word_len) return;
        for (size_t g = 0; g < model.generator_count(); ++g) {
            cur.push_back(g);
            enumerate(depth + 1);
            cur.pop_back();
        }
    };
    enumerate(0);
    for (const auto& w : p.extra_words) words.push_back(w);

    std::vector<TupleChain> chains;
    size_t max_len = p.max_word_len;
    for (const auto& w : p.extra_words) max_len = std::max(max_len, w.size());
    for (size_t k = 1; k <= max_len; ++k) chains.push_back(k_tuple_chain(analysis, int(k)));

    for (const auto& w : words) {
        FrequencyRow row;
        row.length = w.size();
        for (size_t i = 0; i < w.size(); ++i)
            row.word += (i ? " " : "") + model.generator(w[i]).name;
        row.predicted = predicted_frequency(analysis, model, w, &chains[w.size() - 1]);
        row.empirical = empirical_frequency(ray.labels, w);
        row.abs_diff = std::abs(row.predicted - row.empirical);
        if (row.predicted > 0) {
            ++res.admissible_count;
            res.max_diff_admissible = std::max(res.max_diff_admissible, row.abs_diff);
        }
        res.rows.push_back(std::move(row));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Direction diagnostics: Gromov-product growth along omega-geodesics and the
// midpoint passage statistic for opposite-direction pairs.
// ---------------------------------------------------------------------------

struct DirectionParams {
    DirectionSpec ray_direction;      // part (a)
    DirectionSpec toward;             // part (b) first endpoint direction
    DirectionSpec backward;           // part (b) second endpoint direction
    std::vector<int64_t> n_values{10, 20, 30};
    int64_t cylinder = 2;
    size_t replications = 100;
    int workers = 1;
    uint64_t budget = 50000000;
};

struct DirectionRecord {
    uint32_t rep = 0;
    int64_t n = 0;
    double r_omega = 0; // min distance of the omega-geodesic from the basepoint
};

struct DirectionResult {
    // Part (a): min Gromov product over pairs in the tail fraction of the path.
    std::vector<double> tail_fractions{0.25, 0.5, 0.75};
    std::vector<double> min_tail_products; // averaged over replications
    // Part (b): R_omega distribution per n.
    std::vector<DirectionRecord> records;
    std::vector<std::pair<int64_t, double>> r_omega_max;  // per n
    std::vector<std::pair<int64_t, double>> r_omega_q90;  // per n
};

inline DirectionResult direction_experiment(const GroupModel& model,
                                            const AutomatonAnalysis* analysis,
                                            const WeightDistribution& dist, uint64_t master_seed,
                                            const DirectionParams& p) {
    detail::check_increasing(p.n_values);
    int64_t n_max = p.n_values.back();
    RealizedRay ray = realize_ray(model, p.ray_direction, size_t(n_max), analysis);
    RealizedRay fwd = realize_ray(model, p.toward, size_t(n_max), analysis);
    RealizedRay bwd = realize_ray(model, p.backward, size_t(n_max), analysis);

    DirectionResult res;
    PassageOptions opts;
    opts.max_relaxations = p.budget;

    // Part (a): omega-geodesic to ray[n_max]; Gromov products against the
    // basepoint along its vertex sequence.
    {
        DomainGraph g = cylinder_graph(model, ray_prefix(ray, n_max), p.cylinder);
        std::vector<std::vector<double>> mins(p.replications,
                                              std::vector<double>(res.tail_fractions.size(), 0));
        parallel_for(p.replications, p.workers, [&](size_t rep) {
            Environment env = replication_environment(dist, master_seed, rep);
            PassageResult r =
                g.shortest(env, ray.vertices.front(), ray.vertices[size_t(n_max)], opts);
            size_t L = r.path.size();
            for (size_t fi = 0; fi < res.tail_fractions.size(); ++fi) {
                size_t start = size_t(double(L) * res.tail_fractions[fi]);
                double mn = std::numeric_limits<double>::infinity();
                for (size_t a = start; a < L; ++a)
                    for (size_t b = a + 1; b < L; ++b)
                        mn = std::min(mn, gromov_product(model, model.identity(), r.path[a],
                                                         r.path[b]));
                mins[rep][fi] = std::isfinite(mn) ? mn : double(n_max);
            }
        });
        for (size_t fi = 0; fi < res.tail_fractions.size(); ++fi) {
            double s = 0;
            for (size_t rep = 0; rep < p.replications; ++rep) s += mins[rep][fi];
            res.min_tail_products.push_back(s / double(p.replications));
        }
    }

    // Part (b): omega-geodesics between opposite endpoints; how close they
    // come to the basepoint.
    res.records.assign(p.replications * p.n_values.size(), {});
    std::vector<DomainGraph> graphs;
    for (int64_t n : p.n_values) {
        std::vector<Element> base;
        for (int64_t i = n; i >= 1; --i) base.push_back(bwd.vertices[size_t(i)]);
        for (int64_t i = 0; i <= n; ++i) base.push_back(fwd.vertices[size_t(i)]);
        graphs.push_back(cylinder_graph(model, base, p.cylinder));
    }
    parallel_for(p.replications, p.workers, [&](size_t rep) {
        Environment env = replication_environment(dist, master_seed, rep);
        for (size_t ni = 0; ni < p.n_values.size(); ++ni) {
            int64_t n = p.n_values[ni];
            PassageResult r = graphs[ni].shortest(env, bwd.vertices[size_t(n)],
                                                  fwd.vertices[size_t(n)], opts);
            int64_t best = std::numeric_limits<int64_t>::max();
            for (const Element& v : r.path) best = std::min(best, model.word_length(v));
            res.records[rep * p.n_values.size() + ni] = {uint32_t(rep), n, double(best)};
        }
    });
    for (size_t ni = 0; ni < p.n_values.size(); ++ni) {
        std::vector<double> rs(p.replications);
        for (size_t rep = 0; rep < p.replications; ++rep)
            rs[rep] = res.records[rep * p.n_values.size() + ni].r_omega;
        res.r_omega_max.push_back({p.n_values[ni], *std::max_element(rs.begin(), rs.end())});
        res.r_omega_q90.push_back({p.n_values[ni], empirical_quantile(rs, 0.9)});
    }
    return res;
}

// ---------------------------------------------------------------------------
// Coalescence: omega-geodesics from two basepoints toward the same horizon
// vertex in a shared environment and a shared union-cylinder domain.
// ---------------------------------------------------------------------------

struct CoalescenceParams {
    Element o1, o2;
    DirectionSpec direction;
    std::vector<int64_t> n_values{10, 20, 40};
    int64_t cylinder = 3;
    size_t replications = 200;
    int workers = 1;
    uint64_t budget = 50000000;
    int64_t block_d = 5;          // D for the per-block shared-edge counts
    double gate_fraction = 0.95;  // calibrated by pilot runs, echoed in manifests
};

struct CoalescenceRecord {
    uint32_t rep = 0;
    int64_t n = 0;
    int64_t first_meet = -1;     // index in the o1-path of the first common vertex
    int64_t merge_index = -1;    // first common vertex whose suffixes coincide
    bool suffix_coincident = false;
    bool coalesced = false;      // merged strictly before the horizon vertex
    double min_block_share = -1; // min shared-edge count over complete D-blocks past merge
};

struct CoalescenceResult {
    std::vector<CoalescenceRecord> records;
    std::vector<std::pair<int64_t, double>> fraction_per_n;
    bool fractions_nondecreasing = true;
    double worst_block_share = -1; // min over records with a defined block share
    int64_t block_d = 0;
};

inline CoalescenceResult coalescence_experiment(const GroupModel& model,
                                                const AutomatonAnalysis* analysis,
                                                const WeightDistribution& dist,
                                                uint64_t master_seed,
                                                const CoalescenceParams& p) {
    detail::check_increasing(p.n_values);
    int64_t n_max = p.n_values.back();
    RealizedRay ray = realize_ray(model, p.direction, size_t(n_max), analysis);

    std::vector<DomainGraph> graphs;
    for (int64_t n : p.n_values) {
        Element target = ray.vertices[size_t(n)];
        Domain d1 = Domain::cylinder(model, p.o1, target, p.cylinder);
        Domain d2 = Domain::cylinder(model, p.o2, target, p.cylinder);
        Domain shared = Domain::union_of(model, d1, d2);
        graphs.push_back(DomainGraph::build(model, shared, {p.o1, p.o2, target}));
    }

    CoalescenceResult res;
    res.block_d = p.block_d;
    res.records.assign(p.replications * p.n_values.size(), {});
    PassageOptions opts;
    opts.max_relaxations = p.budget;
    parallel_for(p.replications, p.workers, [&](size_t rep) {
        Environment env = replication_environment(dist, master_seed, rep);
        for (size_t ni = 0; ni < p.n_values.size(); ++ni) {
            int64_t n = p.n_values[ni];
            const Element& target = ray.vertices[size_t(n)];
            PassageResult r1 = graphs[ni].shortest(env, p.o1, target, opts);
            PassageResult r2 = graphs[ni].shortest(env, p.o2, target, opts);
            CoalescenceRecord rec;
            rec.rep = uint32_t(rep);
            rec.n = n;

            std::unordered_map<Element, size_t, ElementHash> pos2;
            for (size_t j = 0; j < r2.path.size(); ++j) pos2.emplace(r2.path[j], j);
            for (size_t i = 0; i < r1.path.size(); ++i) {
                auto it = pos2.find(r1.path[i]);
                if (it == pos2.end()) continue;
                if (rec.first_meet < 0) rec.first_meet = int64_t(i);
                size_t j = it->second;
                if (r1.path.size() - i == r2.path.size() - j &&
                    std::equal(r1.path.begin() + i, r1.path.end(), r2.path.begin() + j)) {
                    rec.merge_index = int64_t(i);
                    rec.suffix_coincident = true;
                    break;
                }
            }
            rec.coalesced =
                rec.suffix_coincident && r1.path[size_t(rec.merge_index)] != target;

            // Shared-edge counts per D-block of distance from the identity,
            // over complete blocks past the merge point.
            if (rec.coalesced && p.block_d > 0) {
                auto edge_key = [](const Element& a, const Element& b) {
                    uint64_t ha = a.hash(), hb = b.hash();
                    if (hb < ha) std::swap(ha, hb);
                    return fmix64(ha ^ (hb * 0x9E3779B97F4A7C15ULL));
                };
                std::unordered_set<uint64_t> edges2;
                for (size_t j = 0; j + 1 < r2.path.size(); ++j)
                    edges2.insert(edge_key(r2.path[j], r2.path[j + 1]));
                int64_t merge_depth = model.word_length(r1.path[size_t(rec.merge_index)]);
                int64_t first_block = merge_depth / p.block_d + 1;
                int64_t last_block = n / p.block_d - 1;
                if (last_block >= first_block) {
                    std::vector<int64_t> share(size_t(last_block - first_block + 1), 0);
                    for (size_t i = 0; i + 1 < r1.path.size(); ++i) {
                        if (!edges2.count(edge_key(r1.path[i], r1.path[i + 1]))) continue;
                        int64_t depth = std::min(model.word_length(r1.path[i]),
                                                 model.word_length(r1.path[i + 1]));
                        int64_t blk = depth / p.block_d;
                        if (blk >= first_block && blk <= last_block)
                            ++share[size_t(blk - first_block)];
                    }
                    rec.min_block_share =
                        double(*std::min_element(share.begin(), share.end()));
                }
            }
            res.records[rep * p.n_values.size() + ni] = rec;
        }
    });

    for (size_t ni = 0; ni < p.n_values.size(); ++ni) {
        size_t hit = 0;
        for (size_t rep = 0; rep < p.replications; ++rep)
            if (res.records[rep * p.n_values.size() + ni].coalesced) ++hit;
        res.fraction_per_n.push_back({p.n_values[ni], double(hit) / double(p.replications)});
    }
    for (size_t i = 0; i + 1 < res.fraction_per_n.size(); ++i)
        if (res.fraction_per_n[i + 1].second < res.fraction_per_n[i].second)
            res.fractions_nondecreasing = false;
    for (const auto& rec : res.records)
        if (rec.min_block_share >= 0)
            res.worst_block_share = res.worst_block_share < 0
                                        ? rec.min_block_share
                                        : std::min(res.worst_block_share, rec.min_block_share);
    return res;
}

// ---------------------------------------------------------------------------
// Variance growth: Var T_B(1, x_n) against n, with bootstrap intervals, the
// least-squares line, and the path-length bound ratio.
// ---------------------------------------------------------------------------

struct VarianceParams {
    DirectionSpec direction;
    std::vector<int64_t> n_values{10, 20, 30};
    int64_t cylinder = 2;
    size_t replications = 1000;
    size_t bootstrap = 1000;
    double level = 0.95;
    int workers = 1;
    uint64_t budget = 50000000;
};

struct VariancePerN {
    int64_t n = 0;
    double mean_time = 0;
    double variance = 0;
    Interval variance_ci;
    double var_over_n = 0;
    double mean_hops = 0;
    double ratio_var_to_hops = 0; // Var / E[path length]
};

struct VarianceResult {
    std::vector<VariancePerN> per_n;
    LinearFit fit;               // Var against n
    double origin_slope = 0;     // through-origin coefficient
    double kesten_c = 0;         // max over n of Var / E[path length]
    std::vector<VelocityRecord> records;
};

inline VarianceResult variance_experiment(const GroupModel& model,
                                          const AutomatonAnalysis* analysis,
                                          const WeightDistribution& dist, uint64_t master_seed,
                                          const VarianceParams& p) {
    detail::check_increasing(p.n_values);
    if (p.replications < 100)
        throw ConfigError("variance experiment needs replications >= 100");
    int64_t n_max = p.n_values.back();
    RealizedRay ray = realize_ray(model, p.direction, size_t(n_max), analysis);
    auto grid = detail::direction_grid(model, ray, p.n_values, p.cylinder, dist, master_seed,
                                       p.replications, p.workers, p.budget);

    VarianceResult res;
    res.records.resize(p.n_values.size() * p.replications);
    std::vector<double> xs, ys;
    for (size_t ni = 0; ni < p.n_values.size(); ++ni) {
        std::vector<double> times(p.replications);
        double hops = 0;
        for (size_t r = 0; r < p.replications; ++r) {
            times[r] = grid[ni][r].time;
            hops += double(grid[ni][r].hops);
            res.records[r * p.n_values.size() + ni] = {uint32_t(r), p.n_values[ni],
                                                       grid[ni][r].time, grid[ni][r].hops};
        }
        hops /= double(p.replications);
        VariancePerN row;
        row.n = p.n_values[ni];
        row.mean_time = sample_mean(times);
        row.variance = sample_variance(times);
        row.variance_ci = bootstrap_variance_ci(times, p.bootstrap, p.level,
                                                mix_seed(master_seed ^ 0xB00757EABULL, ni));
        row.var_over_n = row.variance / double(row.n);
        row.mean_hops = hops;
        row.ratio_var_to_hops = row.variance / hops;
        res.per_n.push_back(row);
        xs.push_back(double(row.n));
        ys.push_back(row.variance);
        res.kesten_c = std::max(res.kesten_c, row.ratio_var_to_hops);
    }
    if (xs.size() >= 2) res.fit = linear_fit(xs, ys);
    res.origin_slope = through_origin_slope(xs, ys);
    return res;
}

// ---------------------------------------------------------------------------
// Counterexample suite.
// (a) The line with chords: velocity strictly below the weight mean, against
//     the quadrature bound E[min(X, Y1+Y2)].
// (b) The mixed free group: the two letter directions have unequal velocity.
// (c) Alternating-exponent direction: the running ratio oscillates between
//     the two directional velocities.
// ---------------------------------------------------------------------------

struct CounterexampleParams {
    bool part_a = true, part_b = true, part_c = true;
    int64_t a_m = 2;
    int64_t a_n = 200;
    size_t a_replications = 500;
    double a_quadrature_tol = 1e-4;
    int64_t b_n = 40;
    size_t b_replications = 500;
    int64_t b_cylinder = 2;
    std::vector<int64_t> c_exponents{2, 4, 8, 16, 32};
    size_t c_replications = 200;
    int64_t c_cylinder = 2;
    int workers = 1;
    uint64_t budget = 50000000;
};

struct AlternationPoint {
    size_t prefix = 0;     // how many syllables of the alternating word
    char letter = 'a';
    int64_t dist = 0;      // word distance of the prefix endpoint
    double ratio_mean = 0; // E T_B(1, prefix) / dist
    double ratio_se = 0;
};

struct CounterexampleResult {
    bool a_ran = false;
    double a_estimate = 0, a_se = 0, a_mu = 0, a_bound = 0;
    std::vector<VelocityRecord> a_records;

    bool b_ran = false;
    double b_mu = 0;
    double b_va = 0, b_va_se = 0;
    double b_vb = 0, b_vb_se = 0;
    std::vector<VelocityRecord> b_records; // n encodes the direction: +n for a, -n for b

    bool c_ran = false;
    std::vector<AlternationPoint> c_curve;
};

inline CounterexampleResult counterexample_suite(const WeightDistribution& dist,
                                                 uint64_t master_seed,
                                                 const CounterexampleParams& p) {
    CounterexampleResult res;
    PassageOptions opts;
    opts.max_relaxations = p.budget;

    if (p.part_a) {
        if (p.a_m < 2) throw ConfigError("part (a) needs chord length m >= 2");
        // Strictness requires room below the chord: two cheap unit steps must
        // be able to undercut one chord step, so 2 * essinf < esssup.
        if (!(2 * dist.lower() < dist.upper()))
            throw ConfigError("part (a) needs 2 * essinf < esssup of the weight law; " +
                              dist.describe() + " does not qualify");
        GroupModel line = make_cyclic_multi(p.a_m);
        Element target = parse_element(line, "a^" + std::to_string(p.a_m * p.a_n));
        Domain dom = Domain::ball(line, line.identity(), 3 * p.a_n * p.a_m);
        DomainGraph g = DomainGraph::build(line, dom, {line.identity(), target});
        std::vector<double> times(p.a_replications);
        res.a_records.resize(p.a_replications);
        parallel_for(p.a_replications, p.workers, [&](size_t rep) {
            Environment env = replication_environment(dist, master_seed, rep);
            PassageResult r = g.shortest(env, line.identity(), target, opts);
            times[rep] = r.time;
            res.a_records[rep] = {uint32_t(rep), p.a_n, r.time, uint32_t(r.hops())};
        });
        auto ms = detail::mean_se(times);
        res.a_estimate = ms.mean / double(p.a_n);
        res.a_se = ms.se / double(p.a_n);
        res.a_mu = dist.mean();
        res.a_bound = expected_min_vs_twofold_sum(dist, p.a_quadrature_tol);
        res.a_ran = true;
    }

    if (p.part_b) {
        GroupModel mixed = make_free_mixed_f2();
        GeodesicAutomaton aut = builtin_automaton(mixed);
        AutomatonAnalysis an = analyze_automaton(mixed, aut);
        VelocityParams vp;
        vp.n_values = {p.b_n};
        vp.cylinder = p.b_cylinder;
        vp.replications = p.b_replications;
        vp.workers = p.workers;
        vp.budget = p.budget;
        vp.direction = DirectionSpec::pole(parse_element(mixed, "a"));
        vp.bridge_check = true;
        VelocityResult va = velocity_experiment(mixed, &an, dist, master_seed, vp);
        vp.direction = DirectionSpec::pole(parse_element(mixed, "b"));
        vp.bridge_check = false;
        VelocityResult vb = velocity_experiment(mixed, &an, dist, master_seed ^ 0xB5EED, vp);
        res.b_mu = dist.mean();
        res.b_va = va.per_n.back().velocity;
        res.b_va_se = va.per_n.back().velocity_se;
        res.b_vb = vb.per_n.back().velocity;
        res.b_vb_se = vb.per_n.back().velocity_se;
        for (const auto& r : va.records) res.b_records.push_back(r);
        for (auto r : vb.records) {
            r.n = -r.n;
            res.b_records.push_back(r);
        }
        res.b_ran = true;
        if (va.bridge_max_gap > 1e-10)
            throw NumericError("bridge identity failed along the a-direction",
                               va.bridge_max_gap);
    }

    if (p.part_c) {
        GroupModel mixed = make_free_mixed_f2();
        // Alternating word a^{e1} b^{e2} a^{e3} ...; geometric exponents stand
        // in for tower growth, which leaves any feasible scale instantly.
        Element prefix = mixed.identity();
        std::vector<Element> targets;
        std::vector<char> letters;
        for (size_t i = 0; i < p.c_exponents.size(); ++i) {
            std::string letter = i % 2 == 0 ? "a" : "b";
            prefix = mixed.multiply(
                prefix, parse_element(mixed, letter + "^" + std::to_string(p.c_exponents[i])));
            targets.push_back(prefix);
            letters.push_back(letter[0]);
        }
        for (size_t t = 0; t < targets.size(); ++t) {
            std::vector<size_t> labels = mixed.canonical_word(targets[t]);
            std::vector<Element> base = labels_to_vertices(mixed, mixed.identity(), labels);
            DomainGraph g = cylinder_graph(mixed, base, p.c_cylinder);
            std::vector<double> ratios(p.c_replications);
            int64_t dist_t = mixed.word_length(targets[t]);
            parallel_for(p.c_replications, p.workers, [&](size_t rep) {
                Environment env = replication_environment(dist, master_seed, rep);
                ratios[rep] = g.shortest(env, base.front(), base.back(), opts).time /
                              double(dist_t);
            });
            auto ms = detail::mean_se(ratios);
            res.c_curve.push_back({t + 1, letters[t], dist_t, ms.mean, ms.se});
        }
        res.c_ran = true;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Concentration: empirical tails of the path-length ratio and of the lower
// passage-time deviation.
// ---------------------------------------------------------------------------

struct ConcentrationParams {
    DirectionSpec direction;
    std::vector<int64_t> n_values{10, 20, 30};
    int64_t cylinder = 2;
    size_t replications = 2000;
    std::vector<double> epsilon_values{0.05, 0.3, 0.4};
    std::vector<double> ratio_values{1.0, 1.2, 1.5, 2.0};
    int workers = 1;
    uint64_t budget = 50000000;
};

struct TailCell {
    int64_t n = 0;
    double threshold = 0; // epsilon or ratio
    double frequency = 0;
};

struct ConcentrationResult {
    std::vector<TailCell> lower_tail;    // P(T <= eps n)
    std::vector<TailCell> length_ratio;  // P(hops >= ratio * n)
    // Per-epsilon slope of log frequency against n over cells with positive
    // frequency; empty when fewer than two such cells exist.
    std::vector<std::pair<double, double>> log_slopes;
    std::vector<VelocityRecord> records;
};

inline ConcentrationResult concentration_suite(const GroupModel& model,
                                               const AutomatonAnalysis* analysis,
                                               const WeightDistribution& dist,
                                               uint64_t master_seed,
                                               const ConcentrationParams& p) {
    detail::check_increasing(p.n_values);
    int64_t n_max = p.n_values.back();
    RealizedRay ray = realize_ray(model, p.direction, size_t(n_max), analysis);
    auto grid = detail::direction_grid(model, ray, p.n_values, p.cylinder, dist, master_seed,
                                       p.replications, p.workers, p.budget);

    ConcentrationResult res;
    res.records.resize(p.n_values.size() * p.replications);
    for (size_t ni = 0; ni < p.n_values.size(); ++ni) {
        double n = double(p.n_values[ni]);
        for (size_t r = 0; r < p.replications; ++r)
            res.records[r * p.n_values.size() + ni] = {uint32_t(r), p.n_values[ni],
                                                       grid[ni][r].time, grid[ni][r].hops};
        for (double eps : p.epsilon_values) {
            size_t hit = 0;
            for (size_t r = 0; r < p.replications; ++r)
                if (grid[ni][r].time <= eps * n) ++hit;
            res.lower_tail.push_back(
                {p.n_values[ni], eps, double(hit) / double(p.replications)});
        }
        for (double ratio : p.ratio_values) {
            size_t hit = 0;
            for (size_t r = 0; r < p.replications; ++r)
                if (double(grid[ni][r].hops) >= ratio * n) ++hit;
            res.length_ratio.push_back(
                {p.n_values[ni], ratio, double(hit) / double(p.replications)});
        }
    }
    for (double eps : p.epsilon_values) {
        std::vector<double> xs, ys;
        for (const auto& cell : res.lower_tail)
            if (cell.threshold == eps && cell.frequency > 0) {
                xs.push_back(double(cell.n));
                ys.push_back(std::log(cell.frequency));
            }
        if (xs.size() >= 2) res.log_slopes.push_back({eps, linear_fit(xs, ys).slope});
    }
    return res;
}

// ---------------------------------------------------------------------------
// Normality diagnostics for standardized passage times. Report only.
// ---------------------------------------------------------------------------

struct CltParams {
    DirectionSpec direction;
    std::vector<int64_t> n_values{25, 50, 100};
    int64_t cylinder = 1;
    size_t replications = 2000;
    int workers = 1;
    uint64_t budget = 50000000;
};

struct CltPerN {
    int64_t n = 0;
    double skewness = 0;
    double excess_kurtosis = 0;
    double a2 = 0;
    double a2_modified = 0;
};

struct CltResult {
    std::vector<CltPerN> per_n;
    std::vector<VelocityRecord> records;
};

inline CltResult clt_experiment(const GroupModel& model, const AutomatonAnalysis* analysis,
                                const WeightDistribution& dist, uint64_t master_seed,
                                const CltParams& p) {
    detail::check_increasing(p.n_values);
    if (p.replications < 1000) throw ConfigError("normality diagnostics need replications >= 1000");
    int64_t n_max = p.n_values.back();
    RealizedRay ray = realize_ray(model, p.direction, size_t(n_max), analysis);
    auto grid = detail::direction_grid(model, ray, p.n_values, p.cylinder, dist, master_seed,
                                       p.replications, p.workers, p.budget);
    CltResult res;
    res.records.resize(p.n_values.size() * p.replications);
    for (size_t ni = 0; ni < p.n_values.size(); ++ni) {
        std::vector<double> times(p.replications);
        for (size_t r = 0; r < p.replications; ++r) {
            times[r] = grid[ni][r].time;
            res.records[r * p.n_values.size() + ni] = {uint32_t(r), p.n_values[ni],
                                                       grid[ni][r].time, grid[ni][r].hops};
        }
        AndersonDarling ad = anderson_darling_normal(times);
        res.per_n.push_back({p.n_values[ni], sample_skewness(times),
                             sample_excess_kurtosis(times), ad.a2, ad.a2_modified});
    }
    return res;
}

} // namespace hypfpp
