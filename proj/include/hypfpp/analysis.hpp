#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hypfpp/automaton.hpp"
#include "hypfpp/errors.hpp"
#include "hypfpp/group.hpp"
#include "hypfpp/hashing.hpp"

namespace hypfpp {

using BigInt = boost::multiprecision::cpp_int;

// ---------------------------------------------------------------------------
// Strongly connected components with per-component Perron data.
// ---------------------------------------------------------------------------

struct ComponentData {
    std::vector<int> comp_of;                    // state -> component id
    std::vector<std::vector<uint32_t>> members;  // component id -> states
    std::vector<double> lambda_c;                // per-component Perron value (0 if acyclic)
    std::vector<int> periods;                    // gcd of cycle lengths (0 if acyclic)
    std::vector<bool> maximal;                   // lambda_c == lambda up to rel. tolerance
    std::vector<std::vector<int>> dag_succ;      // quotient DAG adjacency (deduplicated)
    int d = 1;                                   // lcm of maximal-component periods
    bool unique_max_per_path = true;             // no maximal component reaches another
};

struct SpectralData {
    double lambda = 0.0;
    std::vector<double> r_vu; // right projection of the all-ones vector
    std::vector<double> l_vi; // left projection of the initial-state indicator
    double residual = 0.0;    // max relative eigen-residual after projection
};

struct ResolvedTransition {
    uint32_t from;
    uint32_t to;
    size_t gen;  // generator index in the model
    double prob; // transition probability r_q / (lambda r_p), row-normalized
};

struct MarkovData {
    std::vector<std::vector<double>> N; // aggregated row-stochastic matrix
    std::vector<double> mu;             // stationary measure on states
    std::vector<bool> dead;             // r(v_u)_p == 0 states (self-loop rows)
    std::vector<ResolvedTransition> edges;
    std::vector<std::vector<size_t>> out_edges; // state -> indices into edges
};

struct AutomatonAnalysis {
    GeodesicAutomaton aut;
    std::vector<std::vector<uint32_t>> M; // transition counts (0/1 when no parallel edges)
    ComponentData comps;
    SpectralData spec;
    MarkovData markov;
};

namespace detail {

// Iterative Tarjan SCC, components numbered in reverse topological order of
// discovery; we renumber to topological order afterwards for readability.
inline std::pair<std::vector<int>, int> tarjan_scc(uint32_t n,
                                                   const std::vector<std::vector<uint32_t>>& succ) {
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<char> on_stack(n, 0);
    std::vector<uint32_t> stack;
    int next_index = 0, next_comp = 0;
    struct Frame { uint32_t v; size_t child; };
    for (uint32_t root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        std::vector<Frame> frames{{root, 0}};
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.child < succ[f.v].size()) {
                uint32_t w = succ[f.v][f.child++];
                if (index[w] < 0) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                if (low[f.v] == index[f.v]) {
                    while (true) {
                        uint32_t w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp[w] = next_comp;
                        if (w == f.v) break;
                    }
                    ++next_comp;
                }
                uint32_t v = f.v;
                frames.pop_back();
                if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
            }
        }
    }
    return {comp, next_comp};
}

// Perron value of the count matrix restricted to one component, by power
// iteration on (I + M): adding the identity makes an irreducible component
// primitive, shifting the dominant eigenvalue to lambda_C + 1 with the same
// eigenvector, so the iteration converges for any period. Collatz-Wielandt
// ratios bound the eigenvalue from both sides at every step.
inline double component_perron(const std::vector<uint32_t>& states,
                               const std::vector<std::vector<uint32_t>>& M) {
    std::unordered_map<uint32_t, size_t> local;
    for (size_t i = 0; i < states.size(); ++i) local[states[i]] = i;
    size_t n = states.size();
    bool has_edge = false;
    std::vector<std::vector<std::pair<size_t, uint32_t>>> rows(n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            uint32_t c = M[states[i]][states[j]];
            if (c > 0) {
                rows[i].push_back({j, c});
                has_edge = true;
            }
        }
    }
    if (!has_edge) return 0.0; // trivial acyclic component
    std::vector<double> x(n, 1.0), y(n);
    double lo = 0, hi = 0;
    for (int iter = 0; iter < 200000; ++iter) {
        for (size_t i = 0; i < n; ++i) {
            double s = x[i]; // the +I term
            for (auto [j, c] : rows[i]) s += double(c) * x[j];
            y[i] = s;
        }
        lo = std::numeric_limits<double>::infinity();
        hi = 0;
        for (size_t i = 0; i < n; ++i) {
            double ratio = y[i] / x[i];
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        double norm = 0;
        for (double v : y) norm = std::max(norm, v);
        for (size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
        if (hi - lo <= 5e-14 * hi) break;
    }
    return (lo + hi) / 2.0 - 1.0;
}

// Component period: gcd of (depth(u) + 1 - depth(v)) over internal edges on a
// BFS tree; 0 if the component has no cycle.
inline int component_period(const std::vector<uint32_t>& states,
                            const std::vector<std::vector<uint32_t>>& M) {
    std::unordered_map<uint32_t, int64_t> depth;
    std::deque<uint32_t> q{states[0]};
    depth[states[0]] = 0;
    std::unordered_set<uint32_t> in_comp(states.begin(), states.end());
    int64_t g = 0;
    while (!q.empty()) {
        uint32_t u = q.front();
        q.pop_front();
        for (uint32_t v : in_comp) {
            if (M[u][v] == 0) continue;
            auto it = depth.find(v);
            if (it == depth.end()) {
                depth[v] = depth[u] + 1;
                q.push_back(v);
            } else {
                g = std::gcd(g, std::abs(depth[u] + 1 - it->second));
            }
        }
    }
    return static_cast<int>(g);
}

// Window-averaged normalized power iteration: the limit of the Cesaro
// averages of lambda^{-i} M^i v. Averaging over a full period window d kills
// the peripheral rotations exactly, so convergence is geometric while the
// limit equals the running Cesaro average's.
inline std::vector<double> eigen_projection(const std::vector<std::vector<std::pair<size_t, uint32_t>>>& rows,
                                            const std::vector<double>& v, double lambda, int d,
                                            double tol, int iter_cap, double& residual_out) {
    size_t n = v.size();
    std::deque<std::vector<double>> window;
    std::vector<double> a = v, next(n);
    window.push_back(a);
    auto step = [&](const std::vector<double>& x, std::vector<double>& out) {
        for (size_t i = 0; i < n; ++i) {
            double s = 0;
            for (auto [j, c] : rows[i]) s += double(c) * x[j];
            out[i] = s / lambda;
        }
    };
    std::vector<double> avg(n), m_avg(n);
    double residual = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < iter_cap; ++iter) {
        step(a, next);
        a.swap(next);
        window.push_back(a);
        if (int(window.size()) > d) window.pop_front();
        if (int(window.size()) < d) continue;
        for (size_t i = 0; i < n; ++i) {
            double s = 0;
            for (const auto& w : window) s += w[i];
            avg[i] = s / double(d);
        }
        step(avg, m_avg); // m_avg = M avg / lambda; projection satisfies m_avg == avg
        double num = 0, den = 0;
        for (size_t i = 0; i < n; ++i) {
            num = std::max(num, std::abs(m_avg[i] - avg[i]));
            den = std::max(den, std::abs(avg[i]));
        }
        residual = den > 0 ? num / den : 0.0;
        if (residual <= tol) break;
    }
    residual_out = residual;
    if (residual > tol)
        throw NumericError("eigenprojection did not converge within the iteration cap", residual);
    for (double& x : avg)
        if (std::abs(x) < 1e-300) x = 0.0;
    return avg;
}

} // namespace detail

// ---------------------------------------------------------------------------
// analyze: components, Perron eigenvalue, projections, N and mu.
// ---------------------------------------------------------------------------

struct AnalysisOptions {
    double maximal_rel_tol = 1e-9;
    double projection_tol = 1e-12;
    int iteration_cap = 200000;
    double dead_rel_tol = 1e-9; // r(v_u) entries below this (relative) are dead
};

inline AutomatonAnalysis analyze_automaton(const GroupModel& model, const GeodesicAutomaton& aut,
                                           const AnalysisOptions& opt = {}) {
    aut.check_labels(model);
    uint32_t n = aut.state_count();

    AutomatonAnalysis out{aut, {}, {}, {}, {}};
    out.M.assign(n, std::vector<uint32_t>(n, 0));
    for (const auto& t : aut.transitions()) out.M[t.from][t.to] += 1;

    std::vector<std::vector<uint32_t>> succ(n);
    for (uint32_t p = 0; p < n; ++p)
        for (uint32_t q = 0; q < n; ++q)
            if (out.M[p][q] > 0) succ[p].push_back(q);

    // Components.
    auto [comp_of, n_comps] = detail::tarjan_scc(n, succ);
    ComponentData cd;
    cd.comp_of = comp_of;
    cd.members.assign(n_comps, {});
    for (uint32_t s = 0; s < n; ++s) cd.members[comp_of[s]].push_back(s);
    cd.lambda_c.assign(n_comps, 0.0);
    cd.periods.assign(n_comps, 0);
    for (int c = 0; c < n_comps; ++c) {
        cd.lambda_c[c] = detail::component_perron(cd.members[c], out.M);
        if (cd.lambda_c[c] > 0) cd.periods[c] = detail::component_period(cd.members[c], out.M);
    }
    double lambda = *std::max_element(cd.lambda_c.begin(), cd.lambda_c.end());
    if (lambda <= 0)
        throw DomainError("the accepted language is finite; spectral statistics are undefined");
    cd.maximal.assign(n_comps, false);
    for (int c = 0; c < n_comps; ++c)
        cd.maximal[c] = cd.lambda_c[c] >= lambda * (1.0 - opt.maximal_rel_tol);

    cd.dag_succ.assign(n_comps, {});
    for (uint32_t p = 0; p < n; ++p)
        for (uint32_t q : succ[p])
            if (comp_of[p] != comp_of[q]) cd.dag_succ[comp_of[p]].push_back(comp_of[q]);
    for (auto& v : cd.dag_succ) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }

    // d = lcm of maximal-component periods.
    int64_t d = 1;
    for (int c = 0; c < n_comps; ++c)
        if (cd.maximal[c] && cd.periods[c] > 0) d = std::lcm(d, int64_t(cd.periods[c]));
    cd.d = static_cast<int>(d);

    // A path may meet at most one maximal component: no maximal component may
    // reach another through the quotient DAG.
    cd.unique_max_per_path = true;
    for (int c = 0; c < n_comps && cd.unique_max_per_path; ++c) {
        if (!cd.maximal[c]) continue;
        std::vector<char> seen(n_comps, 0);
        std::deque<int> q{c};
        seen[c] = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (int w : cd.dag_succ[u]) {
                if (!seen[w]) {
                    seen[w] = 1;
                    if (cd.maximal[w]) cd.unique_max_per_path = false;
                    q.push_back(w);
                }
            }
        }
    }
    out.comps = std::move(cd);

    // Projections via the Cesaro limit of lambda^{-i} M^i v.
    std::vector<std::vector<std::pair<size_t, uint32_t>>> rows(n), rows_t(n);
    for (uint32_t p = 0; p < n; ++p)
        for (uint32_t q = 0; q < n; ++q)
            if (out.M[p][q] > 0) {
                rows[p].push_back({q, out.M[p][q]});
                rows_t[q].push_back({p, out.M[p][q]});
            }
    SpectralData sd;
    sd.lambda = lambda;
    double res_r = 0, res_l = 0;
    std::vector<double> v_u(n, 1.0), v_i(n, 0.0);
    v_i[aut.initial_state()] = 1.0;
    sd.r_vu = detail::eigen_projection(rows, v_u, lambda, out.comps.d, opt.projection_tol,
                                       opt.iteration_cap, res_r);
    sd.l_vi = detail::eigen_projection(rows_t, v_i, lambda, out.comps.d, opt.projection_tol,
                                       opt.iteration_cap, res_l);
    sd.residual = std::max(res_r, res_l);
    out.spec = std::move(sd);

    // N and mu. Dead rows (r(v_u)_p = 0) get the probability-1 self-loop; the
    // remaining rows are normalized by their own sum, which equals
    // lambda r(v_u)_p in exact arithmetic and makes row sums exact here.
    MarkovData md;
    md.N.assign(n, std::vector<double>(n, 0.0));
    md.dead.assign(n, false);
    double rmax = *std::max_element(out.spec.r_vu.begin(), out.spec.r_vu.end());
    for (uint32_t p = 0; p < n; ++p)
        md.dead[p] = out.spec.r_vu[p] <= opt.dead_rel_tol * rmax;
    md.out_edges.assign(n, {});
    for (const auto& t : aut.transitions()) {
        size_t gi = model.generator_index(t.label);
        md.edges.push_back({t.from, t.to, gi, 0.0});
    }
    std::vector<double> row_sum(n, 0.0);
    for (const auto& e : md.edges)
        if (!md.dead[e.from]) row_sum[e.from] += out.spec.r_vu[e.to];
    for (size_t i = 0; i < md.edges.size(); ++i) {
        auto& e = md.edges[i];
        md.out_edges[e.from].push_back(i);
        if (!md.dead[e.from] && row_sum[e.from] > 0) {
            e.prob = out.spec.r_vu[e.to] / row_sum[e.from];
            md.N[e.from][e.to] += e.prob;
        }
    }
    for (uint32_t p = 0; p < n; ++p)
        if (md.dead[p]) md.N[p][p] = 1.0; // dead-end self-loop case
    // Rows with positive r but all-dead targets cannot happen: r_p > 0 forces
    // a positive-weight continuation. Guard anyway so bad inputs surface.
    for (uint32_t p = 0; p < n; ++p) {
        if (md.dead[p]) continue;
        double s = 0;
        for (uint32_t q = 0; q < n; ++q) s += md.N[p][q];
        if (std::abs(s - 1.0) > 1e-9)
            throw NumericError("row of N failed to normalize (state " + std::to_string(p + 1) + ")",
                               std::abs(s - 1.0));
    }

    md.mu.assign(n, 0.0);
    double total = 0;
    for (uint32_t p = 0; p < n; ++p) {
        md.mu[p] = out.spec.r_vu[p] * out.spec.l_vi[p];
        total += md.mu[p];
    }
    if (total <= 0)
        throw NumericError("mu normalization failed: projections are orthogonal", 0.0);
    for (double& x : md.mu) x /= total;
    out.markov = std::move(md);
    return out;
}

// ---------------------------------------------------------------------------
// Cone measures: nu(cone(g)) is the product of transition probabilities along
// the unique accepted path for g. Per-transition probabilities keep the
// one-letter-extension additivity exact even with parallel edges.
// ---------------------------------------------------------------------------

struct TracedWord {
    std::vector<size_t> labels;       // generator indices
    std::vector<uint32_t> states;     // visited states, length |labels| + 1
    std::vector<size_t> edge_indices; // indices into MarkovData.edges
};

// Finds the accepted word evaluating to g by depth-first search pruned to
// geodesic prefixes of g. Throws DomainError when g is not in the language.
inline TracedWord trace_element(const AutomatonAnalysis& an, const GroupModel& model,
                                const Element& g) {
    int64_t target_len = model.word_length(g);
    TracedWord tw;
    tw.states.push_back(an.aut.initial_state());
    std::unordered_set<uint64_t> failed; // (state, element-hash) dead ends
    std::function<bool(uint32_t, const Element&, int64_t)> rec =
        [&](uint32_t state, const Element& elem, int64_t depth) -> bool {
        if (depth == target_len) return elem == g;
        uint64_t key = fmix64(elem.hash() ^ (uint64_t(state) * 0x9e3779b97f4a7c15ULL));
        if (failed.count(key)) return false;
        for (size_t ei : an.markov.out_edges[state]) {
            const auto& e = an.markov.edges[ei];
            Element nxt = model.apply(elem, e.gen);
            if (model.word_length(nxt) != depth + 1) continue;
            if (model.distance(nxt, g) != target_len - depth - 1) continue;
            tw.labels.push_back(e.gen);
            tw.states.push_back(e.to);
            tw.edge_indices.push_back(ei);
            if (rec(e.to, nxt, depth + 1)) return true;
            tw.labels.pop_back();
            tw.states.pop_back();
            tw.edge_indices.pop_back();
        }
        failed.insert(key);
        return false;
    };
    if (!rec(an.aut.initial_state(), model.identity(), 0))
        throw DomainError("element has no accepted representative: " + model.element_to_string(g));
    return tw;
}

inline double cone_measure(const AutomatonAnalysis& an, const GroupModel& model, const Element& g) {
    TracedWord tw = trace_element(an, model, g);
    double nu = 1.0;
    for (size_t ei : tw.edge_indices) nu *= an.markov.edges[ei].prob;
    return nu;
}

// ---------------------------------------------------------------------------
// Exact path counts and growth diagnostics.
// ---------------------------------------------------------------------------

inline BigInt sphere_count(const AutomatonAnalysis& an, int n) {
    if (n < 0) throw DomainError("sphere_count needs n >= 0");
    uint32_t ns = an.aut.state_count();
    std::vector<BigInt> row(ns, 0), next(ns);
    row[an.aut.initial_state()] = 1;
    for (int step = 0; step < n; ++step) {
        for (uint32_t q = 0; q < ns; ++q) next[q] = 0;
        for (uint32_t p = 0; p < ns; ++p) {
            if (row[p] == 0) continue;
            for (uint32_t q = 0; q < ns; ++q)
                if (an.M[p][q] > 0) next[q] += row[p] * an.M[p][q];
        }
        row.swap(next);
    }
    BigInt total = 0;
    for (const auto& v : row) total += v;
    return total;
}

inline double log_of_bigint(const BigInt& x) {
    if (x <= 0) return -std::numeric_limits<double>::infinity();
    size_t bits = boost::multiprecision::msb(x);
    if (bits <= 52) return std::log(x.convert_to<double>());
    BigInt mant = x >> (bits - 52);
    return std::log(mant.convert_to<double>()) + double(bits - 52) * std::log(2.0);
}

struct GrowthReport {
    int n_max = 0;
    double lambda = 0;
    double inf_ratio = 0; // inf over 1 <= n <= n_max of |G_n| / lambda^n
    double sup_ratio = 0;
    std::vector<double> ratios;
};

inline GrowthReport growth_check(const AutomatonAnalysis& an, int n_max) {
    GrowthReport rep;
    rep.n_max = n_max;
    rep.lambda = an.spec.lambda;
    rep.inf_ratio = std::numeric_limits<double>::infinity();
    rep.sup_ratio = 0;
    double log_lambda = std::log(an.spec.lambda);
    for (int n = 1; n <= n_max; ++n) {
        BigInt c = sphere_count(an, n);
        double ratio = std::exp(log_of_bigint(c) - double(n) * log_lambda);
        rep.ratios.push_back(ratio);
        rep.inf_ratio = std::min(rep.inf_ratio, ratio);
        rep.sup_ratio = std::max(rep.sup_ratio, ratio);
    }
    return rep;
}

} // namespace hypfpp
