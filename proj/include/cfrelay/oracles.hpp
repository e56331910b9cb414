#pragma once

// Deliberately naive reference implementations used to cross-check the
// production paths. Nothing here calls marginalize, conditional_entropy,
// solve or the rate programs; only the data types are shared.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "cfrelay/error.hpp"
#include "cfrelay/lp_solver.hpp"
#include "cfrelay/network_model.hpp"
#include "cfrelay/prob_core.hpp"
#include "cfrelay/rate_engine.hpp"
#include "cfrelay/subset.hpp"

namespace cfrelay::oracles {

namespace detail {

// Dense p(a, b, c) with each group flattened to a single index.
struct Grouped {
    std::size_t na = 1, nb = 1, nc = 1;
    std::vector<double> p; // [a][b][c]
    double at(std::size_t a, std::size_t b, std::size_t c) const { return p[(a * nb + b) * nc + c]; }
};

inline Grouped group(const ProbTensor& t, const VarSet& a, const VarSet& b, const VarSet& c) {
    const VarSet& vars = t.vars();
    auto position = [&](const VarId& v) {
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i] == v)
                return i;
        throw VariableError("oracle: unknown variable " + v.name);
    };
    auto positions = [&](const VarSet& set, std::size_t& count) {
        std::vector<std::size_t> out;
        count = 1;
        for (const VarId& v : set) {
            out.push_back(position(v));
            count *= static_cast<std::size_t>(vars[out.back()].cardinality);
        }
        return out;
    };
    Grouped g;
    const auto pa = positions(a, g.na);
    const auto pb = positions(b, g.nb);
    const auto pc = positions(c, g.nc);
    g.p.assign(g.na * g.nb * g.nc, 0.0);

    std::vector<std::size_t> stride(vars.size());
    std::size_t s = 1;
    for (std::size_t i = vars.size(); i-- > 0;) {
        stride[i] = s;
        s *= static_cast<std::size_t>(vars[i].cardinality);
    }
    auto key = [&](std::size_t flat, const std::vector<std::size_t>& pos) {
        std::size_t k = 0;
        for (std::size_t i : pos) {
            const std::size_t digit = (flat / stride[i]) % static_cast<std::size_t>(vars[i].cardinality);
            k = k * static_cast<std::size_t>(vars[i].cardinality) + digit;
        }
        return k;
    };
    for (std::size_t flat = 0; flat < t.size(); ++flat)
        g.p[(key(flat, pa) * g.nb + key(flat, pb)) * g.nc + key(flat, pc)] += t[flat];
    return g;
}

inline void check_sets(const ProbTensor& t, const VarSet& a, const VarSet& b, const VarSet& c) {
    auto overlap = [](const VarSet& u, const VarSet& v) {
        for (const VarId& x : u)
            for (const VarId& y : v)
                if (x == y)
                    return true;
        return false;
    };
    if (overlap(a, b) || overlap(a, c) || overlap(b, c))
        throw VariableError("oracle: variable sets overlap");
    double mass = 0.0;
    for (double v : t.values())
        mass += v;
    if (std::abs(mass - 1.0) > 1e-9)
        throw NormalizationError("oracle: tensor is not normalized");
}

} // namespace detail

// I(A;B|C) = sum p(a,b,c) ln[p(a,b,c) p(c) / (p(a,c) p(b,c))] / ln 2, every
// marginal recomputed inline.
inline double mi_direct(const ProbTensor& t, const VarSet& a, const VarSet& b, const VarSet& c) {
    detail::check_sets(t, a, b, c);
    const detail::Grouped g = detail::group(t, a, b, c);
    double total = 0.0;
    for (std::size_t k = 0; k < g.nc; ++k) {
        double pc = 0.0;
        for (std::size_t i = 0; i < g.na; ++i)
            for (std::size_t j = 0; j < g.nb; ++j)
                pc += g.at(i, j, k);
        for (std::size_t i = 0; i < g.na; ++i) {
            double pac = 0.0;
            for (std::size_t j = 0; j < g.nb; ++j)
                pac += g.at(i, j, k);
            for (std::size_t j = 0; j < g.nb; ++j) {
                const double pabc = g.at(i, j, k);
                if (pabc <= 0.0)
                    continue;
                double pbc = 0.0;
                for (std::size_t i2 = 0; i2 < g.na; ++i2)
                    pbc += g.at(i2, j, k);
                total += pabc * std::log(pabc * pc / (pac * pbc));
            }
        }
    }
    return std::max(0.0, total / std::log(2.0));
}

// H(A|B) = sum p(a,b) ln[p(b) / p(a,b)] / ln 2.
inline double entropy_direct(const ProbTensor& t, const VarSet& a, const VarSet& b) {
    detail::check_sets(t, a, b, {});
    const detail::Grouped g = detail::group(t, a, b, {});
    double total = 0.0;
    for (std::size_t j = 0; j < g.nb; ++j) {
        double pb = 0.0;
        for (std::size_t i = 0; i < g.na; ++i)
            pb += g.at(i, j, 0);
        for (std::size_t i = 0; i < g.na; ++i) {
            const double pab = g.at(i, j, 0);
            if (pab > 0.0)
                total += pab * std::log(pb / pab);
        }
    }
    return total / std::log(2.0);
}

// f, g, h straight from their definitions via the direct measures.
inline SubsetFunctions subset_functions_direct(const JointModel& m) {
    const ProbTensor& t = m.joint();
    const int n = m.relays();
    const SubsetId all = full_set(n);
    const std::size_t count = std::size_t{1} << n;

    auto cat = [](VarSet u, const VarSet& v) {
        u.insert(u.end(), v.begin(), v.end());
        return u;
    };
    const VarSet xn = m.x_relays(all);
    const double base = mi_direct(t, {m.x()}, cat(m.yhats(all), {m.y()}), xn);

    SubsetFunctions fn;
    fn.f.resize(count);
    fn.g.resize(count);
    fn.h.resize(count);
    for (SubsetId s = 0; s < count; ++s) {
        const SubsetId sc = all & ~s;
        double local = 0.0;
        for (int i = 1; i <= n; ++i)
            if (contains(s, i))
                local += entropy_direct(t, {m.yhat(i)}, {m.y_relay(i), m.x_relay(i)});
        const VarSet yhat_s = m.yhats(s);
        const VarSet cond = cat(cat(m.yhats(sc), {m.y()}), xn);
        fn.f[s] = base - (s == 0 ? 0.0 : entropy_direct(t, yhat_s, cond)) + local;
        fn.h[s] = (s == 0 ? 0.0 : entropy_direct(t, yhat_s, cat(cond, {m.x()}))) - local;
        fn.g[s] = s == 0 ? 0.0 : mi_direct(t, m.x_relays(s), {m.y()}, m.x_relays(sc));
    }
    return fn;
}

namespace detail {

// Solves the k x k system in place by Gaussian elimination; false if singular.
inline bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
    const std::size_t k = b.size();
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < k; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col]))
                piv = r;
        if (std::abs(a[piv][col]) < 1e-12)
            return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < k; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < k; ++c)
                a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    x.assign(k, 0.0);
    for (std::size_t r = k; r-- > 0;) {
        double s = b[r];
        for (std::size_t c = r + 1; c < k; ++c)
            s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return true;
}

struct BoxedBest {
    bool feasible = false;
    double value = -std::numeric_limits<double>::infinity();
    std::vector<double> point;
};

// Best vertex of the LP intersected with the box lb <= x <= lb + box.
inline BoxedBest best_vertex(const LinearProgram& lp, double box) {
    const std::size_t k = lp.num_vars;
    std::vector<std::vector<double>> planes;
    std::vector<double> rhs;
    for (const auto& c : lp.constraints) {
        planes.push_back(c.coeffs);
        rhs.push_back(c.bound);
    }
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> e(k, 0.0);
        e[j] = 1.0;
        planes.push_back(e);
        rhs.push_back(lp.lower_bound(j));
        planes.push_back(e);
        rhs.push_back(lp.lower_bound(j) + box);
    }

    auto feasible = [&](const std::vector<double>& x) {
        for (std::size_t j = 0; j < k; ++j) {
            const double lo = lp.lower_bound(j);
            if (x[j] < lo - 1e-9 * (1.0 + std::abs(lo)) || x[j] > lo + box + 1e-9 * (1.0 + box))
                return false;
        }
        for (const auto& c : lp.constraints) {
            double lhs = 0.0;
            for (std::size_t j = 0; j < k; ++j)
                lhs += c.coeffs[j] * x[j];
            const double tol = 1e-9 * (1.0 + std::abs(c.bound) + std::abs(lhs));
            if (c.relation == Relation::less_equal ? lhs > c.bound + tol : lhs < c.bound - tol)
                return false;
        }
        return true;
    };

    BoxedBest best;
    const std::size_t m = planes.size();
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i)
        pick[i] = i;
    if (k == 0) {
        bool ok = std::all_of(lp.constraints.begin(), lp.constraints.end(),
                              [](const LinearConstraint& c) {
                                  return c.relation == Relation::less_equal ? 0.0 <= c.bound + 1e-9
                                                                            : 0.0 >= c.bound - 1e-9;
                              });
        best.feasible = ok;
        best.value = 0.0;
        return best;
    }
    while (true) {
        std::vector<std::vector<double>> a;
        std::vector<double> b;
        for (std::size_t i : pick) {
            a.push_back(planes[i]);
            b.push_back(rhs[i]);
        }
        std::vector<double> x;
        if (solve_square(a, b, x) && feasible(x)) {
            double v = 0.0;
            for (std::size_t j = 0; j < k; ++j)
                v += lp.objective[j] * x[j];
            if (!best.feasible || v > best.value) {
                best.feasible = true;
                best.value = v;
                best.point = x;
            }
        }
        // Next k-combination of plane indices.
        std::size_t i = k;
        while (i-- > 0 && pick[i] == m - k + i) {
        }
        if (i == static_cast<std::size_t>(-1))
            break;
        ++pick[i];
        for (std::size_t j = i + 1; j < k; ++j)
            pick[j] = pick[j - 1] + 1;
    }
    return best;
}

} // namespace detail

constexpr std::size_t vertex_oracle_max_vars = 5;
constexpr std::size_t vertex_oracle_max_constraints = 16;

// Enumerates constraint/bound intersections. A large box stands in for
// infinity: if doubling it raises the optimum, the LP is unbounded.
inline LpOutcome lp_vertex_oracle(const LinearProgram& lp) {
    if (lp.num_vars > vertex_oracle_max_vars || lp.constraints.size() > vertex_oracle_max_constraints)
        throw SizeLimitError("lp_vertex_oracle: at most 5 variables and 16 constraints");
    constexpr double box = 1e6;
    const auto near = detail::best_vertex(lp, box);
    LpOutcome out;
    if (!near.feasible) {
        out.status = LpStatus::infeasible;
        return out;
    }
    const auto far = detail::best_vertex(lp, 2.0 * box);
    if (far.value > near.value + 1e-6 * (1.0 + std::abs(near.value))) {
        out.status = LpStatus::unbounded;
        return out;
    }
    out.status = LpStatus::optimal;
    out.value = near.value;
    out.point = near.point;
    return out;
}

// Grid search over bin-rate vectors: R_i in {0, g({i})/steps, ..., g({i})},
// keeping points that satisfy sum_S1 R <= g(S1), maximizing min_S f(S) + sum_S R.
inline double thm2_bruteforce(const JointModel& model, int grid_steps) {
    const int n = model.relays();
    if (n > 2 || grid_steps < 1 || grid_steps > 200)
        throw SizeLimitError("thm2_bruteforce: n <= 2 and 1 <= grid_steps <= 200");
    const SubsetFunctions fn = subset_functions_direct(model);
    const SubsetId all = full_set(n);

    std::vector<double> unit(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i)
        unit[static_cast<std::size_t>(i - 1)] = fn.g[singleton(i)] / grid_steps;

    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> k(static_cast<std::size_t>(n), 0);
    while (true) {
        std::vector<double> r(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            r[static_cast<std::size_t>(i)] = unit[static_cast<std::size_t>(i)] * k[static_cast<std::size_t>(i)];
        bool ok = true;
        for (SubsetId s1 = 1; s1 <= all && ok; ++s1) {
            double sum = 0.0;
            for (int i = 1; i <= n; ++i)
                if (contains(s1, i))
                    sum += r[static_cast<std::size_t>(i - 1)];
            ok = sum <= fn.g[s1] + 1e-12;
        }
        if (ok) {
            double worst = std::numeric_limits<double>::infinity();
            for (SubsetId s = 0; s <= all; ++s) {
                double v = fn.f[s];
                for (int i = 1; i <= n; ++i)
                    if (contains(s, i))
                        v += r[static_cast<std::size_t>(i - 1)];
                worst = std::min(worst, v);
            }
            best = std::max(best, worst);
        }
        int i = 0;
        while (i < n && ++k[static_cast<std::size_t>(i)] > grid_steps)
            k[static_cast<std::size_t>(i++)] = 0;
        if (i == n)
            break;
    }
    return std::max(0.0, best);
}

// One engine-vs-oracle comparison; passes iff oracle - below <= engine <= oracle + above.
struct CrossCheck {
    std::string quantity;
    double engine = 0.0;
    double oracle = 0.0;
    double below = 0.0;
    double above = 0.0;

    bool passed() const { return engine >= oracle - below && engine <= oracle + above; }
};

// Every check the oracles can run on this model at tolerance tol.
inline std::vector<CrossCheck> cross_check(const JointModel& model, const RateReport& rep, double tol) {
    std::vector<CrossCheck> out;
    const int n = model.relays();
    const SubsetFunctions direct = subset_functions_direct(model);
    for (std::size_t s = 0; s < direct.f.size(); ++s) {
        const std::string tag = "(" + std::to_string(s) + ")";
        out.push_back({"f" + tag, rep.functions.f[s], direct.f[s], tol, tol});
        out.push_back({"g" + tag, rep.functions.g[s], direct.g[s], tol, tol});
        out.push_back({"h" + tag, rep.functions.h[s], direct.h[s], tol, tol});
    }

    const ProbTensor& t = model.joint();
    VarSet outputs{model.y()};
    for (const VarId& v : model.y_relays(model.all_relays()))
        outputs.push_back(v);
    out.push_back({"ceiling", rep.measures.ceiling,
                   mi_direct(t, {model.x()}, outputs, model.x_relays(model.all_relays())), tol, tol});

    auto lp_check = [&](const char* name, const LinearProgram& lp, const LpRate& got) {
        if (lp.num_vars > vertex_oracle_max_vars || lp.constraints.size() > vertex_oracle_max_constraints)
            return;
        const LpOutcome ref = lp_vertex_oracle(lp);
        const bool ref_optimal = ref.status == LpStatus::optimal;
        const bool got_optimal = got.status == LpStatus::optimal;
        out.push_back({std::string(name) + " status", got_optimal ? 1.0 : 0.0, ref_optimal ? 1.0 : 0.0, 0.0, 0.0});
        if (ref_optimal && got_optimal)
            out.push_back({std::string(name) + " LP value", got.raw, ref.value, tol, tol});
    };
    lp_check("thm2", thm2_program(rep.functions, n), rep.thm2);
    lp_check("thm3", thm3_program(rep.functions, n), rep.thm3);

    if (n <= 2) {
        const int steps = n == 2 ? 100 : 200;
        double resolution = 0.0;
        for (int i = 1; i <= n; ++i)
            resolution += direct.g[singleton(i)] / steps;
        out.push_back({"thm2 vs grid", rep.thm2.rate, thm2_bruteforce(model, steps), 1e-9, resolution + tol});
    }
    return out;
}

} // namespace cfrelay::oracles
