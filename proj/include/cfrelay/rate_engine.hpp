#pragma once

// Achievable-rate evaluators for compress-and-forward relaying.
//
// Notation: N = {1..n}; S, S1 are relay subsets (bitmasks); S^c = N \ S.
//   g(S1) = I(X_S1 ; Y | X_{S1^c})
//   f(S)  = I(X ; Yhat_N, Y | X_N) - H(Yhat_S | Yhat_{S^c}, Y, X_N) + sum_{i in S} H(Yhat_i | Y_i, X_i)
//   h(S)  = H(Yhat_S | Yhat_{S^c}, Y, X, X_N) - sum_{i in S} H(Yhat_i | Y_i, X_i)
//
// Every strict inequality of the achievability statements is evaluated in
// closed form; rates reported are suprema of the open regions, clamped at 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfrelay/error.hpp"
#include "cfrelay/lp_solver.hpp"
#include "cfrelay/network_model.hpp"
#include "cfrelay/prob_core.hpp"
#include "cfrelay/subset.hpp"

namespace cfrelay {

// Slack granted to closed decodability and feasibility constraints.
constexpr double closure_slack = 1e-9;

// R_i per relay, bits.
using RateVector = std::vector<double>;

// Tables indexed by SubsetId, size 2^n.
struct SubsetFunctions {
    std::vector<double> f;
    std::vector<double> g;
    std::vector<double> h;
};

struct InformationMeasures {
    double ceiling = 0.0;            // I(X ; Y, Y_N | X_N)
    double compressed_info = 0.0;    // I(X ; Yhat_N, Y | X_N)
    double direct_info = 0.0;        // I(X ; Y | X_N)
    std::vector<double> yhat_given_relay; // H(Yhat_i | Y_i, X_i), i = 1..n
    // Single-relay terms; zero unless n = 1.
    double relay_link = 0.0;         // I(X_1 ; Y)
    double compression_cost = 0.0;   // I(Y_1 ; Yhat_1 | X_1, Y)
    double compression_cost_x = 0.0; // I(Y_1 ; Yhat_1 | X_1, Y, X)
};

struct EngineTables {
    SubsetFunctions fn;
    InformationMeasures measures;
};

namespace detail {

// Joint entropies of variable subsets, each marginal computed once. Conditional
// quantities are differences of these.
class EntropyMemo {
public:
    explicit EntropyMemo(const JointModel& m) : t_(m.joint()) {}

    double joint(const VarSet& vars) {
        std::uint64_t key = 0;
        for (const VarId& v : vars)
            key |= std::uint64_t{1} << t_.axis_of(v);
        if (key == 0)
            return 0.0;
        const auto it = memo_.find(key);
        if (it != memo_.end())
            return it->second;
        const ProbTensor p = marginalize(t_, vars);
        double h = 0.0;
        for (double x : p.values())
            if (x > 0.0)
                h -= x * std::log2(x);
        memo_.emplace(key, h);
        return h;
    }

    double cond(const VarSet& a, const VarSet& b) { return std::max(0.0, joint(join(a, b)) - joint(b)); }

    double cmi(const VarSet& a, const VarSet& b, const VarSet& c) {
        const double v = joint(join(a, c)) + joint(join(b, c)) - joint(join(join(a, b), c)) - joint(c);
        return std::max(0.0, v);
    }

private:
    const ProbTensor& t_;
    std::map<std::uint64_t, double> memo_;
};

inline EngineTables compute_tables(const JointModel& m) {
    const int n = m.relays();
    const SubsetId all = m.all_relays();
    const std::size_t count = std::size_t{1} << n;
    const VarSet xn = m.x_relays(all);
    EntropyMemo e(m);

    EngineTables out;
    InformationMeasures& mm = out.measures;
    mm.ceiling = e.cmi({m.x()}, join({m.y()}, m.y_relays(all)), xn);
    mm.compressed_info = e.cmi({m.x()}, join(m.yhats(all), {m.y()}), xn);
    mm.direct_info = e.cmi({m.x()}, {m.y()}, xn);
    for (int i = 1; i <= n; ++i)
        mm.yhat_given_relay.push_back(e.cond({m.yhat(i)}, {m.y_relay(i), m.x_relay(i)}));
    if (n == 1) {
        mm.relay_link = e.cmi({m.x_relay(1)}, {m.y()}, {});
        mm.compression_cost = e.cmi({m.y_relay(1)}, {m.yhat(1)}, {m.x_relay(1), m.y()});
        mm.compression_cost_x = e.cmi({m.y_relay(1)}, {m.yhat(1)}, {m.x_relay(1), m.y(), m.x()});
    }

    SubsetFunctions& fn = out.fn;
    fn.f.resize(count);
    fn.g.resize(count);
    fn.h.resize(count);
    for (SubsetId s = 0; s < count; ++s) {
        const SubsetId sc = all & ~s;
        double local = 0.0;
        for (int i : members(s))
            local += mm.yhat_given_relay[static_cast<std::size_t>(i - 1)];
        const VarSet rest = join(m.yhats(sc), {m.y()});
        fn.f[s] = mm.compressed_info - e.cond(m.yhats(s), join(rest, xn)) + local;
        fn.h[s] = e.cond(m.yhats(s), join(join(rest, {m.x()}), xn)) - local;
        fn.g[s] = s == 0 ? 0.0 : e.cmi(m.x_relays(s), {m.y()}, m.x_relays(sc));
    }
    // The empty set has no compressed variables; pin exact zeros.
    fn.h[0] = 0.0;
    return out;
}

// Coefficient row over (t, R_1..R_n).
inline std::vector<double> rate_row(int n, double t_coeff, SubsetId s, double r_coeff) {
    std::vector<double> row(static_cast<std::size_t>(n) + 1, 0.0);
    row[0] = t_coeff;
    for (int i : members(s))
        row[static_cast<std::size_t>(i)] = r_coeff;
    return row;
}

inline double rate_sum(std::span<const double> r, SubsetId s) {
    double sum = 0.0;
    for (int i : members(s))
        sum += r[static_cast<std::size_t>(i - 1)];
    return sum;
}

} // namespace detail

// Cached per model: the first caller computes, later callers read.
inline const EngineTables& engine_tables(const JointModel& model) {
    auto& cache = model.cache();
    std::call_once(cache.once, [&] {
        cache.value = std::make_shared<const EngineTables>(detail::compute_tables(model));
    });
    return *static_cast<const EngineTables*>(cache.value.get());
}

inline const SubsetFunctions& subset_functions(const JointModel& model) { return engine_tables(model).fn; }

inline void require_single_relay(const JointModel& model, const char* op) {
    if (model.relays() != 1)
        throw ArityError(std::string(op) + " is defined for exactly one relay, got n = " +
                         std::to_string(model.relays()));
}

struct ClassicalRate {
    double rate = 0.0;
    bool feasible = false;
};

// Successive decoding: recover Yhat_1 first, then X.
inline ClassicalRate classical_cf(const JointModel& model) {
    require_single_relay(model, "classical_cf");
    const auto& mm = engine_tables(model).measures;
    const bool feasible = mm.relay_link >= mm.compression_cost - closure_slack;
    return {feasible ? mm.compressed_info : 0.0, feasible};
}

inline double thm1_raw_rate(const JointModel& model) {
    require_single_relay(model, "thm1_rate");
    const auto& mm = engine_tables(model).measures;
    // A shortfall inside the closure slack counts as none, matching classical_cf.
    const double shortfall = mm.compression_cost - mm.relay_link;
    return mm.compressed_info - (shortfall > closure_slack ? shortfall : 0.0);
}

// Yhat_1 not required at the destination; shortfall of the relay link is charged to the rate.
inline double thm1_rate(const JointModel& model) { return std::max(0.0, thm1_raw_rate(model)); }

inline bool thm1_decodable(const JointModel& model) {
    require_single_relay(model, "thm1_decodable");
    const auto& mm = engine_tables(model).measures;
    return mm.relay_link >= mm.compression_cost_x - closure_slack;
}

struct LpRate {
    double rate = 0.0; // clamped at 0
    double raw = 0.0;  // LP optimum before clamping (0 when infeasible)
    RateVector rates;  // empty when infeasible
    LpStatus status = LpStatus::infeasible;
};

// Variables (t, R_1..R_n); t starts at min_S f(S), which every R >= 0 attains.
inline LinearProgram rate_program_base(const SubsetFunctions& fn, int n) {
    LinearProgram lp(static_cast<std::size_t>(n) + 1);
    lp.objective[0] = 1.0;
    lp.lower_bounds[0] = *std::min_element(fn.f.begin(), fn.f.end());
    return lp;
}

// t <= f(S) + sum_S R  and  sum_S1 R <= g(S1).
inline LinearProgram thm2_program(const SubsetFunctions& fn, int n) {
    LinearProgram lp = rate_program_base(fn, n);
    const SubsetId all = full_set(n);
    for (SubsetId s = 0; s <= all; ++s)
        lp.add_le(detail::rate_row(n, 1.0, s, -1.0), fn.f[s]);
    for (SubsetId s1 = 1; s1 <= all; ++s1)
        lp.add_le(detail::rate_row(n, 0.0, s1, 1.0), fn.g[s1]);
    return lp;
}

// For every S1 ⊆ S ⊆ N:
//   t <= f(S) + sum_{S\S1} R + g(S1)
//   h(S) - sum_{S\S1} R - g(S1) <= 0
// Rows come in that pair order, S ascending, S1 descending over submasks of S.
inline LinearProgram thm3_program(const SubsetFunctions& fn, int n) {
    LinearProgram lp = rate_program_base(fn, n);
    const SubsetId all = full_set(n);
    for (SubsetId s = 0; s <= all; ++s) {
        for_each_submask(s, [&](SubsetId s1) {
            const SubsetId diff = s & ~s1;
            lp.add_le(detail::rate_row(n, 1.0, diff, -1.0), fn.f[s] + fn.g[s1]);
            lp.add_le(detail::rate_row(n, 0.0, diff, -1.0), fn.g[s1] - fn.h[s] + closure_slack);
        });
    }
    return lp;
}

// Adds h(S) <= sum_S R (closed) for every S meeting d.
inline void add_decoding_rows(LinearProgram& lp, const SubsetFunctions& fn, int n, SubsetId d) {
    const SubsetId all = full_set(n);
    for (SubsetId s = 1; s <= all; ++s)
        if ((s & d) != 0)
            lp.add_le(detail::rate_row(n, 0.0, s, -1.0), closure_slack - fn.h[s]);
}

namespace detail {

inline LpRate run_rate_program(const LinearProgram& lp, const char* what) {
    const LpOutcome out = solve(lp);
    if (out.status == LpStatus::unbounded)
        throw NumericalFailure(std::string(what) + ": rate program reported unbounded", 0.0);
    LpRate r;
    r.status = out.status;
    if (out.status == LpStatus::optimal) {
        r.raw = out.value;
        r.rate = std::max(0.0, out.value);
        r.rates.assign(out.point.begin() + 1, out.point.end());
        for (double& v : r.rates)
            v = std::max(0.0, v);
    }
    return r;
}

} // namespace detail

inline LpRate thm2_rate(const JointModel& model) {
    return detail::run_rate_program(thm2_program(subset_functions(model), model.relays()), "thm2_rate");
}

// min_S f(S) + sum_S R; the message rate granted by a fixed bin-rate vector (g not checked).
inline double thm2_value_at(const SubsetFunctions& fn, int n, std::span<const double> r) {
    double best = std::numeric_limits<double>::infinity();
    for (SubsetId s = 0; s <= full_set(n); ++s)
        best = std::min(best, fn.f[s] + detail::rate_sum(r, s));
    return best;
}

// min over S1 ⊆ S of f(S) + sum_{S\S1} R + g(S1).
inline double thm3_value_at(const SubsetFunctions& fn, int n, std::span<const double> r) {
    double best = std::numeric_limits<double>::infinity();
    for (SubsetId s = 0; s <= full_set(n); ++s)
        for_each_submask(s, [&](SubsetId s1) {
            best = std::min(best, fn.f[s] + detail::rate_sum(r, s & ~s1) + fn.g[s1]);
        });
    return best;
}

struct DecodingResult {
    bool verdict = false;
    std::optional<RateVector> witness;
    double rate = 0.0; // best message rate jointly with decoding Yhat_D
};

inline DecodingResult thm2_decodable(const JointModel& model, SubsetId d) {
    const int n = model.relays();
    if ((d & ~full_set(n)) != 0)
        throw ShapeError("decode set " + std::to_string(d) + " names a relay beyond n");
    LinearProgram lp = thm2_program(subset_functions(model), n);
    add_decoding_rows(lp, subset_functions(model), n, d);
    const LpRate r = detail::run_rate_program(lp, "thm2_decodable");
    if (r.status != LpStatus::optimal)
        return {};
    return {true, r.rates, r.rate};
}

inline LpRate thm3_rate(const JointModel& model) {
    return detail::run_rate_program(thm3_program(subset_functions(model), model.relays()), "thm3_rate");
}

inline bool thm3_decodable(const JointModel& model, SubsetId d, std::span<const double> r) {
    const int n = model.relays();
    if (r.size() != static_cast<std::size_t>(n))
        throw ShapeError("rate vector length differs from relay count");
    if (std::any_of(r.begin(), r.end(), [](double v) { return v < 0.0; }))
        throw Error("thm3_decodable: rate vector has a negative entry");
    const auto& fn = subset_functions(model);
    for (SubsetId s = 1; s <= full_set(n); ++s)
        if ((s & d) != 0 && fn.h[s] > detail::rate_sum(r, s) + closure_slack)
            return false;
    return true;
}

struct DecodingVerdict {
    SubsetId set = 0;
    DecodingResult thm2;
    bool thm3 = false; // against the thm3-achieving vector; false if thm3 infeasible
};

struct RateReport {
    int relays = 0;
    // Single-relay schemes; for n = 0 they collapse to I(X;Y), for n >= 2 they are absent.
    std::optional<double> classical_rate;
    std::optional<bool> classical_feasible;
    std::optional<double> thm1_rate;
    std::optional<double> thm1_raw;
    std::optional<bool> thm1_decodable;
    LpRate thm2;
    LpRate thm3;
    std::vector<DecodingVerdict> decoding;
    SubsetFunctions functions;
    InformationMeasures measures;
};

inline RateReport full_report(const JointModel& model, std::span<const SubsetId> decode_sets) {
    const EngineTables& tables = engine_tables(model);
    RateReport rep;
    rep.relays = model.relays();
    rep.functions = tables.fn;
    rep.measures = tables.measures;
    if (rep.relays == 1) {
        const ClassicalRate c = classical_cf(model);
        rep.classical_rate = c.rate;
        rep.classical_feasible = c.feasible;
        rep.thm1_raw = thm1_raw_rate(model);
        rep.thm1_rate = thm1_rate(model);
        rep.thm1_decodable = thm1_decodable(model);
    } else if (rep.relays == 0) {
        rep.classical_rate = tables.measures.direct_info;
        rep.classical_feasible = true;
        rep.thm1_raw = tables.measures.direct_info;
        rep.thm1_rate = tables.measures.direct_info;
        rep.thm1_decodable = true;
    }
    rep.thm2 = thm2_rate(model);
    rep.thm3 = thm3_rate(model);
    for (SubsetId d : decode_sets) {
        DecodingVerdict v;
        v.set = d;
        v.thm2 = thm2_decodable(model, d);
        v.thm3 = rep.thm3.status == LpStatus::optimal && thm3_decodable(model, d, rep.thm3.rates);
        rep.decoding.push_back(std::move(v));
    }
    return rep;
}

} // namespace cfrelay
