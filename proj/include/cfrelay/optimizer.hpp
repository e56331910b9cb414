#pragma once

// Search over coding distributions (p_x, p_x_i, q_i) for a fixed network.
//
// Each restart runs coordinate-cyclic projected ascent: for every simplex
// block, a forward-difference gradient, a step projected back onto the
// simplex, and step halving until the objective strictly improves. A cycle
// that gains less than the tolerance ends the restart.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cfrelay/error.hpp"
#include "cfrelay/network_model.hpp"
#include "cfrelay/rate_engine.hpp"

namespace cfrelay {

enum class Objective { classical, thm1, thm2, thm3 };

inline const char* to_string(Objective o) {
    switch (o) {
    case Objective::classical: return "classical";
    case Objective::thm1: return "thm1";
    case Objective::thm2: return "thm2";
    case Objective::thm3: return "thm3";
    }
    return "?";
}

inline std::optional<Objective> parse_objective(const std::string& s) {
    if (s == "classical") return Objective::classical;
    if (s == "thm1") return Objective::thm1;
    if (s == "thm2") return Objective::thm2;
    if (s == "thm3") return Objective::thm3;
    return std::nullopt;
}

struct OptimizerConfig {
    Objective objective = Objective::thm2;
    int restarts = 4;
    int max_iterations = 200;
    double tolerance = 1e-7;
    double fd_step = 1e-5;
    std::uint64_t seed = 0;
    std::optional<int> grid_steps; // exhaustive grid instead of ascent

    void check() const {
        if (restarts < 1 || max_iterations < 0 || !(tolerance > 0.0) || !(fd_step > 0.0) ||
            (grid_steps && *grid_steps < 1))
            throw Error("optimizer config: restarts >= 1, max_iterations >= 0, positive tolerance/step/grid");
    }
};

struct RestartTrace {
    double initial_rate = 0.0;
    double final_rate = 0.0;
    int iterations = 0;
    std::optional<std::string> error;
};

struct OptimizationResult {
    CodingDistribution best;
    double best_rate = 0.0;
    std::vector<RestartTrace> trace;
    std::uint64_t seed = 0;
};

// Rate of the chosen scheme at a fixed distribution. For n = 0 the single-relay
// schemes reduce to I(X;Y).
inline double evaluate_objective(const RelayNetworkSpec& spec, const CodingDistribution& dist, Objective o) {
    const JointModel model = build_joint(spec, dist);
    switch (o) {
    case Objective::classical:
        if (model.relays() == 0)
            return engine_tables(model).measures.direct_info;
        return classical_cf(model).rate;
    case Objective::thm1:
        if (model.relays() == 0)
            return engine_tables(model).measures.direct_info;
        return thm1_rate(model);
    case Objective::thm2: return thm2_rate(model).rate;
    case Objective::thm3: return thm3_rate(model).rate;
    }
    return 0.0;
}

// Euclidean projection onto the probability simplex (sort-based).
inline void project_to_simplex(std::span<double> v) {
    if (v.empty())
        return;
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumulative += u[j];
        const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (u[j] - candidate > 0.0)
            theta = candidate;
    }
    for (double& x : v)
        x = std::max(x - theta, 0.0);
}

// Flat parameter vector with one contiguous range per simplex block.
struct ParameterLayout {
    struct Block {
        std::size_t offset;
        std::size_t width;
    };
    std::vector<Block> blocks;
    std::size_t size = 0;

    explicit ParameterLayout(const RelayNetworkSpec& spec) {
        add(static_cast<std::size_t>(spec.x_card));
        for (int i = 0; i < spec.relays; ++i)
            add(static_cast<std::size_t>(spec.x_relay_card[i]));
        for (int i = 0; i < spec.relays; ++i) {
            const auto rows = static_cast<std::size_t>(spec.x_relay_card[i] * spec.y_relay_card[i]);
            for (std::size_t r = 0; r < rows; ++r)
                add(static_cast<std::size_t>(spec.yhat_card[i]));
        }
    }

    std::vector<double> pack(const CodingDistribution& d) const {
        std::vector<double> out(d.p_x);
        for (const auto& p : d.p_x_relay)
            out.insert(out.end(), p.begin(), p.end());
        for (const auto& q : d.test_channel)
            out.insert(out.end(), q.begin(), q.end());
        return out;
    }

    CodingDistribution unpack(const RelayNetworkSpec& spec, std::span<const double> v) const {
        CodingDistribution d;
        std::size_t at = 0;
        auto take = [&](std::size_t count) {
            std::vector<double> part(v.begin() + static_cast<std::ptrdiff_t>(at),
                                     v.begin() + static_cast<std::ptrdiff_t>(at + count));
            at += count;
            return part;
        };
        d.p_x = take(static_cast<std::size_t>(spec.x_card));
        for (int i = 0; i < spec.relays; ++i)
            d.p_x_relay.push_back(take(static_cast<std::size_t>(spec.x_relay_card[i])));
        for (int i = 0; i < spec.relays; ++i)
            d.test_channel.push_back(
                take(static_cast<std::size_t>(spec.x_relay_card[i] * spec.y_relay_card[i] * spec.yhat_card[i])));
        return d;
    }

private:
    void add(std::size_t width) {
        blocks.push_back({size, width});
        size += width;
    }
};

inline CodingDistribution uniform_distribution(const RelayNetworkSpec& spec) {
    const ParameterLayout layout(spec);
    std::vector<double> v(layout.size);
    for (const auto& b : layout.blocks)
        std::fill_n(v.begin() + static_cast<std::ptrdiff_t>(b.offset), b.width, 1.0 / static_cast<double>(b.width));
    return layout.unpack(spec, v);
}

// Uniform inputs; q_i copies y_i when |Yhat_i| = |Y_i|, otherwise uniform.
inline CodingDistribution natural_distribution(const RelayNetworkSpec& spec) {
    CodingDistribution d = uniform_distribution(spec);
    for (int i = 0; i < spec.relays; ++i) {
        const int yi = spec.y_relay_card[i];
        const int zi = spec.yhat_card[i];
        if (yi != zi)
            continue;
        auto& q = d.test_channel[static_cast<std::size_t>(i)];
        std::fill(q.begin(), q.end(), 0.0);
        for (int x = 0; x < spec.x_relay_card[i]; ++x)
            for (int y = 0; y < yi; ++y)
                q[static_cast<std::size_t>((x * yi + y) * zi + y)] = 1.0;
    }
    return d;
}

// Dirichlet(1) on every block, from the stream of (seed, restart).
inline CodingDistribution random_distribution(const RelayNetworkSpec& spec, std::uint64_t seed, int restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    std::mt19937_64 rng(seq);
    std::exponential_distribution<double> expo(1.0);
    const ParameterLayout layout(spec);
    std::vector<double> v(layout.size);
    for (const auto& b : layout.blocks) {
        double total = 0.0;
        for (std::size_t j = 0; j < b.width; ++j)
            total += v[b.offset + j] = expo(rng);
        for (std::size_t j = 0; j < b.width; ++j)
            v[b.offset + j] /= total;
    }
    return layout.unpack(spec, v);
}

namespace detail {

inline RestartTrace ascend(const RelayNetworkSpec& spec, const OptimizerConfig& cfg, const ParameterLayout& layout,
                           std::vector<double>& params) {
    auto eval = [&](std::span<const double> v) {
        return evaluate_objective(spec, layout.unpack(spec, v), cfg.objective);
    };
    RestartTrace tr;
    double current = eval(params);
    tr.initial_rate = current;
    std::vector<double> step(layout.blocks.size(), 0.25);

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        const double cycle_start = current;
        for (std::size_t bi = 0; bi < layout.blocks.size(); ++bi) {
            const auto [offset, width] = layout.blocks[bi];
            if (width < 2)
                continue;
            std::vector<double> grad(width);
            double norm = 0.0;
            for (std::size_t j = 0; j < width; ++j) {
                // Move mass toward atom j and renormalize; stays on the simplex.
                std::vector<double> probe = params;
                probe[offset + j] += cfg.fd_step;
                for (std::size_t k = 0; k < width; ++k)
                    probe[offset + k] /= 1.0 + cfg.fd_step;
                grad[j] = (eval(probe) - current) / cfg.fd_step;
                norm = std::max(norm, std::abs(grad[j]));
            }
            if (norm < 1e-12)
                continue;
            double eta = step[bi];
            bool moved = false;
            for (int halving = 0; halving < 40 && !moved; ++halving, eta *= 0.5) {
                std::vector<double> cand = params;
                for (std::size_t j = 0; j < width; ++j)
                    cand[offset + j] += eta * grad[j];
                project_to_simplex(std::span<double>(cand).subspan(offset, width));
                const double value = eval(cand);
                if (value > current) {
                    params = std::move(cand);
                    current = value;
                    moved = true;
                    step[bi] = std::min(4.0 * eta, 16.0);
                }
            }
            if (!moved)
                step[bi] = 0.25;
        }
        tr.iterations = iter + 1;
        if (current - cycle_start < cfg.tolerance)
            break;
    }
    tr.final_rate = current;
    return tr;
}

inline std::size_t compositions(std::size_t steps, std::size_t parts) {
    // C(steps + parts - 1, parts - 1), saturating.
    double c = 1.0;
    for (std::size_t i = 1; i < parts; ++i)
        c = c * static_cast<double>(steps + i) / static_cast<double>(i);
    return c > 1e15 ? static_cast<std::size_t>(1e15) : static_cast<std::size_t>(std::llround(c));
}

// Advances a composition of steps into parts (lexicographic); false after the last.
inline bool next_composition(std::vector<int>& c) {
    const std::size_t k = c.size();
    if (k < 2)
        return false;
    for (std::size_t i = k - 1; i-- > 0;) {
        if (c[i] > 0) {
            --c[i];
            int rest = 0;
            for (std::size_t j = i + 1; j < k; ++j)
                rest += c[j];
            for (std::size_t j = i + 2; j < k; ++j)
                c[j] = 0;
            c[i + 1] = rest + 1;
            return true;
        }
    }
    return false;
}

inline OptimizationResult grid_search(const RelayNetworkSpec& spec, const OptimizerConfig& cfg) {
    const ParameterLayout layout(spec);
    const int steps = *cfg.grid_steps;
    double total = 1.0;
    for (const auto& b : layout.blocks)
        total *= static_cast<double>(compositions(static_cast<std::size_t>(steps), b.width));
    if (total > 5e6)
        throw SizeLimitError("grid mode: " + std::to_string(total) + " points exceeds the 5e6 limit");

    std::vector<std::vector<int>> comp;
    for (const auto& b : layout.blocks) {
        std::vector<int> c(b.width, 0);
        c[0] = steps;
        comp.push_back(std::move(c));
    }
    std::vector<double> params(layout.size);
    OptimizationResult res;
    res.seed = cfg.seed;
    RestartTrace tr;
    bool first = true;
    while (true) {
        for (std::size_t bi = 0; bi < layout.blocks.size(); ++bi)
            for (std::size_t j = 0; j < layout.blocks[bi].width; ++j)
                params[layout.blocks[bi].offset + j] = static_cast<double>(comp[bi][j]) / steps;
        const CodingDistribution d = layout.unpack(spec, params);
        const double value = evaluate_objective(spec, d, cfg.objective);
        ++tr.iterations;
        if (first) {
            tr.initial_rate = value;
            res.best = d;
            res.best_rate = value;
            first = false;
        } else if (value > res.best_rate) {
            res.best = d;
            res.best_rate = value;
        }
        std::size_t bi = comp.size();
        while (bi-- > 0) {
            if (next_composition(comp[bi]))
                break;
            std::fill(comp[bi].begin(), comp[bi].end(), 0);
            comp[bi][0] = steps;
        }
        if (bi == static_cast<std::size_t>(-1))
            break;
    }
    tr.final_rate = res.best_rate;
    res.trace.push_back(tr);
    return res;
}

} // namespace detail

inline OptimizationResult optimize(const RelayNetworkSpec& raw_spec, const OptimizerConfig& cfg) {
    cfg.check();
    const RelayNetworkSpec spec = validated(raw_spec);
    if (cfg.grid_steps)
        return detail::grid_search(spec, cfg);

    const ParameterLayout layout(spec);
    OptimizationResult res;
    res.seed = cfg.seed;
    bool have_best = false;
    for (int r = 0; r < cfg.restarts; ++r) {
        // Uniform q is a stationary point whenever compression helps, and identity q
        // is one whenever it hurts; the first two restarts try both.
        const CodingDistribution start = r == 0   ? uniform_distribution(spec)
                                         : r == 1 ? natural_distribution(spec)
                                                  : random_distribution(spec, cfg.seed, r);
        std::vector<double> params = layout.pack(start);
        RestartTrace tr;
        try {
            tr = detail::ascend(spec, cfg, layout, params);
        } catch (const Error& e) {
            tr.error = e.what();
            res.trace.push_back(tr);
            continue;
        }
        res.trace.push_back(tr);
        if (!have_best || tr.final_rate > res.best_rate) {
            res.best = layout.unpack(spec, params);
            res.best_rate = tr.final_rate;
            have_best = true;
        }
    }
    if (!have_best)
        throw Error("optimize: every restart failed; first error: " + res.trace.front().error.value_or("?"));
    return res;
}

enum class SweepMode { optimize, fixed };

struct SweepRow {
    double param = 0.0;
    std::optional<double> classical_rate;
    std::optional<bool> classical_feasible;
    std::optional<double> thm1_rate;
    double thm2_rate = 0.0;
    double thm3_rate = 0.0;
    LpStatus thm3_status = LpStatus::infeasible;
    std::optional<std::string> error;
};

using SpecFamily = std::function<RelayNetworkSpec(double)>;

namespace detail {

inline SweepRow sweep_point(const RelayNetworkSpec& spec, const OptimizerConfig& cfg, SweepMode mode) {
    std::vector<CodingDistribution> candidates;
    std::vector<Objective> objectives;
    if (mode == SweepMode::fixed) {
        candidates.push_back(natural_distribution(spec));
        objectives.push_back(cfg.objective);
    } else {
        if (spec.relays <= 1) {
            objectives.push_back(Objective::classical);
            objectives.push_back(Objective::thm1);
        }
        objectives.push_back(Objective::thm2);
        objectives.push_back(Objective::thm3);
        for (Objective o : objectives) {
            OptimizerConfig c = cfg;
            c.objective = o;
            candidates.push_back(optimize(spec, c).best);
        }
    }

    // Every column takes its best value over all candidates; flags follow the
    // candidate that attains it (lowest index on ties).
    SweepRow row;
    for (const CodingDistribution& d : candidates) {
        const JointModel model = build_joint(spec, d);
        const RateReport rep = full_report(model, {});
        if (rep.classical_rate && (!row.classical_rate || *rep.classical_rate > *row.classical_rate)) {
            row.classical_rate = rep.classical_rate;
            row.classical_feasible = rep.classical_feasible;
        }
        if (rep.thm1_rate && (!row.thm1_rate || *rep.thm1_rate > *row.thm1_rate))
            row.thm1_rate = rep.thm1_rate;
        row.thm2_rate = std::max(row.thm2_rate, rep.thm2.rate);
        if (rep.thm3.status == LpStatus::optimal &&
            (row.thm3_status != LpStatus::optimal || rep.thm3.rate > row.thm3_rate)) {
            row.thm3_rate = rep.thm3.rate;
            row.thm3_status = LpStatus::optimal;
        }
    }
    return row;
}

} // namespace detail

// One row per parameter, in grid order. A failing point records its error and
// the sweep moves on.
inline std::vector<SweepRow> sweep(const SpecFamily& family, std::span<const double> params,
                                   const OptimizerConfig& cfg, SweepMode mode) {
    std::vector<SweepRow> rows;
    for (double p : params) {
        SweepRow row;
        try {
            row = detail::sweep_point(family(p), cfg, mode);
        } catch (const Error& e) {
            row = SweepRow{};
            row.error = e.what();
        }
        row.param = p;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace cfrelay
