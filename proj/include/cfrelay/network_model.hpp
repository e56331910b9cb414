#pragma once

// Discrete memoryless relay networks, coding distributions, and the joint
// distribution p(x) prod p(x_i) p(y, y_N | x, x_N) prod q_i(yhat_i | y_i, x_i)
// on which every rate expression is evaluated.

#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfrelay/error.hpp"
#include "cfrelay/prob_core.hpp"
#include "cfrelay/subset.hpp"

namespace cfrelay {

constexpr double stochastic_tolerance = 1e-9;

struct RelayNetworkSpec {
    int relays = 0;
    int x_card = 1;
    int y_card = 1;
    std::vector<int> x_relay_card; // |X_i|, i = 1..n
    std::vector<int> y_relay_card; // |Y_i|
    std::vector<int> yhat_card;    // |Yhat_i|
    // p(y, y_1..y_n | x, x_1..x_n); input tuple (x, x_1..x_n) slowest, each
    // tuple row-major with the rightmost component fastest.
    std::vector<double> channel;

    std::size_t input_count() const {
        std::size_t k = static_cast<std::size_t>(x_card);
        for (int c : x_relay_card)
            k *= static_cast<std::size_t>(c);
        return k;
    }

    std::size_t output_count() const {
        std::size_t k = static_cast<std::size_t>(y_card);
        for (int c : y_relay_card)
            k *= static_cast<std::size_t>(c);
        return k;
    }
};

struct CodingDistribution {
    std::vector<double> p_x;
    std::vector<std::vector<double>> p_x_relay;
    // q_i flattened: row (x_i, y_i) with y_i fastest, columns yhat_i.
    std::vector<std::vector<double>> test_channel;
};

namespace detail {

// Checks that data is a stack of stochastic rows of the given width and
// returns the rows renormalized. Throws on the worst offending row.
inline std::vector<double> checked_rows(std::span<const double> data, std::size_t width,
                                        const std::string& what) {
    if (width == 0 || data.size() % width != 0)
        throw ShapeError(what + ": length " + std::to_string(data.size()) +
                         " is not a multiple of row width " + std::to_string(width));
    std::vector<double> out(data.begin(), data.end());
    std::size_t worst = 0;
    double worst_mass = 1.0;
    double worst_gap = -1.0;
    for (std::size_t r = 0; r * width < data.size(); ++r) {
        const auto row = data.subspan(r * width, width);
        double mass = 0.0;
        bool bad_entry = false;
        for (double v : row) {
            if (!(v >= 0.0) || !std::isfinite(v))
                bad_entry = true;
            mass += v;
        }
        const double gap = bad_entry ? INFINITY : std::abs(mass - 1.0);
        if (gap > worst_gap) {
            worst_gap = gap;
            worst = r;
            worst_mass = mass;
        }
    }
    if (worst_gap > stochastic_tolerance)
        throw StochasticityError(what + ": row " + std::to_string(worst) + " has mass " +
                                     std::to_string(worst_mass) + " (or a negative entry)",
                                 worst, worst_mass);
    for (std::size_t r = 0; r * width < out.size(); ++r) {
        double mass = 0.0;
        for (std::size_t j = 0; j < width; ++j)
            mass += out[r * width + j];
        for (std::size_t j = 0; j < width; ++j)
            out[r * width + j] /= mass;
    }
    return out;
}

} // namespace detail

// Validates the spec and returns a copy with channel slices renormalized.
inline RelayNetworkSpec validated(const RelayNetworkSpec& spec) {
    if (spec.relays < 0 || spec.relays > max_relays)
        throw ShapeError("relay count out of range");
    const auto n = static_cast<std::size_t>(spec.relays);
    if (spec.x_relay_card.size() != n || spec.y_relay_card.size() != n || spec.yhat_card.size() != n)
        throw ShapeError("per-relay alphabet lists must have length n = " + std::to_string(n));
    auto check_card = [](int c, const std::string& name) {
        if (c < 1)
            throw ShapeError("alphabet " + name + " must have cardinality >= 1");
    };
    check_card(spec.x_card, "x");
    check_card(spec.y_card, "y");
    for (std::size_t i = 0; i < n; ++i) {
        check_card(spec.x_relay_card[i], "x_" + std::to_string(i + 1));
        check_card(spec.y_relay_card[i], "y_" + std::to_string(i + 1));
        check_card(spec.yhat_card[i], "yhat_" + std::to_string(i + 1));
    }
    if (spec.channel.size() != spec.input_count() * spec.output_count())
        throw ShapeError("channel has " + std::to_string(spec.channel.size()) + " entries, expected " +
                         std::to_string(spec.input_count() * spec.output_count()));
    RelayNetworkSpec out = spec;
    out.channel = detail::checked_rows(spec.channel, spec.output_count(), "channel input");
    return out;
}

// Validates the distribution against the spec and returns a renormalized copy.
inline CodingDistribution validated(const RelayNetworkSpec& spec, const CodingDistribution& dist) {
    const auto n = static_cast<std::size_t>(spec.relays);
    if (dist.p_x.size() != static_cast<std::size_t>(spec.x_card))
        throw ShapeError("p_x has length " + std::to_string(dist.p_x.size()) + ", expected " +
                         std::to_string(spec.x_card));
    if (dist.p_x_relay.size() != n || dist.test_channel.size() != n)
        throw ShapeError("p_x_i and q_i must have one entry per relay");
    CodingDistribution out;
    out.p_x = detail::checked_rows(dist.p_x, dist.p_x.size(), "p_x");
    for (std::size_t i = 0; i < n; ++i) {
        const std::string tag = std::to_string(i + 1);
        const auto xi = static_cast<std::size_t>(spec.x_relay_card[i]);
        const auto yi = static_cast<std::size_t>(spec.y_relay_card[i]);
        const auto zi = static_cast<std::size_t>(spec.yhat_card[i]);
        if (dist.p_x_relay[i].size() != xi)
            throw ShapeError("p_x_" + tag + " has wrong length");
        if (dist.test_channel[i].size() != xi * yi * zi)
            throw ShapeError("q_" + tag + " has length " + std::to_string(dist.test_channel[i].size()) +
                             ", expected " + std::to_string(xi * yi * zi));
        out.p_x_relay.push_back(detail::checked_rows(dist.p_x_relay[i], xi, "p_x_" + tag));
        out.test_channel.push_back(detail::checked_rows(dist.test_channel[i], zi, "q_" + tag));
    }
    return out;
}

class JointModel {
public:
    // Wraps an arbitrary joint over the canonical variable list of spec.
    // build_joint is the normal way in; this constructor exists for diagnostics.
    JointModel(RelayNetworkSpec spec, CodingDistribution dist, ProbTensor joint)
        : spec_(std::move(spec)), dist_(std::move(dist)), joint_(std::move(joint)),
          cache_(std::make_shared<Cache>()) {
        const VarSet expected = canonical_vars();
        if (joint_.vars().size() != expected.size())
            throw ShapeError("joint does not match the canonical variable list");
        for (std::size_t i = 0; i < expected.size(); ++i)
            if (!(joint_.vars()[i] == expected[i]) ||
                joint_.vars()[i].cardinality != expected[i].cardinality)
                throw ShapeError("joint variable " + joint_.vars()[i].name + " out of canonical order");
    }

    int relays() const noexcept { return spec_.relays; }
    const RelayNetworkSpec& spec() const noexcept { return spec_; }
    const CodingDistribution& distribution() const noexcept { return dist_; }
    const ProbTensor& joint() const noexcept { return joint_; }

    VarId x() const { return VarId::source(spec_.x_card); }
    VarId y() const { return VarId::dest(spec_.y_card); }
    VarId x_relay(int i) const { return VarId::relay_input(i, spec_.x_relay_card[i - 1]); }
    VarId y_relay(int i) const { return VarId::relay_output(i, spec_.y_relay_card[i - 1]); }
    VarId yhat(int i) const { return VarId::compressed(i, spec_.yhat_card[i - 1]); }

    VarSet x_relays(SubsetId s) const { return collect(s, &JointModel::x_relay); }
    VarSet y_relays(SubsetId s) const { return collect(s, &JointModel::y_relay); }
    VarSet yhats(SubsetId s) const { return collect(s, &JointModel::yhat); }
    SubsetId all_relays() const { return full_set(spec_.relays); }

    // (X, X_1..X_n, Y, Y_1..Y_n, Yhat_1..Yhat_n)
    VarSet canonical_vars() const {
        VarSet vars{x()};
        const SubsetId all = all_relays();
        for (const VarId& v : x_relays(all))
            vars.push_back(v);
        vars.push_back(y());
        for (const VarId& v : y_relays(all))
            vars.push_back(v);
        for (const VarId& v : yhats(all))
            vars.push_back(v);
        return vars;
    }

    // Write-once slot for per-model derived tables (filled by rate_engine). Shared by copies.
    struct Cache {
        std::once_flag once;
        std::shared_ptr<const void> value;
    };
    Cache& cache() const { return *cache_; }

private:
    VarSet collect(SubsetId s, VarId (JointModel::*get)(int) const) const {
        VarSet out;
        for (int i : members(s))
            out.push_back((this->*get)(i));
        return out;
    }

    RelayNetworkSpec spec_;
    CodingDistribution dist_;
    ProbTensor joint_;
    std::shared_ptr<Cache> cache_;
};

inline JointModel build_joint(const RelayNetworkSpec& raw_spec, const CodingDistribution& raw_dist) {
    RelayNetworkSpec spec = validated(raw_spec);
    CodingDistribution dist = validated(spec, raw_dist);
    const int n = spec.relays;

    // Axis cardinalities in canonical order.
    std::vector<int> card{spec.x_card};
    card.insert(card.end(), spec.x_relay_card.begin(), spec.x_relay_card.end());
    card.push_back(spec.y_card);
    card.insert(card.end(), spec.y_relay_card.begin(), spec.y_relay_card.end());
    card.insert(card.end(), spec.yhat_card.begin(), spec.yhat_card.end());
    std::size_t total = 1;
    for (int c : card)
        total *= static_cast<std::size_t>(c);

    const std::size_t outputs = spec.output_count();
    std::vector<double> values(total);
    std::vector<int> d(card.size(), 0);
    for (std::size_t k = 0; k < total; ++k) {
        // Digits: d[0] = x, d[1..n] = x_i, d[n+1] = y, d[n+2..2n+1] = y_i, d[2n+2..3n+1] = yhat_i.
        std::size_t in = static_cast<std::size_t>(d[0]);
        double p = dist.p_x[in];
        for (int i = 0; i < n; ++i) {
            in = in * static_cast<std::size_t>(spec.x_relay_card[i]) + static_cast<std::size_t>(d[1 + i]);
            p *= dist.p_x_relay[i][d[1 + i]];
        }
        std::size_t out = static_cast<std::size_t>(d[n + 1]);
        for (int i = 0; i < n; ++i)
            out = out * static_cast<std::size_t>(spec.y_relay_card[i]) + static_cast<std::size_t>(d[n + 2 + i]);
        p *= spec.channel[in * outputs + out];
        for (int i = 0; i < n; ++i) {
            const std::size_t row = static_cast<std::size_t>(d[1 + i]) * static_cast<std::size_t>(spec.y_relay_card[i]) +
                                    static_cast<std::size_t>(d[n + 2 + i]);
            p *= dist.test_channel[i][row * static_cast<std::size_t>(spec.yhat_card[i]) +
                                      static_cast<std::size_t>(d[2 * n + 2 + i])];
        }
        values[k] = p;
        for (std::size_t a = card.size(); a-- > 0;) {
            if (++d[a] < card[a])
                break;
            d[a] = 0;
        }
    }

    // Canonical variables are derived from the spec alone; build them without a model.
    VarSet vars{VarId::source(spec.x_card)};
    for (int i = 1; i <= n; ++i)
        vars.push_back(VarId::relay_input(i, spec.x_relay_card[i - 1]));
    vars.push_back(VarId::dest(spec.y_card));
    for (int i = 1; i <= n; ++i)
        vars.push_back(VarId::relay_output(i, spec.y_relay_card[i - 1]));
    for (int i = 1; i <= n; ++i)
        vars.push_back(VarId::compressed(i, spec.yhat_card[i - 1]));

    return JointModel(std::move(spec), std::move(dist), ProbTensor(std::move(vars), std::move(values)));
}

struct MarkovLeakage {
    int relay;
    double bits;
};

// I(Yhat_i ; everything else | Y_i, X_i) for every relay.
inline std::vector<MarkovLeakage> validate_markov(const JointModel& model) {
    std::vector<MarkovLeakage> out;
    for (int i = 1; i <= model.relays(); ++i) {
        const VarId yi = model.y_relay(i);
        const VarId xi = model.x_relay(i);
        const VarId zi = model.yhat(i);
        VarSet rest;
        for (const VarId& v : model.joint().vars())
            if (!(v == yi) && !(v == xi) && !(v == zi))
                rest.push_back(v);
        out.push_back({i, conditional_mutual_information(model.joint(), {zi}, rest, {yi, xi})});
    }
    return out;
}

// Relabels relays: new relay k is old relay perm[k-1] (1-based indices in perm).
inline std::pair<RelayNetworkSpec, CodingDistribution>
permute_relays(const RelayNetworkSpec& spec, const CodingDistribution& dist, std::span<const int> perm) {
    const int n = spec.relays;
    if (static_cast<int>(perm.size()) != n)
        throw ShapeError("permutation length must equal relay count");
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int p : perm) {
        if (p < 1 || p > n || seen[static_cast<std::size_t>(p - 1)])
            throw ShapeError("not a permutation of 1..n");
        seen[static_cast<std::size_t>(p - 1)] = true;
    }

    RelayNetworkSpec ps = spec;
    CodingDistribution pd = dist;
    for (int k = 0; k < n; ++k) {
        const auto old = static_cast<std::size_t>(perm[static_cast<std::size_t>(k)] - 1);
        ps.x_relay_card[k] = spec.x_relay_card[old];
        ps.y_relay_card[k] = spec.y_relay_card[old];
        ps.yhat_card[k] = spec.yhat_card[old];
        pd.p_x_relay[k] = dist.p_x_relay[old];
        pd.test_channel[k] = dist.test_channel[old];
    }

    // Decode a new-layout index into old relay digits and re-encode.
    auto remap = [&](std::size_t idx, int lead_card, const std::vector<int>& new_card,
                     const std::vector<int>& old_card) {
        std::vector<int> new_digit(static_cast<std::size_t>(n));
        for (int k = n; k-- > 0;) {
            new_digit[k] = static_cast<int>(idx % static_cast<std::size_t>(new_card[k]));
            idx /= static_cast<std::size_t>(new_card[k]);
        }
        const std::size_t lead = idx % static_cast<std::size_t>(lead_card);
        std::vector<int> old_digit(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k)
            old_digit[static_cast<std::size_t>(perm[k] - 1)] = new_digit[k];
        std::size_t out = lead;
        for (int j = 0; j < n; ++j)
            out = out * static_cast<std::size_t>(old_card[j]) + static_cast<std::size_t>(old_digit[j]);
        return out;
    };

    const std::size_t inputs = spec.input_count();
    const std::size_t outputs = spec.output_count();
    for (std::size_t a = 0; a < inputs; ++a) {
        const std::size_t oa = remap(a, spec.x_card, ps.x_relay_card, spec.x_relay_card);
        for (std::size_t b = 0; b < outputs; ++b) {
            const std::size_t ob = remap(b, spec.y_card, ps.y_relay_card, spec.y_relay_card);
            ps.channel[a * outputs + b] = spec.channel[oa * outputs + ob];
        }
    }
    return {std::move(ps), std::move(pd)};
}

} // namespace cfrelay
