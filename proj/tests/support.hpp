#pragma once

// Random instances and closed forms shared by the test binaries.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cfrelay/network_model.hpp"
#include "cfrelay/prob_core.hpp"

namespace cfrelay::testing {

using Rng = std::mt19937_64;

inline double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0)
        return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

inline std::vector<double> dirichlet(Rng& rng, std::size_t k, double alpha = 1.0) {
    std::gamma_distribution<double> gamma(alpha, 1.0);
    std::vector<double> v(k);
    double total = 0.0;
    for (double& x : v)
        total += x = gamma(rng);
    for (double& x : v)
        x /= total;
    return v;
}

inline std::vector<double> stochastic_rows(Rng& rng, std::size_t rows, std::size_t width, double alpha = 1.0) {
    std::vector<double> out;
    for (std::size_t r = 0; r < rows; ++r) {
        const auto row = dirichlet(rng, width, alpha);
        out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

inline int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Alphabets drawn from [min_card, max_card]; Dirichlet(alpha) kernel rows.
inline RelayNetworkSpec random_spec(Rng& rng, int n, int min_card = 2, int max_card = 3, double alpha = 1.0) {
    RelayNetworkSpec s;
    s.relays = n;
    s.x_card = pick(rng, min_card, max_card);
    s.y_card = pick(rng, min_card, max_card);
    for (int i = 0; i < n; ++i) {
        s.x_relay_card.push_back(pick(rng, min_card, max_card));
        s.y_relay_card.push_back(pick(rng, min_card, max_card));
        s.yhat_card.push_back(pick(rng, min_card, max_card));
    }
    s.channel = stochastic_rows(rng, s.input_count(), s.output_count(), alpha);
    return s;
}

inline CodingDistribution random_distribution(Rng& rng, const RelayNetworkSpec& s, double alpha = 1.0) {
    CodingDistribution d;
    d.p_x = dirichlet(rng, static_cast<std::size_t>(s.x_card), alpha);
    for (int i = 0; i < s.relays; ++i) {
        d.p_x_relay.push_back(dirichlet(rng, static_cast<std::size_t>(s.x_relay_card[i]), alpha));
        d.test_channel.push_back(stochastic_rows(
            rng, static_cast<std::size_t>(s.x_relay_card[i] * s.y_relay_card[i]),
            static_cast<std::size_t>(s.yhat_card[i]), alpha));
    }
    return d;
}

inline JointModel random_model(Rng& rng, int n, int min_card = 2, int max_card = 3) {
    const RelayNetworkSpec s = random_spec(rng, n, min_card, max_card);
    return build_joint(s, random_distribution(rng, s));
}

inline ProbTensor random_tensor(Rng& rng, const VarSet& vars, double alpha = 1.0) {
    std::size_t size = 1;
    for (const VarId& v : vars)
        size *= static_cast<std::size_t>(v.cardinality);
    return ProbTensor(vars, dirichlet(rng, size, alpha));
}

// Spec built from a callback p(y, y_1..y_n | x, x_1..x_n) over digit vectors.
template <class Fn>
RelayNetworkSpec spec_from(int n, int x_card, int y_card, std::vector<int> xr, std::vector<int> yr,
                           std::vector<int> yhat, Fn&& law) {
    RelayNetworkSpec s;
    s.relays = n;
    s.x_card = x_card;
    s.y_card = y_card;
    s.x_relay_card = std::move(xr);
    s.y_relay_card = std::move(yr);
    s.yhat_card = std::move(yhat);
    auto digits = [](std::size_t idx, int lead, const std::vector<int>& cards) {
        std::vector<int> d(cards.size() + 1);
        for (std::size_t k = cards.size(); k-- > 0;) {
            d[k + 1] = static_cast<int>(idx % static_cast<std::size_t>(cards[k]));
            idx /= static_cast<std::size_t>(cards[k]);
        }
        d[0] = static_cast<int>(idx % static_cast<std::size_t>(lead));
        return d;
    };
    for (std::size_t a = 0; a < s.input_count(); ++a)
        for (std::size_t b = 0; b < s.output_count(); ++b)
            s.channel.push_back(law(digits(a, x_card, s.x_relay_card), digits(b, y_card, s.y_relay_card)));
    return s;
}

inline double flip(int in, int out, double p) { return in == out ? 1.0 - p : p; }

// Identity test channel for relay i (|Yhat_i| = |Y_i|).
inline std::vector<double> identity_test_channel(int x_card, int y_card) {
    std::vector<double> q(static_cast<std::size_t>(x_card * y_card * y_card), 0.0);
    for (int x = 0; x < x_card; ++x)
        for (int y = 0; y < y_card; ++y)
            q[static_cast<std::size_t>((x * y_card + y) * y_card + y)] = 1.0;
    return q;
}

// Replaces every q_i by the constant map onto yhat symbol 0.
inline CodingDistribution constant_yhat(const RelayNetworkSpec& s, CodingDistribution d) {
    for (int i = 0; i < s.relays; ++i)
        d.test_channel[static_cast<std::size_t>(i)].assign(
            static_cast<std::size_t>(s.x_relay_card[i] * s.y_relay_card[i] * s.yhat_card[i]), 0.0);
    for (int i = 0; i < s.relays; ++i) {
        auto& q = d.test_channel[static_cast<std::size_t>(i)];
        for (std::size_t r = 0; r * static_cast<std::size_t>(s.yhat_card[i]) < q.size(); ++r)
            q[r * static_cast<std::size_t>(s.yhat_card[i])] = 1.0;
    }
    return d;
}

// Y depends on X only (channel law `direct`), relay outputs independent noise.
inline RelayNetworkSpec disconnected(Rng& rng, int n, int card = 2) {
    const std::vector<double> direct = stochastic_rows(rng, static_cast<std::size_t>(card), static_cast<std::size_t>(card));
    std::vector<std::vector<double>> noise;
    for (int i = 0; i < n; ++i)
        noise.push_back(dirichlet(rng, static_cast<std::size_t>(card)));
    return spec_from(n, card, card, std::vector<int>(n, card), std::vector<int>(n, card), std::vector<int>(n, card),
                     [&](const std::vector<int>& in, const std::vector<int>& out) {
                         double p = direct[static_cast<std::size_t>(in[0] * card + out[0])];
                         for (int i = 0; i < n; ++i)
                             p *= noise[static_cast<std::size_t>(i)][static_cast<std::size_t>(out[i + 1])];
                         return p;
                     });
}

} // namespace cfrelay::testing
