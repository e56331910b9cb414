#pragma once

// Built-in parameterized networks for sweeps and examples.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cfrelay/error.hpp"
#include "cfrelay/network_model.hpp"
#include "cfrelay/optimizer.hpp"

namespace cfrelay::families {

// Point-to-point binary symmetric channel, no relays.
inline RelayNetworkSpec bsc(double eps) {
    RelayNetworkSpec s;
    s.relays = 0;
    s.x_card = 2;
    s.y_card = 2;
    s.channel = {1.0 - eps, eps, eps, 1.0 - eps};
    return s;
}

// Binary source and relay. Destination sees Y = (X xor Z0, X1 xor Z1) encoded
// as 2*ya + yb; relay sees Y1 = X xor Z2; independent noises with the given
// flip probabilities. Yhat_1 has yhat_card symbols.
inline RelayNetworkSpec orthogonal_relay(double z0, double z1, double z2, int yhat_card = 2) {
    auto flip = [](int in, int out, double p) { return in == out ? 1.0 - p : p; };
    RelayNetworkSpec s;
    s.relays = 1;
    s.x_card = 2;
    s.y_card = 4;
    s.x_relay_card = {2};
    s.y_relay_card = {2};
    s.yhat_card = {yhat_card};
    for (int x = 0; x < 2; ++x)
        for (int x1 = 0; x1 < 2; ++x1)
            for (int y = 0; y < 4; ++y)
                for (int y1 = 0; y1 < 2; ++y1)
                    s.channel.push_back(flip(x, y / 2, z0) * flip(x1, y % 2, z1) * flip(x, y1, z2));
    return s;
}

struct FamilyOptions {
    double z0 = 0.1;
    double z1 = 0.0;
    double z2 = 0.1;
    int yhat_card = 2;
};

inline const std::vector<std::string>& family_names() {
    static const std::vector<std::string> names{"bsc", "orthogonal"};
    return names;
}

// "bsc": parameter is the crossover probability.
// "orthogonal": parameter is the relay-link flip probability z1; z0 and z2 come from opts.
inline std::optional<SpecFamily> by_name(const std::string& name, const FamilyOptions& opts = {}) {
    if (name == "bsc")
        return SpecFamily([](double eps) { return bsc(eps); });
    if (name == "orthogonal")
        return SpecFamily([opts](double z1) { return orthogonal_relay(opts.z0, z1, opts.z2, opts.yhat_card); });
    return std::nullopt;
}

} // namespace cfrelay::families
