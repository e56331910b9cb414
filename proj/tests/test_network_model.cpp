#include <gtest/gtest.h>

#include <array>

#include "cfrelay/network_model.hpp"
#include "cfrelay/oracles.hpp"
#include "support.hpp"

using namespace cfrelay;
using namespace cfrelay::testing;

namespace {

RelayNetworkSpec bsc_spec(double eps) {
    RelayNetworkSpec s;
    s.x_card = 2;
    s.y_card = 2;
    s.channel = {1 - eps, eps, eps, 1 - eps};
    return s;
}

// Y = BSC(0.1)(X) ignoring X1, Y1 = X exactly.
RelayNetworkSpec relay_sees_x() {
    return spec_from(1, 2, 2, {2}, {2}, {2}, [](const std::vector<int>& in, const std::vector<int>& out) {
        return flip(in[0], out[0], 0.1) * (out[1] == in[0] ? 1.0 : 0.0);
    });
}

} // namespace

TEST(BuildJoint, PointToPointBsc) {
    CodingDistribution d;
    d.p_x = {0.5, 0.5};
    const JointModel m = build_joint(bsc_spec(0.1), d);
    const std::array<double, 4> expected{0.45, 0.05, 0.05, 0.45};
    ASSERT_EQ(m.joint().size(), 4u);
    for (std::size_t k = 0; k < 4; ++k)
        EXPECT_NEAR(m.joint()[k], expected[k], 1e-16);
}

TEST(BuildJoint, ConstantCompressionMarginalizesAway) {
    Rng rng(1);
    RelayNetworkSpec s = random_spec(rng, 1);
    CodingDistribution d = random_distribution(rng, s);
    RelayNetworkSpec s1 = s;
    s1.yhat_card = {1};
    CodingDistribution d1 = d;
    d1.test_channel = {std::vector<double>(static_cast<std::size_t>(s.x_relay_card[0] * s.y_relay_card[0]), 1.0)};
    const JointModel m1 = build_joint(s1, d1);

    // The same joint without Yhat, built by hand from the product form.
    const JointModel m = build_joint(s, d);
    const ProbTensor without = marginalize(m.joint(), {m.x(), m.x_relay(1), m.y(), m.y_relay(1)});
    const ProbTensor collapsed = marginalize(m1.joint(), {m1.x(), m1.x_relay(1), m1.y(), m1.y_relay(1)});
    ASSERT_EQ(without.size(), collapsed.size());
    for (std::size_t k = 0; k < without.size(); ++k)
        EXPECT_NEAR(without[k], collapsed[k], 1e-15);
}

TEST(BuildJoint, RelayCopyOfXIdentityCompression) {
    const RelayNetworkSpec s = relay_sees_x();
    CodingDistribution d;
    d.p_x = {0.3, 0.7};
    d.p_x_relay = {{0.5, 0.5}};
    d.test_channel = {identity_test_channel(2, 2)};
    const JointModel m = build_joint(s, d);
    EXPECT_NEAR(conditional_mutual_information(m.joint(), {m.yhat(1)}, {m.x()}, {m.x_relay(1)}), binary_entropy(0.3),
                1e-12);
    EXPECT_NEAR(oracles::mi_direct(m.joint(), {m.yhat(1)}, {m.x()}, {m.x_relay(1)}), binary_entropy(0.3), 1e-12);
}

TEST(BuildJoint, Errors) {
    CodingDistribution d;
    d.p_x = {0.5, 0.5, 0.0};
    EXPECT_THROW(build_joint(bsc_spec(0.1), d), ShapeError);

    RelayNetworkSpec bad = bsc_spec(0.1);
    bad.channel = {0.9, 0.0, 0.1, 0.9};
    d.p_x = {0.5, 0.5};
    try {
        build_joint(bad, d);
        FAIL() << "expected StochasticityError";
    } catch (const StochasticityError& e) {
        EXPECT_EQ(e.slice(), 0u);
        EXPECT_NEAR(e.mass(), 0.9, 1e-15);
    }

    RelayNetworkSpec shortc = bsc_spec(0.1);
    shortc.channel.pop_back();
    EXPECT_THROW(build_joint(shortc, d), ShapeError);
}

TEST(BuildJoint, RenormalizesWithinTolerance) {
    RelayNetworkSpec s = bsc_spec(0.1);
    s.channel = {0.9 + 4e-10, 0.1, 0.1, 0.9};
    CodingDistribution d;
    d.p_x = {0.5, 0.5};
    EXPECT_NEAR(build_joint(s, d).joint().mass(), 1.0, 1e-15);
}

TEST(BuildJoint, Invariants) {
    Rng rng(77);
    for (int k = 0; k < 60; ++k) {
        const int n = k % 3;
        const RelayNetworkSpec s = random_spec(rng, n);
        const CodingDistribution d = random_distribution(rng, s);
        const JointModel m = build_joint(s, d);
        EXPECT_NEAR(m.joint().mass(), 1.0, 1e-11);

        // Input marginal is the product of input distributions.
        VarSet inputs{m.x()};
        for (const VarId& v : m.x_relays(m.all_relays()))
            inputs.push_back(v);
        const ProbTensor in = marginalize(m.joint(), inputs);
        std::vector<double> product{1.0};
        std::vector<std::vector<double>> factors{d.p_x};
        for (const auto& p : d.p_x_relay)
            factors.push_back(p);
        for (const auto& f : factors) {
            std::vector<double> next;
            for (double a : product)
                for (double b : f)
                    next.push_back(a * b);
            product = next;
        }
        ASSERT_EQ(in.size(), product.size());
        for (std::size_t j = 0; j < in.size(); ++j)
            EXPECT_NEAR(in[j], product[j], 1e-11);

        // Conditional outputs reproduce the kernel.
        VarSet io = inputs;
        io.push_back(m.y());
        for (const VarId& v : m.y_relays(m.all_relays()))
            io.push_back(v);
        const ProbTensor joint_io = marginalize(m.joint(), io);
        const std::size_t outs = s.output_count();
        for (std::size_t a = 0; a < s.input_count(); ++a)
            for (std::size_t b = 0; b < outs; ++b)
                EXPECT_NEAR(joint_io[a * outs + b] / in[a], s.channel[a * outs + b], 1e-9);

        for (const auto& leak : validate_markov(m))
            EXPECT_LE(leak.bits, 1e-9);
    }
}

TEST(ValidateMarkov, NoRelays) {
    CodingDistribution d;
    d.p_x = {0.5, 0.5};
    EXPECT_TRUE(validate_markov(build_joint(bsc_spec(0.2), d)).empty());
}

TEST(ValidateMarkov, DetectsCorruptedJoint) {
    // Y1 independent fair coin, Y = BSC(0.1)(X); Yhat_1 := Y in the corrupted joint.
    const RelayNetworkSpec s = spec_from(1, 2, 2, {1}, {2}, {2}, [](const std::vector<int>& in, const std::vector<int>& out) {
        return flip(in[0], out[0], 0.1) * 0.5;
    });
    CodingDistribution d;
    d.p_x = {0.5, 0.5};
    d.p_x_relay = {{1.0}};
    d.test_channel = {{0.5, 0.5, 0.5, 0.5}};
    const JointModel clean = build_joint(s, d);
    EXPECT_LE(validate_markov(clean).front().bits, 1e-9);

    // Canonical order (X, X1, Y, Y1, Yhat1).
    std::vector<double> values(clean.joint().size(), 0.0);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int y1 = 0; y1 < 2; ++y1)
                values[static_cast<std::size_t>(((x * 2 + y) * 2 + y1) * 2 + y)] = 0.5 * flip(x, y, 0.1) * 0.5;
    const JointModel corrupt(clean.spec(), clean.distribution(), ProbTensor(clean.joint().vars(), values));
    const auto leak = validate_markov(corrupt);
    ASSERT_EQ(leak.size(), 1u);
    EXPECT_EQ(leak[0].relay, 1);
    EXPECT_GT(leak[0].bits, 0.1);
    EXPECT_NEAR(leak[0].bits, 1.0, 1e-12); // I(Y; Yhat | Y1, X1) = H(Y) = 1
}

TEST(PermuteRelays, JointIsRelabeled) {
    Rng rng(9);
    for (int k = 0; k < 20; ++k) {
        const RelayNetworkSpec s = random_spec(rng, 2);
        const CodingDistribution d = random_distribution(rng, s);
        const std::array<int, 2> perm{2, 1};
        const auto [ps, pd] = permute_relays(s, d, perm);
        const JointModel a = build_joint(s, d);
        const JointModel b = build_joint(ps, pd);
        // I(X_1; Y | X_2) in a equals I(X_2; Y | X_1) in b.
        EXPECT_NEAR(conditional_mutual_information(a.joint(), {a.x_relay(1)}, {a.y()}, {a.x_relay(2)}),
                    conditional_mutual_information(b.joint(), {b.x_relay(2)}, {b.y()}, {b.x_relay(1)}), 1e-12);
        EXPECT_NEAR(conditional_entropy(a.joint(), {a.yhat(1)}, {a.y(), a.yhat(2)}),
                    conditional_entropy(b.joint(), {b.yhat(2)}, {b.y(), b.yhat(1)}), 1e-12);
    }
}
