#include <gtest/gtest.h>

#include <array>

#include "cfrelay/oracles.hpp"
#include "cfrelay/rate_engine.hpp"
#include "support.hpp"

using namespace cfrelay;
using namespace cfrelay::testing;

namespace {

using Digits = std::vector<int>;

// Y = BSC(0.1)(X) with no dependence on X1; Y1 = BSC(0.02)(X).
RelayNetworkSpec relay_unheard() {
    return spec_from(1, 2, 2, {2}, {2}, {2}, [](const Digits& in, const Digits& out) {
        return flip(in[0], out[0], 0.1) * flip(in[0], out[1], 0.02);
    });
}

// Y = (X1, X xor Z) with Z ~ Bern(0.1); Y1 = X.
RelayNetworkSpec relay_sees_x() {
    return spec_from(1, 2, 4, {2}, {2}, {2}, [](const Digits& in, const Digits& out) {
        const int x1 = out[0] / 2, noisy = out[0] % 2;
        return (x1 == in[1] ? 1.0 : 0.0) * flip(in[0], noisy, 0.1) * (out[1] == in[0] ? 1.0 : 0.0);
    });
}

// Y = X1 exactly; Y1 = BSC(0.2)(X).
RelayNetworkSpec y_is_x1() {
    return spec_from(1, 2, 2, {2}, {2}, {2}, [](const Digits& in, const Digits& out) {
        return (out[0] == in[1] ? 1.0 : 0.0) * flip(in[0], out[1], 0.2);
    });
}

CodingDistribution uniform_identity(const RelayNetworkSpec& s) {
    CodingDistribution d;
    d.p_x.assign(static_cast<std::size_t>(s.x_card), 1.0 / s.x_card);
    for (int i = 0; i < s.relays; ++i) {
        d.p_x_relay.emplace_back(static_cast<std::size_t>(s.x_relay_card[i]), 1.0 / s.x_relay_card[i]);
        d.test_channel.push_back(identity_test_channel(s.x_relay_card[i], s.y_relay_card[i]));
    }
    return d;
}

double direct_info(const JointModel& m) {
    return oracles::mi_direct(m.joint(), {m.x()}, {m.y()}, m.x_relays(m.all_relays()));
}

// Every rate a report carries.
std::vector<double> report_rates(const RateReport& r) {
    std::vector<double> v{r.thm2.rate, r.thm3.rate};
    if (r.classical_rate)
        v.push_back(*r.classical_rate);
    if (r.thm1_rate)
        v.push_back(*r.thm1_rate);
    for (const auto& d : r.decoding)
        v.push_back(d.thm2.rate);
    return v;
}

} // namespace

TEST(ClassicalCf, ConstantCompressionIndependentLink) {
    Rng rng(1);
    const RelayNetworkSpec s = disconnected(rng, 1);
    const JointModel m = build_joint(s, constant_yhat(s, random_distribution(rng, s)));
    const ClassicalRate c = classical_cf(m);
    EXPECT_TRUE(c.feasible);
    EXPECT_NEAR(c.rate, direct_info(m), 1e-12);
}

TEST(ClassicalCf, InfeasibleWhenRelayUnheard) {
    const JointModel m = build_joint(relay_unheard(), uniform_identity(relay_unheard()));
    EXPECT_NEAR(oracles::mi_direct(m.joint(), {m.x_relay(1)}, {m.y()}, {}), 0.0, 1e-15);
    EXPECT_GT(oracles::entropy_direct(m.joint(), {m.y_relay(1)}, {m.y()}), 0.1);
    const ClassicalRate c = classical_cf(m);
    EXPECT_FALSE(c.feasible);
    EXPECT_EQ(c.rate, 0.0);
}

TEST(ClassicalCf, NoiselessRelayObservation) {
    const JointModel m = build_joint(relay_sees_x(), uniform_identity(relay_sees_x()));
    const ClassicalRate c = classical_cf(m);
    EXPECT_TRUE(c.feasible);
    const double expected = oracles::mi_direct(m.joint(), {m.x()}, {m.y_relay(1), m.y()}, {m.x_relay(1)});
    EXPECT_NEAR(expected, 1.0, 1e-12);
    EXPECT_NEAR(c.rate, expected, 1e-12);
}

TEST(ClassicalCf, WrongArity) {
    Rng rng(2);
    EXPECT_THROW(classical_cf(random_model(rng, 2)), ArityError);
    EXPECT_THROW(thm1_rate(random_model(rng, 0)), ArityError);
    EXPECT_THROW(thm1_decodable(random_model(rng, 2)), ArityError);
}

TEST(Thm1, ConstantCompression) {
    Rng rng(3);
    for (int k = 0; k < 20; ++k) {
        const RelayNetworkSpec s = random_spec(rng, 1);
        const JointModel m = build_joint(s, constant_yhat(s, random_distribution(rng, s)));
        EXPECT_NEAR(thm1_rate(m), direct_info(m), 1e-12);
    }
}

TEST(Thm1, EqualsClassicalWhenFeasible) {
    Rng rng(4);
    int feasible = 0;
    for (int k = 0; k < 500; ++k) {
        const JointModel m = random_model(rng, 1);
        const ClassicalRate c = classical_cf(m);
        if (!c.feasible)
            continue;
        ++feasible;
        EXPECT_NEAR(thm1_rate(m), c.rate, 1e-9);
    }
    EXPECT_GT(feasible, 40);
}

TEST(Thm1, ClassicalInfeasibleInstance) {
    const JointModel m = build_joint(relay_unheard(), uniform_identity(relay_unheard()));
    const double oracle = oracles::mi_direct(m.joint(), {m.x()}, {m.y_relay(1), m.y()}, {m.x_relay(1)}) -
                          oracles::mi_direct(m.joint(), {m.y_relay(1)}, {m.yhat(1)}, {m.x_relay(1), m.y()});
    EXPECT_NEAR(thm1_rate(m), std::max(0.0, oracle), 1e-12);
    // Closed form: 1 - h(0.1) - h(0.02).
    EXPECT_NEAR(thm1_rate(m), 1.0 - binary_entropy(0.1) - binary_entropy(0.02), 1e-12);
}

TEST(Thm1Decodable, Examples) {
    Rng rng(5);
    const RelayNetworkSpec s = random_spec(rng, 1);
    EXPECT_TRUE(thm1_decodable(build_joint(s, constant_yhat(s, random_distribution(rng, s)))));

    for (int k = 0; k < 10; ++k) {
        CodingDistribution d = random_distribution(rng, y_is_x1());
        d.p_x_relay = {{0.5, 0.5}};
        const JointModel m = build_joint(y_is_x1(), d);
        ASSERT_LT(oracles::mi_direct(m.joint(), {m.y_relay(1)}, {m.yhat(1)}, {m.x_relay(1), m.y(), m.x()}), 1.0);
        EXPECT_TRUE(thm1_decodable(m));
    }

    const JointModel unheard = build_joint(relay_unheard(), uniform_identity(relay_unheard()));
    EXPECT_GT(oracles::mi_direct(unheard.joint(), {unheard.y_relay(1)}, {unheard.yhat(1)},
                                 {unheard.x_relay(1), unheard.y(), unheard.x()}),
              0.1);
    EXPECT_FALSE(thm1_decodable(unheard));
}

TEST(SubsetFunctions, SingleRelayIdentity) {
    Rng rng(6);
    for (int k = 0; k < 50; ++k) {
        const JointModel m = random_model(rng, 1);
        const SubsetFunctions& fn = subset_functions(m);
        ASSERT_EQ(fn.f.size(), 2u);
        const double expected =
            oracles::mi_direct(m.joint(), {m.x()}, {m.yhat(1), m.y()}, {m.x_relay(1)}) -
            oracles::mi_direct(m.joint(), {m.y_relay(1)}, {m.yhat(1)}, {m.x_relay(1), m.y()});
        EXPECT_NEAR(fn.f[1], expected, 1e-10);
        EXPECT_EQ(fn.g[0], 0.0);
        EXPECT_EQ(fn.h[0], 0.0);
    }
}

TEST(SubsetFunctions, DegenerateNetwork) {
    Rng rng(7);
    for (int n = 0; n <= 3; ++n) {
        const RelayNetworkSpec s = disconnected(rng, n);
        const JointModel m = build_joint(s, constant_yhat(s, random_distribution(rng, s)));
        const SubsetFunctions& fn = subset_functions(m);
        ASSERT_EQ(fn.f.size(), std::size_t{1} << n);
        for (std::size_t k = 0; k < fn.f.size(); ++k) {
            EXPECT_NEAR(fn.f[k], direct_info(m), 1e-12);
            EXPECT_NEAR(fn.g[k], 0.0, 1e-12);
            EXPECT_NEAR(fn.h[k], 0.0, 1e-12);
        }
    }
}

TEST(SubsetFunctions, AgreeWithDirectOracle) {
    Rng rng(8);
    for (int k = 0; k < 40; ++k) {
        const JointModel m = random_model(rng, 2);
        const SubsetFunctions& fn = subset_functions(m);
        const SubsetFunctions ref = oracles::subset_functions_direct(m);
        for (std::size_t s = 0; s < 4; ++s) {
            EXPECT_NEAR(fn.f[s], ref.f[s], 1e-10);
            EXPECT_NEAR(fn.g[s], ref.g[s], 1e-10);
            EXPECT_NEAR(fn.h[s], ref.h[s], 1e-10);
        }
    }
}

TEST(SubsetFunctions, CachedTablesAreStable) {
    Rng rng(9);
    const JointModel m = random_model(rng, 2);
    const SubsetFunctions* first = &subset_functions(m);
    const JointModel copy = m;
    EXPECT_EQ(&subset_functions(copy), first);
}

TEST(Thm2, EqualsThm1ForSingleRelay) {
    Rng rng(10);
    for (int k = 0; k < 200; ++k) {
        const JointModel m = random_model(rng, 1);
        const LpRate r = thm2_rate(m);
        ASSERT_EQ(r.status, LpStatus::optimal);
        EXPECT_NEAR(r.rate, thm1_rate(m), 1e-7) << "instance " << k;
    }
}

TEST(Thm2, DisconnectedPair) {
    Rng rng(11);
    for (int k = 0; k < 10; ++k) {
        const RelayNetworkSpec s = disconnected(rng, 2);
        const CodingDistribution d = random_distribution(rng, s);
        EXPECT_NEAR(thm2_rate(build_joint(s, constant_yhat(s, d))).rate, direct_info(build_joint(s, d)), 1e-9);

        // Informative compression of pure noise is charged in full: I(X;Y) - sum_i I(Y_i;Yhat_i|X_i).
        const JointModel m = build_joint(s, d);
        double waste = 0.0;
        for (int i = 1; i <= 2; ++i)
            waste += oracles::mi_direct(m.joint(), {m.y_relay(i)}, {m.yhat(i)}, {m.x_relay(i)});
        EXPECT_NEAR(thm2_rate(m).rate, std::max(0.0, direct_info(m) - waste), 1e-9);
    }
}

TEST(Thm2, DegenerateSecondRelayReducesToOne) {
    Rng rng(12);
    for (int k = 0; k < 20; ++k) {
        const RelayNetworkSpec one = random_spec(rng, 1);
        const CodingDistribution d1 = random_distribution(rng, one);
        RelayNetworkSpec two = one;
        two.relays = 2;
        two.x_relay_card.push_back(1);
        two.y_relay_card.push_back(1);
        two.yhat_card.push_back(1);
        CodingDistribution d2 = d1;
        d2.p_x_relay.push_back({1.0});
        d2.test_channel.push_back({1.0});
        EXPECT_NEAR(thm2_rate(build_joint(two, d2)).rate, thm2_rate(build_joint(one, d1)).rate, 1e-9);
    }
}

TEST(Thm2, RatesReproduceFromVector) {
    Rng rng(13);
    for (int k = 0; k < 60; ++k) {
        const int n = 1 + k % 3;
        const JointModel m = random_model(rng, n, 2, 2);
        const SubsetFunctions& fn = subset_functions(m);
        const LpRate r = thm2_rate(m);
        ASSERT_EQ(r.rates.size(), static_cast<std::size_t>(n));
        EXPECT_NEAR(std::max(0.0, thm2_value_at(fn, n, r.rates)), r.rate, 1e-7);
        for (SubsetId s1 = 1; s1 <= full_set(n); ++s1)
            EXPECT_LE(detail::rate_sum(r.rates, s1), fn.g[s1] + 1e-8);
    }
}

TEST(Thm2Decodable, EmptySetIsVacuous) {
    Rng rng(14);
    for (int k = 0; k < 10; ++k) {
        const JointModel m = random_model(rng, 2);
        const DecodingResult d = thm2_decodable(m, 0);
        EXPECT_TRUE(d.verdict);
        EXPECT_NEAR(d.rate, thm2_rate(m).rate, 1e-12);
    }
}

TEST(Thm2Decodable, ConstantCompressionDecodesEverything) {
    Rng rng(15);
    const RelayNetworkSpec s = random_spec(rng, 2);
    const JointModel m = build_joint(s, constant_yhat(s, random_distribution(rng, s)));
    EXPECT_TRUE(thm2_decodable(m, full_set(2)).verdict);
}

TEST(Thm2Decodable, MatchesThm1DecodableForSingleRelay) {
    Rng rng(16);
    int yes = 0, no = 0;
    for (int k = 0; k < 300; ++k) {
        const JointModel m = random_model(rng, 1);
        const auto& mm = engine_tables(m).measures;
        if (std::abs(mm.relay_link - mm.compression_cost_x) <= 1e-6)
            continue;
        const bool expected = thm1_decodable(m);
        EXPECT_EQ(thm2_decodable(m, 1).verdict, expected) << "instance " << k;
        (expected ? yes : no) += 1;
    }
    EXPECT_GT(yes, 10);
    EXPECT_GT(no, 10);
}

TEST(Thm2Decodable, RejectsForeignRelay) {
    Rng rng(17);
    EXPECT_THROW(thm2_decodable(random_model(rng, 1), 2), ShapeError);
}

TEST(Thm3, ConstantCompression) {
    Rng rng(18);
    for (int n = 0; n <= 3; ++n) {
        const RelayNetworkSpec s = random_spec(rng, n, 2, 2);
        const JointModel m = build_joint(s, constant_yhat(s, random_distribution(rng, s)));
        const LpRate r = thm3_rate(m);
        ASSERT_EQ(r.status, LpStatus::optimal);
        EXPECT_NEAR(r.rate, direct_info(m), 1e-9);
    }
}

TEST(Thm3, InfeasibleWhenCompressionOutrunsLink) {
    // h({1}) = H(Y1 | X, Y, X1) = h(0.02) > 0 = g({1}).
    const JointModel m = build_joint(relay_unheard(), uniform_identity(relay_unheard()));
    const LpRate r = thm3_rate(m);
    EXPECT_EQ(r.status, LpStatus::infeasible);
    EXPECT_EQ(r.rate, 0.0);
    EXPECT_TRUE(r.rates.empty());
}

TEST(Thm3, Thm2OptimumSatisfiesJointDecodingRows) {
    Rng rng(19);
    for (int k = 0; k < 200; ++k) {
        const int n = 1 + k % 2;
        const JointModel m = random_model(rng, n);
        const SubsetFunctions& fn = subset_functions(m);
        const LinearProgram lp = thm2_program(fn, n);
        const LpOutcome out = solve(lp);
        ASSERT_EQ(out.status, LpStatus::optimal);
        const double t = out.point[0];
        const std::span<const double> r(out.point.data() + 1, static_cast<std::size_t>(n));
        for (SubsetId s = 0; s <= full_set(n); ++s)
            for_each_submask(s, [&](SubsetId s1) {
                EXPECT_LE(t, fn.f[s] + detail::rate_sum(r, s & ~s1) + fn.g[s1] + 1e-9);
            });
    }
}

TEST(Thm3, RatesReproduceFromVector) {
    Rng rng(20);
    int optimal = 0;
    for (int k = 0; k < 400; ++k) {
        const int n = 1 + k % 3;
        const JointModel m = random_model(rng, n, 2, 2);
        const LpRate r = thm3_rate(m);
        if (r.status != LpStatus::optimal)
            continue;
        ++optimal;
        EXPECT_GE(r.rate, 0.0);
        EXPECT_NEAR(std::max(0.0, thm3_value_at(subset_functions(m), n, r.rates)), r.rate, 1e-7);
    }
    // Random kernels rarely satisfy h(S) <= g(S) for every S; a handful is enough.
    EXPECT_GT(optimal, 10);
}

// Values pinned from the first verified run; f, g, h were cross-checked against the direct oracle.
TEST(Thm3, RegressionPinned) {
    const JointModel sees = build_joint(relay_sees_x(), uniform_identity(relay_sees_x()));
    CodingDistribution d = uniform_identity(y_is_x1());
    d.p_x = {0.3, 0.7};
    d.test_channel = {{0.9, 0.1, 0.2, 0.8, 0.6, 0.4, 0.25, 0.75}};
    const JointModel noisy = build_joint(y_is_x1(), d);
    for (const JointModel* m : {&sees, &noisy}) {
        const SubsetFunctions ref = oracles::subset_functions_direct(*m);
        for (std::size_t s = 0; s < 2; ++s) {
            ASSERT_NEAR(subset_functions(*m).f[s], ref.f[s], 1e-10);
            ASSERT_NEAR(subset_functions(*m).h[s], ref.h[s], 1e-10);
        }
    }
    EXPECT_NEAR(thm3_rate(sees).rate, 1.0, 1e-9);
    EXPECT_NEAR(thm3_rate(noisy).rate, 0.0693112701038654, 1e-9);
}

TEST(Thm3Decodable, Examples) {
    Rng rng(21);
    const JointModel m = build_joint(relay_unheard(), uniform_identity(relay_unheard()));
    const std::array<double, 1> zero{0.0};
    EXPECT_TRUE(thm3_decodable(m, 0, zero));
    ASSERT_GT(subset_functions(m).h[1], 0.0);
    EXPECT_FALSE(thm3_decodable(m, 1, zero));
    const std::array<double, 1> wide{1.0};
    EXPECT_TRUE(thm3_decodable(m, 1, wide));

    const std::array<double, 1> negative{-0.1};
    EXPECT_THROW(thm3_decodable(m, 1, negative), Error);
    EXPECT_THROW(thm3_decodable(m, 1, std::array<double, 2>{0.0, 0.0}), ShapeError);
}

TEST(Thm3Decodable, MatchesEnumeration) {
    Rng rng(22);
    std::uniform_real_distribution<double> unit(0.0, 1.5);
    for (int k = 0; k < 100; ++k) {
        const JointModel m = random_model(rng, 2);
        const SubsetFunctions ref = oracles::subset_functions_direct(m);
        const std::array<double, 2> r{unit(rng), unit(rng)};
        for (SubsetId d = 0; d < 4; ++d) {
            bool expected = true;
            for (SubsetId s = 1; s < 4; ++s) {
                const double sum = ((s & 1) ? r[0] : 0.0) + ((s & 2) ? r[1] : 0.0);
                if ((s & d) != 0 && ref.h[s] > sum + 1e-9)
                    expected = false;
            }
            EXPECT_EQ(thm3_decodable(m, d, r), expected);
        }
    }
}

TEST(FullReport, TripleAgreementWhenClassicalFeasible) {
    const JointModel m = build_joint(relay_sees_x(), uniform_identity(relay_sees_x()));
    const RateReport rep = full_report(m, std::vector<SubsetId>{1});
    ASSERT_TRUE(*rep.classical_feasible);
    EXPECT_NEAR(*rep.classical_rate, *rep.thm1_rate, 1e-7);
    EXPECT_NEAR(*rep.thm1_rate, rep.thm2.rate, 1e-7);
    ASSERT_EQ(rep.decoding.size(), 1u);
    EXPECT_TRUE(rep.decoding[0].thm2.verdict);
}

TEST(FullReport, NoRelays) {
    Rng rng(23);
    const JointModel m = random_model(rng, 0);
    const RateReport rep = full_report(m, {});
    const double i = direct_info(m);
    EXPECT_NEAR(*rep.classical_rate, i, 1e-12);
    EXPECT_NEAR(*rep.thm1_rate, i, 1e-12);
    EXPECT_NEAR(rep.thm2.rate, i, 1e-12);
    EXPECT_NEAR(rep.thm3.rate, i, 1e-12);
    EXPECT_TRUE(rep.thm2.rates.empty());
}

TEST(FullReport, ConstantCompressionPair) {
    Rng rng(24);
    const RelayNetworkSpec s = random_spec(rng, 2);
    const JointModel m = build_joint(s, constant_yhat(s, random_distribution(rng, s)));
    const RateReport rep = full_report(m, std::vector<SubsetId>{0, 1, 2, 3});
    EXPECT_FALSE(rep.classical_rate.has_value());
    EXPECT_FALSE(rep.thm1_rate.has_value());
    EXPECT_NEAR(rep.thm2.rate, direct_info(m), 1e-9);
    EXPECT_NEAR(rep.thm3.rate, direct_info(m), 1e-9);
    for (const auto& v : rep.decoding) {
        EXPECT_TRUE(v.thm2.verdict);
        EXPECT_TRUE(v.thm3);
    }
}

TEST(Properties, DataProcessingCeiling) {
    Rng rng(25);
    for (int k = 0; k < 300; ++k) {
        const JointModel m = random_model(rng, k % 3);
        const RateReport rep = full_report(m, {});
        const double ceiling = oracles::mi_direct(m.joint(), {m.x()}, detail::join({m.y()}, m.y_relays(m.all_relays())),
                                                  m.x_relays(m.all_relays()));
        for (double r : report_rates(rep)) {
            EXPECT_GE(r, 0.0);
            EXPECT_LE(r, ceiling + 1e-9);
        }
    }
}

TEST(Properties, CompressionTowardConstant) {
    Rng rng(26);
    for (int k = 0; k < 30; ++k) {
        const RelayNetworkSpec s = random_spec(rng, 1);
        const CodingDistribution base = random_distribution(rng, s);
        const CodingDistribution flat = constant_yhat(s, base);
        for (double w : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            CodingDistribution d = base;
            for (std::size_t j = 0; j < d.test_channel[0].size(); ++j)
                d.test_channel[0][j] = (1 - w) * base.test_channel[0][j] + w * flat.test_channel[0][j];
            const JointModel m = build_joint(s, d);
            const auto& mm = engine_tables(m).measures;
            EXPECT_GE(mm.compression_cost, 0.0);
            for (double r : report_rates(full_report(m, {}))) {
                EXPECT_GE(r, 0.0);
                EXPECT_LE(r, mm.ceiling + 1e-9);
            }
        }
    }
}

TEST(Properties, RelabelingEquivariance) {
    Rng rng(27);
    for (int k = 0; k < 30; ++k) {
        const RelayNetworkSpec s = random_spec(rng, 2);
        const CodingDistribution d = random_distribution(rng, s);
        const std::array<int, 2> perm{2, 1};
        const auto [ps, pd] = permute_relays(s, d, perm);
        const JointModel a = build_joint(s, d);
        const JointModel b = build_joint(ps, pd);
        const LpRate ra = thm2_rate(a), rb = thm2_rate(b);
        EXPECT_NEAR(ra.rate, rb.rate, 1e-9);
        const LpRate ta = thm3_rate(a), tb = thm3_rate(b);
        EXPECT_EQ(ta.status, tb.status);
        EXPECT_NEAR(ta.rate, tb.rate, 1e-9);
        // The swapped vector of one labeling achieves the rate in the other.
        const std::array<double, 2> swapped{ra.rates[1], ra.rates[0]};
        EXPECT_NEAR(std::max(0.0, thm2_value_at(subset_functions(b), 2, swapped)), rb.rate, 1e-7);
        for (SubsetId s1 = 1; s1 < 4; ++s1)
            EXPECT_LE(detail::rate_sum(swapped, s1), subset_functions(b).g[s1] + 1e-8);
    }
}
