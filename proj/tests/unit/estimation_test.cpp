#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fit_audit.hpp"
#include "isobn/errors.hpp"
#include "isobn/estimation.hpp"
#include "isobn/io.hpp"
#include "isobn/simulate.hpp"
#include "oracle.hpp"

namespace isobn {
namespace {

using testing::audit_fit;

constexpr std::uint32_t cfg(const char* bits) { return (bits[0] - '0') * 4U + (bits[1] - '0') * 2U + (bits[2] - '0'); }

struct Fragment {
    ParsedNetwork parsed = load_network(testing::data_path("context_fragment.net"));
    Dataset data = load_data(testing::data_path("context_fragment.csv"), parsed.network);
    std::size_t y = *parsed.network.index_of("Y");
    std::vector<SignedInfluence> signs = influences_on(parsed.influences, y);
};

CountTable table(std::vector<std::uint64_t> n, std::vector<std::uint64_t> n1) { return {std::move(n), std::move(n1)}; }

TEST(CountTableTest, FragmentSlices) {
    const Fragment f;
    const CountTable c = count_table(f.data, f.parsed.network, f.y);
    ASSERT_EQ(c.configuration_count(), 8U);
    EXPECT_EQ(c.n[cfg("000")], 10U);
    EXPECT_EQ(c.n[cfg("001")], 5U);
    EXPECT_EQ(c.n[cfg("100")], 18U);
    EXPECT_EQ(c.n[cfg("101")], 5U);
    EXPECT_EQ(c.n1[cfg("000")], 4U);
    EXPECT_EQ(c.n1[cfg("001")], 1U);
    EXPECT_EQ(c.n1[cfg("100")], 6U);
    EXPECT_EQ(c.n1[cfg("101")], 4U);
    EXPECT_EQ(c.n[cfg("010")], 20U);
    EXPECT_EQ(c.n[cfg("011")], 0U);
    EXPECT_EQ(c.n[cfg("110")], 5U);
    EXPECT_EQ(c.n[cfg("111")], 10U);
    EXPECT_EQ(c.n1[cfg("010")], 10U);
    EXPECT_EQ(c.n1[cfg("011")], 0U);
    EXPECT_EQ(c.n1[cfg("110")], 2U);
    EXPECT_EQ(c.n1[cfg("111")], 4U);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_LE(c.n1[i], c.n[i]);
        total += c.n[i];
    }
    EXPECT_EQ(total, f.data.row_count());
}

TEST(CountTableTest, EmptyDatasetGivesZeros) {
    const Fragment f;
    const Dataset empty(f.data.columns(), {});
    const CountTable c = count_table(empty, f.parsed.network, f.y);
    EXPECT_EQ(c.n, std::vector<std::uint64_t>(8, 0));
    EXPECT_EQ(c.n1, std::vector<std::uint64_t>(8, 0));
}

TEST(CountTableTest, MissingColumnThrows) {
    const Fragment f;
    const Dataset partial({"X1", "X2", "Y"}, {0, 1, 1});
    EXPECT_THROW(count_table(partial, f.parsed.network, f.y), ValidationError);
}

TEST(MlBasicTest, FragmentClasses) {
    const Fragment f;
    const CountTable c = count_table(f.data, f.parsed.network, f.y);
    const ConfigOrder order = build_config_order(f.signs, 3);
    const BasicEstimates b = ml_basic(c, order);
    const std::size_t pooled = order.class_of[cfg("100")];
    EXPECT_DOUBLE_EQ(b.value[order.class_of[cfg("000")]], 0.4);
    EXPECT_DOUBLE_EQ(b.value[order.class_of[cfg("001")]], 0.2);
    EXPECT_DOUBLE_EQ(b.value[pooled], 10.0 / 23.0);
    EXPECT_EQ(b.weight[order.class_of[cfg("000")]], 10.0);
    EXPECT_EQ(b.weight[order.class_of[cfg("001")]], 5.0);
    EXPECT_EQ(b.weight[pooled], 23.0);
    const std::size_t empty = order.class_of[cfg("011")];
    EXPECT_EQ(b.value[empty], 0.5);
    EXPECT_EQ(b.weight[empty], kDefaultEmptyWeight);
    EXPECT_TRUE(b.empty[empty]);
    EXPECT_FALSE(b.empty[pooled]);
}

TEST(MlBasicTest, AllSuccessCell) {
    const ConfigOrder order = build_config_order({}, 0);
    const BasicEstimates b = ml_basic(table({7}, {7}), order);
    EXPECT_EQ(b.value[0], 1.0);
    EXPECT_EQ(b.weight[0], 7.0);
}

TEST(MlBasicTest, SizeMismatchThrows) {
    const ConfigOrder order = build_config_order({}, 1);
    EXPECT_THROW(ml_basic(table({7}, {7}), order), ValidationError);
}

TEST(BetaPriorTest, ModeAndPrecision) {
    EXPECT_EQ(beta_mode_precision(2, 2), std::make_pair(0.5, 2.0));
    EXPECT_EQ(beta_mode_precision(1, 1), std::make_pair(0.5, 0.0));
    EXPECT_EQ(beta_mode_precision(3, 1), std::make_pair(1.0, 2.0));
    EXPECT_THROW(beta_mode_precision(0.5, 2), ValidationError);
    EXPECT_TRUE(BetaPrior::flat(2).is_flat());
    EXPECT_FALSE(BetaPrior::uniform(2, 2, 2).is_flat());
    EXPECT_EQ(BetaPrior::uniform(3, 2, 2).configuration_count(), 8U);
}

TEST(MapBasicTest, BetaTwoTwo) {
    const ConfigOrder order = build_config_order({}, 0);
    const BetaPrior prior = BetaPrior::uniform(0, 2, 2);
    const BasicEstimates b = map_basic(table({10}, {4}), prior, order, {});
    EXPECT_DOUBLE_EQ(b.value[0], 5.0 / 12.0);
    EXPECT_EQ(b.weight[0], 12.0);

    const BasicEstimates prior_only = map_basic(table({0}, {0}), prior, order, {});
    EXPECT_EQ(prior_only.value[0], 0.5);
    EXPECT_EQ(prior_only.weight[0], 2.0);
    EXPECT_FALSE(prior_only.empty[0]);
}

TEST(MapBasicTest, FlatPriorIsMlBitForBit) {
    const Fragment f;
    const CountTable c = count_table(f.data, f.parsed.network, f.y);
    const auto pairs = immediate_order_pairs(f.signs, 3);
    const ConfigOrder order = condense(pairs, 3);
    const BasicEstimates ml = ml_basic(c, order);
    const BasicEstimates map = map_basic(c, BetaPrior::flat(3), order, pairs);
    EXPECT_EQ(ml.value, map.value);
    EXPECT_EQ(ml.weight, map.weight);
    EXPECT_EQ(ml.empty, map.empty);
}

TEST(MapBasicTest, ClassPoolingIsPrecisionWeighted) {
    const std::vector<SignedInfluence> zero{{1, 0, Sign::zero, {}}};
    const auto pairs = immediate_order_pairs(zero, 1);
    const ConfigOrder order = condense(pairs, 1);
    const BetaPrior prior{{0.5, 0.5}, {2.0, 6.0}};
    const BasicEstimates b = map_basic(table({4, 0}, {3, 0}), prior, order, pairs);
    ASSERT_EQ(b.value.size(), 1U);
    EXPECT_DOUBLE_EQ(b.value[0], (3.0 + 1.0 + 3.0) / (4.0 + 2.0 + 6.0));
    EXPECT_EQ(b.weight[0], 12.0);
}

TEST(MapBasicTest, RejectsNonIsotonicPrior) {
    const std::vector<SignedInfluence> plus{{1, 0, Sign::positive, {}}};
    const auto pairs = immediate_order_pairs(plus, 1);
    const ConfigOrder order = condense(pairs, 1);
    const BetaPrior bad{{0.7, 0.3}, {2.0, 2.0}};
    EXPECT_THROW(map_basic(table({1, 1}, {0, 1}), bad, order, pairs), ValidationError);
    const BetaPrior fine{{0.3, 0.7}, {2.0, 2.0}};
    EXPECT_NO_THROW(map_basic(table({1, 1}, {0, 1}), fine, order, pairs));
}

TEST(FitVariableTest, WorkedExample) {
    const Fragment f;
    const CountTable c = count_table(f.data, f.parsed.network, f.y);
    const VariableFit fit = fit_variable(f.parsed.network, f.y, f.signs, c, nullptr, {});
    EXPECT_TRUE(audit_fit(fit, "WorkedExample"));
    EXPECT_NEAR(fit.fitted[cfg("000")], 0.4, 1e-12);
    EXPECT_NEAR(fit.fitted[cfg("001")], 0.2, 1e-12);
    EXPECT_NEAR(fit.fitted[cfg("100")], 10.0 / 23.0, 1e-12);
    EXPECT_NEAR(fit.fitted[cfg("101")], 10.0 / 23.0, 1e-12);
    EXPECT_NEAR(fit.fitted[cfg("010")], 0.48, 1e-6);
    EXPECT_NEAR(fit.fitted[cfg("011")], 0.4, 1e-6);
    EXPECT_NEAR(fit.fitted[cfg("110")], 0.48, 1e-6);
    EXPECT_NEAR(fit.fitted[cfg("111")], 0.4, 1e-6);
    EXPECT_EQ(fit.fitted[cfg("100")], fit.fitted[cfg("101")]);
    EXPECT_NE(fit.component[cfg("000")], fit.component[cfg("010")]);
    EXPECT_EQ(fit.block[cfg("011")], fit.block[cfg("111")]);
    EXPECT_NEAR(fit.basic[cfg("100")], 1.0 / 3.0, 1e-15);
    EXPECT_EQ(fit.basic[cfg("011")], 0.5);
}

TEST(FitVariableTest, EmptyCellDominatedAsWeightShrinks) {
    const Fragment f;
    const CountTable c = count_table(f.data, f.parsed.network, f.y);
    double previous = std::numeric_limits<double>::infinity();
    for (double eps : {1e-1, 1e-3, 1e-6, 1e-9}) {
        FitOptions options;
        options.empty_weight = eps;
        const VariableFit fit = fit_variable(f.parsed.network, f.y, f.signs, c, nullptr, options);
        EXPECT_TRUE(audit_fit(fit, "EmptyCellDominated"));
        const double gap = std::abs(fit.fitted[cfg("011")] - 0.4);
        EXPECT_LT(gap, previous);
        previous = gap;
    }
    EXPECT_LT(previous, 1e-6);
}

TEST(FitVariableTest, NoInfluencesIsUnconstrained) {
    const Fragment f;
    const CountTable c = count_table(f.data, f.parsed.network, f.y);
    const VariableFit fit = fit_variable(f.parsed.network, f.y, {}, c, nullptr, {});
    EXPECT_TRUE(audit_fit(fit, "NoInfluences"));
    for (std::size_t i = 0; i < 8; ++i) {
        const double expected = c.n[i] == 0 ? 0.5 : static_cast<double>(c.n1[i]) / static_cast<double>(c.n[i]);
        EXPECT_EQ(fit.fitted[i], expected);
    }
    FitOptions plain;
    plain.constrained = false;
    const VariableFit unconstrained = fit_variable(f.parsed.network, f.y, f.signs, c, nullptr, plain);
    EXPECT_TRUE(audit_fit(unconstrained, "Unconstrained"));
    EXPECT_EQ(unconstrained.fitted, fit.fitted);
    EXPECT_TRUE(unconstrained.order.edges.empty());
}

TEST(FitVariableTest, SinglePositiveViolationPools) {
    const Network net({"X", "Y"}, {{}, {0}});
    const std::vector<SignedInfluence> plus{{1, 0, Sign::positive, {}}};
    const VariableFit fit = fit_variable(net, 1, plus, table({10, 5}, {4, 1}), nullptr, {});
    EXPECT_TRUE(audit_fit(fit, "SinglePositive"));
    EXPECT_NEAR(fit.fitted[0], 5.0 / 15.0, 1e-15);
    EXPECT_NEAR(fit.fitted[1], 5.0 / 15.0, 1e-15);
    const IsotonicSolution oracle = testing::oracle_solve({{0.4, 0.2}, {10.0, 5.0}}, OrderDag(2, {{0, 1}}));
    EXPECT_NEAR(fit.fitted[0], oracle.fitted[0], 1e-12);
}

TEST(FitVariableTest, MapWithBetaPriorStaysIsotonic) {
    const Fragment f;
    const CountTable c = count_table(f.data, f.parsed.network, f.y);
    const BetaPrior prior = BetaPrior::uniform(3, 2, 2);
    FitOptions options;
    options.method = Method::map;
    const VariableFit fit = fit_variable(f.parsed.network, f.y, f.signs, c, &prior, options);
    EXPECT_TRUE(audit_fit(fit, "MapBeta22"));
    EXPECT_DOUBLE_EQ(fit.basic[cfg("011")], 0.5);
    EXPECT_DOUBLE_EQ(fit.basic[cfg("000")], 5.0 / 12.0);

    const BetaPrior flat = BetaPrior::flat(3);
    const VariableFit via_map = fit_variable(f.parsed.network, f.y, f.signs, c, &flat, options);
    const VariableFit via_ml = fit_variable(f.parsed.network, f.y, f.signs, c, nullptr, {});
    EXPECT_TRUE(audit_fit(via_map, "MapFlat"));
    EXPECT_EQ(via_map.fitted, via_ml.fitted);
    EXPECT_EQ(via_map.basic, via_ml.basic);
}

TEST(FitVariableTest, FeasibilityErrorNamesVariable) {
    std::vector<std::string> names;
    std::vector<std::vector<std::size_t>> parents(5);
    for (std::size_t i = 0; i < 5; ++i) names.push_back("P" + std::to_string(i));
    names.back() = "Target";
    parents[4] = {0, 1, 2, 3};
    const Network net(names, parents);
    std::vector<SignedInfluence> infl;
    for (std::size_t p = 0; p < 4; ++p) infl.push_back({4, p, Sign::positive, {}});
    std::vector<std::uint64_t> n(16);
    std::vector<std::uint64_t> n1(16);
    for (std::size_t i = 0; i < 16; ++i) {
        n[i] = 10;
        n1[i] = 10 - (i % 7);
    }
    FitOptions options;
    options.solver.max_lower_sets = 50;
    try {
        fit_variable(net, 4, infl, table(n, n1), nullptr, options);
        FAIL() << "expected a feasibility error";
    } catch (const FeasibilityError& e) {
        EXPECT_NE(std::string(e.what()).find("Target"), std::string::npos);
    }
    options.solver.max_lower_sets = kDefaultMaxLowerSets;
    const VariableFit fit = fit_variable(net, 4, infl, table(n, n1), nullptr, options);
    EXPECT_TRUE(audit_fit(fit, "FourParentCube"));
}

TEST(FitVariableTest, MatchesOracleOnRandomTables) {
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<int> count(1, 20);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 1 + static_cast<std::size_t>(trial % 3);
        std::vector<std::string> names;
        std::vector<std::vector<std::size_t>> parents(k + 1);
        for (std::size_t i = 0; i <= k; ++i) names.push_back("V" + std::to_string(i));
        for (std::size_t i = 0; i < k; ++i) parents[k].push_back(i);
        const Network net(names, parents);
        std::vector<SignedInfluence> infl;
        for (std::size_t p = 0; p < k; ++p) {
            const auto sign = static_cast<Sign>(rng() % 4);
            if (rng() % 2 == 0 || k == 1) {
                infl.push_back({k, p, sign, {}});
            } else {
                const std::size_t other = (p + 1) % k;
                infl.push_back({k, p, sign, {{other, 0}}});
                infl.push_back({k, p, static_cast<Sign>(rng() % 4), {{other, 1}}});
            }
        }
        CountTable c;
        for (std::size_t i = 0; i < configuration_count(k); ++i) {
            const auto total = static_cast<std::uint64_t>(count(rng));
            c.n.push_back(total);
            c.n1.push_back(rng() % (total + 1));
        }
        const VariableFit fit = fit_variable(net, k, infl, c, nullptr, {});
        ASSERT_TRUE(audit_fit(fit, "RandomTables"));

        // Solve each component again with the exhaustive oracle.
        const BasicEstimates basic = ml_basic(c, fit.order);
        for (std::size_t comp = 0; comp < fit.order.components.size(); ++comp) {
            const auto& members = fit.order.components[comp];
            IsotonicProblem p;
            for (std::size_t cls : members) {
                p.values.push_back(basic.value[cls]);
                p.weights.push_back(basic.weight[cls]);
            }
            const IsotonicSolution oracle = testing::oracle_solve(p, fit.order.component_dag(comp));
            for (std::size_t i = 0; i < members.size(); ++i) {
                const std::uint32_t config = fit.order.classes[members[i]].members[0];
                EXPECT_NEAR(fit.fitted[config], oracle.fitted[i], 1e-9);
            }
        }
        // Zero-influence classes share one value exactly.
        for (const auto& cls : fit.order.classes) {
            for (std::uint32_t m : cls.members) EXPECT_EQ(fit.fitted[m], fit.fitted[cls.members[0]]);
        }
    }
}

TEST(FitNetworkTest, NoSignsGivesPlainMl) {
    Fragment f;
    const FittedParameters fit = fit_network(f.parsed.network, {}, f.data, nullptr, {});
    EXPECT_TRUE(audit_fit(fit, "NoSigns"));
    ASSERT_TRUE(fit.network.complete());
    const CountTable c = count_table(f.data, f.parsed.network, f.y);
    for (std::size_t i = 0; i < 8; ++i) {
        const double expected = c.n[i] == 0 ? 0.5 : static_cast<double>(c.n1[i]) / static_cast<double>(c.n[i]);
        EXPECT_EQ(fit.network.cpt(f.y)[i], expected);
    }
    EXPECT_DOUBLE_EQ(fit.network.cpt(0)[0], 38.0 / 73.0);
}

TEST(FitNetworkTest, FragmentCptMatchesWorkedExample) {
    const Fragment f;
    const FittedParameters fit = fit_network(f.parsed.network, f.parsed.influences, f.data, nullptr, {});
    EXPECT_TRUE(audit_fit(fit, "FragmentNetwork"));
    const auto cpt = fit.network.cpt(f.y);
    const double expected[8] = {0.4, 0.2, 0.48, 0.4, 10.0 / 23.0, 10.0 / 23.0, 0.48, 0.4};
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(cpt[i], expected[i], 1e-6) << i;
}

TEST(FitNetworkTest, ReferenceSampleIsIsotonic) {
    const ParsedNetwork ref = load_network(testing::data_path("reference.net"));
    const Dataset data = logic_sample(ref.network, 500, 17);
    const FittedParameters fit = fit_network(ref.network, ref.influences, data, nullptr, {});
    EXPECT_TRUE(audit_fit(fit, "Reference500"));
    for (std::size_t v = 0; v < ref.network.size(); ++v) {
        EXPECT_TRUE(check_isotonic_configurations(fit.network.cpt(v), influences_on(ref.influences, v),
                                                  ref.network.parent_count(v), kFitIsotonicTolerance));
    }
    const NetworkPrior prior = NetworkPrior::uniform(ref.network, 2, 2);
    FitOptions map;
    map.method = Method::map;
    const FittedParameters fit_map = fit_network(ref.network, ref.influences, data, &prior, map);
    EXPECT_TRUE(audit_fit(fit_map, "Reference500Map"));
}

TEST(FitNetworkTest, AggregatesErrorsByVariable) {
    const Fragment f;
    const Dataset missing({"X1", "X2", "X3"}, {0, 0, 0});
    try {
        fit_network(f.parsed.network, f.parsed.influences, missing, nullptr, {});
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("'Y'"), std::string::npos) << e.what();
    }
    const std::vector<SignedInfluence> bad{{3, 0, Sign::positive, {{0, 1}}}};
    EXPECT_THROW(fit_network(f.parsed.network, bad, f.data, nullptr, {}), ValidationError);
}

}  // namespace
}  // namespace isobn
