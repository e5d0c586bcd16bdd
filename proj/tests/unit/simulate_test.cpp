#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "isobn/errors.hpp"
#include "isobn/io.hpp"
#include "isobn/simulate.hpp"
#include "oracle.hpp"

namespace isobn {
namespace {

ParsedNetwork reference() { return load_network(testing::data_path("reference.net")); }

TEST(LogicSampleTest, DegenerateCptGivesOnes) {
    const Network net({"Y"}, {{}}, {std::vector<double>{1.0}});
    const Dataset d = logic_sample(net, 5, 3);
    ASSERT_EQ(d.row_count(), 5U);
    for (std::size_t r = 0; r < 5; ++r) EXPECT_EQ(d.at(r, 0), 1);
    EXPECT_EQ(d.provenance().seed, std::optional<std::uint64_t>(3));
}

TEST(LogicSampleTest, FairCoinMean) {
    const Network net({"Y"}, {{}}, {std::vector<double>{0.5}});
    const Dataset d = logic_sample(net, 10000, 123);
    double ones = 0.0;
    for (std::size_t r = 0; r < d.row_count(); ++r) ones += d.at(r, 0);
    EXPECT_NEAR(ones / 10000.0, 0.5, 0.02);
}

TEST(LogicSampleTest, ReferenceEmpiricalJointIsClose) {
    const ParsedNetwork ref = reference();
    const JointDistribution exact = joint_distribution(ref.network);
    const Dataset d = logic_sample(ref.network, 1500, 99);
    std::vector<double> empirical(exact.size(), 0.0);
    for (std::size_t r = 0; r < d.row_count(); ++r) {
        std::size_t a = 0;
        for (std::size_t v = 0; v < d.column_count(); ++v) a |= static_cast<std::size_t>(d.at(r, v)) << v;
        empirical[a] += 1.0 / 1500.0;
    }
    double tv = 0.0;
    for (std::size_t a = 0; a < exact.size(); ++a) tv += std::abs(empirical[a] - exact[a]);
    EXPECT_LT(tv / 2.0, 0.05);
}

TEST(LogicSampleTest, ReproducibleAndSeedSensitive) {
    const ParsedNetwork ref = reference();
    EXPECT_EQ(logic_sample(ref.network, 200, 7), logic_sample(ref.network, 200, 7));
    EXPECT_FALSE(logic_sample(ref.network, 200, 7) == logic_sample(ref.network, 200, 8));
    EXPECT_EQ(logic_sample(ref.network, 0, 7).row_count(), 0U);
}

TEST(LogicSampleTest, RequiresCompleteCpts) {
    const Network net({"A", "B"}, {{}, {0}}, {std::vector<double>{0.5}, std::nullopt});
    EXPECT_THROW(logic_sample(net, 5, 1), ValidationError);
}

TEST(KlDivergenceTest, Examples) {
    const JointDistribution p(1, {1.0, 0.0});
    const JointDistribution q(1, {0.5, 0.5});
    EXPECT_NEAR(kl_divergence(p, q), std::log(2.0), 1e-15);
    EXPECT_EQ(kl_divergence(q, p), std::numeric_limits<double>::infinity());
    EXPECT_EQ(kl_divergence(p, p), 0.0);
    EXPECT_EQ(kl_divergence(q, q), 0.0);
    EXPECT_THROW(kl_divergence(p, JointDistribution(2, {0.25, 0.25, 0.25, 0.25})), ValidationError);
}

TEST(KlDivergenceTest, NonNegativeAndZeroOnlyForEqual) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 4);
        const std::size_t size = std::size_t{1} << n;
        std::vector<double> a(size), b(size);
        double sa = 0.0;
        double sb = 0.0;
        for (std::size_t i = 0; i < size; ++i) {
            a[i] = u(rng) < 0.2 ? 0.0 : u(rng);
            b[i] = u(rng) + 1e-3;
            sa += a[i];
            sb += b[i];
        }
        if (sa == 0.0) {
            a[0] = 1.0;
            sa = 1.0;
        }
        for (std::size_t i = 0; i < size; ++i) {
            a[i] /= sa;
            b[i] /= sb;
        }
        const JointDistribution p(n, a);
        const JointDistribution q(n, b);
        EXPECT_GE(kl_divergence(p, q), 0.0);
        EXPECT_GT(kl_divergence(p, q), 0.0);
        EXPECT_NEAR(kl_divergence(p, p), 0.0, 1e-12);
        EXPECT_NEAR(kl_divergence(q, q), 0.0, 1e-12);
    }
}

TEST(KlDivergenceTest, ReferenceAgainstItself) {
    const JointDistribution joint = joint_distribution(reference().network);
    EXPECT_NEAR(kl_divergence(joint, joint), 0.0, 1e-12);
}

TEST(ReplicateSeedTest, SplittingRule) {
    EXPECT_EQ(replicate_seed(1, 20, 0), splitmix64(splitmix64(1 ^ splitmix64(20)) + 0));
    EXPECT_EQ(replicate_seed(9, 50, 7), splitmix64(splitmix64(9 ^ splitmix64(50)) + 7));
    EXPECT_NE(replicate_seed(1, 20, 0), replicate_seed(1, 20, 1));
    EXPECT_NE(replicate_seed(1, 20, 0), replicate_seed(1, 50, 0));
    // Reference values of the splitmix64 finalizer.
    EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
    EXPECT_EQ(splitmix64(1), 0x910a2dec89025cc1ULL);
}

ExperimentConfig small_config() {
    ExperimentConfig config;
    config.sizes = {30, 80};
    config.replicates = 12;
    config.seed = 5;
    return config;
}

TEST(ExperimentTest, ReproducibleAndStableUnderAddedSizes) {
    const ParsedNetwork ref = reference();
    const ExperimentSummary a = run_experiment(ref.network, ref.influences, small_config());
    const ExperimentSummary b = run_experiment(ref.network, ref.influences, small_config());
    ASSERT_EQ(a.replicates.size(), 24U);
    for (std::size_t i = 0; i < a.replicates.size(); ++i) {
        EXPECT_EQ(a.replicates[i].kl_unconstrained, b.replicates[i].kl_unconstrained);
        EXPECT_EQ(a.replicates[i].kl_constrained, b.replicates[i].kl_constrained);
    }
    ExperimentConfig more = small_config();
    more.sizes = {10, 30, 80};
    more.replicates = 15;
    const ExperimentSummary c = run_experiment(ref.network, ref.influences, more);
    for (const auto& r : a.replicates) {
        const auto it = std::find_if(c.replicates.begin(), c.replicates.end(), [&](const ReplicateResult& x) {
            return x.size == r.size && x.replicate == r.replicate;
        });
        ASSERT_NE(it, c.replicates.end());
        EXPECT_EQ(it->kl_unconstrained, r.kl_unconstrained);
        EXPECT_EQ(it->kl_constrained, r.kl_constrained);
    }
}

TEST(ExperimentTest, SummaryCountsAndFiniteness) {
    const ParsedNetwork ref = reference();
    const ExperimentSummary s = run_experiment(ref.network, ref.influences, small_config());
    ASSERT_EQ(s.rows.size(), 2U);
    for (const auto& row : s.rows) {
        EXPECT_EQ(row.reps_used + row.reps_infinite, 12U);
        double sum_u = 0.0;
        double sum_c = 0.0;
        std::size_t used = 0;
        for (const auto& r : s.replicates) {
            if (r.size != row.size) continue;
            if (std::isfinite(r.kl_unconstrained)) {
                EXPECT_TRUE(std::isfinite(r.kl_constrained));
                sum_u += r.kl_unconstrained;
                sum_c += r.kl_constrained;
                ++used;
            }
        }
        EXPECT_EQ(used, row.reps_used);
        if (used > 0) {
            EXPECT_NEAR(row.mean_kl_unconstrained, sum_u / static_cast<double>(used), 1e-15);
            EXPECT_NEAR(row.mean_kl_constrained, sum_c / static_cast<double>(used), 1e-15);
        }
    }
}

TEST(ExperimentTest, BetaPriorKeepsKlFinite) {
    const ParsedNetwork ref = reference();
    ExperimentConfig config = small_config();
    config.sizes = {10, 20};
    config.prior = NetworkPrior::uniform(ref.network, 2, 2);
    config.prior_threshold = 50;
    const ExperimentSummary s = run_experiment(ref.network, ref.influences, config);
    for (const auto& r : s.replicates) {
        EXPECT_TRUE(r.used_prior);
        EXPECT_TRUE(std::isfinite(r.kl_unconstrained));
        EXPECT_TRUE(std::isfinite(r.kl_constrained));
    }
    for (const auto& row : s.rows) EXPECT_EQ(row.reps_infinite, 0U);
}

TEST(ExperimentTest, PriorThresholdIsStrict) {
    const ParsedNetwork ref = reference();
    ExperimentConfig config = small_config();
    config.sizes = {49, 50};
    config.replicates = 2;
    config.prior = NetworkPrior::uniform(ref.network, 2, 2);
    config.prior_threshold = 50;
    const ExperimentSummary s = run_experiment(ref.network, ref.influences, config);
    for (const auto& r : s.replicates) EXPECT_EQ(r.used_prior, r.size < 50);
}

TEST(ExperimentTest, NoSignsMeansIdenticalSummaries) {
    const ParsedNetwork ref = reference();
    const ExperimentSummary s = run_experiment(ref.network, {}, small_config());
    for (const auto& r : s.replicates) {
        if (std::isfinite(r.kl_unconstrained)) {
            EXPECT_EQ(r.kl_unconstrained, r.kl_constrained);
        }
    }
    for (const auto& row : s.rows) {
        if (row.reps_used > 0) {
            EXPECT_EQ(row.mean_kl_unconstrained, row.mean_kl_constrained);
        }
    }
}

TEST(ExperimentTest, LargeSampleIsConsistent) {
    const ParsedNetwork ref = reference();
    ExperimentConfig config;
    config.sizes = {50000};
    config.replicates = 1;
    config.seed = 3;
    const ExperimentSummary s = run_experiment(ref.network, ref.influences, config);
    ASSERT_EQ(s.rows.size(), 1U);
    EXPECT_LT(s.rows[0].mean_kl_unconstrained, 0.01);
    EXPECT_LT(s.rows[0].mean_kl_constrained, 0.01);
}

TEST(ExperimentTest, RejectsTruthViolatingSigns) {
    const ParsedNetwork ref = reference();
    std::vector<SignedInfluence> flipped = ref.influences;
    for (auto& s : flipped) {
        if (s.sign == Sign::positive && s.context.empty()) s.sign = Sign::negative;
    }
    EXPECT_THROW(run_experiment(ref.network, flipped, small_config()), ValidationError);
}

TEST(SummarizeTest, FiltersInfiniteReplicates) {
    const double inf = std::numeric_limits<double>::infinity();
    const std::vector<ReplicateResult> reps{
        {20, 0, false, 0.2, 0.1}, {20, 1, false, inf, inf}, {20, 2, false, 0.4, 0.3}, {50, 0, false, inf, 0.5}};
    const std::vector<std::size_t> sizes{20, 50};
    const auto rows = summarize_replicates(reps, sizes);
    ASSERT_EQ(rows.size(), 2U);
    EXPECT_EQ(rows[0].reps_used, 2U);
    EXPECT_EQ(rows[0].reps_infinite, 1U);
    EXPECT_NEAR(rows[0].mean_kl_unconstrained, 0.3, 1e-15);
    EXPECT_NEAR(rows[0].mean_kl_constrained, 0.2, 1e-15);
    EXPECT_EQ(rows[1].reps_used, 0U);
    EXPECT_EQ(rows[1].reps_infinite, 1U);
    EXPECT_TRUE(std::isnan(rows[1].mean_kl_unconstrained));
}

}  // namespace
}  // namespace isobn
