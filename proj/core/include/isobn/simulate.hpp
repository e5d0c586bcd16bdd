#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "isobn/dataset.hpp"
#include "isobn/estimation.hpp"
#include "isobn/model.hpp"
#include "isobn/signs.hpp"

namespace isobn {

/// Forward sampling in topological order. Deterministic for a given seed.
Dataset logic_sample(const Network& net, std::size_t rows, std::uint64_t seed);

/**
 * KL(p || q) = sum p log(p / q) with natural log. Terms with p = 0 contribute 0;
 * a term with q = 0 < p makes the result +infinity (never an exception).
 */
double kl_divergence(const JointDistribution& p, const JointDistribution& q);
double kl_divergence(std::span<const double> p, std::span<const double> q);

/**
 * Seed of replicate `replicate` at sample size `size`:
 * splitmix64(splitmix64(master ^ splitmix64(size)) + replicate).
 * Streams depend only on (master, size, replicate), so adding sizes or
 * replicates leaves existing ones unchanged.
 */
std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t size, std::uint64_t replicate);

std::uint64_t splitmix64(std::uint64_t x);

struct ExperimentConfig {
    std::vector<std::size_t> sizes;
    std::size_t replicates = 100;
    std::uint64_t seed = 1;
    /// Prior applied to both estimators when the sample size is below `prior_threshold`.
    std::optional<NetworkPrior> prior;
    std::size_t prior_threshold = 0;
    double empty_weight = kDefaultEmptyWeight;
};

struct ReplicateResult {
    std::size_t size = 0;
    std::size_t replicate = 0;
    bool used_prior = false;
    double kl_unconstrained = 0.0;
    double kl_constrained = 0.0;
};

struct ExperimentRow {
    std::size_t size = 0;
    /// Means over replicates whose unconstrained KL is finite; NaN when there are none.
    double mean_kl_unconstrained = 0.0;
    double mean_kl_constrained = 0.0;
    std::size_t reps_used = 0;
    std::size_t reps_infinite = 0;
};

struct ExperimentSummary {
    std::vector<ExperimentRow> rows;
    /// Every replicate, ordered by size then replicate index.
    std::vector<ReplicateResult> replicates;
};

/**
 * Repeated sampling experiment: for each size and replicate, sample from `truth`,
 * fit the plain and the sign-constrained estimators, and compare both joints with
 * the true joint. Throws ValidationError if the truth's CPTs violate `influences`.
 */
ExperimentSummary run_experiment(const Network& truth, std::span<const SignedInfluence> influences,
                                 const ExperimentConfig& config);

/// Summary rows from already computed replicates, applying the finite-KL filter.
std::vector<ExperimentRow> summarize_replicates(std::span<const ReplicateResult> replicates,
                                                std::span<const std::size_t> sizes);

}  // namespace isobn
