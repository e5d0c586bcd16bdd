#include "isobn/simulate.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "isobn/errors.hpp"

namespace isobn {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t size, std::uint64_t replicate) {
    return splitmix64(splitmix64(master ^ splitmix64(size)) + replicate);
}

Dataset logic_sample(const Network& net, std::size_t rows, std::uint64_t seed) {
    for (std::size_t v = 0; v < net.size(); ++v) {
        if (!net.has_cpt(v)) {
            throw ValidationError(fmt::format("cannot sample: variable '{}' has no CPT", net.name(v)));
        }
    }
    std::mt19937_64 engine(seed);
    // 53 random bits mapped to [0, 1), independent of the standard library's distributions.
    auto uniform = [&engine] { return static_cast<double>(engine() >> 11) * 0x1.0p-53; };

    const std::size_t width = net.size();
    std::vector<std::uint8_t> cells(rows * width, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        std::span<std::uint8_t> row(cells.data() + r * width, width);
        for (std::size_t v : net.topological_order()) {
            const double p1 = net.cpt(v)[configuration_index(net, v, row)];
            row[v] = uniform() < p1 ? 1 : 0;
        }
    }
    return Dataset(net.names(), std::move(cells), Provenance{seed, "logic_sample"});
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw ValidationError(fmt::format("KL divergence of distributions with {} and {} entries", p.size(), q.size()));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        total += p[i] * std::log(p[i] / q[i]);
    }
    return total;
}

double kl_divergence(const JointDistribution& p, const JointDistribution& q) {
    return kl_divergence(p.probabilities(), q.probabilities());
}

std::vector<ExperimentRow> summarize_replicates(std::span<const ReplicateResult> replicates,
                                                std::span<const std::size_t> sizes) {
    std::vector<ExperimentRow> rows;
    for (std::size_t size : sizes) {
        ExperimentRow row;
        row.size = size;
        double sum_unconstrained = 0.0;
        double sum_constrained = 0.0;
        for (const auto& rep : replicates) {
            if (rep.size != size) continue;
            if (std::isinf(rep.kl_unconstrained)) {
                ++row.reps_infinite;
                continue;
            }
            ++row.reps_used;
            sum_unconstrained += rep.kl_unconstrained;
            sum_constrained += rep.kl_constrained;
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.mean_kl_unconstrained = row.reps_used > 0 ? sum_unconstrained / static_cast<double>(row.reps_used) : nan;
        row.mean_kl_constrained = row.reps_used > 0 ? sum_constrained / static_cast<double>(row.reps_used) : nan;
        rows.push_back(row);
    }
    return rows;
}

ExperimentSummary run_experiment(const Network& truth, std::span<const SignedInfluence> influences,
                                 const ExperimentConfig& config) {
    validate_influences(influences, truth);
    for (std::size_t v = 0; v < truth.size(); ++v) {
        if (!truth.has_cpt(v)) throw ValidationError(fmt::format("truth variable '{}' has no CPT", truth.name(v)));
        const auto pairs = immediate_order_pairs(influences_on(influences, v), truth.parent_count(v));
        const auto table = truth.cpt(v);
        if (auto violation = find_violation(std::vector<double>(table.begin(), table.end()), pairs, 1e-12)) {
            const std::size_t k = truth.parent_count(v);
            throw ValidationError(fmt::format(
                "true CPT of '{}' violates its signs: p({}) = {} exceeds p({}) = {}", truth.name(v),
                Configuration(k, violation->lower).to_string(), violation->lower_value,
                Configuration(k, violation->upper).to_string(), violation->upper_value));
        }
    }

    const JointDistribution true_joint = joint_distribution(truth);
    ExperimentSummary summary;
    for (std::size_t size : config.sizes) {
        const bool use_prior = config.prior.has_value() && size < config.prior_threshold;
        FitOptions options;
        options.method = use_prior ? Method::map : Method::ml;
        options.empty_weight = config.empty_weight;
        const NetworkPrior* prior = use_prior ? &*config.prior : nullptr;

        for (std::size_t rep = 0; rep < config.replicates; ++rep) {
            const Dataset data = logic_sample(truth, size, replicate_seed(config.seed, size, rep));

            options.constrained = false;
            const auto plain = fit_network(truth, influences, data, prior, options);
            options.constrained = true;
            const auto constrained = fit_network(truth, influences, data, prior, options);

            ReplicateResult result;
            result.size = size;
            result.replicate = rep;
            result.used_prior = use_prior;
            result.kl_unconstrained = kl_divergence(true_joint, joint_distribution(plain.network));
            result.kl_constrained = kl_divergence(true_joint, joint_distribution(constrained.network));
            if (std::isfinite(result.kl_unconstrained) && !std::isfinite(result.kl_constrained)) {
                throw InternalError(fmt::format(
                    "size {}, replicate {}: constrained KL is infinite although the plain estimate's is finite", size,
                    rep));
            }
            summary.replicates.push_back(result);
        }
    }
    summary.rows = summarize_replicates(summary.replicates, config.sizes);
    return summary;
}

}  // namespace isobn
