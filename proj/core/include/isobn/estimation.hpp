#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "isobn/dataset.hpp"
#include "isobn/isotonic.hpp"
#include "isobn/model.hpp"
#include "isobn/signs.hpp"

namespace isobn {

/// Weight given to parameter classes without any data or prior mass.
inline constexpr double kDefaultEmptyWeight = 1e-9;

/// Observation counts per parent configuration of one variable.
struct CountTable {
    std::vector<std::uint64_t> n;   ///< n(x)
    std::vector<std::uint64_t> n1;  ///< n(y = 1, x)

    std::size_t configuration_count() const { return n.size(); }
};

CountTable count_table(const Dataset& data, const Network& net, std::size_t v);

/**
 * Beta prior per parent configuration, given as mode p0 and precision h = a + b - 2.
 * h = 0 is the flat Beta(1, 1) prior.
 */
struct BetaPrior {
    std::vector<double> mode;
    std::vector<double> precision;

    std::size_t configuration_count() const { return mode.size(); }

    static BetaPrior flat(std::size_t parent_count);
    /// The same Beta(a, b) for every configuration; requires a, b >= 1.
    static BetaPrior uniform(std::size_t parent_count, double a, double b);

    bool is_flat() const;
    bool operator==(const BetaPrior&) const = default;
};

/// Mode and precision of Beta(a, b) for a, b >= 1.
std::pair<double, double> beta_mode_precision(double a, double b);

/// Optional prior per variable; variables without one use the flat prior.
struct NetworkPrior {
    std::vector<std::optional<BetaPrior>> variables;

    static NetworkPrior uniform(const Network& net, double a, double b);
    const BetaPrior* find(std::size_t v) const;
    bool operator==(const NetworkPrior&) const = default;
};

/// Pooled basic estimate and weight per class of a ConfigOrder.
struct BasicEstimates {
    std::vector<double> value;
    std::vector<double> weight;
    std::vector<bool> empty;
};

/// ML basic estimates: pooled n1/n with weight n, or 0.5 with weight `empty_weight` when n = 0.
BasicEstimates ml_basic(const CountTable& counts, const ConfigOrder& order, double empty_weight = kDefaultEmptyWeight);

/**
 * MAP basic estimates: per configuration (n1 + h p0) / (n + h) with weight n + h,
 * pooled over each class with those weights. Rejects priors whose modes are not
 * isotonic with respect to `pairs` (the immediate pairs the order was built from).
 */
BasicEstimates map_basic(const CountTable& counts, const BetaPrior& prior, const ConfigOrder& order,
                         std::span<const OrderPair> pairs, double empty_weight = kDefaultEmptyWeight);

/// Throws ValidationError naming the violated pair if modes with h > 0 are out of order.
void check_prior_isotonic(const BetaPrior& prior, std::span<const OrderPair> pairs);

enum class Method { ml, map };

struct FitOptions {
    Method method = Method::ml;
    bool constrained = true;
    double empty_weight = kDefaultEmptyWeight;
    MlsOptions solver;
};

/// Fitted parameters of one variable, one entry per parent configuration unless noted.
struct VariableFit {
    std::size_t variable = 0;
    ConfigOrder order;
    CountTable counts;
    /// Unpooled basic estimate of each configuration (0.5 when it has no data or prior mass).
    std::vector<double> basic;
    std::vector<double> fitted;
    std::vector<std::size_t> component;
    /// Index of the level set within its component's solution.
    std::vector<std::size_t> block;
};

/// Isotonic tolerance asserted on every fitted variable.
inline constexpr double kFitIsotonicTolerance = 1e-9;

/**
 * Constrained (or plain) estimate of one variable's CPT. Each component of the
 * order is solved on its own, by PAV when it is a chain and by MLS otherwise.
 * `prior` is used only when options.method is Method::map; null means flat.
 */
VariableFit fit_variable(const Network& net, std::size_t v, std::span<const SignedInfluence> influences,
                         const CountTable& counts, const BetaPrior* prior, const FitOptions& options);

struct FittedParameters {
    std::vector<VariableFit> variables;
    /// Input structure with the fitted CPTs.
    Network network;
};

FittedParameters fit_network(const Network& net, std::span<const SignedInfluence> influences, const Dataset& data,
                             const NetworkPrior* prior, const FitOptions& options);

}  // namespace isobn
