#include "isobn/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "isobn/errors.hpp"

namespace isobn {

CountTable count_table(const Dataset& data, const Network& net, std::size_t v) {
    auto column_of = [&](std::size_t var) {
        auto c = data.column_index(net.name(var));
        if (!c) throw ValidationError(fmt::format("dataset has no column for variable '{}'", net.name(var)));
        return *c;
    };
    const std::size_t target = column_of(v);
    std::vector<std::size_t> parent_columns;
    for (std::size_t p : net.parents(v)) parent_columns.push_back(column_of(p));

    CountTable counts;
    counts.n.assign(configuration_count(net.parent_count(v)), 0);
    counts.n1.assign(counts.n.size(), 0);
    for (std::size_t r = 0; r < data.row_count(); ++r) {
        std::uint32_t config = 0;
        for (std::size_t c : parent_columns) config = (config << 1) | data.at(r, c);
        ++counts.n[config];
        counts.n1[config] += data.at(r, target);
    }
    return counts;
}

std::pair<double, double> beta_mode_precision(double a, double b) {
    if (!(a >= 1.0) || !(b >= 1.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw ValidationError(fmt::format("Beta({}, {}) has no interior mode; need a, b >= 1", a, b));
    }
    const double h = a + b - 2.0;
    const double mode = h > 0.0 ? (a - 1.0) / h : 0.5;
    return {mode, h};
}

BetaPrior BetaPrior::flat(std::size_t parent_count) {
    const std::size_t count = isobn::configuration_count(parent_count);
    return BetaPrior{std::vector<double>(count, 0.5), std::vector<double>(count, 0.0)};
}

BetaPrior BetaPrior::uniform(std::size_t parent_count, double a, double b) {
    const auto [mode, h] = beta_mode_precision(a, b);
    const std::size_t count = isobn::configuration_count(parent_count);
    return BetaPrior{std::vector<double>(count, mode), std::vector<double>(count, h)};
}

bool BetaPrior::is_flat() const {
    return std::all_of(precision.begin(), precision.end(), [](double h) { return h == 0.0; });
}

NetworkPrior NetworkPrior::uniform(const Network& net, double a, double b) {
    NetworkPrior prior;
    for (std::size_t v = 0; v < net.size(); ++v) prior.variables.emplace_back(BetaPrior::uniform(net.parent_count(v), a, b));
    return prior;
}

const BetaPrior* NetworkPrior::find(std::size_t v) const {
    if (v >= variables.size() || !variables[v]) return nullptr;
    return &*variables[v];
}

namespace {

void require_matching(const CountTable& counts, const ConfigOrder& order) {
    if (counts.n.size() != order.configuration_count() || counts.n1.size() != counts.n.size()) {
        throw ValidationError(fmt::format("count table has {} configurations but the order has {}", counts.n.size(),
                                          order.configuration_count()));
    }
}

}  // namespace

BasicEstimates ml_basic(const CountTable& counts, const ConfigOrder& order, double empty_weight) {
    require_matching(counts, order);
    BasicEstimates basic;
    for (const auto& cls : order.classes) {
        std::uint64_t n = 0;
        std::uint64_t n1 = 0;
        for (std::uint32_t c : cls.members) {
            n += counts.n[c];
            n1 += counts.n1[c];
        }
        if (n == 0) {
            basic.value.push_back(0.5);
            basic.weight.push_back(empty_weight);
            basic.empty.push_back(true);
        } else {
            basic.value.push_back(static_cast<double>(n1) / static_cast<double>(n));
            basic.weight.push_back(static_cast<double>(n));
            basic.empty.push_back(false);
        }
    }
    return basic;
}

void check_prior_isotonic(const BetaPrior& prior, std::span<const OrderPair> pairs) {
    for (const auto& [lo, hi] : pairs) {
        if (lo >= prior.mode.size() || hi >= prior.mode.size()) {
            throw ValidationError("prior does not cover every parent configuration");
        }
        if (prior.precision[lo] <= 0.0 || prior.precision[hi] <= 0.0) continue;
        if (prior.mode[lo] > prior.mode[hi] + 1e-12) {
            throw ValidationError(fmt::format("prior modes violate the order: mode {} at configuration {} exceeds mode "
                                              "{} at configuration {}",
                                              prior.mode[lo], lo, prior.mode[hi], hi));
        }
    }
}

BasicEstimates map_basic(const CountTable& counts, const BetaPrior& prior, const ConfigOrder& order,
                         std::span<const OrderPair> pairs, double empty_weight) {
    require_matching(counts, order);
    if (prior.mode.size() != counts.n.size() || prior.precision.size() != counts.n.size()) {
        throw ValidationError(fmt::format("prior has {} configurations but the count table has {}", prior.mode.size(),
                                          counts.n.size()));
    }
    check_prior_isotonic(prior, pairs);

    BasicEstimates basic;
    for (const auto& cls : order.classes) {
        // Pooling per-configuration estimates with weights n + h reduces to these sums.
        double successes = 0.0;
        double weight = 0.0;
        for (std::uint32_t c : cls.members) {
            successes += static_cast<double>(counts.n1[c]) + prior.precision[c] * prior.mode[c];
            weight += static_cast<double>(counts.n[c]) + prior.precision[c];
        }
        if (weight == 0.0) {
            basic.value.push_back(0.5);
            basic.weight.push_back(empty_weight);
            basic.empty.push_back(true);
        } else {
            basic.value.push_back(successes / weight);
            basic.weight.push_back(weight);
            basic.empty.push_back(false);
        }
    }
    return basic;
}

VariableFit fit_variable(const Network& net, std::size_t v, std::span<const SignedInfluence> influences,
                         const CountTable& counts, const BetaPrior* prior, const FitOptions& options) {
    const std::string& name = net.name(v);
    const std::size_t k = net.parent_count(v);
    for (const auto& inf : influences) {
        if (inf.child != v) {
            throw ValidationError(fmt::format("influence on '{}' passed while fitting '{}'", net.name(inf.child), name));
        }
    }
    if (counts.n.size() != configuration_count(k)) {
        throw ValidationError(fmt::format("count table for '{}' has {} configurations, expected {}", name,
                                          counts.n.size(), configuration_count(k)));
    }

    std::vector<OrderPair> pairs;
    if (options.constrained) pairs = immediate_order_pairs(influences, k);

    VariableFit fit;
    fit.variable = v;
    fit.counts = counts;
    fit.order = condense(pairs, k);

    const bool use_prior = options.method == Method::map && prior != nullptr;
    const std::size_t configs = configuration_count(k);
    fit.basic.resize(configs);
    for (std::size_t c = 0; c < configs; ++c) {
        const double h = use_prior ? prior->precision[c] : 0.0;
        const double p0 = use_prior ? prior->mode[c] : 0.5;
        const double weight = static_cast<double>(counts.n[c]) + h;
        fit.basic[c] = weight > 0.0 ? (static_cast<double>(counts.n1[c]) + h * p0) / weight : 0.5;
    }

    BasicEstimates basic;
    if (use_prior) {
        try {
            basic = map_basic(counts, *prior, fit.order, pairs, options.empty_weight);
        } catch (const ValidationError& e) {
            throw ValidationError(fmt::format("variable '{}': {}", name, e.what()));
        }
    } else {
        basic = ml_basic(counts, fit.order, options.empty_weight);
    }

    std::vector<double> class_values(fit.order.classes.size(), 0.0);
    std::vector<std::size_t> class_block(fit.order.classes.size(), 0);
    for (std::size_t comp = 0; comp < fit.order.components.size(); ++comp) {
        const auto& members = fit.order.components[comp];
        IsotonicProblem problem;
        for (std::size_t cls : members) {
            problem.values.push_back(basic.value[cls]);
            problem.weights.push_back(basic.weight[cls]);
        }
        IsotonicSolution solution;
        try {
            solution = solve_isotonic(problem, fit.order.component_dag(comp), options.solver);
        } catch (const FeasibilityError& e) {
            throw FeasibilityError(fmt::format("variable '{}', component {} ({} classes): {}", name, comp,
                                               members.size(), e.what()));
        }
        for (std::size_t i = 0; i < members.size(); ++i) class_values[members[i]] = solution.fitted[i];
        for (std::size_t b = 0; b < solution.blocks.size(); ++b) {
            for (std::size_t i : solution.blocks[b]) class_block[members[i]] = b;
        }
    }

    fit.fitted.resize(configs);
    fit.component.resize(configs);
    fit.block.resize(configs);
    for (std::size_t c = 0; c < configs; ++c) {
        const std::size_t cls = fit.order.class_of[c];
        fit.fitted[c] = class_values[cls];
        fit.component[c] = fit.order.component_of[cls];
        fit.block[c] = class_block[cls];
        if (!(fit.fitted[c] >= 0.0 && fit.fitted[c] <= 1.0)) {
            throw InternalError(fmt::format("variable '{}': fitted value {} at configuration {} is outside [0, 1]", name,
                                            fit.fitted[c], Configuration(k, static_cast<std::uint32_t>(c)).to_string()));
        }
    }
    if (!check_isotonic(class_values, fit.order, kFitIsotonicTolerance) ||
        find_violation(fit.fitted, pairs, kFitIsotonicTolerance)) {
        throw InternalError(fmt::format("variable '{}': fitted values violate the declared order", name));
    }
    return fit;
}

FittedParameters fit_network(const Network& net, std::span<const SignedInfluence> influences, const Dataset& data,
                             const NetworkPrior* prior, const FitOptions& options) {
    validate_influences(influences, net);

    enum class Severity { none, validation, feasibility, internal };
    Severity worst = Severity::none;
    std::vector<std::string> messages;

    FittedParameters result;
    std::vector<std::vector<double>> cpts;
    for (std::size_t v = 0; v < net.size(); ++v) {
        try {
            const auto mine = influences_on(influences, v);
            const CountTable counts = count_table(data, net, v);
            const BetaPrior* var_prior = prior != nullptr ? prior->find(v) : nullptr;
            result.variables.push_back(fit_variable(net, v, mine, counts, var_prior, options));
            cpts.push_back(result.variables.back().fitted);
        } catch (const InternalError& e) {
            worst = Severity::internal;
            messages.push_back(e.what());
        } catch (const FeasibilityError& e) {
            worst = std::max(worst, Severity::feasibility);
            messages.push_back(e.what());
        } catch (const ValidationError& e) {
            worst = std::max(worst, Severity::validation);
            const std::string what = e.what();
            messages.push_back(what.starts_with("variable '") ? what
                                                              : fmt::format("variable '{}': {}", net.name(v), what));
        }
    }

    if (worst != Severity::none) {
        std::string joined;
        for (const auto& m : messages) joined += (joined.empty() ? "" : "\n") + m;
        switch (worst) {
            case Severity::internal: throw InternalError(joined);
            case Severity::feasibility: throw FeasibilityError(joined);
            default: throw ValidationError(joined);
        }
    }
    result.network = net.with_cpts(std::move(cpts));
    return result;
}

}  // namespace isobn
