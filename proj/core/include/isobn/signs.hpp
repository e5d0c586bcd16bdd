#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isobn/model.hpp"
#include "isobn/poset.hpp"

namespace isobn {

/// Qualitative sign of an influence. `none` is an unsigned (or ambiguous) influence.
enum class Sign { positive, negative, zero, none };

char sign_symbol(Sign sign);

/// One parent fixed to a value inside a context; `parent` is a position in the child's parent list.
struct ContextLiteral {
    std::size_t parent = 0;
    int value = 0;

    auto operator<=>(const ContextLiteral&) const = default;
};

/**
 * Sign of the influence of one parent on a child, optionally restricted to a
 * context X_C = c over other parents of the same child. Parent positions refer to
 * the child's ordered parent list.
 */
struct SignedInfluence {
    std::size_t child = 0;
    std::size_t parent = 0;
    Sign sign = Sign::none;
    std::vector<ContextLiteral> context;

    bool operator==(const SignedInfluence&) const = default;
};

/// Ordered pair (lower, upper) of configuration indices: p(lower) <= p(upper).
using OrderPair = std::pair<std::uint32_t, std::uint32_t>;

/**
 * Checks influences against a network: positions in range, the context excludes
 * the influencing parent, no parent repeated in a context, and no two influences
 * on the same arc with the same context.
 */
void validate_influences(std::span<const SignedInfluence> influences, const Network& net);

/// Influences whose child is `v`.
std::vector<SignedInfluence> influences_on(std::span<const SignedInfluence> influences, std::size_t v);

/**
 * Immediate order pairs over the 2^k configurations of one child. For each
 * influence and each configuration pair that agrees with the context and differs
 * only in the influencing parent (x' with the parent at 0, x with it at 1):
 * positive emits (x', x), negative emits (x, x'), zero emits both, none emits nothing.
 */
std::vector<OrderPair> immediate_order_pairs(std::span<const SignedInfluence> influences, std::size_t parent_count);

struct ConfigClass {
    /// Configuration indices, ascending.
    std::vector<std::uint32_t> members;
};

/**
 * Quasi-order on the parent configurations of one variable, condensed to a DAG
 * over equivalence classes and split into weakly connected components.
 *
 * Classes are sorted by their smallest member; components by their smallest class.
 */
struct ConfigOrder {
    std::size_t parent_count = 0;
    std::vector<ConfigClass> classes;
    /// Class index of every configuration.
    std::vector<std::size_t> class_of;
    /// Condensation edges (a, b) over class indices: value(a) <= value(b). Sorted, no duplicates.
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    /// Class indices per component, ascending.
    std::vector<std::vector<std::size_t>> components;
    /// Component index of every class.
    std::vector<std::size_t> component_of;

    std::size_t configuration_count() const { return class_of.size(); }

    /// The component's DAG with nodes renumbered to positions in components[c].
    OrderDag component_dag(std::size_t component) const;
};

/// Strongly connected components of the pair relation become classes; see ConfigOrder.
ConfigOrder condense(std::span<const OrderPair> pairs, std::size_t parent_count);

/// immediate_order_pairs followed by condense.
ConfigOrder build_config_order(std::span<const SignedInfluence> influences, std::size_t parent_count);

/// An edge of an order whose endpoints are out of order.
struct OrderViolation {
    std::uint32_t lower = 0;  ///< configuration that should have the smaller value
    std::uint32_t upper = 0;
    double lower_value = 0.0;
    double upper_value = 0.0;
};

/// True iff values(a) <= values(b) + tol for every edge. One value per class.
bool check_isotonic(std::span<const double> class_values, const ConfigOrder& order, double tol);

/**
 * Per-configuration check: returns the first immediate pair violated by more than
 * `tol`, comparing members of the same class for equality as well.
 */
std::optional<OrderViolation> find_violation(std::span<const double> config_values,
                                             std::span<const OrderPair> pairs, double tol);

/// One value per configuration; true iff find_violation finds nothing for the order's pairs.
bool check_isotonic_configurations(std::span<const double> config_values,
                                   std::span<const SignedInfluence> influences,
                                   std::size_t parent_count, double tol);

}  // namespace isobn
