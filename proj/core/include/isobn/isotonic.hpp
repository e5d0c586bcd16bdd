#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "isobn/poset.hpp"

namespace isobn {

/// Weighted least-squares isotonic regression input: one estimate and one positive weight per node.
struct IsotonicProblem {
    std::vector<double> values;
    std::vector<double> weights;

    std::size_t size() const { return values.size(); }

    /// Throws ValidationError unless sizes agree, values are finite and weights are positive.
    void validate() const;
};

struct IsotonicSolution {
    /// Fitted value per node.
    std::vector<double> fitted;
    /// Level sets in the order they were produced; node indices ascending within a block.
    std::vector<std::vector<std::size_t>> blocks;
};

/// Sum of w*g over sum of w for a non-empty subset.
double weighted_average(std::span<const std::size_t> subset, const IsotonicProblem& problem);

/// Refusal threshold for lower-set enumeration, roughly the count for six fully signed parents.
inline constexpr std::uint64_t kDefaultMaxLowerSets = 10'000'000;

/**
 * Streams every non-empty lower set of `dag` restricted to the nodes in `within`
 * (which must be an upper set of `dag`, so the restricted order is the induced
 * suborder). Each set is reported exactly once. Returns the number of sets visited.
 *
 * Throws FeasibilityError if the order has more than kMaxEnumerableNodes nodes or
 * once more than `max_sets` sets have been produced.
 */
std::uint64_t for_each_lower_set(const OrderDag& dag, NodeSet within,
                                 const std::function<void(NodeSet)>& visit,
                                 std::uint64_t max_sets = kDefaultMaxLowerSets);

/// Every non-empty lower set of the whole order, in enumeration order.
std::vector<NodeSet> lower_sets(const OrderDag& dag, std::uint64_t max_sets = kDefaultMaxLowerSets);

std::uint64_t count_lower_sets(const OrderDag& dag, std::uint64_t max_sets = kDefaultMaxLowerSets);

struct MlsOptions {
    /// Lower sets whose averages lie within this distance of the minimum are merged.
    double tie_tolerance = 1e-12;
    std::uint64_t max_lower_sets = kDefaultMaxLowerSets;
    /// Called for every lower set examined: (iteration, set, weighted average).
    std::function<void(std::size_t, NodeSet, double)> on_lower_set;
};

/**
 * Minimum lower sets algorithm. Repeatedly selects the union of all lower sets of
 * the remaining nodes that attain the minimum weighted average, fixes those nodes
 * at that average and removes them, until no nodes remain.
 */
IsotonicSolution mls_solve(const IsotonicProblem& problem, const OrderDag& dag, const MlsOptions& options = {});

/// Pool adjacent violators on a total order. Throws ValidationError if `chain` is not a chain.
IsotonicSolution pav_solve(const IsotonicProblem& problem, const OrderDag& chain);

/// PAV for chains, MLS otherwise.
IsotonicSolution solve_isotonic(const IsotonicProblem& problem, const OrderDag& dag, const MlsOptions& options = {});

using BigCount = boost::multiprecision::cpp_int;

/// Non-empty lower sets of the Boolean lattice on k elements (OEIS A014466), k = 0..7.
const BigCount& boolean_lattice_lower_sets(unsigned k);

struct LowerSetCount {
    /// (|L(k1)| + 1)^(2^k2) - 1: lower sets of the whole, undecomposed order.
    BigCount undecomposed;
    /// 2^k2 * |L(k1)|: lower sets summed over the 2^k2 independent components.
    BigCount decomposed;
};

/// Lower-set counts for k1 parents with context-free signs and k2 unsigned parents.
LowerSetCount lower_set_count(unsigned signed_parents, unsigned unsigned_parents);

}  // namespace isobn
