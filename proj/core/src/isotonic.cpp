#include "isobn/isotonic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "isobn/errors.hpp"
#include "isobn/model.hpp"

namespace isobn {

void IsotonicProblem::validate() const {
    if (values.size() != weights.size()) {
        throw ValidationError(
            fmt::format("isotonic problem has {} values but {} weights", values.size(), weights.size()));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw ValidationError(fmt::format("value of node {} is not finite", i));
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
            throw ValidationError(fmt::format("weight of node {} is {}; weights must be positive", i, weights[i]));
        }
    }
}

double weighted_average(std::span<const std::size_t> subset, const IsotonicProblem& problem) {
    if (subset.empty()) throw ValidationError("weighted average of an empty subset");
    if (subset.size() == 1 && subset[0] < problem.size()) return problem.values[subset[0]];
    double weighted_sum = 0.0;
    double weight = 0.0;
    for (std::size_t node : subset) {
        if (node >= problem.size()) throw ValidationError(fmt::format("node {} is not part of the problem", node));
        weighted_sum += problem.weights[node] * problem.values[node];
        weight += problem.weights[node];
    }
    return weighted_sum / weight;
}

namespace {

void require_enumerable(const OrderDag& dag) {
    if (dag.size() > kMaxEnumerableNodes) {
        throw FeasibilityError(fmt::format("order component has {} elements; lower-set enumeration supports at most {}",
                                           dag.size(), kMaxEnumerableNodes));
    }
}

// Depth-first walk over nodes in topological order, deciding membership one node at
// a time. A node may join only if all its immediate predecessors already have, so
// every leaf is a distinct lower set. Running sums of w*g and w travel with the set.
template <class Visit>
class LowerSetWalker {
public:
    LowerSetWalker(const OrderDag& dag, NodeSet within, const double* weighted_values, const double* weights,
                   std::uint64_t max_sets, Visit& visit)
        : weighted_values_(weighted_values), weights_(weights), max_sets_(max_sets), visit_(visit) {
        predecessors_.resize(dag.size(), 0);
        for (std::size_t node : dag.topological_order()) {
            if ((within & node_bit(node)) == 0) continue;
            for (std::size_t next : dag.successors(node)) {
                if ((within & node_bit(next)) == 0) {
                    throw ValidationError("node subset passed to lower-set enumeration is not an upper set");
                }
            }
            predecessors_[node] = dag.predecessor_mask(node) & within;
            nodes_.push_back(node);
        }
    }

    std::uint64_t run() {
        walk(0, 0, 0.0, 0.0);
        return count_;
    }

private:
    void walk(std::size_t depth, NodeSet set, double weighted_sum, double weight) {
        if (depth == nodes_.size()) {
            if (set == 0) return;
            if (++count_ > max_sets_) {
                throw FeasibilityError(fmt::format(
                    "order component has more than {} lower sets; too many to enumerate", max_sets_));
            }
            visit_(set, weighted_sum, weight);
            return;
        }
        const std::size_t node = nodes_[depth];
        walk(depth + 1, set, weighted_sum, weight);
        if ((predecessors_[node] & ~set) == 0) {
            const double w = weights_ != nullptr ? weights_[node] : 0.0;
            const double wg = weighted_values_ != nullptr ? weighted_values_[node] : 0.0;
            walk(depth + 1, set | node_bit(node), weighted_sum + wg, weight + w);
        }
    }

    const double* weighted_values_;
    const double* weights_;
    std::uint64_t max_sets_;
    Visit& visit_;
    std::vector<std::size_t> nodes_;
    std::vector<NodeSet> predecessors_;
    std::uint64_t count_ = 0;
};

template <class Visit>
std::uint64_t walk_lower_sets(const OrderDag& dag, NodeSet within, const double* weighted_values,
                              const double* weights, std::uint64_t max_sets, Visit&& visit) {
    require_enumerable(dag);
    LowerSetWalker<std::remove_reference_t<Visit>> walker(dag, within, weighted_values, weights, max_sets, visit);
    return walker.run();
}

std::vector<std::vector<std::size_t>> sorted_blocks(std::vector<std::vector<std::size_t>> blocks) {
    for (auto& b : blocks) std::sort(b.begin(), b.end());
    return blocks;
}

}  // namespace

std::uint64_t for_each_lower_set(const OrderDag& dag, NodeSet within, const std::function<void(NodeSet)>& visit,
                                 std::uint64_t max_sets) {
    return walk_lower_sets(dag, within, nullptr, nullptr, max_sets,
                           [&](NodeSet set, double, double) { visit(set); });
}

std::vector<NodeSet> lower_sets(const OrderDag& dag, std::uint64_t max_sets) {
    std::vector<NodeSet> sets;
    walk_lower_sets(dag, full_node_set(dag.size()), nullptr, nullptr, max_sets,
                    [&](NodeSet set, double, double) { sets.push_back(set); });
    return sets;
}

std::uint64_t count_lower_sets(const OrderDag& dag, std::uint64_t max_sets) {
    return walk_lower_sets(dag, full_node_set(dag.size()), nullptr, nullptr, max_sets, [](NodeSet, double, double) {});
}

IsotonicSolution mls_solve(const IsotonicProblem& problem, const OrderDag& dag, const MlsOptions& options) {
    problem.validate();
    if (problem.size() != dag.size()) {
        throw ValidationError(
            fmt::format("isotonic problem has {} nodes but the order has {}", problem.size(), dag.size()));
    }
    require_enumerable(dag);

    const std::size_t n = problem.size();
    std::vector<double> weighted(n);
    for (std::size_t i = 0; i < n; ++i) weighted[i] = problem.weights[i] * problem.values[i];

    IsotonicSolution solution;
    solution.fitted.assign(n, 0.0);
    NodeSet remaining = full_node_set(n);
    std::size_t iteration = 0;
    while (remaining != 0) {
        double best = std::numeric_limits<double>::infinity();
        NodeSet best_union = 0;
        walk_lower_sets(dag, remaining, weighted.data(), problem.weights.data(), options.max_lower_sets,
                        [&](NodeSet set, double weighted_sum, double weight) {
                            const double average = weighted_sum / weight;
                            if (options.on_lower_set) options.on_lower_set(iteration, set, average);
                            if (average < best - options.tie_tolerance) {
                                best = average;
                                best_union = set;
                            } else if (average <= best + options.tie_tolerance) {
                                best_union |= set;
                            }
                        });
        if (best_union == 0) throw InternalError("minimum lower sets made no progress");

        auto block = node_set_members(best_union);
        const double value = weighted_average(block, problem);
        for (std::size_t node : block) solution.fitted[node] = value;
        solution.blocks.push_back(std::move(block));
        remaining &= ~best_union;
        ++iteration;
    }
    return solution;
}

IsotonicSolution pav_solve(const IsotonicProblem& problem, const OrderDag& chain) {
    problem.validate();
    if (problem.size() != chain.size()) {
        throw ValidationError(
            fmt::format("isotonic problem has {} nodes but the order has {}", problem.size(), chain.size()));
    }
    if (!chain.is_chain()) throw ValidationError("pool adjacent violators needs a totally ordered component");

    struct Pool {
        double weighted_sum;
        double weight;
        std::vector<std::size_t> nodes;
        double average() const { return weighted_sum / weight; }
    };
    std::vector<Pool> pools;
    for (std::size_t node : chain.topological_order()) {
        pools.push_back({problem.weights[node] * problem.values[node], problem.weights[node], {node}});
        while (pools.size() >= 2 && pools[pools.size() - 2].average() > pools.back().average()) {
            Pool top = std::move(pools.back());
            pools.pop_back();
            Pool& below = pools.back();
            below.weighted_sum += top.weighted_sum;
            below.weight += top.weight;
            below.nodes.insert(below.nodes.end(), top.nodes.begin(), top.nodes.end());
        }
    }

    // Adjacent pools with equal averages form one level set.
    IsotonicSolution solution;
    solution.fitted.assign(problem.size(), 0.0);
    std::vector<std::vector<std::size_t>> blocks;
    std::vector<double> block_values;
    for (auto& pool : pools) {
        const double value = pool.average();
        if (!blocks.empty() && std::abs(value - block_values.back()) <= 1e-12) {
            blocks.back().insert(blocks.back().end(), pool.nodes.begin(), pool.nodes.end());
        } else {
            blocks.push_back(std::move(pool.nodes));
            block_values.push_back(value);
        }
    }
    solution.blocks = sorted_blocks(std::move(blocks));
    for (const auto& block : solution.blocks) {
        const double value = weighted_average(block, problem);
        for (std::size_t node : block) solution.fitted[node] = value;
    }
    return solution;
}

IsotonicSolution solve_isotonic(const IsotonicProblem& problem, const OrderDag& dag, const MlsOptions& options) {
    if (dag.is_chain()) return pav_solve(problem, dag);
    return mls_solve(problem, dag, options);
}

const BigCount& boolean_lattice_lower_sets(unsigned k) {
    static const std::array<BigCount, 8> table = {
        BigCount(1), BigCount(2), BigCount(5), BigCount(19), BigCount(167), BigCount(7580),
        BigCount(7828353), BigCount("2414682040997"),
    };
    if (k >= table.size()) {
        throw ValidationError(fmt::format("lower-set counts are tabulated for at most 7 signed parents, got {}", k));
    }
    return table[k];
}

LowerSetCount lower_set_count(unsigned signed_parents, unsigned unsigned_parents) {
    const BigCount& base = boolean_lattice_lower_sets(signed_parents);
    if (signed_parents + unsigned_parents > kMaxParents) {
        throw ValidationError(fmt::format("{} parents exceed the {}-parent limit", signed_parents + unsigned_parents,
                                          kMaxParents));
    }
    const unsigned components = 1U << unsigned_parents;
    LowerSetCount counts;
    counts.undecomposed = boost::multiprecision::pow(BigCount(base + 1), components) - 1;
    counts.decomposed = base * components;
    return counts;
}

}  // namespace isobn
