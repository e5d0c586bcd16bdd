#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace isobn {

/// Bit set over the nodes of a small order; bit i is node i.
using NodeSet = std::uint64_t;

/// Largest node count for which lower-set enumeration is supported.
inline constexpr std::size_t kMaxEnumerableNodes = 64;

inline constexpr NodeSet node_bit(std::size_t i) { return NodeSet{1} << i; }

/// All nodes 0..n-1.
inline constexpr NodeSet full_node_set(std::size_t n) {
    return n >= 64 ? ~NodeSet{0} : (node_bit(n) - 1);
}

std::vector<std::size_t> node_set_members(NodeSet set);

/**
 * A finite order given by a directed acyclic graph over nodes 0..n-1.
 *
 * An edge (a, b) states a precedes b, i.e. any isotonic function has f(a) <= f(b).
 * The order itself is the reflexive-transitive closure of the edges, which is never
 * materialized. Construction rejects cycles and out-of-range endpoints.
 */
class OrderDag {
public:
    using Edge = std::pair<std::size_t, std::size_t>;

    OrderDag() = default;
    OrderDag(std::size_t node_count, std::vector<Edge> edges);

    std::size_t size() const { return predecessors_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<std::size_t>& predecessors(std::size_t node) const { return predecessors_[node]; }
    const std::vector<std::size_t>& successors(std::size_t node) const { return successors_[node]; }

    /// Deterministic topological order (Kahn's algorithm, smallest ready index first).
    const std::vector<std::size_t>& topological_order() const { return topological_; }

    /// True when the order is total, i.e. every pair of nodes is comparable.
    bool is_chain() const { return chain_; }

    /// Immediate predecessors as a bit set. Only valid when size() <= kMaxEnumerableNodes.
    NodeSet predecessor_mask(std::size_t node) const { return predecessor_masks_[node]; }

    /// True if `set` is closed under predecessors.
    bool is_lower_set(NodeSet set) const;

private:
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> predecessors_;
    std::vector<std::vector<std::size_t>> successors_;
    std::vector<std::size_t> topological_;
    std::vector<NodeSet> predecessor_masks_;
    bool chain_ = true;
};

}  // namespace isobn
