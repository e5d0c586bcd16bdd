#include "isobn/poset.hpp"

#include <algorithm>
#include <bit>
#include <queue>

#include <fmt/format.h>

#include "isobn/errors.hpp"

namespace isobn {

std::vector<std::size_t> node_set_members(NodeSet set) {
    std::vector<std::size_t> members;
    members.reserve(static_cast<std::size_t>(std::popcount(set)));
    while (set != 0) {
        members.push_back(static_cast<std::size_t>(std::countr_zero(set)));
        set &= set - 1;
    }
    return members;
}

OrderDag::OrderDag(std::size_t node_count, std::vector<Edge> edges)
    : edges_(std::move(edges)), predecessors_(node_count), successors_(node_count) {
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

    for (const auto& [from, to] : edges_) {
        if (from >= node_count || to >= node_count) {
            throw ValidationError(fmt::format("order edge ({}, {}) references a node outside 0..{}",
                                              from, to, node_count == 0 ? 0 : node_count - 1));
        }
        if (from == to) {
            throw ValidationError(fmt::format("order edge ({}, {}) is a self-loop", from, to));
        }
        successors_[from].push_back(to);
        predecessors_[to].push_back(from);
    }

    std::vector<std::size_t> indegree(node_count);
    for (std::size_t v = 0; v < node_count; ++v) indegree[v] = predecessors_[v].size();

    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t v = 0; v < node_count; ++v) {
        if (indegree[v] == 0) ready.push(v);
    }
    topological_.reserve(node_count);
    while (!ready.empty()) {
        if (ready.size() > 1) chain_ = false;
        const std::size_t v = ready.top();
        ready.pop();
        topological_.push_back(v);
        for (std::size_t s : successors_[v]) {
            if (--indegree[s] == 0) ready.push(s);
        }
    }
    if (topological_.size() != node_count) {
        throw ValidationError("order edges contain a directed cycle");
    }

    if (node_count <= kMaxEnumerableNodes) {
        predecessor_masks_.assign(node_count, 0);
        for (const auto& [from, to] : edges_) predecessor_masks_[to] |= node_bit(from);
    }
}

bool OrderDag::is_lower_set(NodeSet set) const {
    for (const auto& [from, to] : edges_) {
        if ((set & node_bit(to)) != 0 && (set & node_bit(from)) == 0) return false;
    }
    return true;
}

}  // namespace isobn
