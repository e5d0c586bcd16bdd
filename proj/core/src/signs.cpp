#include "isobn/signs.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "isobn/errors.hpp"

namespace isobn {

char sign_symbol(Sign sign) {
    switch (sign) {
        case Sign::positive: return '+';
        case Sign::negative: return '-';
        case Sign::zero: return '0';
        case Sign::none: return '?';
    }
    return '?';
}

void validate_influences(std::span<const SignedInfluence> influences, const Network& net) {
    for (std::size_t i = 0; i < influences.size(); ++i) {
        const auto& inf = influences[i];
        if (inf.child >= net.size()) {
            throw ValidationError(fmt::format("influence {} targets unknown variable index {}", i, inf.child));
        }
        const std::size_t k = net.parent_count(inf.child);
        const std::string& child = net.name(inf.child);
        if (inf.parent >= k) {
            throw ValidationError(fmt::format("influence on '{}' names parent position {}, but it has {} parents",
                                              child, inf.parent, k));
        }
        const std::string& parent = net.name(net.parents(inf.child)[inf.parent]);
        for (std::size_t j = 0; j < inf.context.size(); ++j) {
            const auto& lit = inf.context[j];
            if (lit.parent >= k) {
                throw ValidationError(fmt::format("context of {} -> {} names parent position {} out of range", parent,
                                                  child, lit.parent));
            }
            if (lit.parent == inf.parent) {
                throw ValidationError(
                    fmt::format("context of {} -> {} may not fix the influencing parent itself", parent, child));
            }
            if (lit.value != 0 && lit.value != 1) {
                throw ValidationError(fmt::format("context of {} -> {} has non-binary value {}", parent, child,
                                                  lit.value));
            }
            for (std::size_t m = 0; m < j; ++m) {
                if (inf.context[m].parent == lit.parent) {
                    throw ValidationError(fmt::format("context of {} -> {} fixes '{}' twice", parent, child,
                                                      net.name(net.parents(inf.child)[lit.parent])));
                }
            }
        }
    }

    auto canonical = [](std::vector<ContextLiteral> ctx) {
        std::sort(ctx.begin(), ctx.end());
        return ctx;
    };
    for (std::size_t i = 0; i < influences.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const auto& a = influences[i];
            const auto& b = influences[j];
            if (a.child == b.child && a.parent == b.parent && canonical(a.context) == canonical(b.context)) {
                throw ValidationError(fmt::format("arc {} -> {} carries two signs ('{}' and '{}') for the same context",
                                                  net.name(net.parents(a.child)[a.parent]), net.name(a.child),
                                                  sign_symbol(b.sign), sign_symbol(a.sign)));
            }
        }
    }
}

std::vector<SignedInfluence> influences_on(std::span<const SignedInfluence> influences, std::size_t v) {
    std::vector<SignedInfluence> result;
    for (const auto& inf : influences) {
        if (inf.child == v) result.push_back(inf);
    }
    return result;
}

std::vector<OrderPair> immediate_order_pairs(std::span<const SignedInfluence> influences, std::size_t parent_count) {
    if (parent_count > kMaxParents) {
        throw ValidationError(fmt::format("{} parents exceed the {}-parent limit", parent_count, kMaxParents));
    }
    const std::uint32_t count = configuration_count(parent_count);
    std::vector<OrderPair> pairs;
    for (const auto& inf : influences) {
        if (inf.parent >= parent_count) {
            throw ValidationError(fmt::format("influence names parent position {} but only {} parents exist",
                                              inf.parent, parent_count));
        }
        std::uint32_t context_mask = 0;
        std::uint32_t context_value = 0;
        for (const auto& lit : inf.context) {
            if (lit.parent >= parent_count) {
                throw ValidationError(fmt::format("context names parent position {} but only {} parents exist",
                                                  lit.parent, parent_count));
            }
            if (lit.parent == inf.parent) {
                throw ValidationError(
                    fmt::format("context of the influence of parent {} may not fix that parent", inf.parent));
            }
            const std::uint32_t bit = parent_bit(parent_count, lit.parent);
            context_mask |= bit;
            if (lit.value != 0) context_value |= bit;
        }
        if (inf.sign == Sign::none) continue;

        const std::uint32_t own = parent_bit(parent_count, inf.parent);
        for (std::uint32_t absent = 0; absent < count; ++absent) {
            if ((absent & own) != 0 || (absent & context_mask) != context_value) continue;
            const std::uint32_t present = absent | own;
            switch (inf.sign) {
                case Sign::positive: pairs.emplace_back(absent, present); break;
                case Sign::negative: pairs.emplace_back(present, absent); break;
                case Sign::zero:
                    pairs.emplace_back(absent, present);
                    pairs.emplace_back(present, absent);
                    break;
                case Sign::none: break;
            }
        }
    }
    return pairs;
}

namespace {

// Tarjan's algorithm without recursion. Returns the SCC id of every node.
std::vector<std::size_t> strongly_connected(const std::vector<std::vector<std::uint32_t>>& adjacency) {
    const std::size_t n = adjacency.size();
    constexpr std::size_t unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, unset), low(n, 0), scc(n, unset);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::size_t counter = 0, scc_count = 0;

    struct Frame {
        std::size_t node;
        std::size_t next;
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unset) continue;
        std::vector<Frame> calls{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!calls.empty()) {
            Frame& f = calls.back();
            if (f.next < adjacency[f.node].size()) {
                const std::size_t w = adjacency[f.node][f.next++];
                if (index[w] == unset) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    calls.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.node] = std::min(low[f.node], index[w]);
                }
                continue;
            }
            const std::size_t v = f.node;
            calls.pop_back();
            if (!calls.empty()) low[calls.back().node] = std::min(low[calls.back().node], low[v]);
            if (low[v] == index[v]) {
                std::size_t w = 0;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    scc[w] = scc_count;
                } while (w != v);
                ++scc_count;
            }
        }
    }
    return scc;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

}  // namespace

ConfigOrder condense(std::span<const OrderPair> pairs, std::size_t parent_count) {
    if (parent_count > kMaxParents) {
        throw ValidationError(fmt::format("{} parents exceed the {}-parent limit", parent_count, kMaxParents));
    }
    const std::uint32_t count = configuration_count(parent_count);
    std::vector<std::vector<std::uint32_t>> adjacency(count);
    for (const auto& [lo, hi] : pairs) {
        if (lo >= count || hi >= count) {
            throw ValidationError(fmt::format("order pair ({}, {}) out of range for {} parents", lo, hi, parent_count));
        }
        adjacency[lo].push_back(hi);
    }
    const auto scc = strongly_connected(adjacency);

    // Renumber SCCs by smallest member; configurations are visited in ascending
    // order so first sight gives that numbering directly.
    constexpr std::size_t unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> renumber(count, unset);
    ConfigOrder order;
    order.parent_count = parent_count;
    order.class_of.resize(count);
    for (std::uint32_t c = 0; c < count; ++c) {
        std::size_t& id = renumber[scc[c]];
        if (id == unset) {
            id = order.classes.size();
            order.classes.emplace_back();
        }
        order.class_of[c] = id;
        order.classes[id].members.push_back(c);
    }

    for (const auto& [lo, hi] : pairs) {
        const std::size_t a = order.class_of[lo];
        const std::size_t b = order.class_of[hi];
        if (a != b) order.edges.emplace_back(a, b);
    }
    std::sort(order.edges.begin(), order.edges.end());
    order.edges.erase(std::unique(order.edges.begin(), order.edges.end()), order.edges.end());

    std::vector<std::size_t> uf(order.classes.size());
    std::iota(uf.begin(), uf.end(), std::size_t{0});
    for (const auto& [a, b] : order.edges) {
        const std::size_t ra = find_root(uf, a);
        const std::size_t rb = find_root(uf, b);
        if (ra != rb) uf[std::max(ra, rb)] = std::min(ra, rb);
    }
    std::vector<std::size_t> component_id(order.classes.size(), unset);
    order.component_of.resize(order.classes.size());
    for (std::size_t c = 0; c < order.classes.size(); ++c) {
        std::size_t& id = component_id[find_root(uf, c)];
        if (id == unset) {
            id = order.components.size();
            order.components.emplace_back();
        }
        order.component_of[c] = id;
        order.components[id].push_back(c);
    }
    return order;
}

ConfigOrder build_config_order(std::span<const SignedInfluence> influences, std::size_t parent_count) {
    const auto pairs = immediate_order_pairs(influences, parent_count);
    return condense(pairs, parent_count);
}

OrderDag ConfigOrder::component_dag(std::size_t component) const {
    const auto& members = components.at(component);
    std::vector<std::size_t> local(classes.size(), 0);
    for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = i;
    std::vector<OrderDag::Edge> local_edges;
    for (const auto& [a, b] : edges) {
        if (component_of[a] == component) local_edges.emplace_back(local[a], local[b]);
    }
    return OrderDag(members.size(), std::move(local_edges));
}

bool check_isotonic(std::span<const double> class_values, const ConfigOrder& order, double tol) {
    if (class_values.size() != order.classes.size()) {
        throw ValidationError(fmt::format("isotonicity check needs {} class values, got {}", order.classes.size(),
                                          class_values.size()));
    }
    return std::all_of(order.edges.begin(), order.edges.end(), [&](const auto& e) {
        return class_values[e.first] <= class_values[e.second] + tol;
    });
}

std::optional<OrderViolation> find_violation(std::span<const double> config_values,
                                             std::span<const OrderPair> pairs, double tol) {
    for (const auto& [lo, hi] : pairs) {
        if (lo >= config_values.size() || hi >= config_values.size()) {
            throw ValidationError("order pair references a configuration without a value");
        }
        if (!(config_values[lo] <= config_values[hi] + tol)) {
            return OrderViolation{lo, hi, config_values[lo], config_values[hi]};
        }
    }
    return std::nullopt;
}

bool check_isotonic_configurations(std::span<const double> config_values,
                                   std::span<const SignedInfluence> influences,
                                   std::size_t parent_count, double tol) {
    if (config_values.size() != configuration_count(parent_count)) {
        throw ValidationError(fmt::format("isotonicity check needs {} configuration values, got {}",
                                          configuration_count(parent_count), config_values.size()));
    }
    const auto pairs = immediate_order_pairs(influences, parent_count);
    return !find_violation(config_values, pairs, tol).has_value();
}

}  // namespace isobn
