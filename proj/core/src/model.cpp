#include "isobn/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "isobn/errors.hpp"

namespace isobn {

// ---------------------------------------------------------------------------
// Configuration

Configuration::Configuration(std::size_t width, std::uint32_t index) : width_(width), index_(index) {
    if (width > kMaxParents) {
        throw ValidationError(fmt::format("configuration width {} exceeds the {}-parent limit", width, kMaxParents));
    }
    if (index >= configuration_count(width)) {
        throw ValidationError(fmt::format("configuration index {} out of range for width {}", index, width));
    }
}

int Configuration::value(std::size_t parent) const {
    return (index_ & parent_bit(width_, parent)) != 0 ? 1 : 0;
}

Configuration Configuration::with(std::size_t parent, int value) const {
    const std::uint32_t bit = parent_bit(width_, parent);
    return Configuration(width_, value != 0 ? (index_ | bit) : (index_ & ~bit));
}

std::string Configuration::to_string() const {
    std::string bits(width_, '0');
    for (std::size_t i = 0; i < width_; ++i) {
        if (value(i) != 0) bits[i] = '1';
    }
    return bits;
}

Configuration Configuration::parse(std::string_view bits) {
    if (bits.size() > kMaxParents) {
        throw ValidationError(fmt::format("configuration '{}' is wider than {} parents", bits, kMaxParents));
    }
    std::uint32_t index = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') {
            throw ValidationError(fmt::format("configuration '{}' contains a non-binary digit", bits));
        }
        index = (index << 1) | static_cast<std::uint32_t>(c - '0');
    }
    return Configuration(bits.size(), index);
}

// ---------------------------------------------------------------------------
// Network

namespace {

// Returns the members of one cycle, or an empty list if the graph is acyclic.
std::vector<std::size_t> find_cycle(const std::vector<std::vector<std::size_t>>& parents) {
    const std::size_t n = parents.size();
    enum class Mark { unvisited, active, done };
    std::vector<Mark> mark(n, Mark::unvisited);

    for (std::size_t root = 0; root < n; ++root) {
        if (mark[root] != Mark::unvisited) continue;
        // Iterative DFS along parent edges: (node, next parent position).
        std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
        mark[root] = Mark::active;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next == parents[node].size()) {
                mark[node] = Mark::done;
                stack.pop_back();
                continue;
            }
            const std::size_t p = parents[node][next++];
            if (mark[p] == Mark::active) {
                std::vector<std::size_t> cycle{p};
                for (auto it = stack.rbegin(); it != stack.rend() && it->first != p; ++it) {
                    cycle.push_back(it->first);
                }
                // The stack runs child -> parent, so reading it backwards from the
                // top follows the arcs from p around to p.
                return cycle;
            }
            if (mark[p] == Mark::unvisited) {
                mark[p] = Mark::active;
                stack.emplace_back(p, 0);
            }
        }
    }
    return {};
}

}  // namespace

Network::Network(std::vector<std::string> names,
                 std::vector<std::vector<std::size_t>> parents,
                 std::vector<std::optional<std::vector<double>>> cpts)
    : names_(std::move(names)), parents_(std::move(parents)), cpts_(std::move(cpts)) {
    const std::size_t n = names_.size();
    if (parents_.size() != n) {
        throw ValidationError(fmt::format("parent lists given for {} variables, expected {}", parents_.size(), n));
    }
    if (cpts_.empty()) cpts_.resize(n);
    if (cpts_.size() != n) {
        throw ValidationError(fmt::format("CPTs given for {} variables, expected {}", cpts_.size(), n));
    }

    for (std::size_t v = 0; v < n; ++v) {
        if (names_[v].empty()) throw ValidationError(fmt::format("variable {} has an empty name", v));
        if (!index_.emplace(names_[v], v).second) {
            throw ValidationError(fmt::format("duplicate variable name '{}'", names_[v]));
        }
    }

    for (std::size_t v = 0; v < n; ++v) {
        const auto& ps = parents_[v];
        if (ps.size() > kMaxParents) {
            throw ValidationError(fmt::format("variable '{}' has {} parents; at most {} are supported",
                                              names_[v], ps.size(), kMaxParents));
        }
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (ps[i] >= n) {
                throw ValidationError(fmt::format("variable '{}' has an unknown parent index {}", names_[v], ps[i]));
            }
            if (std::find(ps.begin(), ps.begin() + static_cast<std::ptrdiff_t>(i), ps[i]) !=
                ps.begin() + static_cast<std::ptrdiff_t>(i)) {
                throw ValidationError(
                    fmt::format("variable '{}' lists parent '{}' twice", names_[v], names_[ps[i]]));
            }
        }
    }

    if (auto cycle = find_cycle(parents_); !cycle.empty()) {
        std::vector<std::string> members;
        for (std::size_t v : cycle) members.push_back(names_[v]);
        members.push_back(names_[cycle.front()]);
        throw ValidationError(fmt::format("cycle detected: {}", fmt::join(members, " -> ")));
    }

    for (std::size_t v = 0; v < n; ++v) {
        if (!cpts_[v]) continue;
        const auto& table = *cpts_[v];
        if (table.size() != configuration_count(parents_[v].size())) {
            throw ValidationError(fmt::format("CPT of '{}' has {} rows, expected {}", names_[v], table.size(),
                                              configuration_count(parents_[v].size())));
        }
        for (std::size_t c = 0; c < table.size(); ++c) {
            if (!(table[c] >= 0.0 && table[c] <= 1.0)) {
                throw ValidationError(fmt::format("CPT of '{}' row {} has probability {} outside [0, 1]", names_[v],
                                                  Configuration(parents_[v].size(), static_cast<std::uint32_t>(c)).to_string(),
                                                  table[c]));
            }
        }
    }

    // Kahn's algorithm, smallest index first, for a stable sampling order.
    std::vector<std::size_t> pending(n);
    std::vector<std::vector<std::size_t>> children(n);
    for (std::size_t v = 0; v < n; ++v) {
        pending[v] = parents_[v].size();
        for (std::size_t p : parents_[v]) children[p].push_back(v);
    }
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t v = 0; v < n; ++v) {
        if (pending[v] == 0) ready.push(v);
    }
    while (!ready.empty()) {
        const std::size_t v = ready.top();
        ready.pop();
        topological_.push_back(v);
        for (std::size_t c : children[v]) {
            if (--pending[c] == 0) ready.push(c);
        }
    }
}

std::optional<std::size_t> Network::index_of(std::string_view name) const {
    if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
    return std::nullopt;
}

bool Network::complete() const {
    return std::all_of(cpts_.begin(), cpts_.end(), [](const auto& t) { return t.has_value(); });
}

std::span<const double> Network::cpt(std::size_t v) const {
    if (!cpts_[v]) throw ValidationError(fmt::format("variable '{}' has no CPT", names_[v]));
    return *cpts_[v];
}

Network Network::with_cpts(std::vector<std::vector<double>> cpts) const {
    std::vector<std::optional<std::vector<double>>> tables;
    tables.reserve(cpts.size());
    for (auto& t : cpts) tables.emplace_back(std::move(t));
    return Network(names_, parents_, std::move(tables));
}

bool Network::operator==(const Network& other) const {
    return names_ == other.names_ && parents_ == other.parents_ && cpts_ == other.cpts_;
}

Network validate_network(const RawNetwork& raw) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t v = 0; v < raw.variables.size(); ++v) {
        if (!index.emplace(raw.variables[v], v).second) {
            const std::size_t line = v < raw.variable_lines.size() ? raw.variable_lines[v] : 0;
            throw ParseError(fmt::format("duplicate variable name '{}'", raw.variables[v]), line);
        }
    }
    auto resolve = [&](const std::string& name, std::size_t line) {
        auto it = index.find(name);
        if (it == index.end()) throw ParseError(fmt::format("unknown variable '{}'", name), line);
        return it->second;
    };

    std::vector<std::vector<std::size_t>> parents(raw.variables.size());
    for (const auto& arc : raw.arcs) {
        const std::size_t p = resolve(arc.parent, arc.line);
        const std::size_t c = resolve(arc.child, arc.line);
        if (std::find(parents[c].begin(), parents[c].end(), p) != parents[c].end()) {
            throw ParseError(fmt::format("duplicate arc {} -> {}", arc.parent, arc.child), arc.line);
        }
        parents[c].push_back(p);
    }

    std::vector<std::optional<std::vector<double>>> cpts(raw.variables.size());
    std::vector<std::vector<bool>> seen(raw.variables.size());
    for (const auto& row : raw.cpt_rows) {
        const std::size_t v = resolve(row.child, row.line);
        const std::size_t k = parents[v].size();
        if (row.bits.size() != k) {
            throw ParseError(fmt::format("CPT row for '{}' has {} bits, expected {}", row.child, row.bits.size(), k),
                             row.line);
        }
        std::uint32_t config = 0;
        try {
            config = Configuration::parse(row.bits).index();
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), row.line);
        }
        if (!(row.probability >= 0.0 && row.probability <= 1.0)) {
            throw ParseError(fmt::format("probability {} outside [0, 1]", row.probability), row.line);
        }
        if (!cpts[v]) {
            cpts[v].emplace(configuration_count(k), 0.0);
            seen[v].assign(configuration_count(k), false);
        }
        if (seen[v][config]) {
            throw ParseError(fmt::format("duplicate CPT row for '{}' configuration {}", row.child,
                                         row.bits.empty() ? "-" : row.bits),
                             row.line);
        }
        seen[v][config] = true;
        (*cpts[v])[config] = row.probability;
    }
    for (std::size_t v = 0; v < raw.variables.size(); ++v) {
        if (!cpts[v]) continue;
        for (std::size_t c = 0; c < seen[v].size(); ++c) {
            if (!seen[v][c]) {
                const std::string bits = Configuration(parents[v].size(), static_cast<std::uint32_t>(c)).to_string();
                throw ValidationError(fmt::format("CPT of '{}' is missing configuration {}", raw.variables[v],
                                                  bits.empty() ? "-" : bits));
            }
        }
    }

    return Network(raw.variables, std::move(parents), std::move(cpts));
}

std::vector<Configuration> parent_configurations(const Network& net, std::size_t v) {
    const std::size_t k = net.parent_count(v);
    std::vector<Configuration> configs;
    configs.reserve(configuration_count(k));
    for (std::uint32_t c = 0; c < configuration_count(k); ++c) configs.emplace_back(k, c);
    return configs;
}

std::uint32_t configuration_index(const Network& net, std::size_t v, std::span<const std::uint8_t> assignment) {
    std::uint32_t config = 0;
    for (std::size_t p : net.parents(v)) config = (config << 1) | (assignment[p] != 0 ? 1u : 0u);
    return config;
}

// ---------------------------------------------------------------------------
// JointDistribution

JointDistribution::JointDistribution(std::size_t variable_count, std::vector<double> probabilities)
    : variable_count_(variable_count), probabilities_(std::move(probabilities)) {
    if (variable_count >= 63 || probabilities_.size() != (std::size_t{1} << variable_count)) {
        throw ValidationError(fmt::format("joint distribution over {} variables needs {} entries, got {}",
                                          variable_count, std::size_t{1} << std::min<std::size_t>(variable_count, 62),
                                          probabilities_.size()));
    }
    double total = 0.0;
    for (double p : probabilities_) {
        if (!(p >= 0.0)) throw ValidationError("joint distribution has a negative or NaN entry");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ValidationError(fmt::format("joint distribution sums to {}, not 1", total));
    }
}

double JointDistribution::marginal(std::size_t variable) const {
    double p = 0.0;
    for (std::size_t a = 0; a < probabilities_.size(); ++a) {
        if ((a >> variable) & 1U) p += probabilities_[a];
    }
    return p;
}

JointDistribution joint_distribution(const Network& net, std::size_t max_variables) {
    const std::size_t n = net.size();
    if (n > max_variables) {
        throw ValidationError(
            fmt::format("network has {} variables; dense joint distributions are limited to {}", n, max_variables));
    }
    for (std::size_t v = 0; v < n; ++v) {
        if (!net.has_cpt(v)) throw ValidationError(fmt::format("variable '{}' has no CPT", net.name(v)));
    }

    // Fill in topological order: after processing variable v, the table holds the
    // joint of all processed variables, doubled over each newly added bit.
    std::vector<double> joint(std::size_t{1} << n, 0.0);
    joint[0] = 1.0;
    for (std::size_t v : net.topological_order()) {
        const auto table = net.cpt(v);
        const std::size_t bit = std::size_t{1} << v;
        for (std::size_t a = 0; a < joint.size(); ++a) {
            if ((a & bit) != 0 || joint[a] == 0.0) continue;
            std::uint32_t config = 0;
            for (std::size_t p : net.parents(v)) config = (config << 1) | static_cast<std::uint32_t>((a >> p) & 1U);
            const double p1 = table[config];
            joint[a | bit] = joint[a] * p1;
            joint[a] *= 1.0 - p1;
        }
    }
    return JointDistribution(n, std::move(joint));
}

}  // namespace isobn
