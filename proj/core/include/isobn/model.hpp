#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace isobn {

/// Upper bound on the number of parents of a single variable (2^16 configurations).
inline constexpr std::size_t kMaxParents = 16;

/// Default upper bound on the variable count for dense joint distributions.
inline constexpr std::size_t kDefaultJointCap = 24;

/// Number of parent configurations for k binary parents.
inline constexpr std::uint32_t configuration_count(std::size_t parent_count) {
    return std::uint32_t{1} << parent_count;
}

/**
 * A value assignment to the ordered parent list of one variable.
 *
 * The index packs the parent values with the first parent in the most significant
 * position, so ascending index order is the lexicographic order of the value tuple
 * (x1, ..., xk) and the text form "x1x2...xk" is the index written in binary.
 */
class Configuration {
public:
    Configuration() = default;
    Configuration(std::size_t width, std::uint32_t index);

    std::size_t width() const { return width_; }
    std::uint32_t index() const { return index_; }

    /// Value (0 or 1) of the parent at position `parent` in the parent list.
    int value(std::size_t parent) const;
    Configuration with(std::size_t parent, int value) const;

    /// "x1x2...xk"; the empty string for a variable without parents.
    std::string to_string() const;
    static Configuration parse(std::string_view bits);

    auto operator<=>(const Configuration&) const = default;

private:
    std::size_t width_ = 0;
    std::uint32_t index_ = 0;
};

/// Position mask of parent `parent` inside a configuration index of the given width.
inline constexpr std::uint32_t parent_bit(std::size_t width, std::size_t parent) {
    return std::uint32_t{1} << (width - 1 - parent);
}

struct Variable {
    std::string name;
    std::size_t index = 0;
};

/// Network description as read from a file, before any structural checks.
struct RawNetwork {
    struct Arc {
        std::string parent;
        std::string child;
        std::size_t line = 0;
    };
    struct CptRow {
        std::string child;
        std::string bits;
        double probability = 0.0;
        std::size_t line = 0;
    };

    std::vector<std::string> variables;
    std::vector<std::size_t> variable_lines;
    std::vector<Arc> arcs;
    std::vector<CptRow> cpt_rows;
};

/**
 * A directed acyclic graph of binary variables with optional conditional
 * probability tables. A CPT, when present, holds p(v = 1 | configuration) for every
 * configuration index of the variable's parents.
 *
 * Immutable after construction; the constructor enforces all structural invariants.
 */
class Network {
public:
    Network() = default;
    Network(std::vector<std::string> names,
            std::vector<std::vector<std::size_t>> parents,
            std::vector<std::optional<std::vector<double>>> cpts = {});

    std::size_t size() const { return names_.size(); }
    Variable variable(std::size_t v) const { return {names_[v], v}; }
    const std::string& name(std::size_t v) const { return names_[v]; }
    const std::vector<std::string>& names() const { return names_; }
    std::optional<std::size_t> index_of(std::string_view name) const;

    const std::vector<std::size_t>& parents(std::size_t v) const { return parents_[v]; }
    std::size_t parent_count(std::size_t v) const { return parents_[v].size(); }

    bool has_cpt(std::size_t v) const { return cpts_[v].has_value(); }
    bool complete() const;
    std::span<const double> cpt(std::size_t v) const;

    const std::vector<std::size_t>& topological_order() const { return topological_; }

    /// Same structure with every CPT replaced.
    Network with_cpts(std::vector<std::vector<double>> cpts) const;

    bool operator==(const Network& other) const;

private:
    std::vector<std::string> names_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::optional<std::vector<double>>> cpts_;
    std::vector<std::size_t> topological_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Resolves names, checks the CPT rows and builds a Network. Parent order follows arc order.
Network validate_network(const RawNetwork& raw);

/// All 2^k configurations of the parents of `v`, in ascending order.
std::vector<Configuration> parent_configurations(const Network& net, std::size_t v);

/// Configuration index of `v`'s parents within a full assignment.
std::uint32_t configuration_index(const Network& net, std::size_t v, std::span<const std::uint8_t> assignment);

/**
 * Dense joint distribution over all 2^V assignments. Bit v of an assignment index
 * holds the value of variable v.
 */
class JointDistribution {
public:
    JointDistribution() = default;
    JointDistribution(std::size_t variable_count, std::vector<double> probabilities);

    std::size_t variable_count() const { return variable_count_; }
    std::size_t size() const { return probabilities_.size(); }
    double operator[](std::size_t assignment) const { return probabilities_[assignment]; }
    std::span<const double> probabilities() const { return probabilities_; }

    /// p(variable = 1).
    double marginal(std::size_t variable) const;

private:
    std::size_t variable_count_ = 0;
    std::vector<double> probabilities_;
};

JointDistribution joint_distribution(const Network& net, std::size_t max_variables = kDefaultJointCap);

}  // namespace isobn
