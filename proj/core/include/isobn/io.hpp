#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "isobn/dataset.hpp"
#include "isobn/estimation.hpp"
#include "isobn/model.hpp"
#include "isobn/signs.hpp"
#include "isobn/simulate.hpp"

namespace isobn {

/// Contents of a network spec file.
struct ParsedNetwork {
    Network network;
    std::vector<SignedInfluence> influences;
    std::optional<NetworkPrior> prior;

    bool operator==(const ParsedNetwork&) const = default;
};

/**
 * Parses the line-oriented network format:
 *
 *     # comment
 *     variables:
 *       X1
 *       Y
 *     arcs:
 *       X1 -> Y
 *     cpt:
 *       X1 | - | 0.3            # '-' is the empty configuration of a root
 *       Y | 0 | 0.2             # bits follow the parent order of the arcs
 *       Y | 1 | 0.7
 *     signs:
 *       X1 -> Y : +             # one of + - 0 ?
 *       X3 -> Y : - | context: X1=0, X2=1
 *     prior:
 *       Y | * | beta(2, 2)      # '*' applies to every configuration
 *       Y | 1 | mode(0.6, 4)    # mode p0 and precision h
 *
 * Sections may appear in any order; later prior lines override earlier ones.
 * Errors carry the offending line and, for syntax errors, column.
 */
ParsedNetwork parse_network(std::string_view text);
ParsedNetwork load_network(const std::filesystem::path& path);

/// Text that parse_network reads back into an identical ParsedNetwork.
std::string emit_network(const ParsedNetwork& parsed);

/**
 * Parses comma- or whitespace-delimited 0/1 data with a header row of variable
 * names. Columns are reordered to the network's variable order; columns the
 * network does not know are dropped with a message appended to `warnings`.
 */
Dataset parse_data(std::string_view text, const Network& net, std::vector<std::string>* warnings = nullptr);
Dataset load_data(const std::filesystem::path& path, const Network& net, std::vector<std::string>* warnings = nullptr);

std::string emit_data(const Dataset& data);

/// `digits` significant digits (1..17); "inf" and "nan" for non-finite values.
std::string format_number(double value, int digits = 10);

/// Text form of a configuration as used in files: its bits, or "-" when empty.
std::string configuration_label(const Configuration& config);

/// `variable,config,n,n1,basic,fitted`, one line per variable and configuration.
std::string emit_parameter_table(const FittedParameters& fit, const Network& net, int digits = 10);

/// Fitted CPTs read back from a parameter table; every configuration must appear exactly once.
std::vector<std::vector<double>> parse_parameter_table(std::string_view text, const Network& net);

/// `n,mean_kl_unconstrained,mean_kl_constrained,reps_used,reps_infinite`.
std::string emit_experiment_summary(const ExperimentSummary& summary);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace isobn
