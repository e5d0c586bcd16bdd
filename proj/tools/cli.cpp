#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "isobn/errors.hpp"
#include "isobn/estimation.hpp"
#include "isobn/io.hpp"
#include "isobn/isotonic.hpp"
#include "isobn/simulate.hpp"

namespace isobn::cli {

namespace {

void write_output(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ValidationError(fmt::format("cannot write '{}'", path));
    file << text;
    if (!file) throw ValidationError(fmt::format("failed writing '{}'", path));
}

struct BetaFlag {
    std::vector<double> values;
    std::optional<std::pair<double, double>> get() const {
        if (values.empty()) return std::nullopt;
        return std::pair{values[0], values[1]};
    }
};

void add_beta_flag(CLI::App& cmd, BetaFlag& flag, const char* help) {
    cmd.add_option("--beta", flag.values, help)->expected(2)->type_name("A B");
}

// --- validate -------------------------------------------------------------

struct ValidateArgs {
    std::string network;
    std::string data;
};

int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err) {
    const ParsedNetwork parsed = load_network(args.network);
    const Network& net = parsed.network;
    std::size_t arcs = 0;
    for (std::size_t v = 0; v < net.size(); ++v) arcs += net.parent_count(v);
    out << fmt::format("network ok: {} variables, {} arcs, {} signs, {}, {}\n", net.size(), arcs,
                       parsed.influences.size(), net.complete() ? "complete CPTs" : "CPTs incomplete",
                       parsed.prior ? "prior given" : "no prior");
    if (!args.data.empty()) {
        std::vector<std::string> warnings;
        const Dataset data = load_data(args.data, net, &warnings);
        for (const auto& w : warnings) err << "warning: " << w << '\n';
        out << fmt::format("data ok: {} rows\n", data.row_count());
    }
    return kSuccess;
}

// --- order-info -----------------------------------------------------------

struct OrderInfoArgs {
    std::string network;
    std::string variable;
    std::uint64_t max_lower_sets = kDefaultMaxLowerSets;
};

std::string class_label(const ConfigOrder& order, std::size_t cls) {
    std::string label = "{";
    for (std::size_t i = 0; i < order.classes[cls].members.size(); ++i) {
        label += (i == 0 ? "" : " ") +
                 configuration_label(Configuration(order.parent_count, order.classes[cls].members[i]));
    }
    return label + "}";
}

int cmd_order_info(const OrderInfoArgs& args, std::ostream& out) {
    const ParsedNetwork parsed = load_network(args.network);
    const Network& net = parsed.network;
    std::vector<std::size_t> selected;
    if (args.variable.empty()) {
        for (std::size_t v = 0; v < net.size(); ++v) selected.push_back(v);
    } else {
        auto v = net.index_of(args.variable);
        if (!v) throw ValidationError(fmt::format("unknown variable '{}'", args.variable));
        selected.push_back(*v);
    }

    for (std::size_t v : selected) {
        const std::size_t k = net.parent_count(v);
        const auto influences = influences_on(parsed.influences, v);
        const ConfigOrder order = build_config_order(influences, k);

        std::vector<bool> signed_parent(k, false);
        for (const auto& inf : influences) {
            if (inf.sign != Sign::none) signed_parent[inf.parent] = true;
        }
        const auto k1 = static_cast<unsigned>(std::count(signed_parent.begin(), signed_parent.end(), true));
        const auto k2 = static_cast<unsigned>(k) - k1;

        std::string parents;
        for (std::size_t p : net.parents(v)) parents += (parents.empty() ? "" : " ") + net.name(p);
        out << fmt::format("variable {} (parents: {})\n", net.name(v), parents.empty() ? "none" : parents);
        out << fmt::format("  signed parents: {}, unsigned parents: {}\n", k1, k2);
        if (k1 <= 7) {
            const auto counts = lower_set_count(k1, k2);
            out << fmt::format("  lower sets by formula: undecomposed {}, decomposed {}\n", counts.undecomposed.str(),
                               counts.decomposed.str());
        } else {
            out << "  lower sets by formula: beyond the tabulated range\n";
        }
        out << fmt::format("  classes: {}\n", order.classes.size());
        for (std::size_t c = 0; c < order.classes.size(); ++c) {
            out << fmt::format("    class {}: {}\n", c, class_label(order, c));
        }
        out << fmt::format("  edges: {}\n", order.edges.size());
        for (const auto& [a, b] : order.edges) {
            out << fmt::format("    {} <= {}\n", class_label(order, a), class_label(order, b));
        }
        out << fmt::format("  components: {}\n", order.components.size());
        bool feasible = true;
        for (std::size_t comp = 0; comp < order.components.size(); ++comp) {
            const OrderDag dag = order.component_dag(comp);
            std::string detail;
            if (dag.is_chain()) {
                detail = fmt::format("chain, {} lower sets", dag.size());
            } else {
                try {
                    detail = fmt::format("{} lower sets", count_lower_sets(dag, args.max_lower_sets));
                } catch (const FeasibilityError&) {
                    feasible = false;
                    detail = fmt::format("more than {} lower sets", args.max_lower_sets);
                }
            }
            out << fmt::format("    component {}: {} classes, {}\n", comp, order.components[comp].size(), detail);
        }
        out << fmt::format("  feasible: {}\n", feasible ? "yes" : "no");
    }
    return kSuccess;
}

// --- fit ------------------------------------------------------------------

struct FitArgs {
    std::string network;
    std::string data;
    std::string method = "ml";
    bool unconstrained = false;
    double epsilon = kDefaultEmptyWeight;
    BetaFlag beta;
    std::string out;
    std::uint64_t max_lower_sets = kDefaultMaxLowerSets;
    int digits = 10;
};

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
    const ParsedNetwork parsed = load_network(args.network);
    const Network& net = parsed.network;
    std::vector<std::string> warnings;
    const Dataset data = load_data(args.data, net, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';

    FitOptions options;
    options.method = args.method == "map" ? Method::map : Method::ml;
    options.constrained = !args.unconstrained;
    options.empty_weight = args.epsilon;
    options.solver.max_lower_sets = args.max_lower_sets;

    std::optional<NetworkPrior> prior;
    if (auto beta = args.beta.get()) {
        prior = NetworkPrior::uniform(net, beta->first, beta->second);
    } else if (parsed.prior) {
        prior = parsed.prior;
    }
    if (options.method == Method::map && !prior) {
        err << "warning: --method map without a prior section or --beta; using flat priors\n";
    }

    const FittedParameters fit = fit_network(net, parsed.influences, data, prior ? &*prior : nullptr, options);
    const std::string table = emit_parameter_table(fit, net, args.digits);

    // Self-check on the emitted text, not on the in-memory values.
    if (options.constrained) {
        const auto reloaded = parse_parameter_table(table, net);
        for (std::size_t v = 0; v < net.size(); ++v) {
            const auto mine = influences_on(parsed.influences, v);
            if (!check_isotonic_configurations(reloaded[v], mine, net.parent_count(v), kFitIsotonicTolerance)) {
                throw InternalError(fmt::format("emitted parameters of '{}' violate the declared signs", net.name(v)));
            }
        }
    }
    write_output(table, args.out, out);
    return kSuccess;
}

// --- sample ---------------------------------------------------------------

struct SampleArgs {
    std::string network;
    std::size_t rows = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_sample(const SampleArgs& args, std::ostream& out) {
    const ParsedNetwork parsed = load_network(args.network);
    write_output(emit_data(logic_sample(parsed.network, args.rows, args.seed)), args.out, out);
    return kSuccess;
}

// --- kl -------------------------------------------------------------------

struct KlArgs {
    std::string p;
    std::string q;
};

int cmd_kl(const KlArgs& args, std::ostream& out) {
    const ParsedNetwork p = load_network(args.p);
    const ParsedNetwork q = load_network(args.q);
    if (p.network.names() != q.network.names()) {
        throw ValidationError("the two networks must declare the same variables in the same order");
    }
    out << format_number(kl_divergence(joint_distribution(p.network), joint_distribution(q.network))) << '\n';
    return kSuccess;
}

// --- experiment -----------------------------------------------------------

struct ExperimentArgs {
    std::string network;
    std::vector<std::size_t> sizes;
    std::size_t reps = 100;
    std::uint64_t seed = 1;
    std::size_t prior_threshold = 0;
    BetaFlag beta;
    double epsilon = kDefaultEmptyWeight;
    std::string out;
};

int cmd_experiment(const ExperimentArgs& args, std::ostream& out) {
    const ParsedNetwork parsed = load_network(args.network);
    ExperimentConfig config;
    config.sizes = args.sizes;
    config.replicates = args.reps;
    config.seed = args.seed;
    config.prior_threshold = args.prior_threshold;
    config.empty_weight = args.epsilon;
    if (auto beta = args.beta.get()) {
        config.prior = NetworkPrior::uniform(parsed.network, beta->first, beta->second);
    } else if (parsed.prior) {
        config.prior = parsed.prior;
    }
    const ExperimentSummary summary = run_experiment(parsed.network, parsed.influences, config);
    write_output(emit_experiment_summary(summary), args.out, out);
    return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Order-constrained parameter learning for binary Bayesian networks"};
    app.name(args.empty() ? "isobn" : std::filesystem::path(args[0]).filename().string());
    app.require_subcommand(1);

    ValidateArgs validate;
    auto* validate_cmd = app.add_subcommand("validate", "Parse a network spec and run structural checks");
    validate_cmd->add_option("network", validate.network, "Network spec file")->required();
    validate_cmd->add_option("--data", validate.data, "Also parse this data file against the network");

    OrderInfoArgs order_info;
    auto* order_cmd = app.add_subcommand("order-info", "Show the configuration order induced by the signs");
    order_cmd->add_option("network", order_info.network, "Network spec file")->required();
    order_cmd->add_option("--variable", order_info.variable, "Only this variable");
    order_cmd->add_option("--max-lower-sets", order_info.max_lower_sets, "Enumeration limit per component");

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Estimate CPTs from data");
    fit_cmd->add_option("network", fit.network, "Network spec file")->required();
    fit_cmd->add_option("--data", fit.data, "Data file")->required();
    fit_cmd->add_option("--method", fit.method, "ml or map")->check(CLI::IsMember({"ml", "map"}));
    auto* constrained_flag = fit_cmd->add_flag("--constrained", "Respect the declared signs (default)");
    auto* unconstrained_flag = fit_cmd->add_flag("--unconstrained", fit.unconstrained, "Ignore the declared signs");
    constrained_flag->excludes(unconstrained_flag);
    fit_cmd->add_option("--epsilon", fit.epsilon, "Weight of configurations without data")
        ->check(CLI::PositiveNumber);
    add_beta_flag(*fit_cmd, fit.beta, "Beta(A, B) prior for every parameter (with --method map)");
    fit_cmd->add_option("--out", fit.out, "Write the parameter table here instead of stdout");
    fit_cmd->add_option("--max-lower-sets", fit.max_lower_sets, "Enumeration limit per component");
    fit_cmd->add_option("--digits", fit.digits, "Significant digits in the table")->check(CLI::Range(1, 17));

    SampleArgs sample;
    auto* sample_cmd = app.add_subcommand("sample", "Draw data from a fully specified network");
    sample_cmd->add_option("network", sample.network, "Network spec file")->required();
    sample_cmd->add_option("--n", sample.rows, "Number of rows")->required();
    sample_cmd->add_option("--seed", sample.seed, "Random seed")->required();
    sample_cmd->add_option("--out", sample.out, "Write the data here instead of stdout");

    KlArgs kl;
    auto* kl_cmd = app.add_subcommand("kl", "KL divergence between the joints of two fully specified networks");
    kl_cmd->add_option("p", kl.p, "Reference network")->required();
    kl_cmd->add_option("q", kl.q, "Approximating network")->required();

    ExperimentArgs experiment;
    auto* exp_cmd = app.add_subcommand("experiment", "Compare plain and constrained estimators by repeated sampling");
    exp_cmd->add_option("network", experiment.network, "Fully specified network with signs")->required();
    exp_cmd->add_option("--sizes", experiment.sizes, "Sample sizes")->delimiter(',')->required();
    exp_cmd->add_option("--reps", experiment.reps, "Replicates per size");
    exp_cmd->add_option("--seed", experiment.seed, "Master seed");
    exp_cmd->add_option("--prior-threshold", experiment.prior_threshold,
                        "Use the prior for sample sizes below this value");
    add_beta_flag(*exp_cmd, experiment.beta, "Beta(A, B) prior for every parameter");
    exp_cmd->add_option("--epsilon", experiment.epsilon, "Weight of configurations without data")
        ->check(CLI::PositiveNumber);
    exp_cmd->add_option("--out", experiment.out, "Write the summary here instead of stdout");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    try {
        if (*validate_cmd) return cmd_validate(validate, out, err);
        if (*order_cmd) return cmd_order_info(order_info, out);
        if (*fit_cmd) return cmd_fit(fit, out, err);
        if (*sample_cmd) return cmd_sample(sample, out);
        if (*kl_cmd) return cmd_kl(kl, out);
        if (*exp_cmd) return cmd_experiment(experiment, out);
    } catch (const FeasibilityError& e) {
        err << "error: " << e.what() << '\n';
        return kFeasibilityError;
    } catch (const InternalError& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kValidationError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
    return kUsageError;
}

}  // namespace isobn::cli
