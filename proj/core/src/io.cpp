#include "isobn/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "isobn/errors.hpp"

namespace isobn {

namespace {

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '.';
}

// Cursor over one line; columns are 1-based.
class LineCursor {
public:
    LineCursor(std::string_view text, std::size_t line) : text_(text), line_(line) {}

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) ++pos_;
    }
    bool at_end() {
        skip_space();
        return pos_ >= text_.size();
    }
    std::size_t column() const { return pos_ + 1; }

    [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line_, column()); }

    std::string name(const char* what) {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
        if (pos_ == start) fail(fmt::format("expected {}", what));
        return std::string(text_.substr(start, pos_ - start));
    }

    bool accept(std::string_view token) {
        skip_space();
        if (text_.substr(pos_).starts_with(token)) {
            pos_ += token.size();
            return true;
        }
        return false;
    }
    void expect(std::string_view token) {
        if (!accept(token)) fail(fmt::format("expected '{}'", token));
    }

    char any_of(std::string_view choices, const char* what) {
        skip_space();
        if (pos_ >= text_.size() || choices.find(text_[pos_]) == std::string_view::npos) {
            fail(fmt::format("expected {}", what));
        }
        return text_[pos_++];
    }

    // Raw token up to the next separator.
    std::string field(std::string_view stops = "|,()") {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && stops.find(text_[pos_]) == std::string_view::npos &&
               std::isspace(static_cast<unsigned char>(text_[pos_])) == 0) {
            ++pos_;
        }
        return std::string(text_.substr(start, pos_ - start));
    }

    double number(const char* what) {
        skip_space();
        const std::size_t start_col = column();
        const std::string token = field();
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
            throw ParseError(fmt::format("expected {}, found '{}'", what, token), line_, start_col);
        }
        return value;
    }

    void expect_end() {
        if (!at_end()) fail(fmt::format("unexpected text '{}'", text_.substr(pos_)));
    }

private:
    std::string_view text_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

std::string_view strip_comment(std::string_view line) {
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())) != 0) line.remove_suffix(1);
    return line;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())) != 0) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())) != 0) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = text.find('\n', start);
        std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return lines;
}

enum class Section { none, variables, arcs, cpt, signs, prior };

struct PendingLine {
    std::string_view text;
    std::size_t line;
};

struct PendingSign {
    std::string parent;
    std::string child;
    Sign sign = Sign::none;
    std::vector<std::pair<std::string, int>> context;
    std::size_t line = 0;
};

PendingSign parse_sign_line(std::string_view text, std::size_t line) {
    LineCursor cur(text, line);
    PendingSign sign;
    sign.line = line;
    sign.parent = cur.name("parent variable name");
    cur.expect("->");
    sign.child = cur.name("child variable name");
    cur.expect(":");
    switch (cur.any_of("+-0?", "a sign (+, -, 0 or ?)")) {
        case '+': sign.sign = Sign::positive; break;
        case '-': sign.sign = Sign::negative; break;
        case '0': sign.sign = Sign::zero; break;
        default: sign.sign = Sign::none; break;
    }
    if (cur.accept("|")) {
        cur.expect("context");
        cur.expect(":");
        do {
            std::string var = cur.name("context variable name");
            cur.expect("=");
            const char bit = cur.any_of("01", "context value 0 or 1");
            sign.context.emplace_back(std::move(var), bit - '0');
        } while (cur.accept(","));
    }
    cur.expect_end();
    return sign;
}

}  // namespace

ParsedNetwork parse_network(std::string_view text) {
    RawNetwork raw;
    std::vector<PendingLine> sign_lines;
    std::vector<PendingLine> prior_lines;

    Section section = Section::none;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const std::string_view body = strip_comment(lines[i]);
        const std::string_view content = trim(body);
        if (content.empty()) continue;

        static const std::map<std::string_view, Section> headers = {
            {"variables:", Section::variables}, {"arcs:", Section::arcs},   {"cpt:", Section::cpt},
            {"signs:", Section::signs},         {"prior:", Section::prior},
        };
        if (auto it = headers.find(content); it != headers.end()) {
            section = it->second;
            continue;
        }

        LineCursor cur(body, line_no);
        switch (section) {
            case Section::none:
                cur.skip_space();
                cur.fail("expected a section header (variables:, arcs:, cpt:, signs:, prior:)");
            case Section::variables: {
                raw.variables.push_back(cur.name("variable name"));
                raw.variable_lines.push_back(line_no);
                cur.expect_end();
                break;
            }
            case Section::arcs: {
                RawNetwork::Arc arc;
                arc.line = line_no;
                arc.parent = cur.name("parent variable name");
                cur.expect("->");
                arc.child = cur.name("child variable name");
                cur.expect_end();
                raw.arcs.push_back(std::move(arc));
                break;
            }
            case Section::cpt: {
                RawNetwork::CptRow row;
                row.line = line_no;
                row.child = cur.name("variable name");
                cur.expect("|");
                if (!cur.accept("-")) row.bits = cur.field();
                cur.expect("|");
                row.probability = cur.number("a probability");
                cur.expect_end();
                raw.cpt_rows.push_back(std::move(row));
                break;
            }
            case Section::signs: sign_lines.push_back({body, line_no}); break;
            case Section::prior: prior_lines.push_back({body, line_no}); break;
        }
    }

    ParsedNetwork parsed;
    parsed.network = validate_network(raw);
    const Network& net = parsed.network;

    auto variable = [&](const std::string& name, std::size_t line) {
        auto v = net.index_of(name);
        if (!v) throw ParseError(fmt::format("unknown variable '{}'", name), line);
        return *v;
    };
    auto parent_position = [&](std::size_t child, const std::string& name, std::size_t line) {
        const std::size_t p = variable(name, line);
        const auto& ps = net.parents(child);
        auto it = std::find(ps.begin(), ps.end(), p);
        if (it == ps.end()) {
            throw ParseError(fmt::format("'{}' is not a parent of '{}'", name, net.name(child)), line);
        }
        return static_cast<std::size_t>(it - ps.begin());
    };

    std::vector<std::size_t> influence_lines;
    for (const auto& pending : sign_lines) {
        const PendingSign sign = parse_sign_line(pending.text, pending.line);
        SignedInfluence inf;
        inf.child = variable(sign.child, sign.line);
        inf.parent = parent_position(inf.child, sign.parent, sign.line);
        inf.sign = sign.sign;
        for (const auto& [name, value] : sign.context) {
            const std::size_t pos = parent_position(inf.child, name, sign.line);
            if (pos == inf.parent) {
                throw ParseError(fmt::format("context of {} -> {} may not fix '{}' itself", sign.parent, sign.child, name),
                                 sign.line);
            }
            inf.context.push_back({pos, value});
        }
        try {
            std::vector<SignedInfluence> so_far = parsed.influences;
            so_far.push_back(inf);
            validate_influences(so_far, net);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), sign.line);
        }
        parsed.influences.push_back(std::move(inf));
        influence_lines.push_back(sign.line);
    }

    if (!prior_lines.empty()) {
        NetworkPrior prior;
        prior.variables.resize(net.size());
        for (const auto& pending : prior_lines) {
            LineCursor cur(pending.text, pending.line);
            const std::size_t v = variable(cur.name("variable name"), pending.line);
            const std::size_t k = net.parent_count(v);
            cur.expect("|");
            std::optional<std::uint32_t> config;
            if (!cur.accept("*")) {
                const std::size_t col = cur.column();
                std::string bits;
                if (!cur.accept("-")) bits = cur.field();
                if (bits.size() != k) {
                    throw ParseError(fmt::format("prior configuration has {} bits, '{}' has {} parents", bits.size(),
                                                 net.name(v), k),
                                     pending.line, col);
                }
                try {
                    config = Configuration::parse(bits).index();
                } catch (const ValidationError& e) {
                    throw ParseError(e.what(), pending.line, col);
                }
            }
            cur.expect("|");
            double mode = 0.5;
            double precision = 0.0;
            if (cur.accept("beta")) {
                cur.expect("(");
                const double a = cur.number("Beta parameter a");
                cur.expect(",");
                const double b = cur.number("Beta parameter b");
                cur.expect(")");
                try {
                    std::tie(mode, precision) = beta_mode_precision(a, b);
                } catch (const ValidationError& e) {
                    throw ParseError(e.what(), pending.line);
                }
            } else if (cur.accept("mode")) {
                cur.expect("(");
                mode = cur.number("prior mode");
                cur.expect(",");
                precision = cur.number("prior precision");
                cur.expect(")");
                if (!(mode >= 0.0 && mode <= 1.0) || !(precision >= 0.0) || !std::isfinite(precision)) {
                    throw ParseError(fmt::format("prior mode must lie in [0, 1] and precision be non-negative"),
                                     pending.line);
                }
            } else {
                cur.fail("expected beta(a, b) or mode(p0, h)");
            }
            cur.expect_end();

            auto& slot = prior.variables[v];
            if (!slot) slot = BetaPrior::flat(k);
            for (std::uint32_t c = 0; c < configuration_count(k); ++c) {
                if (config && *config != c) continue;
                slot->mode[c] = mode;
                slot->precision[c] = precision;
            }
        }
        for (std::size_t v = 0; v < net.size(); ++v) {
            if (!prior.variables[v]) continue;
            const auto pairs = immediate_order_pairs(influences_on(parsed.influences, v), net.parent_count(v));
            try {
                check_prior_isotonic(*prior.variables[v], pairs);
            } catch (const ValidationError& e) {
                throw ValidationError(fmt::format("prior of '{}': {}", net.name(v), e.what()));
            }
        }
        parsed.prior = std::move(prior);
    }
    return parsed;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

ParsedNetwork load_network(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return parse_network(text);
    } catch (const ParseError& e) {
        throw e.with_source(path.string());
    } catch (const ValidationError& e) {
        throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::string configuration_label(const Configuration& config) {
    return config.width() == 0 ? std::string("-") : config.to_string();
}

std::string emit_network(const ParsedNetwork& parsed) {
    const Network& net = parsed.network;
    std::string out = "variables:\n";
    for (const auto& name : net.names()) out += fmt::format("  {}\n", name);

    out += "arcs:\n";
    for (std::size_t v = 0; v < net.size(); ++v) {
        for (std::size_t p : net.parents(v)) out += fmt::format("  {} -> {}\n", net.name(p), net.name(v));
    }

    bool any_cpt = false;
    for (std::size_t v = 0; v < net.size(); ++v) any_cpt = any_cpt || net.has_cpt(v);
    if (any_cpt) {
        out += "cpt:\n";
        for (std::size_t v = 0; v < net.size(); ++v) {
            if (!net.has_cpt(v)) continue;
            for (const auto& config : parent_configurations(net, v)) {
                out += fmt::format("  {} | {} | {}\n", net.name(v), configuration_label(config), net.cpt(v)[config.index()]);
            }
        }
    }

    if (!parsed.influences.empty()) {
        out += "signs:\n";
        for (const auto& inf : parsed.influences) {
            const auto& ps = net.parents(inf.child);
            out += fmt::format("  {} -> {} : {}", net.name(ps[inf.parent]), net.name(inf.child), sign_symbol(inf.sign));
            for (std::size_t i = 0; i < inf.context.size(); ++i) {
                out += fmt::format("{}{}={}", i == 0 ? " | context: " : ", ", net.name(ps[inf.context[i].parent]),
                                   inf.context[i].value);
            }
            out += '\n';
        }
    }

    if (parsed.prior) {
        out += "prior:\n";
        for (std::size_t v = 0; v < net.size(); ++v) {
            const BetaPrior* prior = parsed.prior->find(v);
            if (prior == nullptr) continue;
            for (const auto& config : parent_configurations(net, v)) {
                out += fmt::format("  {} | {} | mode({}, {})\n", net.name(v), configuration_label(config),
                                   prior->mode[config.index()], prior->precision[config.index()]);
            }
        }
    }
    return out;
}

Dataset parse_data(std::string_view text, const Network& net, std::vector<std::string>* warnings) {
    auto split = [](std::string_view line) {
        std::vector<std::string_view> fields;
        const bool commas = line.find(',') != std::string_view::npos;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t end = commas ? line.find(',', start) : line.find_first_of(" \t", start);
            if (end == std::string_view::npos) end = line.size();
            const auto field = trim(line.substr(start, end - start));
            if (commas || !field.empty()) fields.push_back(field);
            start = end + 1;
        }
        return fields;
    };

    const auto lines = split_lines(text);
    std::size_t i = 0;
    while (i < lines.size() && trim(strip_comment(lines[i])).empty()) ++i;
    if (i == lines.size()) throw ParseError("data file has no header row", 0);

    const std::size_t header_line = i + 1;
    const auto header = split(strip_comment(lines[i]));
    std::vector<std::size_t> source_of(net.size(), header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (auto v = net.index_of(header[c])) {
            if (source_of[*v] != header.size()) {
                throw ParseError(fmt::format("column '{}' appears twice", header[c]), header_line);
            }
            source_of[*v] = c;
        } else if (warnings != nullptr) {
            warnings->push_back(fmt::format("ignoring column '{}' not in the network", header[c]));
        }
    }
    for (std::size_t v = 0; v < net.size(); ++v) {
        if (source_of[v] == header.size()) {
            throw ParseError(fmt::format("missing column for variable '{}'", net.name(v)), header_line);
        }
    }

    std::vector<std::uint8_t> cells;
    std::vector<std::uint8_t> row(header.size());
    for (++i; i < lines.size(); ++i) {
        const std::string_view line = strip_comment(lines[i]);
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (fields.size() != header.size()) {
            throw ParseError(fmt::format("row has {} cells, header has {}", fields.size(), header.size()), i + 1);
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (fields[c] != "0" && fields[c] != "1") {
                throw ParseError(fmt::format("cell in column '{}' is '{}'; cells must be 0 or 1", header[c], fields[c]),
                                 i + 1, c + 1);
            }
            row[c] = fields[c] == "1" ? 1 : 0;
        }
        for (std::size_t v = 0; v < net.size(); ++v) cells.push_back(row[source_of[v]]);
    }
    return Dataset(net.names(), std::move(cells));
}

Dataset load_data(const std::filesystem::path& path, const Network& net, std::vector<std::string>* warnings) {
    const std::string text = read_text_file(path);
    try {
        return parse_data(text, net, warnings);
    } catch (const ParseError& e) {
        throw e.with_source(path.string());
    }
}

std::string emit_data(const Dataset& data) {
    std::string out;
    for (std::size_t c = 0; c < data.column_count(); ++c) out += (c == 0 ? "" : ",") + data.columns()[c];
    out += '\n';
    for (std::size_t r = 0; r < data.row_count(); ++r) {
        for (std::size_t c = 0; c < data.column_count(); ++c) {
            if (c != 0) out += ',';
            out += static_cast<char>('0' + data.at(r, c));
        }
        out += '\n';
    }
    return out;
}

std::string format_number(double value, int digits) {
    if (digits < 1 || digits > 17) throw ValidationError(fmt::format("digits must be in 1..17, got {}", digits));
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    return fmt::format("{:.{}g}", value, digits);
}

std::string emit_parameter_table(const FittedParameters& fit, const Network& net, int digits) {
    std::string out = "variable,config,n,n1,basic,fitted\n";
    for (const auto& var : fit.variables) {
        for (const auto& config : parent_configurations(net, var.variable)) {
            const std::uint32_t c = config.index();
            out += fmt::format("{},{},{},{},{},{}\n", net.name(var.variable), configuration_label(config),
                               var.counts.n[c], var.counts.n1[c], format_number(var.basic[c], digits),
                               format_number(var.fitted[c], digits));
        }
    }
    return out;
}

std::vector<std::vector<double>> parse_parameter_table(std::string_view text, const Network& net) {
    std::vector<std::vector<double>> cpts(net.size());
    std::vector<std::vector<bool>> seen(net.size());
    for (std::size_t v = 0; v < net.size(); ++v) {
        cpts[v].assign(configuration_count(net.parent_count(v)), 0.0);
        seen[v].assign(cpts[v].size(), false);
    }

    const auto lines = split_lines(text);
    bool header = true;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string_view line = trim(lines[i]);
        if (line.empty()) continue;
        if (header) {
            if (line != "variable,config,n,n1,basic,fitted") throw ParseError("unexpected parameter table header", i + 1);
            header = false;
            continue;
        }
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t end = line.find(',', start);
            fields.push_back(line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
            if (end == std::string_view::npos) break;
            start = end + 1;
        }
        if (fields.size() != 6) throw ParseError(fmt::format("expected 6 fields, found {}", fields.size()), i + 1);
        auto v = net.index_of(fields[0]);
        if (!v) throw ParseError(fmt::format("unknown variable '{}'", fields[0]), i + 1);
        const std::string bits = fields[1] == "-" ? std::string() : std::string(fields[1]);
        if (bits.size() != net.parent_count(*v)) {
            throw ParseError(fmt::format("configuration '{}' does not match the parents of '{}'", fields[1], fields[0]),
                             i + 1);
        }
        std::uint32_t c = 0;
        try {
            c = Configuration::parse(bits).index();
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), i + 1);
        }
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(fields[5].data(), fields[5].data() + fields[5].size(), value);
        if (ec != std::errc() || ptr != fields[5].data() + fields[5].size()) {
            throw ParseError(fmt::format("fitted value '{}' is not a number", fields[5]), i + 1);
        }
        if (seen[*v][c]) throw ParseError(fmt::format("duplicate row for {} {}", fields[0], fields[1]), i + 1);
        seen[*v][c] = true;
        cpts[*v][c] = value;
    }
    for (std::size_t v = 0; v < net.size(); ++v) {
        for (std::size_t c = 0; c < seen[v].size(); ++c) {
            if (!seen[v][c]) {
                throw ValidationError(fmt::format("parameter table lacks {} {}", net.name(v),
                                                  configuration_label(Configuration(net.parent_count(v),
                                                                                    static_cast<std::uint32_t>(c)))));
            }
        }
    }
    return cpts;
}

std::string emit_experiment_summary(const ExperimentSummary& summary) {
    std::string out = "n,mean_kl_unconstrained,mean_kl_constrained,reps_used,reps_infinite\n";
    for (const auto& row : summary.rows) {
        out += fmt::format("{},{},{},{},{}\n", row.size, format_number(row.mean_kl_unconstrained),
                           format_number(row.mean_kl_constrained), row.reps_used, row.reps_infinite);
    }
    return out;
}

}  // namespace isobn
