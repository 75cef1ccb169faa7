#include "udw/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "udw/config.hpp"
#include "udw/error.hpp"

namespace udw {

namespace {

struct Options {
    std::string config_path;
    std::string scenario;
    std::string out_path;
    std::optional<std::size_t> workers;
    bool paper_literal = false;
    bool no_negative_modes = false;
    std::string time_kind;
    bool dump_config = false;
    std::optional<double> value;

    // causality-check / convergence-check
    std::string modes;
    double threshold = 1e-5;
    double tolerance = 1e-3;
    std::string trace_path;
    std::size_t samples = 401;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("--config: cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::size_t> parse_counts(const std::string& flag, const std::string& text) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = std::min(text.find(',', start), text.size());
        const std::string item = text.substr(start, comma - start);
        std::size_t n = 0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), n);
        if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || n == 0) {
            throw ConfigError(flag + ": expected a comma-separated list of positive integers, got '" + text + "'");
        }
        out.push_back(n);
        start = comma + 1;
    }
    return out;
}

RunConfig load_config(const Options& o, const std::string& fallback_scenario) {
    RunConfig c;
    if (!o.config_path.empty()) {
        c = parse_config(read_file(o.config_path));
        if (!o.scenario.empty()) throw ConfigError("--scenario: cannot be combined with --config");
    } else {
        const std::string name = o.scenario.empty() ? fallback_scenario : o.scenario;
        if (name.empty()) throw ConfigError("--scenario: a scenario name or --config is required");
        c = default_config(name);
    }

    if (o.paper_literal) c.discord = DiscordFormula::paper_literal;
    if (o.no_negative_modes) c.scenario.system.cavity.include_negative_modes = false;
    if (!o.time_kind.empty()) {
        TimeAxis& t = c.scenario.time;
        if (o.time_kind == "coordinate") {
            t.kind = TimeKind::coordinate;
            t.reference_detector = 0;
        } else if (o.time_kind.rfind("proper", 0) == 0) {
            t.kind = TimeKind::proper;
            const std::string rest = o.time_kind.substr(6);
            if (rest.empty()) {
                t.reference_detector = 0;
            } else if (rest == ":0" || rest == ":1") {
                t.reference_detector = rest == ":0" ? 0 : 1;
            } else {
                throw ConfigError("--time-kind: expected coordinate, proper, proper:0 or proper:1");
            }
        } else {
            throw ConfigError("--time-kind: expected coordinate, proper, proper:0 or proper:1");
        }
    }
    if (!o.out_path.empty()) c.output_path = o.out_path;

    if (const char* env = std::getenv("UDW_SIM_WORKERS"); env && *env) {
        const std::string s(env);
        std::size_t n = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
        if (ec != std::errc() || ptr != s.data() + s.size() || n == 0) {
            throw ConfigError("UDW_SIM_WORKERS: expected a positive integer, got '" + s + "'");
        }
        c.workers = n;
    }
    if (o.workers) {
        if (*o.workers == 0) throw ConfigError("--workers: must be positive");
        c.workers = *o.workers;
    }
    validate_run_config(c);
    return c;
}

std::size_t resolve_workers(std::size_t w) {
    if (w > 0) return w;
    return std::max<unsigned>(std::thread::hardware_concurrency(), 1u);
}

// Opens the data sink up front so an unwritable path fails before any work.
class Sink {
public:
    Sink(const std::string& path, const std::string& key, std::ostream& fallback) : path_(path), out_(&fallback) {
        if (path.empty()) return;
        file_.open(path, std::ios::binary | std::ios::trunc);
        if (!file_) throw ConfigError(key + ": cannot open '" + path + "' for writing");
        out_ = &file_;
    }

    std::ostream& stream() { return *out_; }

    void close() {
        out_->flush();
        if (file_.is_open()) {
            file_.close();
            if (file_.fail()) throw Error("failed writing '" + path_ + "'");
        }
    }

private:
    std::string path_;
    std::ofstream file_;
    std::ostream* out_;
};

int cmd_list(std::ostream& out) {
    for (const auto& s : catalog()) out << s.name << '\t' << s.description << '\n';
    return kExitOk;
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
    const RunConfig c = load_config(o, "");
    if (o.dump_config) {
        out << render_config(c);
        return kExitOk;
    }
    const double value = o.value.value_or(c.scenario.sweep.values().front());
    Sink sink(c.output_path, "output.path", out);
    err << "run " << c.scenario.name << ": " << (c.scenario.sweep.parameter.empty() ? "value" : c.scenario.sweep.parameter)
        << " = " << format_double(value) << ", " << c.scenario.time.samples << " samples\n";
    const auto records = run_point(c.scenario, value, c.integrator, c.discord);
    write_records_csv(sink.stream(), records);
    sink.close();
    err << "run " << c.scenario.name << ": " << records.size() << " records\n";
    return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    const RunConfig c = load_config(o, "");
    if (o.dump_config) {
        out << render_config(c);
        return kExitOk;
    }
    Sink sink(c.output_path, "output.path", out);
    const std::size_t workers = resolve_workers(c.workers);
    const std::string tag = "sweep " + c.scenario.name;
    err << tag << ": " << c.scenario.sweep.points << " points x " << c.scenario.time.samples << " samples, " << workers
        << " worker(s)\n";
    const auto progress = [&](std::size_t done, std::size_t total, double v, const SweepFailure* f) {
        err << tag << ": [" << done << '/' << total << "] " << c.scenario.sweep.parameter << " = " << format_double(v)
            << (f ? " FAILED: " + f->message : std::string(" ok")) << '\n';
    };
    const auto result = run_sweep(c.scenario, c.integrator, workers, c.discord, progress);
    write_records_csv(sink.stream(), result.records);
    sink.close();

    bool numerical = false;
    for (const auto& f : result.failures) numerical = numerical || f.numerical;
    err << tag << ": " << result.records.size() << " records, " << result.failures.size() << " failed point(s)\n";
    for (const auto& f : result.failures) {
        err << "  " << c.scenario.sweep.parameter << " = " << format_double(f.sweep_value) << ": " << f.message << '\n';
    }
    if (result.failures.empty()) return kExitOk;
    return numerical ? kExitNumerical : kExitConfig;
}

int cmd_causality(const Options& o, std::ostream& out, std::ostream& err) {
    const RunConfig c = load_config(o, "fig9");
    const auto counts = parse_counts("--modes", o.modes);
    if (!(o.threshold > 0.0)) throw ConfigError("--threshold: must be positive");
    if (o.samples < 2) throw ConfigError("--samples: must be at least 2");

    CausalitySetup setup = causality_setup_for(c.scenario.system);
    const double r = c.scenario.system.detectors[setup.source].squeezing;
    if (r != 0.0) setup.squeezing = r;
    setup.samples = o.samples;

    Sink sink(c.output_path, "output.path", out);
    std::optional<Sink> trace_sink;
    if (!o.trace_path.empty()) trace_sink.emplace(o.trace_path, "--trace", out);

    std::vector<CausalityReport> reports;
    for (std::size_t n : counts) {
        err << "causality-check: " << n << " modes\n";
        reports.push_back(causality_run(setup, n, o.threshold, c.integrator));
        const auto& rep = reports.back();
        err << "causality-check: " << n << " modes: max pre-contact |dp| = " << format_double(rep.max_pre_deviation)
            << (rep.causal(o.threshold) ? " (causal)" : " (acausal)") << ", first post-contact crossing "
            << (rep.first_post_crossing ? format_double(*rep.first_post_crossing) : std::string("none")) << '\n';
    }
    write_causality_csv(sink.stream(), reports);
    sink.close();
    if (trace_sink) {
        write_causality_trace_csv(trace_sink->stream(), reports);
        trace_sink->close();
    }
    return kExitOk;
}

int cmd_convergence(const Options& o, std::ostream& out, std::ostream& err) {
    const RunConfig c = load_config(o, "");
    const auto counts = parse_counts("--modes", o.modes);
    if (!(o.tolerance > 0.0)) throw ConfigError("--tolerance: must be positive");
    if (!(o.threshold > 0.0)) throw ConfigError("--threshold: must be positive");
    for (std::size_t i = 1; i < counts.size(); ++i) {
        if (counts[i] <= counts[i - 1]) throw ConfigError("--modes: counts must be strictly increasing");
    }
    Sink sink(c.output_path, "output.path", out);
    err << "convergence-check " << c.scenario.name << ": modes " << o.modes << '\n';
    const auto result = convergence_check(c.scenario, counts, o.tolerance, c.integrator, o.threshold, o.value);
    auto& s = sink.stream();
    s << "modes,max_difference,causal\n";
    for (const auto& cmp : result.comparisons) {
        s << cmp.modes << ',' << format_double(cmp.max_difference) << ',' << (cmp.causal ? "true" : "false") << '\n';
    }
    sink.close();
    if (result.converged) {
        err << "convergence-check " << c.scenario.name << ": converged at " << result.modes << " modes\n";
    } else {
        err << "convergence-check " << c.scenario.name << ": not converged for any tested mode count\n";
    }
    return kExitOk;
}

void add_common(CLI::App* cmd, Options& o, bool with_workers) {
    cmd->add_option("--config", o.config_path, "JSON run configuration");
    cmd->add_option("--scenario", o.scenario, "catalog scenario");
    cmd->add_option("--out", o.out_path, "output CSV (default: output.path, else standard output)");
    if (with_workers) cmd->add_option("--workers", o.workers, "worker threads (UDW_SIM_WORKERS overrides the config)");
    cmd->add_flag("--paper-literal-discord", o.paper_literal, "evaluate discord with the published expression");
    cmd->add_flag("--no-negative-modes", o.no_negative_modes, "periodic cavity: use n = 1..N only");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Two harmonic-oscillator detectors in a 1-D cavity: Gaussian-state evolution and correlations",
                 "udw_sim"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list-scenarios", "print the scenario catalog");

    auto* run = app.add_subcommand("run", "one sweep point over the time grid");
    add_common(run, o, false);
    run->add_option("--value", o.value, "sweep value (default: sweep minimum)");
    run->add_option("--time-kind", o.time_kind, "coordinate | proper | proper:<detector>");
    run->add_flag("--dump-config", o.dump_config, "print the resolved config and exit");

    auto* sweep = app.add_subcommand("sweep", "full sweep grid");
    add_common(sweep, o, true);
    sweep->add_option("--time-kind", o.time_kind, "coordinate | proper | proper:<detector>");
    sweep->add_flag("--dump-config", o.dump_config, "print the resolved config and exit");

    auto* caus = app.add_subcommand("causality-check", "vacuum vs squeezed-source signalling test");
    add_common(caus, o, false);
    o.modes = "7,10";
    caus->add_option("--modes", o.modes, "comma-separated mode counts")->capture_default_str();
    caus->add_option("--threshold", o.threshold, "pre-contact deviation bound")->capture_default_str();
    caus->add_option("--samples", o.samples, "time samples over [0, 2 t_c]")->capture_default_str();
    caus->add_option("--trace", o.trace_path, "write the p(t) traces to this CSV");

    auto* conv = app.add_subcommand("convergence-check", "smallest adequate mode count");
    add_common(conv, o, false);
    conv->add_option("--modes", o.modes, "strictly increasing comma-separated mode counts")->required();
    conv->add_option("--tolerance", o.tolerance, "final-sample measure tolerance")->capture_default_str();
    conv->add_option("--threshold", o.threshold, "causality pre-contact bound")->capture_default_str();
    conv->add_option("--value", o.value, "sweep value (default: sweep minimum)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (list->parsed()) return cmd_list(out);
        if (run->parsed()) return cmd_run(o, out, err);
        if (sweep->parsed()) return cmd_sweep(o, out, err);
        if (caus->parsed()) return cmd_causality(o, out, err);
        if (conv->parsed()) return cmd_convergence(o, out, err);
    } catch (const NumericalError& e) {
        err << "udw_sim: numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "udw_sim: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}

}  // namespace udw
