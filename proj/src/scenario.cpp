#include "udw/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "udw/error.hpp"

namespace udw {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v;
    if (n == 0) return v;
    if (n == 1) return {lo};
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        v.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    v.back() = hi;
    return v;
}

DetectorSpec make_detector(Worldline w, SwitchingFunction coupling) {
    DetectorSpec d;
    d.frequency = 1.5;
    d.worldline = w;
    d.coupling = coupling;
    return d;
}

SystemSpec base_system() {
    SystemSpec s;
    s.cavity = CavitySpec{4.0 * kPi, Boundary::periodic, 40, true};
    s.field = FieldInitial::vacuum();
    return s;
}

const SwitchingFunction kFigureSwitching = SwitchingFunction::gaussian(0.05, 1.5, 1.0);

// Target selection within a "detectors[...]" path.
struct DetectorPath {
    std::optional<std::size_t> index;  // nullopt = every detector
    std::string field;
};

std::optional<DetectorPath> parse_detector_path(const std::string& p) {
    const std::string head = "detectors[";
    if (p.rfind(head, 0) != 0) return std::nullopt;
    const auto close = p.find(']', head.size());
    if (close == std::string::npos || close + 1 >= p.size() || p[close + 1] != '.') return std::nullopt;
    const std::string sel = p.substr(head.size(), close - head.size());
    DetectorPath out;
    out.field = p.substr(close + 2);
    if (sel == "*") return out;
    std::size_t idx = 0;
    const auto [ptr, ec] = std::from_chars(sel.data(), sel.data() + sel.size(), idx);
    if (ec != std::errc() || ptr != sel.data() + sel.size() || sel.empty()) return std::nullopt;
    out.index = idx;
    return out;
}

bool known_detector_field(const std::string& f) {
    static const char* fields[] = {"worldline.acceleration", "worldline.position", "frequency", "squeezing",
                                   "coupling.lambda0",       "coupling.tau0",      "coupling.width"};
    return std::any_of(std::begin(fields), std::end(fields), [&](const char* k) { return f == k; });
}

void set_detector_field(DetectorSpec& d, const std::string& f, double v) {
    if (f == "worldline.acceleration") {
        d.worldline.acceleration = v;
    } else if (f == "worldline.position") {
        d.worldline.position = v;
    } else if (f == "frequency") {
        d.frequency = v;
    } else if (f == "squeezing") {
        d.squeezing = v;
    } else if (f == "coupling.lambda0") {
        d.coupling.lambda0 = v;
    } else if (f == "coupling.tau0") {
        d.coupling.tau0 = v;
    } else if (f == "coupling.width") {
        d.coupling.width = v;
    }
}

std::size_t to_mode_count(double v) {
    const double r = std::round(v);
    if (!(r >= 1.0) || std::abs(r - v) > 1e-9) throw DomainError("cavity.modes must be a positive integer");
    return static_cast<std::size_t>(r);
}

}  // namespace

std::vector<double> TimeAxis::values() const {
    if (samples == 1) return {max};
    return linspace(0.0, max, samples);
}

std::string TimeAxis::label() const {
    if (kind == TimeKind::coordinate) return "coordinate";
    return "proper:" + std::to_string(reference_detector);
}

std::vector<double> SweepAxis::values() const { return linspace(min, max, points); }

std::string to_string(Measure m) {
    switch (m) {
        case Measure::e_n: return "e_n";
        case Measure::mi: return "mi";
        case Measure::d12: return "d12";
        case Measure::d21: return "d21";
        case Measure::p_excite: return "p_excite";
    }
    return "?";
}

std::vector<Scenario> catalog() {
    const std::vector<Measure> correlations = {Measure::e_n, Measure::mi, Measure::d12, Measure::d21};
    std::vector<Scenario> out;

    {
        Scenario s;
        s.name = "fig1a";
        s.description = "equal accelerations, same direction, separation pi, vacuum field";
        s.system = base_system();
        s.system.detectors = {make_detector(Worldline::accelerated(0.1, 0.0, 1), kFigureSwitching),
                              make_detector(Worldline::accelerated(0.1, kPi, 1), kFigureSwitching)};
        s.sweep = {"detectors[*].worldline.acceleration", 0.1, 1.0, 40};
        s.time = {TimeKind::proper, 0, 3.0, 60};
        s.measures = correlations;
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "fig1b";
        s.description = "stationary detectors at pi and 2pi in a thermal field";
        s.system = base_system();
        s.system.detectors = {make_detector(Worldline::stationary(kPi), kFigureSwitching),
                              make_detector(Worldline::stationary(2.0 * kPi), kFigureSwitching)};
        s.system.field = FieldInitial::thermal(0.1);
        s.sweep = {"field.temperature", 0.1, 1.5, 40};
        s.time = {TimeKind::proper, 0, 3.0, 60};
        s.measures = correlations;
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "fig4";
        s.description = "equal accelerations in opposite directions from 2pi, vacuum field";
        s.system = base_system();
        const auto switching = SwitchingFunction::gaussian(0.05, 1.5, 0.5);
        s.system.detectors = {make_detector(Worldline::accelerated(0.1, 2.0 * kPi, 1), switching),
                              make_detector(Worldline::accelerated(0.1, 2.0 * kPi, -1), switching)};
        s.sweep = {"detectors[*].worldline.acceleration", 0.1, 0.8, 40};
        s.time = {TimeKind::proper, 0, 3.0, 60};
        s.measures = correlations;
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "fig5a";
        s.description = "coupling difference at fixed lambda1 + lambda2 = 0.1, accelerated pair a = 0.2";
        s.system = base_system();
        const auto switching = SwitchingFunction::constant(0.05);
        s.system.detectors = {make_detector(Worldline::accelerated(0.2, 0.0, 1), switching),
                              make_detector(Worldline::accelerated(0.2, kPi, 1), switching)};
        s.sweep = {"coupling.difference", 0.0, 0.09, 40};
        s.time = {TimeKind::proper, 0, 3.0, 60};
        s.measures = correlations;
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "fig5b";
        s.description = "coupling difference at fixed lambda1 + lambda2 = 0.1, stationary pair at T = 0.1";
        s.system = base_system();
        const auto switching = SwitchingFunction::constant(0.05);
        s.system.detectors = {make_detector(Worldline::stationary(kPi), switching),
                              make_detector(Worldline::stationary(2.0 * kPi), switching)};
        s.system.field = FieldInitial::thermal(0.1);
        s.sweep = {"coupling.difference", 0.0, 0.09, 40};
        s.time = {TimeKind::proper, 0, 3.0, 60};
        s.measures = correlations;
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "fig8";
        s.description = "Alice a = 0.1, Bob b >= 0.1, separation pi, Bob's proper time";
        s.system = base_system();
        s.system.detectors = {make_detector(Worldline::accelerated(0.1, 0.0, 1), kFigureSwitching),
                              make_detector(Worldline::accelerated(0.1, kPi, 1), kFigureSwitching)};
        s.sweep = {"detectors[1].worldline.acceleration", 0.1, 1.0, 40};
        s.time = {TimeKind::proper, 1, 3.0, 60};
        s.measures = correlations;
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "fig9";
        s.description = "causality check: stationary detectors at pi and 3pi, detector 2 squeezed r = 5";
        s.system = fig9_causality_setup().system;
        s.system.detectors[1].squeezing = 5.0;
        s.system.cavity.mode_count = 10;
        s.sweep = {"cavity.modes", 7.0, 10.0, 2};
        s.time = {TimeKind::coordinate, 0, 4.0 * kPi, 60};
        s.measures = {Measure::p_excite};
        out.push_back(s);
    }
    {
        Scenario s = out[5];
        s.name = "fig11";
        s.description = "Alice a = 0.1, Bob b >= 0.1, separation pi, coordinate time";
        s.time = {TimeKind::coordinate, 0, 10.0, 60};
        out.push_back(s);
    }
    return out;
}

std::optional<Scenario> find_scenario(const std::string& name) {
    for (auto& s : catalog()) {
        if (s.name == name) return s;
    }
    return std::nullopt;
}

void validate_sweep_parameter(const std::string& p) {
    if (p.empty()) return;
    if (p == "field.temperature" || p == "cavity.modes" || p == "cavity.length" || p == "coupling.difference") return;
    if (auto d = parse_detector_path(p); d && known_detector_field(d->field)) return;
    throw ConfigError("sweep.param: unknown parameter path '" + p + "'");
}

SystemSpec apply_sweep(const SystemSpec& system, const std::string& p, double value) {
    validate_sweep_parameter(p);
    SystemSpec s = system;
    if (p.empty()) return s;
    if (p == "field.temperature") {
        s.field = FieldInitial::thermal(value);
    } else if (p == "cavity.modes") {
        s.cavity.mode_count = to_mode_count(value);
        for (auto& d : s.detectors) d.mode_coupling_scale.clear();
    } else if (p == "cavity.length") {
        s.cavity.length = value;
    } else if (p == "coupling.difference") {
        if (s.detectors.size() != 2) throw DomainError("coupling.difference needs exactly two detectors");
        const double sum = s.detectors[0].coupling.lambda0 + s.detectors[1].coupling.lambda0;
        s.detectors[0].coupling.lambda0 = 0.5 * (sum + value);
        s.detectors[1].coupling.lambda0 = 0.5 * (sum - value);
    } else {
        const auto d = parse_detector_path(p);
        if (d->index) {
            if (*d->index >= s.detectors.size()) throw ConfigError("sweep.param: detector index out of range in '" + p + "'");
            set_detector_field(s.detectors[*d->index], d->field, value);
        } else {
            for (auto& det : s.detectors) {
                if (d->field == "worldline.acceleration" && det.worldline.kind != Worldline::Kind::uniform_acceleration) continue;
                set_detector_field(det, d->field, value);
            }
        }
    }
    return s;
}

std::vector<double> sample_coordinate_times(const SystemSpec& system, const TimeAxis& axis) {
    auto values = axis.values();
    if (axis.kind == TimeKind::coordinate) return values;
    if (axis.reference_detector >= system.detectors.size()) {
        throw DomainError("time axis reference detector out of range");
    }
    const auto& w = system.detectors[axis.reference_detector].worldline;
    for (double& v : values) v = w.coordinate_time(v);
    return values;
}

std::vector<MeasureSample> simulate_point(const Scenario& scenario, double sweep_value,
                                          const IntegratorConfig& integrator) {
    const SystemSpec system = apply_sweep(scenario.system, scenario.sweep.parameter, sweep_value);
    system.validate();
    if (system.detectors.size() != 2) throw DomainError("correlation measures need exactly two detectors");

    const auto axis_values = scenario.time.values();
    IntegratorConfig config = integrator;
    config.sample_times = sample_coordinate_times(system, scenario.time);
    system.check_inside(config.sample_times.empty() ? 0.0 : config.sample_times.back());

    const auto trace = integrate_s(system, config);
    const auto sigma0 = initial_state(system);

    std::vector<MeasureSample> out;
    out.reserve(trace.times.size());
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const auto sigma = propagate_cov(trace.propagators[i], sigma0, config.drift_tolerance);
        const Eigen::Matrix4d dd = sigma.matrix().topLeftCorner<4, 4>();
        out.push_back({axis_values[i], trace.times[i], TwoModeBlocks(dd), purity(sigma), trace.residuals[i]});
    }
    return out;
}

std::vector<CorrelationRecord> run_point(const Scenario& scenario, double sweep_value,
                                         const IntegratorConfig& integrator, DiscordFormula discord) {
    const auto samples = simulate_point(scenario, sweep_value, integrator);
    std::vector<CorrelationRecord> out;
    out.reserve(samples.size());
    const std::string kind = scenario.time.label();
    for (const auto& s : samples) {
        CorrelationRecord r;
        r.scenario = scenario.name;
        r.sweep_param = scenario.sweep.parameter;
        r.sweep_value = sweep_value;
        r.time_kind = kind;
        r.time_value = s.time_value;
        r.e_n = log_negativity(s.detectors);
        r.mi = mutual_information(s.detectors);
        r.d12 = gaussian_discord(s.detectors, DiscordDirection::measure_second, discord);
        r.d21 = gaussian_discord(s.detectors, DiscordDirection::measure_first, discord);
        r.purity = s.purity;
        r.drift = s.drift;
        out.push_back(std::move(r));
    }
    return out;
}

SweepResult run_sweep(const Scenario& scenario, const IntegratorConfig& integrator, std::size_t workers,
                      DiscordFormula discord, const SweepProgress& progress) {
    const auto values = scenario.sweep.values();
    struct Slot {
        std::vector<CorrelationRecord> records;
        std::optional<SweepFailure> failure;
    };
    std::vector<Slot> slots(values.size());
    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;
    std::size_t finished = 0;

    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < values.size(); i = next.fetch_add(1)) {
            try {
                slots[i].records = run_point(scenario, values[i], integrator, discord);
            } catch (const NumericalError& e) {
                slots[i].failure = SweepFailure{values[i], e.what(), true};
            } catch (const std::exception& e) {
                slots[i].failure = SweepFailure{values[i], e.what(), false};
            }
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(++finished, values.size(), values[i], slots[i].failure ? &*slots[i].failure : nullptr);
            }
        }
    };

    const std::size_t n_threads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(values.size(), 1));
    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(work);
    }

    // Sweep values are strictly increasing and each slot is time-ordered, so
    // concatenation in slot order is the (sweep value, time) order.
    SweepResult result;
    for (auto& slot : slots) {
        if (slot.failure) {
            result.failures.push_back(std::move(*slot.failure));
        } else {
            result.records.insert(result.records.end(), slot.records.begin(), slot.records.end());
        }
    }
    return result;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_records_csv(std::ostream& out, std::span<const CorrelationRecord> records) {
    out << kRecordCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.scenario << ',' << r.sweep_param << ',' << format_double(r.sweep_value) << ',' << r.time_kind << ','
            << format_double(r.time_value) << ',' << format_double(r.e_n) << ',' << format_double(r.mi) << ','
            << format_double(r.d12) << ',' << format_double(r.d21) << ',' << format_double(r.purity) << ','
            << format_double(r.drift) << '\n';
    }
}

// ---------------------------------------------------------------------------

CausalitySetup fig9_causality_setup() {
    CausalitySetup setup;
    setup.system = base_system();
    setup.system.cavity.mode_count = 10;
    const auto coupling = SwitchingFunction::constant(0.05);
    setup.system.detectors = {make_detector(Worldline::stationary(kPi), coupling),
                              make_detector(Worldline::stationary(3.0 * kPi), coupling)};
    return setup;
}

CausalitySetup causality_setup_for(const SystemSpec& system) {
    if (system.detectors.size() != 2) throw DomainError("causality harness needs exactly two detectors");
    CausalitySetup setup;
    setup.system = system;
    const double l = system.cavity.length;
    setup.system.detectors[0].worldline = Worldline::stationary(0.25 * l);
    setup.system.detectors[1].worldline = Worldline::stationary(0.75 * l);
    for (auto& d : setup.system.detectors) {
        d.squeezing = 0.0;
        d.mode_coupling_scale.clear();
    }
    return setup;
}

double causal_contact_time(const SystemSpec& system, std::size_t a, std::size_t b) {
    if (a >= system.detectors.size() || b >= system.detectors.size()) throw IndexError("detector index out of range");
    const auto& wa = system.detectors[a].worldline;
    const auto& wb = system.detectors[b].worldline;
    if (wa.kind != Worldline::Kind::stationary || wb.kind != Worldline::Kind::stationary) {
        throw DomainError("causal contact time is defined for stationary detectors");
    }
    double d = std::abs(wa.position - wb.position);
    if (system.cavity.boundary == Boundary::periodic) d = std::min(d, system.cavity.length - d);
    if (!(d > 0.0)) throw DomainError("detectors coincide: causal contact time is zero");
    return d;
}

CausalityReport causality_run(const CausalitySetup& setup, std::size_t modes, double threshold,
                              const IntegratorConfig& integrator) {
    SystemSpec system = setup.system;
    system.cavity.mode_count = modes;
    for (auto& d : system.detectors) {
        d.squeezing = 0.0;
        d.mode_coupling_scale.clear();
    }
    system.validate();
    if (setup.probe >= system.detectors.size() || setup.source >= system.detectors.size() || setup.probe == setup.source) {
        throw IndexError("causality probe/source detectors are invalid");
    }

    CausalityReport report;
    report.modes = modes;
    report.t_c = causal_contact_time(system, setup.probe, setup.source);

    IntegratorConfig config = integrator;
    config.sample_times.clear();
    for (std::size_t i = 0; i < setup.samples; ++i) {
        config.sample_times.push_back(setup.horizon * report.t_c * static_cast<double>(i) /
                                      static_cast<double>(std::max<std::size_t>(setup.samples - 1, 1)));
    }

    // The propagator does not depend on the initial state, so both runs share it.
    const auto trace = integrate_s(system, config);
    const auto sigma_vac = initial_state(system);
    SystemSpec squeezed = system;
    squeezed.detectors[setup.source].squeezing = setup.squeezing;
    const auto sigma_sq = initial_state(squeezed);

    const auto slot = setup.probe;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const Matrix& s = trace.propagators[i].matrix();
        const auto rows = s.middleRows(2 * static_cast<Eigen::Index>(slot), 2);
        const Eigen::Matrix2d vac = rows * sigma_vac.matrix() * rows.transpose();
        const Eigen::Matrix2d sq = rows * sigma_sq.matrix() * rows.transpose();
        const double p_vac = excitation_probability(0.5 * (vac + vac.transpose()));
        const double p_sq = excitation_probability(0.5 * (sq + sq.transpose()));
        const double t = trace.times[i];
        const double dev = std::abs(p_sq - p_vac);
        report.trace.push_back({t, p_vac, p_sq});
        if (t < setup.pre_contact_fraction * report.t_c) {
            report.max_pre_deviation = std::max(report.max_pre_deviation, dev);
        }
        if (t > report.t_c) {
            report.max_post_deviation = std::max(report.max_post_deviation, dev);
            if (!report.first_post_crossing && dev > threshold) report.first_post_crossing = t;
        }
    }
    return report;
}

std::vector<CausalityReport> causality_check(const CausalitySetup& setup, std::span<const std::size_t> mode_counts,
                                             double threshold, const IntegratorConfig& integrator) {
    std::vector<CausalityReport> out;
    out.reserve(mode_counts.size());
    for (std::size_t n : mode_counts) out.push_back(causality_run(setup, n, threshold, integrator));
    return out;
}

void write_causality_csv(std::ostream& out, std::span<const CausalityReport> reports) {
    out << kCausalityCsvHeader << '\n';
    for (const auto& r : reports) {
        out << r.modes << ',' << format_double(r.t_c) << ',' << format_double(r.max_pre_deviation) << ','
            << (r.first_post_crossing ? format_double(*r.first_post_crossing) : std::string("nan")) << '\n';
    }
}

void write_causality_trace_csv(std::ostream& out, std::span<const CausalityReport> reports) {
    out << kCausalityTraceCsvHeader << '\n';
    for (const auto& r : reports) {
        for (const auto& p : r.trace) {
            out << r.modes << ',' << format_double(p.t) << ',' << format_double(p.t / r.t_c) << ','
                << format_double(p.p_vacuum) << ',' << format_double(p.p_squeezed) << '\n';
        }
    }
}

ConvergenceResult convergence_check(const Scenario& scenario, std::span<const std::size_t> mode_counts,
                                    double tolerance, const IntegratorConfig& integrator, double causality_threshold,
                                    std::optional<double> sweep_value) {
    if (mode_counts.empty()) throw DomainError("convergence check needs at least one mode count");
    for (std::size_t i = 1; i < mode_counts.size(); ++i) {
        if (mode_counts[i] <= mode_counts[i - 1]) throw DomainError("mode counts must be strictly increasing");
    }
    const double value = sweep_value.value_or(scenario.sweep.values().front());
    const SystemSpec point = apply_sweep(scenario.system, scenario.sweep.parameter, value);

    auto final_measures = [&](std::size_t modes) {
        Scenario s = scenario;
        s.system = point;
        s.system.cavity.mode_count = modes;
        for (auto& d : s.system.detectors) d.mode_coupling_scale.clear();
        s.sweep = {"cavity.modes", static_cast<double>(modes), static_cast<double>(modes), 1};
        const auto records = run_point(s, static_cast<double>(modes), integrator);
        const auto& r = records.back();
        return std::array<double, 4>{r.e_n, r.mi, r.d12, r.d21};
    };

    std::vector<std::array<double, 4>> finals;
    finals.reserve(mode_counts.size());
    for (std::size_t n : mode_counts) finals.push_back(final_measures(n));

    const auto setup = causality_setup_for(point);
    ConvergenceResult result;
    for (std::size_t i = 0; i < mode_counts.size(); ++i) {
        ModeComparison c;
        c.modes = mode_counts[i];
        for (std::size_t k = 0; k < 4; ++k) {
            c.max_difference = std::max(c.max_difference, std::abs(finals[i][k] - finals.back()[k]));
        }
        c.causal = causality_run(setup, mode_counts[i], causality_threshold, integrator).causal(causality_threshold);
        result.comparisons.push_back(c);
        if (!result.converged && c.max_difference < tolerance && c.causal) {
            result.converged = true;
            result.modes = c.modes;
        }
    }
    return result;
}

}  // namespace udw
