#pragma once

// Scenario catalog, parameter sweeps, CSV persistence and the causality /
// mode-convergence harnesses.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "udw/correlations.hpp"
#include "udw/evolution.hpp"
#include "udw/model.hpp"

namespace udw {

enum class TimeKind { coordinate, proper };

struct TimeAxis {
    TimeKind kind = TimeKind::proper;
    /// Detector whose clock defines the axis when kind == proper.
    std::size_t reference_detector = 0;
    double max = 3.0;
    std::size_t samples = 60;

    /// Axis values 0 .. max, evenly spaced (a single sample sits at max).
    std::vector<double> values() const;
    /// "coordinate" or "proper:<j>".
    std::string label() const;

    friend bool operator==(const TimeAxis&, const TimeAxis&) = default;
};

struct SweepAxis {
    /// See apply_sweep for the accepted paths.
    std::string parameter;
    double min = 0.0;
    double max = 0.0;
    std::size_t points = 1;

    std::vector<double> values() const;

    friend bool operator==(const SweepAxis&, const SweepAxis&) = default;
};

enum class Measure { e_n, mi, d12, d21, p_excite };

std::string to_string(Measure m);

struct Scenario {
    std::string name;
    std::string description;
    SystemSpec system;
    SweepAxis sweep;
    TimeAxis time;
    std::vector<Measure> measures;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Built-in scenarios with the published parameters.
std::vector<Scenario> catalog();
std::optional<Scenario> find_scenario(const std::string& name);

/// Returns a copy of `system` with one parameter set. Paths:
///   detectors[j|*].worldline.{acceleration,position}
///   detectors[j|*].{frequency,squeezing}
///   detectors[j|*].coupling.{lambda0,tau0,width}
///   field.temperature            (switches the field to a thermal state)
///   cavity.modes | cavity.length
///   coupling.difference          (lambda0_1 - lambda0_2 at fixed lambda0_1 + lambda0_2)
/// An empty path leaves the system unchanged.
SystemSpec apply_sweep(const SystemSpec& system, const std::string& parameter, double value);

/// Throws ConfigError when the path is not one apply_sweep understands.
void validate_sweep_parameter(const std::string& parameter);

struct CorrelationRecord {
    std::string scenario;
    std::string sweep_param;
    double sweep_value = 0.0;
    std::string time_kind;
    double time_value = 0.0;
    double e_n = 0.0;
    double mi = 0.0;
    double d12 = 0.0;
    double d21 = 0.0;
    /// Gaussian purity 1/sqrt(det sigma) of the global state.
    double purity = 1.0;
    /// Symplecticity residual of the propagator at this sample.
    double drift = 0.0;
};

struct SweepFailure {
    double sweep_value = 0.0;
    std::string message;
    bool numerical = false;
};

struct SweepResult {
    std::vector<CorrelationRecord> records;
    std::vector<SweepFailure> failures;
};

struct MeasureSample {
    double time_value = 0.0;
    double coordinate_time = 0.0;
    TwoModeBlocks detectors;
    double purity = 1.0;
    double drift = 0.0;
};

/// Coordinate times at which a scenario point is sampled.
std::vector<double> sample_coordinate_times(const SystemSpec& system, const TimeAxis& axis);

/// Integrates one sweep point and returns the detector blocks at every time sample.
std::vector<MeasureSample> simulate_point(const Scenario& scenario, double sweep_value,
                                          const IntegratorConfig& integrator);

std::vector<CorrelationRecord> run_point(const Scenario& scenario, double sweep_value,
                                         const IntegratorConfig& integrator,
                                         DiscordFormula discord = DiscordFormula::corrected);

/// Called once per finished sweep point; calls are serialized across workers.
/// `failure` is null when the point succeeded.
using SweepProgress =
    std::function<void(std::size_t finished, std::size_t total, double value, const SweepFailure* failure)>;

/// Runs every sweep point on a pool of `workers` threads. Records are ordered
/// by (sweep value, time); a failing point is reported and the rest continue.
SweepResult run_sweep(const Scenario& scenario, const IntegratorConfig& integrator, std::size_t workers,
                      DiscordFormula discord = DiscordFormula::corrected, const SweepProgress& progress = {});

inline constexpr const char* kRecordCsvHeader =
    "scenario,sweep_param,sweep_value,time_kind,time_value,e_n,mi,d12,d21,purity,drift";

void write_records_csv(std::ostream& out, std::span<const CorrelationRecord> records);

/// Shortest round-trip decimal form, independent of locale.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Causality harness

struct CausalitySetup {
    /// Two stationary detectors. Detector `source` is squeezed in the signalling run.
    SystemSpec system;
    std::size_t probe = 0;
    std::size_t source = 1;
    double squeezing = 5.0;
    /// Integration horizon in units of t_c.
    double horizon = 2.0;
    std::size_t samples = 401;
    /// Pre-contact window is t < pre_contact_fraction * t_c.
    double pre_contact_fraction = 0.95;
};

/// Detectors at L/4 and 3L/4 of the fig9 cavity, constant coupling 0.05, r = 5.
CausalitySetup fig9_causality_setup();

/// Same cavity, frequencies and couplings as `system`, with the detectors
/// made stationary at L/4 and 3L/4.
CausalitySetup causality_setup_for(const SystemSpec& system);

/// Light travel time between the two detectors along the shorter path.
double causal_contact_time(const SystemSpec& system, std::size_t a = 0, std::size_t b = 1);

struct CausalityTracePoint {
    double t = 0.0;
    double p_vacuum = 0.0;
    double p_squeezed = 0.0;
};

struct CausalityReport {
    std::size_t modes = 0;
    double t_c = 0.0;
    double max_pre_deviation = 0.0;
    std::optional<double> first_post_crossing;
    double max_post_deviation = 0.0;
    std::vector<CausalityTracePoint> trace;

    bool causal(double threshold) const { return max_pre_deviation < threshold; }
};

CausalityReport causality_run(const CausalitySetup& setup, std::size_t modes, double threshold,
                              const IntegratorConfig& integrator);

std::vector<CausalityReport> causality_check(const CausalitySetup& setup, std::span<const std::size_t> mode_counts,
                                             double threshold, const IntegratorConfig& integrator);

inline constexpr const char* kCausalityCsvHeader = "modes,t_c,max_pre_deviation,first_post_crossing";
inline constexpr const char* kCausalityTraceCsvHeader = "modes,t,t_over_tc,p_vacuum,p_squeezed";

void write_causality_csv(std::ostream& out, std::span<const CausalityReport> reports);
void write_causality_trace_csv(std::ostream& out, std::span<const CausalityReport> reports);

// ---------------------------------------------------------------------------
// Mode-count convergence

struct ModeComparison {
    std::size_t modes = 0;
    /// Largest |difference| of E_N, MI, D12, D21 at the final sample versus the largest count.
    double max_difference = 0.0;
    bool causal = false;
};

struct ConvergenceResult {
    bool converged = false;
    std::size_t modes = 0;
    std::vector<ModeComparison> comparisons;
};

ConvergenceResult convergence_check(const Scenario& scenario, std::span<const std::size_t> mode_counts,
                                    double tolerance, const IntegratorConfig& integrator,
                                    double causality_threshold = 1e-5,
                                    std::optional<double> sweep_value = std::nullopt);

}  // namespace udw
