#pragma once

// JSON run configuration. The schema is strict: unknown keys, wrong types and
// physically invalid values are rejected with a ConfigError whose message
// starts with the offending key, e.g. "detectors[0].frequency: must be positive".
//
//   {
//     "scenario": "fig1a",                        // catalog defaults; omit for an inline system
//     "name", "description", "measures": [...],   // scenario metadata
//     "cavity":     {"length", "boundary", "modes", "negative_modes"},
//     "detectors":  [{"frequency", "squeezing",
//                     "worldline": {"type", "acceleration", "position", "direction"},
//                     "coupling":  {"type", "lambda0", "tau0", "width"}}],
//     "field":      {"initial", "temperature"},
//     "integrator": {"method", "step", "tolerance", "relative_tolerance", "absolute_tolerance", "min_step"},
//     "sweep":      {"param", "min", "max", "points"},
//     "time":       {"kind", "detector", "max", "samples"},
//     "output":     {"path"},
//     "workers": 0,
//     "options":    {"paper_literal_discord"}
//   }
//
// Detector entries are merged onto the scenario's detectors by index.

#include <cstddef>
#include <string>

#include "udw/correlations.hpp"
#include "udw/evolution.hpp"
#include "udw/scenario.hpp"

namespace udw {

struct RunConfig {
    /// Catalog entry the config started from; empty for an inline system.
    std::string base;
    /// Resolved scenario: catalog entry with every override applied.
    Scenario scenario;
    IntegratorConfig integrator;
    std::string output_path;
    /// 0 selects the hardware concurrency.
    std::size_t workers = 0;
    DiscordFormula discord = DiscordFormula::corrected;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_config(const std::string& text);

/// Complete JSON document; parse_config(render_config(c)) == c.
std::string render_config(const RunConfig& config);

/// Config for a catalog scenario with no overrides.
RunConfig default_config(const std::string& scenario);

/// Checks sweep and time axes against the system: both sweep ends must give a
/// valid system whose detectors stay inside the cavity over the time axis.
void validate_run_config(const RunConfig& config);

}  // namespace udw
