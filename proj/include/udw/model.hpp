#pragma once

// Harmonic-oscillator detectors coupled to a massless scalar field in a 1-D
// cavity. Everything here is expressed in global coordinate time t; each
// detector's proper time tau_j(t) enters through its redshift factor.

#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "udw/gaussian.hpp"

namespace udw {

enum class Boundary { reflecting, periodic };

struct CavitySpec {
    double length = 4.0 * std::numbers::pi;
    Boundary boundary = Boundary::periodic;
    std::size_t mode_count = 40;
    /// Periodic cavities only: use n = 1, -1, 2, -2, ... (left and right movers)
    /// instead of n = 1..N.
    bool include_negative_modes = true;

    void validate() const;
    friend bool operator==(const CavitySpec&, const CavitySpec&) = default;
};

struct ModeSpec {
    int index = 1;
    double wave_vector = 0.0;
    double frequency = 0.0;
};

/// Field modes in phase-space order. With negative modes enabled the first N
/// entries of 1, -1, 2, -2, ... are taken, so an odd N keeps one extra right mover.
std::vector<ModeSpec> cavity_modes(const CavitySpec& cavity);

std::complex<double> mode_function(const ModeSpec& mode, double x, const CavitySpec& cavity);

struct WorldlinePoint {
    double position = 0.0;
    double proper_time = 0.0;
    double dtau_dt = 1.0;
};

/// Detector trajectory in the cavity rest frame. Uniform acceleration starts at
/// rest at `position` and moves in +x (direction = +1) or -x (direction = -1).
struct Worldline {
    enum class Kind { stationary, uniform_acceleration };

    Kind kind = Kind::stationary;
    double position = 0.0;
    double acceleration = 0.0;
    int direction = 1;

    static Worldline stationary(double x0) { return {Kind::stationary, x0, 0.0, 1}; }
    static Worldline accelerated(double a, double x0, int direction = 1) {
        return {Kind::uniform_acceleration, x0, a, direction};
    }

    double position_at(double t) const;
    double proper_time(double t) const;
    double dtau_dt(double t) const;
    /// Inverse of proper_time.
    double coordinate_time(double tau) const;
    WorldlinePoint eval(double t) const;

    friend bool operator==(const Worldline&, const Worldline&) = default;
};

/// Coupling profile lambda(tau) in the detector's own proper time.
struct SwitchingFunction {
    enum class Kind { gaussian, constant };

    Kind kind = Kind::gaussian;
    double lambda0 = 0.05;
    double tau0 = 1.5;
    /// epsilon in lambda0 * exp(-(tau - tau0)^2 / (2 epsilon)).
    double width = 1.0;

    static SwitchingFunction gaussian(double lambda0, double tau0, double width) {
        return {Kind::gaussian, lambda0, tau0, width};
    }
    static SwitchingFunction constant(double lambda0) { return {Kind::constant, lambda0, 0.0, 1.0}; }

    double operator()(double tau) const;

    friend bool operator==(const SwitchingFunction&, const SwitchingFunction&) = default;
};

struct DetectorSpec {
    double frequency = 1.5;
    Worldline worldline;
    SwitchingFunction coupling;
    /// Initial single-mode squeezing r of the detector (0 = ground state).
    double squeezing = 0.0;
    /// Optional per-mode multipliers of the coupling (empty = 1 for every mode).
    std::vector<double> mode_coupling_scale;

    friend bool operator==(const DetectorSpec&, const DetectorSpec&) = default;
};

struct FieldInitial {
    enum class Kind { vacuum, thermal };

    Kind kind = Kind::vacuum;
    double temperature = 0.0;

    static FieldInitial vacuum() { return {}; }
    static FieldInitial thermal(double t) { return {Kind::thermal, t}; }

    friend bool operator==(const FieldInitial&, const FieldInitial&) = default;
};

struct SystemSpec {
    CavitySpec cavity;
    std::vector<DetectorSpec> detectors;
    FieldInitial field;

    std::size_t detector_count() const noexcept { return detectors.size(); }
    /// Number of modes K = detectors + field modes.
    std::size_t mode_slots() const noexcept { return detectors.size() + cavity.mode_count; }

    /// Parameter checks that do not depend on the time span.
    void validate() const;
    /// Samples every worldline on [0, t_max] and throws DomainError if a detector leaves [0, L].
    void check_inside(double t_max, std::size_t samples = 512) const;

    friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

/// Unruh temperature a / 2 pi of a uniformly accelerated detector.
constexpr double unruh_temperature(double acceleration) { return acceleration / (2.0 * std::numbers::pi); }

/// Sparse content of F_sys(t) (H = X^T F_sys X / 2): its diagonal plus the
/// detector-field couplings, each stored once for the upper triangle.
struct HamiltonianTerms {
    struct Coupling {
        Eigen::Index row;
        Eigen::Index col;
        double value;
    };

    Vector diagonal;
    std::vector<Coupling> couplings;

    Matrix dense() const;
};

/// Precomputes the mode list once and evaluates F_sys(t) repeatedly.
class HamiltonianAssembler {
public:
    explicit HamiltonianAssembler(SystemSpec system);

    const SystemSpec& system() const noexcept { return system_; }
    const std::vector<ModeSpec>& modes() const noexcept { return modes_; }
    Eigen::Index dimension() const noexcept { return dim_; }

    void terms(double t, HamiltonianTerms& out) const;
    Matrix f_sys(double t) const;

private:
    SystemSpec system_;
    std::vector<ModeSpec> modes_;
    Eigen::Index dim_;
};

Matrix assemble_f_sys(double t, const SystemSpec& system);

CovarianceMatrix initial_state(const SystemSpec& system);

}  // namespace udw
