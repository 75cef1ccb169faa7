#pragma once

// Correlation measures between two detector modes, computed from the 4x4
// detector-detector covariance block
//
//     sigma_dd = [ sigma_1    gamma_12 ]
//                [ gamma_12^T sigma_2  ]
//
// All quantities are in bits.

#include <Eigen/Dense>

#include "udw/gaussian.hpp"

namespace udw {

/// Negative roundoff tolerated (and clamped to zero) on every reported measure.
inline constexpr double kMeasureClamp = 1e-9;
inline constexpr double kDiscriminantClamp = 1e-10;

class TwoModeBlocks {
public:
    explicit TwoModeBlocks(const Eigen::Matrix4d& sigma_dd);
    explicit TwoModeBlocks(const CovarianceMatrix& sigma_dd);

    static TwoModeBlocks assemble(const Eigen::Matrix2d& sigma_1, const Eigen::Matrix2d& sigma_2,
                                  const Eigen::Matrix2d& gamma_12);

    const Eigen::Matrix4d& matrix() const noexcept { return sigma_dd_; }
    Eigen::Matrix2d sigma_1() const { return sigma_dd_.topLeftCorner<2, 2>(); }
    Eigen::Matrix2d sigma_2() const { return sigma_dd_.bottomRightCorner<2, 2>(); }
    Eigen::Matrix2d gamma_12() const { return sigma_dd_.topRightCorner<2, 2>(); }

    /// Same state with the two detectors relabeled.
    TwoModeBlocks swapped() const;

private:
    Eigen::Matrix4d sigma_dd_;
};

struct SymplecticInvariants {
    double alpha = 0.0;  ///< det sigma_1
    double beta = 0.0;   ///< det sigma_2
    double gamma = 0.0;  ///< det gamma_12
    double delta = 0.0;  ///< det sigma_dd
    double delta_tilde = 0.0;  ///< alpha + beta - 2 gamma (partial transpose)
    double delta_plus = 0.0;   ///< alpha + beta + 2 gamma
};

SymplecticInvariants block_determinants(const TwoModeBlocks& blocks);

/// Smallest symplectic eigenvalue of the partially transposed state.
double partial_transpose_min_eigenvalue(const TwoModeBlocks& blocks);

double log_negativity(const TwoModeBlocks& blocks);

double mutual_information(const TwoModeBlocks& blocks);

/// D(1:2) conditions on a Gaussian measurement of detector 2; D(2:1) on detector 1.
enum class DiscordDirection { measure_second, measure_first };

/// `corrected` is the closed-form Gaussian discord with the minimal conditional
/// determinant of the cited literature. `paper_literal` evaluates the published
/// two-branch expression token for token; it is kept for comparison only and does
/// not vanish on mixed product states.
enum class DiscordFormula { corrected, paper_literal };

/// Minimal determinant of the conditional state of the unmeasured detector over
/// Gaussian measurements of the measured one (corrected formula).
double minimal_conditional_determinant(const SymplecticInvariants& inv);

/// Same value, with the symplectic spectrum of sigma_dd (ascending) supplied so
/// the square root stays accurate for nearly pure states.
double minimal_conditional_determinant(const SymplecticInvariants& inv, double nu_minus, double nu_plus);

double gaussian_discord(const TwoModeBlocks& blocks, DiscordDirection direction,
                        DiscordFormula formula = DiscordFormula::corrected);

/// Excitation probability of a single detector mode.
double excitation_probability(const Eigen::Matrix2d& sigma_d);

}  // namespace udw
