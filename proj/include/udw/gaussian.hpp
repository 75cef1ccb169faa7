#pragma once

// Zero-mean Gaussian states of bosonic modes in the quadrature basis
// X = (q_1, p_1, ..., q_K, p_K) with a = (q + i p)/sqrt(2), so the vacuum
// covariance is the identity.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace udw {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Roundoff window below 1 in which symplectic eigenvalues are snapped to 1.
inline constexpr double kSymplecticClampWindow = 1e-6;
/// Relative tolerance used when pairing the +nu/-nu eigenvalues of i*Delta*sigma.
inline constexpr double kPairingTolerance = 1e-8;
inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kDefaultDriftTolerance = 1e-6;

enum class SubsystemKind { detector, field_mode };

/// Names one mode of the detector-field system. Detectors occupy the first
/// quadrature pairs, field modes follow.
struct PhaseSpaceIndex {
    SubsystemKind kind = SubsystemKind::detector;
    std::size_t ordinal = 0;

    static PhaseSpaceIndex detector(std::size_t j) { return {SubsystemKind::detector, j}; }
    static PhaseSpaceIndex field_mode(std::size_t n) { return {SubsystemKind::field_mode, n}; }

    /// Mode slot (q at 2*slot, p at 2*slot+1) given the number of detectors.
    std::size_t slot(std::size_t detector_count) const {
        return kind == SubsystemKind::detector ? ordinal : detector_count + ordinal;
    }

    friend bool operator==(const PhaseSpaceIndex&, const PhaseSpaceIndex&) = default;
};

class SymplecticForm {
public:
    explicit SymplecticForm(std::size_t modes);

    std::size_t modes() const noexcept { return modes_; }
    const Matrix& matrix() const noexcept { return delta_; }

private:
    std::size_t modes_;
    Matrix delta_;
};

/// Real symmetric 2K x 2K second-moment matrix. Construction checks shape and
/// symmetry; physicality is checked by symplectic_eigenvalues.
class CovarianceMatrix {
public:
    explicit CovarianceMatrix(Matrix sigma);

    std::size_t modes() const noexcept { return static_cast<std::size_t>(sigma_.rows() / 2); }
    const Matrix& matrix() const noexcept { return sigma_; }

    /// 2x2 block coupling mode slots i and j.
    Eigen::Matrix2d block(std::size_t i, std::size_t j) const {
        return sigma_.block<2, 2>(2 * static_cast<Eigen::Index>(i), 2 * static_cast<Eigen::Index>(j));
    }

private:
    Matrix sigma_;
};

/// Phase-space propagator S with X(t) = S X(0).
class SymplecticMatrix {
public:
    explicit SymplecticMatrix(Matrix s);

    std::size_t modes() const noexcept { return static_cast<std::size_t>(s_.rows() / 2); }
    const Matrix& matrix() const noexcept { return s_; }

    /// Infinity norm (max absolute row sum) of S Delta S^T - Delta.
    double drift() const;

private:
    Matrix s_;
};

SymplecticForm symplectic_form(std::size_t modes);

/// ||S Delta S^T - Delta||_inf for any square even-dimensional S.
double symplectic_residual(const Matrix& s);

CovarianceMatrix make_vacuum_cov(std::size_t modes);
CovarianceMatrix make_thermal_cov(std::span<const double> frequencies, double temperature);
CovarianceMatrix make_squeezed_cov(double r);

/// Occupation-weighted variance coth(omega / 2T) of a thermal mode; 1 at T = 0.
double thermal_variance(double frequency, double temperature);

/// Symplectic spectrum, ascending. Throws DegeneracyError when the +/- pairs
/// fail to match and UnphysicalStateError for nu < 1 - kSymplecticClampWindow.
std::vector<double> symplectic_eigenvalues(const CovarianceMatrix& sigma);

/// Entropy (bits) of one mode with symplectic eigenvalue x.
double entropy_kernel(double x);

double vn_entropy(const CovarianceMatrix& sigma);

CovarianceMatrix reduce(const CovarianceMatrix& sigma, std::span<const PhaseSpaceIndex> subsystems,
                        std::size_t detector_count);

/// Submatrix on raw mode slots, order preserved.
CovarianceMatrix reduce_slots(const CovarianceMatrix& sigma, std::span<const std::size_t> slots);

/// S sigma0 S^T, symmetrized. Throws DriftError if S is not symplectic within tolerance.
CovarianceMatrix propagate_cov(const SymplecticMatrix& s, const CovarianceMatrix& sigma0,
                               double drift_tolerance = kDefaultDriftTolerance);

/// Gaussian purity 1/sqrt(det sigma) evaluated through the log-determinant.
double purity(const CovarianceMatrix& sigma);

/// Applies Delta from the left in place: rows (q_i, p_i) -> (p_i, -q_i).
void apply_symplectic_form(Matrix& m);

}  // namespace udw
