#include "udw/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "udw/error.hpp"

namespace udw {

namespace {

void require_even_square(const Matrix& m, const char* what) {
    if (m.rows() == 0 || m.rows() != m.cols() || m.rows() % 2 != 0) {
        std::ostringstream os;
        os << what << ": expected a nonempty even-dimensional square matrix, got " << m.rows() << "x"
           << m.cols();
        throw DimensionError(os.str());
    }
}

}  // namespace

SymplecticForm::SymplecticForm(std::size_t modes) : modes_(modes) {
    if (modes == 0) throw DimensionError("symplectic form needs at least one mode");
    const auto n = static_cast<Eigen::Index>(2 * modes);
    delta_ = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; i += 2) {
        delta_(i, i + 1) = 1.0;
        delta_(i + 1, i) = -1.0;
    }
}

SymplecticForm symplectic_form(std::size_t modes) { return SymplecticForm(modes); }

CovarianceMatrix::CovarianceMatrix(Matrix sigma) : sigma_(std::move(sigma)) {
    require_even_square(sigma_, "covariance matrix");
    const double scale = std::max(1.0, sigma_.cwiseAbs().maxCoeff());
    const double asym = (sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff();
    if (!std::isfinite(scale) || !(asym <= kSymmetryTolerance * scale)) {
        std::ostringstream os;
        os << "covariance matrix is not symmetric (max asymmetry " << asym << ")";
        throw DomainError(os.str());
    }
}

SymplecticMatrix::SymplecticMatrix(Matrix s) : s_(std::move(s)) {
    require_even_square(s_, "symplectic matrix");
}

double SymplecticMatrix::drift() const { return symplectic_residual(s_); }

void apply_symplectic_form(Matrix& m) {
    for (Eigen::Index i = 0; i + 1 < m.rows(); i += 2) {
        m.row(i).swap(m.row(i + 1));
        m.row(i + 1) *= -1.0;
    }
}

double symplectic_residual(const Matrix& s) {
    require_even_square(s, "symplectic residual");
    // S Delta S^T - Delta, with Delta applied structurally.
    Matrix st = s.transpose();
    apply_symplectic_form(st);
    Matrix r = s * st;
    const Eigen::Index n = r.rows();
    for (Eigen::Index i = 0; i < n; i += 2) {
        r(i, i + 1) -= 1.0;
        r(i + 1, i) += 1.0;
    }
    return r.cwiseAbs().rowwise().sum().maxCoeff();
}

double thermal_variance(double frequency, double temperature) {
    if (!(frequency > 0.0)) throw DomainError("thermal mode frequency must be positive");
    if (!(temperature >= 0.0)) throw DomainError("temperature must be nonnegative");
    if (temperature == 0.0) return 1.0;
    // (e^{w/T} + 1)/(e^{w/T} - 1) = coth(w / 2T)
    return 1.0 / std::tanh(frequency / (2.0 * temperature));
}

CovarianceMatrix make_vacuum_cov(std::size_t modes) {
    if (modes == 0) throw DimensionError("vacuum state needs at least one mode");
    const auto n = static_cast<Eigen::Index>(2 * modes);
    return CovarianceMatrix(Matrix::Identity(n, n));
}

CovarianceMatrix make_thermal_cov(std::span<const double> frequencies, double temperature) {
    if (frequencies.empty()) throw DimensionError("thermal state needs at least one mode");
    const auto n = static_cast<Eigen::Index>(2 * frequencies.size());
    Matrix sigma = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        const double v = thermal_variance(frequencies[i], temperature);
        const auto k = static_cast<Eigen::Index>(2 * i);
        sigma(k, k) = v;
        sigma(k + 1, k + 1) = v;
    }
    return CovarianceMatrix(std::move(sigma));
}

CovarianceMatrix make_squeezed_cov(double r) {
    Matrix sigma = Matrix::Zero(2, 2);
    sigma(0, 0) = std::exp(2.0 * r);
    sigma(1, 1) = std::exp(-2.0 * r);
    return CovarianceMatrix(std::move(sigma));
}

std::vector<double> symplectic_eigenvalues(const CovarianceMatrix& sigma) {
    const Matrix& m = sigma.matrix();
    const Eigen::Index n = m.rows();

    // i*Delta*sigma is similar to the Hermitian i*sqrt(sigma)*Delta*sqrt(sigma).
    // For the real antisymmetric A = sqrt(sigma) Delta sqrt(sigma) the spectrum of
    // A^T A is nu^2, each value twice.
    Eigen::SelfAdjointEigenSolver<Matrix> sig(m);
    if (sig.info() != Eigen::Success) throw DegeneracyError("covariance eigendecomposition failed");
    const double scale = std::max(1.0, sig.eigenvalues().cwiseAbs().maxCoeff());
    if (sig.eigenvalues().minCoeff() < -1e-12 * scale) {
        throw UnphysicalStateError("covariance matrix is not positive definite");
    }
    const Vector root = sig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix half = sig.eigenvectors() * root.asDiagonal() * sig.eigenvectors().transpose();

    Matrix a = half;
    apply_symplectic_form(a);  // Delta * sqrt(sigma)
    a = half * a;
    Eigen::SelfAdjointEigenSolver<Matrix> sq(a.transpose() * a, Eigen::EigenvaluesOnly);
    if (sq.info() != Eigen::Success) throw DegeneracyError("symplectic spectrum eigensolve failed");

    std::vector<double> moduli(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) moduli[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, sq.eigenvalues()(i)));
    std::sort(moduli.begin(), moduli.end());

    std::vector<double> nu;
    nu.reserve(moduli.size() / 2);
    for (std::size_t i = 0; i < moduli.size(); i += 2) {
        const double lo = moduli[i];
        const double hi = moduli[i + 1];
        if (hi - lo > kPairingTolerance * std::max(1.0, hi)) {
            std::ostringstream os;
            os << "symplectic eigenvalues do not pair: " << lo << " vs " << hi;
            throw DegeneracyError(os.str());
        }
        double v = 0.5 * (lo + hi);
        if (v < 1.0) {
            if (v < 1.0 - kSymplecticClampWindow) {
                std::ostringstream os;
                os << "unphysical state: symplectic eigenvalue " << v << " < 1";
                throw UnphysicalStateError(os.str());
            }
            v = 1.0;
        }
        nu.push_back(v);
    }
    return nu;
}

double entropy_kernel(double x) {
    if (!(x >= 1.0 - kSymplecticClampWindow)) {
        std::ostringstream os;
        os << "entropy kernel needs x >= 1, got " << x;
        throw DomainError(os.str());
    }
    if (x <= 1.0) return 0.0;
    const double up = 0.5 * (x + 1.0);
    const double down = 0.5 * (x - 1.0);
    return up * std::log2(up) - down * std::log2(down);
}

double vn_entropy(const CovarianceMatrix& sigma) {
    double s = 0.0;
    for (double nu : symplectic_eigenvalues(sigma)) s += entropy_kernel(nu);
    return s;
}

CovarianceMatrix reduce_slots(const CovarianceMatrix& sigma, std::span<const std::size_t> slots) {
    if (slots.empty()) throw IndexError("reduction needs at least one subsystem");
    std::set<std::size_t> seen;
    for (std::size_t s : slots) {
        if (s >= sigma.modes()) {
            std::ostringstream os;
            os << "mode slot " << s << " out of range (state has " << sigma.modes() << " modes)";
            throw IndexError(os.str());
        }
        if (!seen.insert(s).second) {
            std::ostringstream os;
            os << "mode slot " << s << " selected twice";
            throw IndexError(os.str());
        }
    }
    const auto k = static_cast<Eigen::Index>(slots.size());
    Matrix out(2 * k, 2 * k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            out.block<2, 2>(2 * i, 2 * j) = sigma.block(slots[static_cast<std::size_t>(i)], slots[static_cast<std::size_t>(j)]);
        }
    }
    return CovarianceMatrix(std::move(out));
}

CovarianceMatrix reduce(const CovarianceMatrix& sigma, std::span<const PhaseSpaceIndex> subsystems,
                        std::size_t detector_count) {
    std::vector<std::size_t> slots;
    slots.reserve(subsystems.size());
    for (const auto& idx : subsystems) {
        if (idx.kind == SubsystemKind::detector && idx.ordinal >= detector_count) {
            std::ostringstream os;
            os << "detector " << idx.ordinal << " out of range (" << detector_count << " detectors)";
            throw IndexError(os.str());
        }
        slots.push_back(idx.slot(detector_count));
    }
    return reduce_slots(sigma, slots);
}

CovarianceMatrix propagate_cov(const SymplecticMatrix& s, const CovarianceMatrix& sigma0,
                               double drift_tolerance) {
    if (s.modes() != sigma0.modes()) {
        std::ostringstream os;
        os << "propagator has " << s.modes() << " modes, state has " << sigma0.modes();
        throw DimensionError(os.str());
    }
    const double drift = s.drift();
    if (!(drift <= drift_tolerance)) {
        std::ostringstream os;
        os << "propagator symplecticity drift " << drift << " exceeds tolerance " << drift_tolerance;
        throw DriftError(std::nan(""), drift, os.str());
    }
    Matrix out = s.matrix() * sigma0.matrix() * s.matrix().transpose();
    Matrix sym = 0.5 * (out + out.transpose());
    return CovarianceMatrix(std::move(sym));
}

double purity(const CovarianceMatrix& sigma) {
    Eigen::LLT<Matrix> llt(sigma.matrix());
    if (llt.info() != Eigen::Success) throw UnphysicalStateError("covariance matrix is not positive definite");
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return std::exp(-0.5 * logdet);
}

}  // namespace udw
