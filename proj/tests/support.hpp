#pragma once

// Helpers shared by the unit, property and acceptance binaries: seeded random
// Gaussian states and an independent discord oracle that minimizes the
// conditional entropy over single-mode Gaussian measurements numerically.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "udw/correlations.hpp"
#include "udw/gaussian.hpp"

namespace udw::testing {

using Rng = std::mt19937_64;

inline Matrix delta_matrix(Eigen::Index modes) {
    Matrix d = Matrix::Zero(2 * modes, 2 * modes);
    for (Eigen::Index i = 0; i < modes; ++i) {
        d(2 * i, 2 * i + 1) = 1.0;
        d(2 * i + 1, 2 * i) = -1.0;
    }
    return d;
}

inline Matrix random_symmetric(Rng& rng, Eigen::Index n, double scale) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) m(i, j) = m(j, i) = g(rng);
    }
    return scale * m / std::max(1.0, m.operatorNorm());
}

/// exp(Delta M) for a random symmetric M with operator norm <= scale.
inline Matrix random_symplectic(Rng& rng, Eigen::Index modes, double scale) {
    const Matrix gen = delta_matrix(modes) * random_symmetric(rng, 2 * modes, scale);
    return gen.exp();
}

/// S diag(nu_1 I, ..., nu_K I) S^T with nu_k uniform in [1, nu_max]; nu_max = 1 gives a pure state.
inline Matrix random_state(Rng& rng, Eigen::Index modes, double scale, double nu_max) {
    std::uniform_real_distribution<double> u(1.0, std::max(1.0, nu_max));
    Vector d(2 * modes);
    for (Eigen::Index k = 0; k < modes; ++k) d(2 * k) = d(2 * k + 1) = nu_max > 1.0 ? u(rng) : 1.0;
    const Matrix s = random_symplectic(rng, modes, scale);
    Matrix sigma = s * d.asDiagonal() * s.transpose();
    return 0.5 * (sigma + sigma.transpose());
}

inline Eigen::Matrix4d random_two_mode_state(Rng& rng, double scale = 1.5, double nu_max = 3.0) {
    return random_state(rng, 2, scale, nu_max);
}

inline Eigen::Matrix4d random_product_state(Rng& rng, double scale = 1.5, double nu_max = 3.0) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m.topLeftCorner<2, 2>() = random_state(rng, 1, scale, nu_max);
    m.bottomRightCorner<2, 2>() = random_state(rng, 1, scale, nu_max);
    return m;
}

inline Eigen::Matrix4d two_mode_squeezed_vacuum(double r) {
    const double c = std::cosh(2.0 * r);
    const double s = std::sinh(2.0 * r);
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m.diagonal().setConstant(c);
    m(0, 2) = m(2, 0) = s;
    m(1, 3) = m(3, 1) = -s;
    return m;
}

/// Symplectic spectrum as the positive eigenvalues of the Hermitian matrix
/// i sigma^{1/2} Delta sigma^{1/2}.
inline std::vector<double> spectrum_by_eigensolver(const Matrix& sigma) {
    const Eigen::Index modes = sigma.rows() / 2;
    Eigen::SelfAdjointEigenSolver<Matrix> root(sigma);
    const Matrix half = root.operatorSqrt();
    const Eigen::MatrixXcd h = std::complex<double>(0.0, 1.0) * (half * delta_matrix(modes) * half).cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    std::vector<double> out;
    for (Eigen::Index i = modes; i < 2 * modes; ++i) out.push_back(std::max(1.0, es.eigenvalues()(i)));
    return out;
}

inline double kernel_bits(double x) {
    if (x <= 1.0) return 0.0;
    const double a = 0.5 * (x + 1.0);
    const double b = 0.5 * (x - 1.0);
    return a * std::log2(a) - b * std::log2(b);
}

/// Conditional determinant of A after a Gaussian measurement of B with seed
/// covariance sigma_0 = R(theta) diag(e^{-2r}, e^{2r}) R(theta)^T.
inline double conditional_det(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b, const Eigen::Matrix2d& c, double r,
                              double theta) {
    const Eigen::Matrix2d rot = Eigen::Rotation2Dd(theta).toRotationMatrix();
    const Eigen::Matrix2d seed = rot * Eigen::Vector2d(std::exp(-2.0 * r), std::exp(2.0 * r)).asDiagonal() * rot.transpose();
    const Eigen::Matrix2d eps = a - c * (b + seed).inverse() * c.transpose();
    return eps.determinant();
}

/// r -> infinity limit: ideal homodyne detection of quadrature (cos theta, sin theta).
inline double homodyne_det(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b, const Eigen::Matrix2d& c,
                           double theta) {
    const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
    const Eigen::Vector2d cu = c * u;
    const Eigen::Matrix2d eps = a - cu * cu.transpose() / (u.dot(b * u));
    return eps.determinant();
}

/// Pattern search on (r, theta) from the best point of a coarse grid. r is left
/// signed (r < 0 is the seed rotated by pi/2) so r = 0 is not a boundary, and
/// capped at |r| = 6 where (B + sigma_0)^{-1} is still accurate; larger
/// squeezing is covered by the exact homodyne limit.
inline double minimal_conditional_det_numeric(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b,
                                              const Eigen::Matrix2d& c) {
    constexpr double pi = std::numbers::pi;
    double best = std::numeric_limits<double>::infinity();
    double br = 0.0;
    double bt = 0.0;
    constexpr double r_cap = 6.0;
    for (int i = -24; i <= 24; ++i) {
        const double r = 0.25 * i;
        for (int j = 0; j < 72; ++j) {
            const double t = pi * j / 72.0;
            const double v = conditional_det(a, b, c, r, t);
            if (v < best) best = v, br = r, bt = t;
        }
    }
    double dr = 0.25;
    double dt = pi / 72.0;
    while (dr > 1e-12 || dt > 1e-12) {
        bool moved = false;
        const std::array<std::array<double, 2>, 8> moves = {
            {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
        for (const auto& m : moves) {
            const double r = std::clamp(br + m[0] * dr, -r_cap, r_cap);
            const double t = bt + m[1] * dt;
            const double v = conditional_det(a, b, c, r, t);
            if (v < best) {
                best = v, br = r, bt = t;
                moved = true;
            }
        }
        if (!moved) dr *= 0.5, dt *= 0.5;
    }
    // Homodyne limit, golden-section in theta after a grid scan.
    double hbest = std::numeric_limits<double>::infinity();
    double ht = 0.0;
    for (int j = 0; j < 360; ++j) {
        const double t = pi * j / 360.0;
        const double v = homodyne_det(a, b, c, t);
        if (v < hbest) hbest = v, ht = t;
    }
    double lo = ht - pi / 360.0;
    double hi = ht + pi / 360.0;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int k = 0; k < 200; ++k) {
        const double x1 = hi - g * (hi - lo);
        const double x2 = lo + g * (hi - lo);
        if (homodyne_det(a, b, c, x1) < homodyne_det(a, b, c, x2)) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    hbest = std::min(hbest, homodyne_det(a, b, c, 0.5 * (lo + hi)));
    return std::min(best, hbest);
}

/// Gaussian discord by direct minimization. `measure_second` conditions on detector 2.
inline double discord_by_minimization(const Eigen::Matrix4d& sigma, bool measure_second) {
    Eigen::Matrix2d a = sigma.topLeftCorner<2, 2>();
    Eigen::Matrix2d b = sigma.bottomRightCorner<2, 2>();
    Eigen::Matrix2d c = sigma.topRightCorner<2, 2>();
    if (!measure_second) {
        std::swap(a, b);
        c.transposeInPlace();
    }
    const auto nu = spectrum_by_eigensolver(sigma);
    const double e = minimal_conditional_det_numeric(a, b, c);
    return kernel_bits(std::sqrt(b.determinant())) - kernel_bits(nu[0]) - kernel_bits(nu[1]) +
           kernel_bits(std::sqrt(std::max(e, 1.0)));
}

}  // namespace udw::testing
