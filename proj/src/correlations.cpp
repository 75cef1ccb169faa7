#include "udw/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "udw/error.hpp"

namespace udw {

namespace {

double clamp_measure(double value, const char* name) {
    if (!std::isfinite(value) || value < -kMeasureClamp) {
        std::ostringstream os;
        os << name << " evaluated to " << value << " (state is not physical)";
        throw UnphysicalStateError(os.str());
    }
    return std::max(0.0, value);
}

double clamp_discriminant(double disc, const char* name) {
    if (!(disc >= -kDiscriminantClamp)) {
        std::ostringstream os;
        os << name << " discriminant " << disc << " is negative beyond roundoff";
        throw UnphysicalStateError(os.str());
    }
    return std::max(0.0, disc);
}

// Entropy kernel of sqrt(squared), for arguments that are determinants.
double kernel_of_square(double squared) {
    if (!(squared >= 0.0)) {
        std::ostringstream os;
        os << "negative squared symplectic eigenvalue " << squared;
        throw UnphysicalStateError(os.str());
    }
    const double x = std::sqrt(squared);
    if (x < 1.0 - kSymplecticClampWindow) {
        std::ostringstream os;
        os << "symplectic eigenvalue " << x << " below 1";
        throw UnphysicalStateError(os.str());
    }
    return entropy_kernel(std::max(1.0, x));
}

// The homodyne-like branch of the minimal conditional determinant; also the
// limit used when the measured mode is pure.
double conditional_determinant_second_branch(const SymplecticInvariants& inv) {
    const double ab = inv.alpha * inv.beta;
    const double g2 = inv.gamma * inv.gamma;
    const double root_arg = g2 * g2 + (inv.delta - ab) * (inv.delta - ab) - 2.0 * g2 * (ab + inv.delta);
    return (ab - g2 + inv.delta - std::sqrt(std::max(0.0, root_arg))) / (2.0 * inv.beta);
}

constexpr double kPureMeasuredMode = 1e-12;

double literal_conditional_determinant(const SymplecticInvariants& inv) {
    const double a = inv.alpha;
    const double b = inv.beta;
    const double g = inv.gamma;
    const double d = inv.delta;
    const double lhs = (d - a * b) * (d - a * b);
    if (b - 1.0 > kPureMeasuredMode && lhs <= (b - 1.0) * (a + d) * g * g) {
        const double root_arg = g * g + (b - 1.0) * (b - a);
        return (2.0 * g * g + (b - 1.0) * (b - a) + 2.0 * std::abs(g) * std::sqrt(root_arg)) /
               ((b - 1.0) * (b - 1.0));
    }
    return conditional_determinant_second_branch(inv);
}

}  // namespace

TwoModeBlocks::TwoModeBlocks(const Eigen::Matrix4d& sigma_dd) : sigma_dd_(sigma_dd) {
    const double scale = std::max(1.0, sigma_dd_.cwiseAbs().maxCoeff());
    if (!((sigma_dd_ - sigma_dd_.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTolerance * scale)) {
        throw DomainError("detector-detector covariance block is not symmetric");
    }
}

TwoModeBlocks::TwoModeBlocks(const CovarianceMatrix& sigma_dd)
    : TwoModeBlocks([&] {
          if (sigma_dd.modes() != 2) throw DimensionError("two-mode blocks need a 4x4 covariance matrix");
          return Eigen::Matrix4d(sigma_dd.matrix());
      }()) {}

TwoModeBlocks TwoModeBlocks::assemble(const Eigen::Matrix2d& sigma_1, const Eigen::Matrix2d& sigma_2,
                                      const Eigen::Matrix2d& gamma_12) {
    Eigen::Matrix4d m;
    m << sigma_1, gamma_12, gamma_12.transpose(), sigma_2;
    return TwoModeBlocks(m);
}

TwoModeBlocks TwoModeBlocks::swapped() const {
    return assemble(sigma_2(), sigma_1(), gamma_12().transpose());
}

SymplecticInvariants block_determinants(const TwoModeBlocks& blocks) {
    SymplecticInvariants inv;
    inv.alpha = blocks.sigma_1().determinant();
    inv.beta = blocks.sigma_2().determinant();
    inv.gamma = blocks.gamma_12().determinant();
    inv.delta = blocks.matrix().determinant();
    inv.delta_tilde = inv.alpha + inv.beta - 2.0 * inv.gamma;
    inv.delta_plus = inv.alpha + inv.beta + 2.0 * inv.gamma;
    return inv;
}

double partial_transpose_min_eigenvalue(const TwoModeBlocks& blocks) {
    const auto inv = block_determinants(blocks);
    const double disc = clamp_discriminant(inv.delta_tilde * inv.delta_tilde - 4.0 * inv.delta, "partial transpose");
    const double squared = 0.5 * (inv.delta_tilde - std::sqrt(disc));
    if (!(squared > 0.0)) {
        std::ostringstream os;
        os << "partially transposed spectrum is degenerate (nu~^2 = " << squared << ")";
        throw UnphysicalStateError(os.str());
    }
    return std::sqrt(squared);
}

double log_negativity(const TwoModeBlocks& blocks) {
    return std::max(0.0, -std::log2(partial_transpose_min_eigenvalue(blocks)));
}

double mutual_information(const TwoModeBlocks& blocks) {
    const double s1 = vn_entropy(CovarianceMatrix(Matrix(blocks.sigma_1())));
    const double s2 = vn_entropy(CovarianceMatrix(Matrix(blocks.sigma_2())));
    const double s12 = vn_entropy(CovarianceMatrix(Matrix(blocks.matrix())));
    return clamp_measure(s1 + s2 - s12, "mutual information");
}

namespace {

// Branch choice with relative slack: on the boundary both expressions agree,
// and pure states sit exactly on it.
constexpr double kBranchSlack = 1e-10;

bool first_branch(const SymplecticInvariants& inv) {
    const double a = inv.alpha;
    const double b = inv.beta;
    const double g = inv.gamma;
    const double d = inv.delta;
    const double lhs = (d - a * b) * (d - a * b);
    const double rhs = (1.0 + b) * g * g * (a + d);
    return b - 1.0 > kPureMeasuredMode && lhs <= rhs + kBranchSlack * std::max(lhs, rhs);
}

// First branch as ((|gamma| + sqrt(root)) / (beta - 1))^2, where
// root = gamma^2 + (beta - 1)(delta - alpha).
double first_branch_value(const SymplecticInvariants& inv, double root) {
    const double x = (std::abs(inv.gamma) + std::sqrt(std::max(0.0, root))) / (inv.beta - 1.0);
    return x * x;
}

}  // namespace

double minimal_conditional_determinant(const SymplecticInvariants& inv) {
    if (first_branch(inv)) {
        return first_branch_value(inv, inv.gamma * inv.gamma + (inv.beta - 1.0) * (inv.delta - inv.alpha));
    }
    return conditional_determinant_second_branch(inv);
}

double minimal_conditional_determinant(const SymplecticInvariants& inv, double nu_minus, double nu_plus) {
    if (first_branch(inv)) {
        // With mu = nu^2 - 1 the root is a sum of nonnegative terms, so it does
        // not cancel to roundoff when the state is nearly pure.
        const double mu_m = nu_minus * nu_minus - 1.0;
        const double mu_p = nu_plus * nu_plus - 1.0;
        const double h = 0.5 * (inv.beta - inv.alpha + mu_m + mu_p);
        return first_branch_value(inv, h * h + (inv.beta - 1.0) * mu_m * mu_p);
    }
    return conditional_determinant_second_branch(inv);
}

double gaussian_discord(const TwoModeBlocks& blocks, DiscordDirection direction, DiscordFormula formula) {
    auto inv = block_determinants(blocks);
    if (direction == DiscordDirection::measure_first) std::swap(inv.alpha, inv.beta);

    // The joint term comes from the matrix spectrum rather than the roots of
    // lambda^2 - Delta+ lambda + delta: near pure states that discriminant
    // cancels to ~1e-15 and its square root would shift nu by ~1e-8.
    const auto nu = symplectic_eigenvalues(CovarianceMatrix(Matrix(blocks.matrix())));
    const double joint = entropy_kernel(nu[0]) + entropy_kernel(nu[1]);

    if (formula == DiscordFormula::paper_literal) {
        const double e = literal_conditional_determinant(inv);
        if (!std::isfinite(e) || e < 1.0 - kSymplecticClampWindow) {
            std::ostringstream os;
            os << "literal discord formula gives conditional determinant " << e << " < 1";
            throw UnphysicalStateError(os.str());
        }
        return kernel_of_square(inv.beta) - joint + kernel_of_square(e);
    }

    const double e = minimal_conditional_determinant(inv, nu[0], nu[1]);
    return clamp_measure(kernel_of_square(inv.beta) - joint + kernel_of_square(e), "discord");
}

double excitation_probability(const Eigen::Matrix2d& sigma_d) {
    const double arg = sigma_d.determinant() + sigma_d.trace() + 1.0;
    if (!(arg > 0.0)) {
        std::ostringstream os;
        os << "excitation probability undefined: det + tr + 1 = " << arg;
        throw UnphysicalStateError(os.str());
    }
    return 1.0 - 2.0 / std::sqrt(arg);
}

}  // namespace udw
