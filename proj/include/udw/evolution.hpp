#pragma once

// Integrates dS/dt = Delta F_sys(t) S with S(0) = I.
//
// The trajectory advances on a grid that does not depend on the requested
// sample times: every sample is reached by a separate partial step branching
// off the last grid point, so adding or removing samples never changes the
// values at the others.

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "udw/gaussian.hpp"
#include "udw/model.hpp"

namespace udw {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class IntegrationMethod { rk4, adaptive_rk45 };

struct IntegratorConfig {
    IntegrationMethod method = IntegrationMethod::rk4;
    /// Fixed step for RK4, initial step for the adaptive method.
    double step = 1e-3;
    double drift_tolerance = kDefaultDriftTolerance;
    std::vector<double> sample_times;
    // Adaptive method only.
    double relative_tolerance = 1e-10;
    double absolute_tolerance = 1e-12;
    double min_step = 1e-10;

    friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

struct EvolutionTrace {
    std::vector<double> times;
    std::vector<SymplecticMatrix> propagators;
    std::vector<double> residuals;

    double max_residual() const;
};

/// Right-hand side out = Delta F(t) s.
class Generator {
public:
    virtual ~Generator() = default;
    virtual Eigen::Index dimension() const = 0;
    virtual void apply(double t, const RowMatrix& s, RowMatrix& out) = 0;
};

/// Generator of a detector-field system, exploiting the sparsity of F_sys.
class SystemGenerator final : public Generator {
public:
    explicit SystemGenerator(SystemSpec system);

    Eigen::Index dimension() const override { return assembler_.dimension(); }
    void apply(double t, const RowMatrix& s, RowMatrix& out) override;

private:
    HamiltonianAssembler assembler_;
    HamiltonianTerms terms_;
};

/// Generator built from an arbitrary symmetric F(t), evaluated densely.
class DenseGenerator final : public Generator {
public:
    DenseGenerator(Eigen::Index dimension, std::function<Matrix(double)> f_sys);

    Eigen::Index dimension() const override { return dim_; }
    void apply(double t, const RowMatrix& s, RowMatrix& out) override;

private:
    Eigen::Index dim_;
    std::function<Matrix(double)> f_;
};

EvolutionTrace integrate(Generator& generator, const IntegratorConfig& config);

EvolutionTrace integrate_s(const SystemSpec& system, const IntegratorConfig& config);

/// exp(Delta F t) for a time-independent F (Pade scaling and squaring).
SymplecticMatrix matrix_exponential_oracle(const Matrix& f_sys, double t);

std::vector<std::pair<double, CovarianceMatrix>> evolve_covariance(const EvolutionTrace& trace,
                                                                   const CovarianceMatrix& sigma0,
                                                                   double drift_tolerance = kDefaultDriftTolerance);

}  // namespace udw
