#include "udw/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "udw/error.hpp"

namespace udw {

namespace {

void apply_delta_rows(RowMatrix& m) {
    for (Eigen::Index i = 0; i + 1 < m.rows(); i += 2) {
        m.row(i).swap(m.row(i + 1));
        m.row(i + 1) *= -1.0;
    }
}

void check_config(const IntegratorConfig& config, Eigen::Index dim) {
    if (dim <= 0 || dim % 2 != 0) throw DimensionError("generator dimension must be a positive even number");
    if (!(config.step > 0.0) || !std::isfinite(config.step)) throw DomainError("integrator step must be positive");
    if (!(config.drift_tolerance > 0.0)) throw DomainError("drift tolerance must be positive");
    for (std::size_t i = 0; i < config.sample_times.size(); ++i) {
        const double t = config.sample_times[i];
        if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("sample times must be finite and nonnegative");
        if (i > 0 && t < config.sample_times[i - 1]) throw DomainError("sample times must be nondecreasing");
    }
    if (config.method == IntegrationMethod::adaptive_rk45) {
        if (!(config.relative_tolerance > 0.0) || !(config.absolute_tolerance > 0.0) || !(config.min_step > 0.0)) {
            throw DomainError("adaptive tolerances and minimum step must be positive");
        }
    }
}

class Rk4Stepper {
public:
    explicit Rk4Stepper(Eigen::Index n) : k1_(n, n), k2_(n, n), k3_(n, n), k4_(n, n), tmp_(n, n) {}

    void step(Generator& g, double t, double h, const RowMatrix& s, RowMatrix& out) {
        g.apply(t, s, k1_);
        tmp_ = s + (0.5 * h) * k1_;
        g.apply(t + 0.5 * h, tmp_, k2_);
        tmp_ = s + (0.5 * h) * k2_;
        g.apply(t + 0.5 * h, tmp_, k3_);
        tmp_ = s + h * k3_;
        g.apply(t + h, tmp_, k4_);
        out = s + (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }

private:
    RowMatrix k1_, k2_, k3_, k4_, tmp_;
};

// Dormand-Prince 5(4).
class Dp45Stepper {
public:
    explicit Dp45Stepper(Eigen::Index n) : tmp_(n, n), err_(n, n) {
        for (auto& k : k_) k.resize(n, n);
    }

    /// Advances s by h into out; returns the 4th/5th order difference in err().
    void step(Generator& g, double t, double h, const RowMatrix& s, RowMatrix& out) {
        static constexpr double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
        static constexpr double a[7][6] = {
            {},
            {1.0 / 5},
            {3.0 / 40, 9.0 / 40},
            {44.0 / 45, -56.0 / 15, 32.0 / 9},
            {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
            {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
            {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
        };
        static constexpr double e[7] = {71.0 / 57600,      0.0,         -71.0 / 16695, 71.0 / 1920,
                                        -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
        g.apply(t, s, k_[0]);
        for (int i = 1; i < 7; ++i) {
            tmp_ = s;
            for (int j = 0; j < i; ++j) {
                if (a[i][j] != 0.0) tmp_ += (h * a[i][j]) * k_[j];
            }
            g.apply(t + c[i] * h, tmp_, k_[i]);
        }
        out = tmp_;  // stage 7 argument is the 5th order solution (FSAL)
        err_.setZero();
        for (int i = 0; i < 7; ++i) {
            if (e[i] != 0.0) err_ += (h * e[i]) * k_[i];
        }
    }

    const RowMatrix& err() const { return err_; }

private:
    RowMatrix k_[7];
    RowMatrix tmp_, err_;
};

void record(EvolutionTrace& trace, double t, const RowMatrix& s, double tolerance) {
    Matrix dense = s;
    const double residual = symplectic_residual(dense);
    if (!(residual <= tolerance)) {
        std::ostringstream os;
        os << "symplecticity drift " << residual << " exceeds tolerance " << tolerance << " at t = " << t;
        throw DriftError(t, residual, os.str());
    }
    trace.times.push_back(t);
    trace.propagators.emplace_back(std::move(dense));
    trace.residuals.push_back(residual);
}

EvolutionTrace integrate_rk4(Generator& g, const IntegratorConfig& config) {
    const Eigen::Index n = g.dimension();
    const double h = config.step;
    const double snap = 1e-9 * h;
    Rk4Stepper stepper(n);
    RowMatrix s = RowMatrix::Identity(n, n);
    RowMatrix next(n, n);
    RowMatrix branch(n, n);
    long long k = 0;

    EvolutionTrace trace;
    for (double ts : config.sample_times) {
        while (static_cast<double>(k + 1) * h <= ts + snap) {
            stepper.step(g, static_cast<double>(k) * h, h, s, next);
            s.swap(next);
            ++k;
        }
        const double tk = static_cast<double>(k) * h;
        if (ts - tk > snap) {
            stepper.step(g, tk, ts - tk, s, branch);
            record(trace, ts, branch, config.drift_tolerance);
        } else {
            record(trace, ts, s, config.drift_tolerance);
        }
    }
    return trace;
}

EvolutionTrace integrate_adaptive(Generator& g, const IntegratorConfig& config) {
    const Eigen::Index n = g.dimension();
    Dp45Stepper stepper(n);
    RowMatrix s = RowMatrix::Identity(n, n);
    RowMatrix next(n, n);
    RowMatrix branch(n, n);
    double t = 0.0;
    double h = config.step;

    EvolutionTrace trace;
    std::size_t next_sample = 0;
    const auto& samples = config.sample_times;
    for (; next_sample < samples.size() && samples[next_sample] <= t; ++next_sample) {
        record(trace, t, s, config.drift_tolerance);
    }

    while (next_sample < samples.size()) {
        if (h < config.min_step) {
            std::ostringstream os;
            os << "adaptive step underflow at t = " << t << " (h = " << h << ")";
            throw StepUnderflowError(os.str());
        }
        stepper.step(g, t, h, s, next);
        const auto scale = (config.absolute_tolerance +
                            config.relative_tolerance * s.cwiseAbs().cwiseMax(next.cwiseAbs()).array())
                               .eval();
        const double err = (stepper.err().cwiseAbs().array() / scale).maxCoeff();
        if (!std::isfinite(err) || err > 1.0) {
            const double factor = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h *= factor;
            continue;
        }
        const double t_new = t + h;
        // Samples inside (t, t_new] branch from the accepted start point.
        while (next_sample < samples.size() && samples[next_sample] <= t_new) {
            const double dt = samples[next_sample] - t;
            if (dt > 0.0) {
                stepper.step(g, t, dt, s, branch);
                record(trace, samples[next_sample], branch, config.drift_tolerance);
            } else {
                record(trace, samples[next_sample], s, config.drift_tolerance);
            }
            ++next_sample;
        }
        s.swap(next);
        t = t_new;
        const double factor = err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
        h *= factor;
    }
    return trace;
}

}  // namespace

double EvolutionTrace::max_residual() const {
    double m = 0.0;
    for (double r : residuals) m = std::max(m, r);
    return m;
}

SystemGenerator::SystemGenerator(SystemSpec system) : assembler_(std::move(system)) {}

void SystemGenerator::apply(double t, const RowMatrix& s, RowMatrix& out) {
    assembler_.terms(t, terms_);
    out = terms_.diagonal.asDiagonal() * s;
    for (const auto& c : terms_.couplings) {
        out.row(c.row) += c.value * s.row(c.col);
        out.row(c.col) += c.value * s.row(c.row);
    }
    apply_delta_rows(out);
}

DenseGenerator::DenseGenerator(Eigen::Index dimension, std::function<Matrix(double)> f_sys)
    : dim_(dimension), f_(std::move(f_sys)) {}

void DenseGenerator::apply(double t, const RowMatrix& s, RowMatrix& out) {
    const Matrix f = f_(t);
    if (f.rows() != dim_ || f.cols() != dim_) throw DimensionError("generator matrix has the wrong size");
    out = f * s;
    apply_delta_rows(out);
}

EvolutionTrace integrate(Generator& generator, const IntegratorConfig& config) {
    check_config(config, generator.dimension());
    if (config.method == IntegrationMethod::adaptive_rk45) return integrate_adaptive(generator, config);
    return integrate_rk4(generator, config);
}

EvolutionTrace integrate_s(const SystemSpec& system, const IntegratorConfig& config) {
    SystemGenerator generator(system);
    return integrate(generator, config);
}

SymplecticMatrix matrix_exponential_oracle(const Matrix& f_sys, double t) {
    if (f_sys.rows() != f_sys.cols() || f_sys.rows() % 2 != 0 || f_sys.rows() == 0) {
        throw DimensionError("generator must be a nonempty even-dimensional square matrix");
    }
    Matrix g = f_sys * t;
    apply_symplectic_form(g);
    return SymplecticMatrix(g.exp());
}

std::vector<std::pair<double, CovarianceMatrix>> evolve_covariance(const EvolutionTrace& trace,
                                                                   const CovarianceMatrix& sigma0,
                                                                   double drift_tolerance) {
    std::vector<std::pair<double, CovarianceMatrix>> out;
    out.reserve(trace.times.size());
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        out.emplace_back(trace.times[i], propagate_cov(trace.propagators[i], sigma0, drift_tolerance));
    }
    return out;
}

}  // namespace udw
