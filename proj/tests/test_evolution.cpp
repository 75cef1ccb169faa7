#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support.hpp"
#include "udw/error.hpp"
#include "udw/evolution.hpp"

using namespace udw;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

// Taylor series with scaling and squaring, written independently of Eigen's.
Matrix taylor_exp(const Matrix& a) {
    int squarings = 0;
    double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm > 0.1) norm *= 0.5, ++squarings;
    const Matrix b = a / std::ldexp(1.0, squarings);
    Matrix term = Matrix::Identity(a.rows(), a.cols());
    Matrix sum = term;
    for (int k = 1; k < 30; ++k) {
        term = term * b / k;
        sum += term;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

Matrix delta_f(const Matrix& f, double t) { return testing::delta_matrix(f.rows() / 2) * f * t; }

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

SystemSpec constant_coupling_system(std::size_t modes) {
    SystemSpec s;
    s.cavity = CavitySpec{4.0 * kPi, Boundary::periodic, modes, true};
    DetectorSpec a;
    a.worldline = Worldline::stationary(1.0);
    a.coupling = SwitchingFunction::constant(0.05);
    DetectorSpec b = a;
    b.worldline = Worldline::stationary(7.0);
    s.detectors = {a, b};
    return s;
}

IntegratorConfig samples(std::vector<double> t, double h = 1e-3) {
    IntegratorConfig c;
    c.step = h;
    c.sample_times = std::move(t);
    return c;
}

}  // namespace

TEST_SUITE("evolution") {

TEST_CASE("zero generator leaves the identity") {
    DenseGenerator g(4, [](double) { return Matrix(Matrix::Zero(4, 4)); });
    const auto trace = integrate(g, samples({0.0, 0.5, 2.0}));
    REQUIRE(trace.propagators.size() == 3);
    for (const auto& s : trace.propagators) CHECK(s.matrix() == Matrix::Identity(4, 4));
}

TEST_CASE("free oscillator rotates phase space") {
    // F = I, omega = 1: S(t) = exp(Delta t), which is Delta itself at t = pi/2.
    DenseGenerator g(2, [](double) { return Matrix(Matrix::Identity(2, 2)); });
    const auto trace = integrate(g, samples({kPi / 2.0, kPi}));
    CHECK(max_abs(trace.propagators[0].matrix() - testing::delta_matrix(1)) < 1e-10);
    CHECK(max_abs(trace.propagators[1].matrix() + Matrix::Identity(2, 2)) < 1e-10);
}

TEST_CASE("matrix exponential oracle") {
    const Matrix id = Matrix::Identity(2, 2);
    CHECK(max_abs(matrix_exponential_oracle(id, 0.0).matrix() - id) == 0.0);
    CHECK(max_abs(matrix_exponential_oracle(id, kPi).matrix() + id) < 1e-12);
    CHECK(max_abs(matrix_exponential_oracle(id, kPi / 2).matrix() - testing::delta_matrix(1)) < 1e-12);

    const auto sys = constant_coupling_system(5);
    const Matrix f = assemble_f_sys(0.0, sys);
    for (double t : {1.0, 2.0, 5.0}) {
        const auto s = matrix_exponential_oracle(f, t);
        CHECK(s.drift() < 1e-10);
        CHECK(max_abs(s.matrix() - taylor_exp(delta_f(f, t))) < 1e-11);
    }
    CHECK_THROWS_AS(matrix_exponential_oracle(Matrix::Identity(3, 3), 1.0), DimensionError);
}

TEST_CASE("rk4 matches the exponential for a time-independent system") {
    const auto sys = constant_coupling_system(5);
    const Matrix f = assemble_f_sys(0.0, sys);
    const auto trace = integrate_s(sys, samples({1.0, 2.0, 5.0}));
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const Matrix ref = taylor_exp(delta_f(f, trace.times[i]));
        CHECK(max_abs(trace.propagators[i].matrix() - ref) < 1e-6);
        CHECK(trace.residuals[i] < 1e-9);
    }
}

TEST_CASE("sparse and dense generators agree") {
    auto sys = constant_coupling_system(4);
    sys.detectors[0].coupling = SwitchingFunction::gaussian(0.3, 1.0, 0.5);
    sys.detectors[1].worldline = Worldline::accelerated(0.3, 6.0, -1);
    DenseGenerator dense(sys.mode_slots() * 2, [&](double t) { return assemble_f_sys(t, sys); });
    const auto cfg = samples({0.7, 1.9}, 1e-2);
    const auto a = integrate_s(sys, cfg);
    const auto b = integrate(dense, cfg);
    for (std::size_t i = 0; i < 2; ++i) CHECK(max_abs(a.propagators[i].matrix() - b.propagators[i].matrix()) < 1e-13);
}

TEST_CASE("fourth-order convergence in the step") {
    auto sys = constant_coupling_system(4);
    sys.detectors[0].coupling = SwitchingFunction::gaussian(0.5, 1.0, 0.3);
    sys.detectors[1].worldline = Worldline::accelerated(0.5, 6.0);
    const double t = 2.0;
    const Matrix ref = integrate_s(sys, samples({t}, 1.25e-3)).propagators[0].matrix();
    const double e1 = max_abs(integrate_s(sys, samples({t}, 0.04)).propagators[0].matrix() - ref);
    const double e2 = max_abs(integrate_s(sys, samples({t}, 0.02)).propagators[0].matrix() - ref);
    const double e3 = max_abs(integrate_s(sys, samples({t}, 0.01)).propagators[0].matrix() - ref);
    CHECK(e1 / e2 > 12.0);
    CHECK(e2 / e3 > 12.0);
    CHECK(e1 / e2 < 20.0);
}

TEST_CASE("samples do not perturb the grid") {
    auto sys = constant_coupling_system(4);
    sys.detectors[0].coupling = SwitchingFunction::gaussian(0.2, 1.0, 0.5);
    const auto sparse = integrate_s(sys, samples({0.33333, 2.5}, 0.01));
    const auto dense = integrate_s(sys, samples({0.1, 0.2, 0.33333, 0.5, 1.234, 2.5}, 0.01));
    CHECK(sparse.propagators[0].matrix() == dense.propagators[2].matrix());
    CHECK(sparse.propagators[1].matrix() == dense.propagators[5].matrix());

    // Repeated sample times are allowed and identical.
    const auto rep = integrate_s(sys, samples({0.5, 0.5}, 0.01));
    CHECK(rep.propagators[0].matrix() == rep.propagators[1].matrix());
}

TEST_CASE("adaptive method agrees with rk4") {
    auto sys = constant_coupling_system(4);
    sys.detectors[0].coupling = SwitchingFunction::gaussian(0.3, 1.0, 0.5);
    auto cfg = samples({0.0, 0.4, 1.0, 3.0}, 1e-3);
    const auto fixed = integrate_s(sys, cfg);
    cfg.method = IntegrationMethod::adaptive_rk45;
    cfg.step = 0.05;
    const auto adaptive = integrate_s(sys, cfg);
    REQUIRE(adaptive.times.size() == 4);
    CHECK(adaptive.propagators[0].matrix() == Matrix::Identity(12, 12));
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(adaptive.times[i] == fixed.times[i]);
        CHECK(max_abs(adaptive.propagators[i].matrix() - fixed.propagators[i].matrix()) < 1e-8);
    }
}

TEST_CASE("adaptive step underflow") {
    auto sys = constant_coupling_system(2);
    auto cfg = samples({1.0}, 1e-3);
    cfg.method = IntegrationMethod::adaptive_rk45;
    cfg.min_step = 1e-3;
    cfg.relative_tolerance = 1e-16;
    cfg.absolute_tolerance = 1e-300;
    CHECK_THROWS_AS(integrate_s(sys, cfg), StepUnderflowError);
}

TEST_CASE("drift tolerance is enforced") {
    DenseGenerator g(2, [](double) { return Matrix(Matrix::Identity(2, 2)); });
    auto cfg = samples({5.0}, 0.5);
    cfg.drift_tolerance = 1e-9;
    try {
        integrate(g, cfg);
        FAIL("expected DriftError");
    } catch (const DriftError& e) {
        CHECK(e.time() == 5.0);
        CHECK(e.residual() > 1e-9);
    }
}

TEST_CASE("configuration checks") {
    DenseGenerator g(2, [](double) { return Matrix(Matrix::Identity(2, 2)); });
    CHECK_THROWS_AS(integrate(g, samples({1.0, 0.5})), DomainError);
    CHECK_THROWS_AS(integrate(g, samples({-1.0})), DomainError);
    CHECK_THROWS_AS(integrate(g, samples({1.0}, 0.0)), DomainError);
    CHECK_THROWS_AS(integrate(g, samples({std::nan("")})), DomainError);
    DenseGenerator odd(3, [](double) { return Matrix(Matrix::Identity(3, 3)); });
    CHECK_THROWS_AS(integrate(odd, samples({1.0})), DimensionError);
    DenseGenerator wrong(2, [](double) { return Matrix(Matrix::Identity(4, 4)); });
    CHECK_THROWS_AS(integrate(wrong, samples({1.0})), DimensionError);
    CHECK(integrate(g, samples({})).times.empty());
}

TEST_CASE("covariance evolution") {
    auto free = constant_coupling_system(3);
    for (auto& d : free.detectors) d.coupling.lambda0 = 0.0;
    const auto trace = integrate_s(free, samples({0.5, 3.0}));
    for (const auto& [t, sigma] : evolve_covariance(trace, initial_state(free))) {
        CHECK(max_abs(sigma.matrix() - Matrix::Identity(10, 10)) < 1e-12);
    }

    // A thermal field is stationary under free evolution.
    free.field = FieldInitial::thermal(0.8);
    const auto sigma0 = initial_state(free);
    for (const auto& [t, sigma] : evolve_covariance(trace, sigma0)) {
        CHECK(max_abs(sigma.matrix() - sigma0.matrix()) < 1e-9);
    }

    // Coupled evolution of a pure state stays pure.
    const auto coupled = constant_coupling_system(3);
    const auto ct = integrate_s(coupled, samples({1.0, 4.0}));
    for (const auto& [t, sigma] : evolve_covariance(ct, initial_state(coupled))) {
        CHECK(purity(sigma) == Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("random constant generators") {
    testing::Rng rng(2024);
    for (int i = 0; i < 10; ++i) {
        const Matrix f = testing::random_symmetric(rng, 6, 1.0);
        DenseGenerator g(6, [&](double) { return f; });
        const auto trace = integrate(g, samples({0.7, 2.0}, 1e-3));
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(max_abs(trace.propagators[k].matrix() - taylor_exp(delta_f(f, trace.times[k]))) < 1e-9);
        }
    }
}

}
