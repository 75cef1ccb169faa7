#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "udw/error.hpp"
#include "udw/model.hpp"

using namespace udw;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

SystemSpec one_detector_reflecting(std::size_t modes) {
    SystemSpec s;
    s.cavity = CavitySpec{4.0 * kPi, Boundary::reflecting, modes, false};
    DetectorSpec d;
    d.frequency = 1.5;
    d.worldline = Worldline::stationary(kPi);
    d.coupling = SwitchingFunction::constant(0.05);
    s.detectors = {d};
    return s;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("cavity modes") {
    CavitySpec periodic;
    const auto modes = cavity_modes(periodic);
    REQUIRE(modes.size() == 40);
    CHECK(modes[0].index == 1);
    CHECK(modes[1].index == -1);
    CHECK(modes[2].index == 2);
    CHECK(modes[1].wave_vector == Approx(-0.5));
    CHECK(modes[1].frequency == Approx(0.5));
    // n = 3 resonates with the detector gap 3/2.
    CHECK(modes[4].index == 3);
    CHECK(modes[4].frequency == Approx(1.5).epsilon(1e-15));

    CavitySpec odd = periodic;
    odd.mode_count = 7;
    const auto m7 = cavity_modes(odd);
    REQUIRE(m7.size() == 7);
    CHECK(m7.back().index == 4);

    CavitySpec right_only = periodic;
    right_only.include_negative_modes = false;
    right_only.mode_count = 3;
    const auto r = cavity_modes(right_only);
    CHECK(r[2].index == 3);
    CHECK(r[2].frequency == Approx(1.5));

    CavitySpec reflecting{4.0 * kPi, Boundary::reflecting, 4, false};
    const auto rm = cavity_modes(reflecting);
    CHECK(rm[1].wave_vector == Approx(0.5));
    CHECK(rm[3].frequency == Approx(1.0));

    CavitySpec bad = reflecting;
    bad.include_negative_modes = true;
    CHECK_THROWS_AS(cavity_modes(bad), DomainError);
    bad = periodic;
    bad.mode_count = 0;
    CHECK_THROWS_AS(cavity_modes(bad), DomainError);
    bad = periodic;
    bad.length = -1.0;
    CHECK_THROWS_AS(cavity_modes(bad), DomainError);
}

TEST_CASE("mode functions") {
    CavitySpec reflecting{4.0 * kPi, Boundary::reflecting, 4, false};
    const auto rm = cavity_modes(reflecting);
    const auto v = mode_function(rm[1], kPi, reflecting);
    CHECK(v.real() == Approx(oracle::kReflectingModeN2AtPi).epsilon(1e-14));
    CHECK(v.imag() == 0.0);
    for (const auto& m : rm) CHECK(std::abs(mode_function(m, 0.0, reflecting)) == Approx(0.0).epsilon(1e-15));

    CavitySpec periodic;
    const auto pm = cavity_modes(periodic);
    for (double x : {0.0, 1.0, 7.5}) {
        const auto a = mode_function(pm[0], x, periodic);
        const auto b = mode_function(pm[1], x, periodic);
        CHECK(std::abs(a) == Approx(1.0 / std::sqrt(0.5 * 4.0 * kPi)));
        CHECK(std::abs(a - std::conj(b)) == Approx(0.0).epsilon(1e-15));
    }
    CHECK_THROWS_AS(mode_function(pm[0], -0.1, periodic), DomainError);
    CHECK_THROWS_AS(mode_function(pm[0], 4.0 * kPi + 0.1, periodic), DomainError);
    CHECK_NOTHROW(mode_function(pm[0], 4.0 * kPi, periodic));
}

TEST_CASE("worldlines") {
    const auto w = Worldline::accelerated(0.1, 2.0, 1);
    const double t = w.coordinate_time(1.5);
    CHECK(t == Approx(oracle::kWorldlineTime).epsilon(1e-14));
    CHECK(w.position_at(t) - 2.0 == Approx(oracle::kWorldlineDisplacement).epsilon(1e-13));
    CHECK(w.proper_time(t) == Approx(1.5).epsilon(1e-14));

    const auto back = Worldline::accelerated(0.1, 2.0, -1);
    CHECK(back.position_at(t) - 2.0 == Approx(-oracle::kWorldlineDisplacement).epsilon(1e-13));

    const auto w2 = Worldline::accelerated(0.2, 0.0);
    CHECK(1.0 / w2.dtau_dt(w2.coordinate_time(2.0)) == Approx(oracle::kCosh0_4).epsilon(1e-14));

    const auto s = Worldline::stationary(kPi);
    for (double tt : {0.0, 1.0, 10.0}) {
        const auto p = s.eval(tt);
        CHECK(p.position == kPi);
        CHECK(p.proper_time == tt);
        CHECK(p.dtau_dt == 1.0);
    }

    // Normalization: (dt/dtau)^2 - (dx/dtau)^2 = 1, by finite differences.
    for (double a : {0.1, 0.5, 1.0}) {
        const auto wa = Worldline::accelerated(a, 0.0);
        for (double tt : {0.3, 1.7, 4.0}) {
            const double h = 1e-5;
            const double v = (wa.position_at(tt + h) - wa.position_at(tt - h)) / (2 * h);
            const double g = 1.0 / wa.dtau_dt(tt);
            CHECK(g * g * (1.0 - v * v) == Approx(1.0).epsilon(1e-8));
        }
    }

    const auto zero = Worldline::accelerated(0.0, 1.0);
    CHECK(zero.position_at(5.0) == 1.0);
    CHECK(zero.proper_time(5.0) == 5.0);
    CHECK(zero.coordinate_time(5.0) == 5.0);
}

TEST_CASE("switching functions") {
    const auto g = SwitchingFunction::gaussian(0.05, 1.5, 1.0);
    CHECK(g(1.5) == 0.05);
    CHECK(g(2.5) == Approx(0.05 * std::exp(-0.5)));
    const auto narrow = SwitchingFunction::gaussian(0.05, 1.5, 0.5);
    CHECK(narrow(2.5) == Approx(0.05 * std::exp(-1.0)));
    const auto c = SwitchingFunction::constant(0.05);
    CHECK(c(0.0) == 0.05);
    CHECK(c(100.0) == 0.05);
}

TEST_CASE("unruh temperature") {
    static_assert(unruh_temperature(0.0) == 0.0);
    CHECK(unruh_temperature(2.0 * kPi) == Approx(1.0));
}

TEST_CASE("F_sys assembly") {
    const auto sys = one_detector_reflecting(4);
    const Matrix f = assemble_f_sys(0.7, sys);
    REQUIRE(f.rows() == 10);
    CHECK((f - f.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(f(0, 0) == 1.5);
    CHECK(f(1, 1) == 1.5);
    CHECK(f(2, 2) == Approx(0.25));
    // slot of field mode n = 2 is 2, so q_n sits at index 4
    CHECK(f(0, 4) == Approx(oracle::kCouplingEntryN2AtPi).epsilon(1e-14));
    for (Eigen::Index k = 3; k < 10; k += 2) CHECK(f(0, k) == 0.0);
    CHECK(f.row(1).segment(2, 8).isZero());

    auto free = sys;
    free.detectors[0].coupling.lambda0 = 0.0;
    const Matrix f0 = assemble_f_sys(0.7, free);
    Matrix diag = Matrix::Zero(10, 10);
    diag.diagonal() << 1.5, 1.5, 0.25, 0.25, 0.5, 0.5, 0.75, 0.75, 1.0, 1.0;
    CHECK((f0 - diag).cwiseAbs().maxCoeff() == Approx(0.0).epsilon(1e-15));

    // Periodic modes couple to both q_n and p_n.
    SystemSpec p = sys;
    p.cavity = CavitySpec{4.0 * kPi, Boundary::periodic, 2, true};
    p.detectors[0].worldline = Worldline::stationary(1.0);
    const Matrix fp = assemble_f_sys(0.0, p);
    const double norm = 2.0 * 0.05 / std::sqrt(0.5 * 4.0 * kPi);
    CHECK(fp(0, 2) == Approx(norm * std::cos(0.5)));
    CHECK(fp(0, 3) == Approx(-norm * std::sin(0.5)));
    CHECK(fp(0, 5) == Approx(norm * std::sin(0.5)));

    // Accelerated detector: redshifted gap and coupling.
    SystemSpec a = sys;
    a.detectors[0].worldline = Worldline::accelerated(0.5, 1.0);
    const double t = 2.0;
    const auto pt = a.detectors[0].worldline.eval(t);
    const Matrix fa = assemble_f_sys(t, a);
    CHECK(fa(0, 0) == Approx(1.5 * pt.dtau_dt));
    const double v = std::sin(0.5 * pt.position) / std::sqrt(0.5 * 4.0 * kPi);
    CHECK(fa(0, 4) == Approx(2.0 * 0.05 * pt.dtau_dt * v));

    a.detectors[0].worldline = Worldline::accelerated(5.0, 12.0);
    CHECK_THROWS_AS(assemble_f_sys(3.0, a), DomainError);
}

TEST_CASE("per-mode coupling scale") {
    auto sys = one_detector_reflecting(4);
    sys.detectors[0].mode_coupling_scale = {0.0, 1.0, 0.0, 0.0};
    const Matrix f = assemble_f_sys(0.0, sys);
    CHECK(f(0, 2) == 0.0);
    CHECK(f(0, 4) == Approx(oracle::kCouplingEntryN2AtPi));
    sys.detectors[0].mode_coupling_scale = {1.0};
    CHECK_THROWS_AS(sys.validate(), DomainError);
}

TEST_CASE("system validation") {
    auto sys = one_detector_reflecting(2);
    CHECK_NOTHROW(sys.validate());
    auto bad = sys;
    bad.detectors[0].frequency = -1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = sys;
    bad.detectors.clear();
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = sys;
    bad.detectors[0].worldline = Worldline::accelerated(-0.1, 1.0);
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = sys;
    bad.detectors[0].worldline = Worldline::accelerated(0.1, 1.0, 2);
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = sys;
    bad.detectors[0].coupling = SwitchingFunction::gaussian(0.05, 1.5, 0.0);
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = sys;
    bad.field = FieldInitial::thermal(-1.0);
    CHECK_THROWS_AS(bad.validate(), DomainError);

    auto moving = sys;
    moving.detectors[0].worldline = Worldline::accelerated(1.0, 11.0);
    CHECK_NOTHROW(moving.check_inside(1.0));
    CHECK_THROWS_AS(moving.check_inside(3.0), DomainError);
}

TEST_CASE("initial state") {
    SystemSpec s;
    s.cavity = CavitySpec{4.0 * kPi, Boundary::periodic, 3, true};
    DetectorSpec d;
    d.worldline = Worldline::stationary(1.0);
    s.detectors = {d, d};
    CHECK(initial_state(s).matrix() == Matrix::Identity(10, 10));

    // Reflecting cavity of length 2 pi: frequencies 0.5 and 1.0.
    SystemSpec t = s;
    t.cavity = CavitySpec{2.0 * kPi, Boundary::reflecting, 2, false};
    t.field = FieldInitial::thermal(0.1);
    const Matrix th = initial_state(t).matrix();
    REQUIRE(th.rows() == 8);
    CHECK(th.topLeftCorner<4, 4>() == Eigen::Matrix4d::Identity());
    CHECK(th(4, 4) == Approx(oracle::kCoth2_5).epsilon(1e-14));
    CHECK(th(5, 5) == Approx(oracle::kCoth2_5).epsilon(1e-14));
    CHECK(th(6, 6) == Approx(oracle::kCoth5).epsilon(1e-14));
    CHECK(th(4, 5) == 0.0);

    t.cavity.length = kPi;
    const Matrix th2 = initial_state(t).matrix();
    CHECK(th2(4, 4) == Approx(oracle::kCoth5).epsilon(1e-14));

    SystemSpec sq = s;
    sq.detectors[1].squeezing = 5.0;
    const Matrix m = initial_state(sq).matrix();
    CHECK(m(2, 2) == Approx(std::exp(10.0)));
    CHECK(m(3, 3) == Approx(std::exp(-10.0)));
    CHECK(m(0, 0) == 1.0);
}

}
