#include "udw/model.hpp"

#include <cmath>
#include <sstream>

#include "udw/error.hpp"

namespace udw {

void CavitySpec::validate() const {
    if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("cavity length must be positive");
    if (mode_count == 0) throw DomainError("cavity needs at least one field mode");
    if (boundary == Boundary::reflecting && include_negative_modes) {
        throw DomainError("negative mode indices only exist for periodic cavities");
    }
}

std::vector<ModeSpec> cavity_modes(const CavitySpec& cavity) {
    cavity.validate();
    std::vector<ModeSpec> modes;
    modes.reserve(cavity.mode_count);
    const bool pairs = cavity.boundary == Boundary::periodic && cavity.include_negative_modes;
    const double unit = (cavity.boundary == Boundary::periodic ? 2.0 : 1.0) * std::numbers::pi / cavity.length;
    for (int n = 1; modes.size() < cavity.mode_count; ++n) {
        modes.push_back({n, unit * n, unit * n});
        if (pairs && modes.size() < cavity.mode_count) modes.push_back({-n, -unit * n, unit * n});
    }
    return modes;
}

std::complex<double> mode_function(const ModeSpec& mode, double x, const CavitySpec& cavity) {
    const double slack = 1e-12 * cavity.length;
    if (!(x >= -slack && x <= cavity.length + slack)) {
        std::ostringstream os;
        os << "position " << x << " is outside the cavity [0, " << cavity.length << "]";
        throw DomainError(os.str());
    }
    const double norm = 1.0 / std::sqrt(mode.frequency * cavity.length);
    if (cavity.boundary == Boundary::reflecting) return {norm * std::sin(mode.wave_vector * x), 0.0};
    return std::polar(norm, mode.wave_vector * x);
}

double Worldline::position_at(double t) const {
    if (kind == Kind::stationary) return position;
    const double at = acceleration * t;
    // (sqrt(1 + (a t)^2) - 1) / a without cancellation; exact at a = 0.
    return position + direction * acceleration * t * t / (std::sqrt(1.0 + at * at) + 1.0);
}

double Worldline::proper_time(double t) const {
    if (kind == Kind::stationary || acceleration == 0.0) return t;
    return std::asinh(acceleration * t) / acceleration;
}

double Worldline::dtau_dt(double t) const {
    if (kind == Kind::stationary) return 1.0;
    const double at = acceleration * t;
    return 1.0 / std::sqrt(1.0 + at * at);
}

double Worldline::coordinate_time(double tau) const {
    if (kind == Kind::stationary || acceleration == 0.0) return tau;
    return std::sinh(acceleration * tau) / acceleration;
}

WorldlinePoint Worldline::eval(double t) const { return {position_at(t), proper_time(t), dtau_dt(t)}; }

double SwitchingFunction::operator()(double tau) const {
    if (kind == Kind::constant) return lambda0;
    const double d = tau - tau0;
    return lambda0 * std::exp(-d * d / (2.0 * width));
}

void SystemSpec::validate() const {
    cavity.validate();
    if (detectors.empty()) throw DomainError("system needs at least one detector");
    for (std::size_t j = 0; j < detectors.size(); ++j) {
        const auto& d = detectors[j];
        std::ostringstream where;
        where << "detector " << j << ": ";
        if (!(d.frequency > 0.0) || !std::isfinite(d.frequency)) {
            throw DomainError(where.str() + "frequency must be positive");
        }
        if (d.worldline.kind == Worldline::Kind::uniform_acceleration) {
            if (!(d.worldline.acceleration >= 0.0) || !std::isfinite(d.worldline.acceleration)) {
                throw DomainError(where.str() + "acceleration must be nonnegative");
            }
            if (d.worldline.direction != 1 && d.worldline.direction != -1) {
                throw DomainError(where.str() + "direction must be +1 or -1");
            }
        }
        if (!std::isfinite(d.worldline.position)) throw DomainError(where.str() + "position must be finite");
        if (!std::isfinite(d.coupling.lambda0)) throw DomainError(where.str() + "lambda0 must be finite");
        if (d.coupling.kind == SwitchingFunction::Kind::gaussian &&
            (!(d.coupling.width > 0.0) || !std::isfinite(d.coupling.width))) {
            throw DomainError(where.str() + "switching width must be positive");
        }
        if (!std::isfinite(d.squeezing)) throw DomainError(where.str() + "squeezing must be finite");
        if (!d.mode_coupling_scale.empty() && d.mode_coupling_scale.size() != cavity.mode_count) {
            throw DomainError(where.str() + "per-mode coupling scale must have one entry per field mode");
        }
    }
    if (field.kind == FieldInitial::Kind::thermal && (!(field.temperature >= 0.0) || !std::isfinite(field.temperature))) {
        throw DomainError("field temperature must be nonnegative");
    }
}

void SystemSpec::check_inside(double t_max, std::size_t samples) const {
    const double slack = 1e-12 * cavity.length;
    const std::size_t n = std::max<std::size_t>(samples, 2);
    for (std::size_t j = 0; j < detectors.size(); ++j) {
        const auto& w = detectors[j].worldline;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = t_max * static_cast<double>(i) / static_cast<double>(n - 1);
            const double x = w.position_at(t);
            if (!(x >= -slack && x <= cavity.length + slack)) {
                std::ostringstream os;
                os << "detector " << j << " leaves the cavity at t = " << t << " (x = " << x << ", L = "
                   << cavity.length << ")";
                throw DomainError(os.str());
            }
        }
    }
}

Matrix HamiltonianTerms::dense() const {
    const Eigen::Index n = diagonal.size();
    Matrix f = Matrix::Zero(n, n);
    f.diagonal() = diagonal;
    for (const auto& c : couplings) {
        f(c.row, c.col) += c.value;
        f(c.col, c.row) += c.value;
    }
    return f;
}

HamiltonianAssembler::HamiltonianAssembler(SystemSpec system)
    : system_(std::move(system)),
      modes_(cavity_modes(system_.cavity)),
      dim_(static_cast<Eigen::Index>(2 * system_.mode_slots())) {
    system_.validate();
}

void HamiltonianAssembler::terms(double t, HamiltonianTerms& out) const {
    const auto m = static_cast<Eigen::Index>(system_.detectors.size());
    out.diagonal.resize(dim_);
    out.couplings.clear();
    for (std::size_t n = 0; n < modes_.size(); ++n) {
        const Eigen::Index k = 2 * (m + static_cast<Eigen::Index>(n));
        out.diagonal(k) = modes_[n].frequency;
        out.diagonal(k + 1) = modes_[n].frequency;
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto& det = system_.detectors[static_cast<std::size_t>(j)];
        const auto point = det.worldline.eval(t);
        out.diagonal(2 * j) = point.dtau_dt * det.frequency;
        out.diagonal(2 * j + 1) = point.dtau_dt * det.frequency;

        // lambda (a_d + a_d^dag)(a_n v_n + a_n^dag v_n^*) = 2 lambda q_d (q_n Re v_n - p_n Im v_n)
        const double base = 2.0 * det.coupling(point.proper_time) * point.dtau_dt;
        if (base == 0.0) continue;
        for (std::size_t n = 0; n < modes_.size(); ++n) {
            const double c = det.mode_coupling_scale.empty() ? base : base * det.mode_coupling_scale[n];
            const auto v = mode_function(modes_[n], point.position, system_.cavity);
            const Eigen::Index k = 2 * (m + static_cast<Eigen::Index>(n));
            out.couplings.push_back({2 * j, k, c * v.real()});
            if (v.imag() != 0.0) out.couplings.push_back({2 * j, k + 1, -c * v.imag()});
        }
    }
}

Matrix HamiltonianAssembler::f_sys(double t) const {
    HamiltonianTerms h;
    terms(t, h);
    return h.dense();
}

Matrix assemble_f_sys(double t, const SystemSpec& system) { return HamiltonianAssembler(system).f_sys(t); }

CovarianceMatrix initial_state(const SystemSpec& system) {
    system.validate();
    const auto m = static_cast<Eigen::Index>(system.detectors.size());
    const auto dim = static_cast<Eigen::Index>(2 * system.mode_slots());
    Matrix sigma = Matrix::Identity(dim, dim);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double r = system.detectors[static_cast<std::size_t>(j)].squeezing;
        if (r != 0.0) sigma.block<2, 2>(2 * j, 2 * j) = make_squeezed_cov(r).matrix();
    }
    if (system.field.kind == FieldInitial::Kind::thermal) {
        const auto modes = cavity_modes(system.cavity);
        for (std::size_t n = 0; n < modes.size(); ++n) {
            const double v = thermal_variance(modes[n].frequency, system.field.temperature);
            const Eigen::Index k = 2 * (m + static_cast<Eigen::Index>(n));
            sigma(k, k) = v;
            sigma(k + 1, k + 1) = v;
        }
    }
    return CovarianceMatrix(std::move(sigma));
}

}  // namespace udw
