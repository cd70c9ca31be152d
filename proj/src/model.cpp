#include "tubespec/model.hpp"

#include <cmath>
#include <numbers>

namespace tubespec {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonPositiveAlpha: return "NonPositiveAlpha";
    case ErrorCode::NegativeParameter: return "NegativeParameter";
    case ErrorCode::BetaOutOfRange: return "BetaOutOfRange";
    case ErrorCode::NonFiniteParameter: return "NonFiniteParameter";
    case ErrorCode::ExcludedPoint: return "ExcludedPoint";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ConfluentBasis: return "ConfluentBasis";
    case ErrorCode::NotAnEigenvalue: return "NotAnEigenvalue";
    case ErrorCode::RootOnContour: return "RootOnContour";
    case ErrorCode::DepthCapExceeded: return "DepthCapExceeded";
    case ErrorCode::ResolutionTooLow: return "ResolutionTooLow";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::DegreeOverflow: return "DegreeOverflow";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

std::string variant_name(const EndCondition& end) {
    struct {
        std::string operator()(const Generalized&) const { return "generalized"; }
        std::string operator()(const Clamped&) const { return "clamped"; }
        std::string operator()(const Free&) const { return "free"; }
        std::string operator()(const Hinged&) const { return "hinged"; }
        std::string operator()(const Guided&) const { return "guided"; }
    } visitor;
    return std::visit(visitor, end);
}

static std::string join_issues(const std::vector<ValidationIssue>& issues) {
    std::string out;
    for (const auto& i : issues) {
        if (!out.empty()) out += "; ";
        out += std::string(to_string(i.code)) + " (" + i.field + ")";
    }
    return out;
}

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : ConfigError(join_issues(issues)), issues_(std::move(issues)) {}

std::vector<ValidationIssue> validation_issues(const ProblemSpec& spec) {
    std::vector<ValidationIssue> out;
    const auto& p = spec.physical;
    auto finite = [&](double v, const char* name) {
        if (!std::isfinite(v)) {
            out.push_back({ErrorCode::NonFiniteParameter, name});
            return false;
        }
        return true;
    };
    if (finite(p.alpha, "alpha") && !(p.alpha > 0)) out.push_back({ErrorCode::NonPositiveAlpha, "alpha"});
    if (finite(p.beta, "beta") && !(p.beta >= 0 && p.beta < 1)) out.push_back({ErrorCode::BetaOutOfRange, "beta"});
    if (finite(p.eta, "eta") && p.eta < 0) out.push_back({ErrorCode::NegativeParameter, "eta"});
    if (finite(p.delta, "delta") && p.delta < 0) out.push_back({ErrorCode::NegativeParameter, "delta"});

    auto check_end = [&](const EndCondition& end, const std::string& prefix) {
        if (const auto* g = std::get_if<Generalized>(&end)) {
            const double k[4] = {g->kA, g->kB, g->kC, g->kD};
            for (int j = 0; j < 4; ++j) {
                std::string name = prefix + ".k" + std::to_string(j + 1);
                if (finite(k[j], name.c_str()) && k[j] < 0) out.push_back({ErrorCode::NegativeParameter, name});
            }
        }
    };
    check_end(spec.end0, "end0");
    check_end(spec.end1, "end1");
    return out;
}

ProblemSpec validate(const ProblemSpec& raw) {
    auto issues = validation_issues(raw);
    if (!issues.empty()) throw ValidationError(std::move(issues));
    return raw;
}

const SectorConstants& sector() {
    static const SectorConstants s = [] {
        const double pi = std::numbers::pi;
        SectorConstants c;
        c.omega = {std::polar(1.0, 3 * pi / 4), std::polar(1.0, 5 * pi / 4), std::polar(1.0, pi / 4),
                   std::polar(1.0, 7 * pi / 4)};
        c.arg_lo = pi / 8;
        c.arg_hi = pi / 4;
        return c;
    }();
    return s;
}

double exclusion_radius(double alpha) { return 1e-6 * (1.0 + 1.0 / alpha); }

bool is_excluded(cplx lambda, double alpha) {
    return std::abs(lambda + 1.0 / alpha) < exclusion_radius(alpha);
}

SpectralPoint map_lambda_rho(cplx lambda, double alpha) {
    if (is_excluded(lambda, alpha)) throw Error(ErrorCode::ExcludedPoint, "lambda inside the exclusion disk");
    const bool lower = lambda.imag() < 0;
    const cplx q = (lower ? std::conj(lambda) : cplx(lambda.real(), std::abs(lambda.imag()))) / alpha;
    const double arg = std::atan2(q.imag(), q.real());
    cplx rho = std::polar(std::pow(std::abs(q), 0.25), arg / 4);
    if (lower) rho = std::conj(rho);
    return {lambda, rho};
}

cplx rho_to_lambda(cplx rho, double alpha) {
    const cplx r2 = rho * rho;
    return alpha * r2 * r2;
}

Generalized end_parameters(const EndCondition& end) {
    if (const auto* g = std::get_if<Generalized>(&end)) return *g;
    return {};
}

}  // namespace tubespec
