#pragma once

#include <array>
#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "tubespec/error.hpp"

namespace tubespec {

using cplx = std::complex<double>;

struct PhysicalParams {
    double alpha = 1.0;
    double beta = 0.0;
    double eta = 0.0;
    double delta = 0.0;
};

// (kA, kB, kC, kD) = (k01, k02, k03, k04) at s = 0 and (k11, k12, k13, k14) at s = 1.
struct Generalized {
    double kA = 0, kB = 0, kC = 0, kD = 0;
};
struct Clamped {};
struct Free {};
struct Hinged {};
struct Guided {};

using EndCondition = std::variant<Generalized, Clamped, Free, Hinged, Guided>;

std::string variant_name(const EndCondition& end);

struct ProblemSpec {
    PhysicalParams physical;
    EndCondition end0 = Clamped{};
    EndCondition end1 = Clamped{};
};

struct ValidationIssue {
    ErrorCode code;
    std::string field;
};

class ValidationError : public ConfigError {
public:
    explicit ValidationError(std::vector<ValidationIssue> issues);
    const std::vector<ValidationIssue>& issues() const { return issues_; }

private:
    std::vector<ValidationIssue> issues_;
};

std::vector<ValidationIssue> validation_issues(const ProblemSpec& spec);
ProblemSpec validate(const ProblemSpec& raw);

struct SectorConstants {
    std::array<cplx, 4> omega;
    double arg_lo;
    double arg_hi;
};

const SectorConstants& sector();
inline cplx omega(int m) { return sector().omega[m - 1]; }

struct SpectralPoint {
    cplx lambda;
    cplx rho;
};

double exclusion_radius(double alpha);
bool is_excluded(cplx lambda, double alpha);

SpectralPoint map_lambda_rho(cplx lambda, double alpha);
cplx rho_to_lambda(cplx rho, double alpha);

// Real k parameters of an end written as (kA, kB, kC, kD); zero for canonical variants.
Generalized end_parameters(const EndCondition& end);

}  // namespace tubespec
