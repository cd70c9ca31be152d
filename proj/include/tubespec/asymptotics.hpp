#pragma once

#include <map>
#include <string>
#include <vector>

#include "tubespec/roots.hpp"

namespace tubespec {

// LeadingOrder covers end combinations without a closed-form correction; it only fixes the
// base offset theta so that records can be indexed.
enum class AsymptoticVariant { GeneralizedNonzeroD, Clamped, ZeroD, LeadingOrder };
const char* to_string(AsymptoticVariant v);

struct AsymptoticModel {
    AsymptoticVariant variant = AsymptoticVariant::Clamped;
    cplx correction;
    double theta = 0.5;  // base_n = (n + theta) pi omega_2
    PhysicalParams params;
};

AsymptoticModel generalized_model(const PhysicalParams& p, double k04, double k14);
AsymptoticModel clamped_model(const PhysicalParams& p);
AsymptoticModel zero_d_model(const PhysicalParams& p);
AsymptoticModel make_model(const ProblemSpec& spec);

cplx rho_n_base(int n, const AsymptoticModel& model);
cplx rho_n_predicted(int n, const AsymptoticModel& model);

struct LambdaPrediction {
    cplx total;              // alpha rho_n^4
    double leading;          // alpha (base)^4, real and negative
    double real_correction;  // first-order term, real part
    double imag_correction;  // first-order term, imaginary part
};

LambdaPrediction lambda_n_predicted(int n, const AsymptoticModel& model, double alpha);

// Canonical representative of the upper-half-plane member of the conjugate pair {lambda, conj lambda}.
cplx upper_rho(cplx lambda, double alpha);

// Records are indexed when |rho| is at least this and lambda is away from the cluster at -1/alpha.
double asymptotic_radius(double alpha);
void assign_branches(std::vector<EigenvalueRecord>& records, const ProblemSpec& spec);

enum class Reference { Full, Base };

struct FitReport {
    double exponent = 0;
    cplx coefficient;
    int n_lo = 0, n_hi = 0;
    double residual_of_fit = 0;
    bool at_floor = false;
    double max_gap = 0;
    double c_bound = 0;  // max_n gap_n * n
};

FitReport fit_remainder(const std::vector<EigenvalueRecord>& records, const AsymptoticModel& model,
                        Reference reference = Reference::Full, int n_min = 8);

struct FirstOrderDiagnostic {
    cplx measured;   // mean of (rho_n - base_n) (n + theta) pi over the upper records
    cplx predicted;  // same quantity for the closed-form prediction
};

FirstOrderDiagnostic first_order_diagnostic(const std::vector<EigenvalueRecord>& records,
                                            const AsymptoticModel& model, int n_min = 8);

enum class Study { ClampedLimit, K02, BetaEta };
const char* to_string(Study s);

struct StudyRow {
    std::string study;
    int n;
    double parameter_value;
    cplx gap;
};

struct StudyReport {
    std::string study;
    std::vector<StudyRow> rows;
    std::map<std::string, double> numbers;
    std::map<std::string, bool> flags;
};

// Spectrum over the rho band holding branch indices n_lo..n_hi of make_model(spec).
SpectrumResult branch_band_spectrum(const ProblemSpec& spec, int n_lo, int n_hi, const SearchOptions& opt = {});

StudyReport limit_studies(const ProblemSpec& base, Study study, const SearchOptions& opt = {});

// Upper-half records keyed by branch index.
std::map<int, cplx> branch_map(const std::vector<EigenvalueRecord>& records, double alpha);

}  // namespace tubespec
