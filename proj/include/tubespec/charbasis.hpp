#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

#include "tubespec/model.hpp"

namespace tubespec {

// Coefficients of mu^4 + a2 mu^2 + a1 mu + a0 = 0.
template <typename Real = double>
struct QuarticCoeffs {
    std::complex<Real> a2, a1, a0;
};

QuarticCoeffs<double> quartic_coeffs(cplx lambda, const PhysicalParams& p);

template <typename Real = double>
struct FundamentalBasis {
    Eigen::Matrix<std::complex<Real>, 4, 1> mu;
    Eigen::Vector4i anchor;
    bool confluent = false;
};

template <typename Real>
std::complex<Real> quartic_value(const QuarticCoeffs<Real>& c, std::complex<Real> m) {
    const auto m2 = m * m;
    return ((m2 + c.a2) * m + c.a1) * m + c.a0;
}

template <typename Real>
std::complex<Real> quartic_slope(const QuarticCoeffs<Real>& c, std::complex<Real> m) {
    return (Real(4) * m * m + Real(2) * c.a2) * m + c.a1;
}

// Companion-matrix eigenvalues, rescaled to unit size, then Newton-polished on the quartic.
template <typename Real = double>
FundamentalBasis<Real> characteristic_roots(const QuarticCoeffs<Real>& c);

struct BasisEval {
    Eigen::Matrix4cd values;  // (j, m) = mu_m^j exp(mu_m (s - sigma_m))
    Eigen::Vector4d logscale;  // Re mu_m sigma_m
};

BasisEval basis_eval(const FundamentalBasis<double>& b, double s);

struct BirkhoffBasis {
    cplx rho;
    double s;
    std::array<cplx, 4> brackets;
};

BirkhoffBasis birkhoff_basis(cplx rho, double s, const PhysicalParams& p);

struct LemmaRow {
    double abs_rho;
    int m;
    double gap;
    double fitted_exponent;
};

struct LemmaDiagnostic {
    std::vector<LemmaRow> rows;
    std::array<double, 4> exponent;   // per m, over the sweep
    std::array<cplx, 4> coefficient;  // (mu_m - rho omega_m) * rho^exponent at the largest |rho|
    double max_gap_exponent;          // fit of max_m gap
};

// Sweeps |rho| log-spaced from |rho0| to |rho0| * 10^decades along arg(rho0).
LemmaDiagnostic lemma_diagnostic(cplx rho0, const PhysicalParams& p, int decades = 2, int per_decade = 5);

// Least squares slope of log(y) against log(x), returned as the decay exponent -slope.
double fit_decay_exponent(const std::vector<double>& x, const std::vector<double>& y, double* intercept = nullptr,
                          double* rms = nullptr);

}  // namespace tubespec
