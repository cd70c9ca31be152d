#include "tubespec/charbasis.hpp"

#include <algorithm>
#include <cmath>

namespace tubespec {

QuarticCoeffs<double> quartic_coeffs(cplx lambda, const PhysicalParams& p) {
    if (is_excluded(lambda, p.alpha)) throw Error(ErrorCode::ExcludedPoint, "quartic coefficients at -1/alpha");
    const cplx d = 1.0 + p.alpha * lambda;
    QuarticCoeffs<double> c;
    c.a2 = p.eta / d;
    c.a1 = 2.0 * lambda * p.beta * std::sqrt(p.eta) / d;
    c.a0 = (p.delta * lambda + lambda * lambda) / d;
    return c;
}

template <typename Real>
FundamentalBasis<Real> characteristic_roots(const QuarticCoeffs<Real>& c) {
    using C = std::complex<Real>;
    using std::abs, std::pow, std::isfinite;
    if (!isfinite(abs(c.a0)) || !isfinite(abs(c.a1)) || !isfinite(abs(c.a2)))
        throw Error(ErrorCode::PreconditionViolation, "non-finite quartic coefficients");

    FundamentalBasis<Real> b;
    const Real t = std::max({Real(1), pow(abs(c.a0), Real(0.25)), pow(abs(c.a1), Real(1) / 3), std::sqrt(abs(c.a2))});
    if (abs(c.a0) == 0 && abs(c.a1) == 0 && abs(c.a2) == 0) {
        b.mu.setZero();
    } else {
        Eigen::Matrix<C, 4, 4> comp = Eigen::Matrix<C, 4, 4>::Zero();
        comp(0, 1) = comp(1, 2) = comp(2, 3) = C(1);
        comp(3, 0) = -c.a0 / (t * t * t * t);
        comp(3, 1) = -c.a1 / (t * t * t);
        comp(3, 2) = -c.a2 / (t * t);
        Eigen::ComplexEigenSolver<Eigen::Matrix<C, 4, 4>> es(comp, false);
        if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "companion eigenvalues");
        b.mu = es.eigenvalues() * t;

        for (int m = 0; m < 4; ++m) {
            C mu = b.mu(m);
            bool ok = false;
            for (int it = 0; it < 50; ++it) {
                const C f = quartic_value(c, mu);
                const Real scale = std::max(Real(1), pow(abs(mu), Real(4)));
                const C df = quartic_slope(c, mu);
                if (abs(f) <= Real(1e-14) * scale || abs(df) == 0) {
                    ok = abs(f) <= Real(1e-10) * scale;
                    break;
                }
                const C step = f / df;
                const C next = mu - step;
                if (abs(quartic_value(c, next)) >= abs(f)) {
                    ok = abs(f) <= Real(1e-10) * scale;
                    break;
                }
                mu = next;
                ok = abs(quartic_value(c, mu)) <= Real(1e-10) * scale;
                if (abs(step) <= std::numeric_limits<Real>::epsilon() * (1 + abs(mu))) break;
            }
            if (!ok) throw Error(ErrorCode::NoConvergence, "quartic root polishing");
            b.mu(m) = mu;
        }
    }

    Real sep = std::numeric_limits<Real>::infinity(), big = 0;
    for (int i = 0; i < 4; ++i) {
        big = std::max(big, 1 + abs(b.mu(i)));
        for (int j = i + 1; j < 4; ++j) sep = std::min(sep, abs(b.mu(i) - b.mu(j)));
        b.anchor(i) = b.mu(i).real() > 0 ? 1 : 0;
    }
    b.confluent = sep < Real(1e-6) * big;
    return b;
}

template FundamentalBasis<double> characteristic_roots(const QuarticCoeffs<double>&);
template FundamentalBasis<long double> characteristic_roots(const QuarticCoeffs<long double>&);

BasisEval basis_eval(const FundamentalBasis<double>& b, double s) {
    if (b.confluent) throw Error(ErrorCode::ConfluentBasis, "basis_eval on confluent exponents");
    BasisEval e;
    for (int m = 0; m < 4; ++m) {
        const cplx mu = b.mu(m);
        cplx v = std::exp(mu * (s - b.anchor(m)));
        for (int j = 0; j < 4; ++j) {
            e.values(j, m) = v;
            v *= mu;
        }
        e.logscale(m) = mu.real() * b.anchor(m);
    }
    return e;
}

BirkhoffBasis birkhoff_basis(cplx rho, double s, const PhysicalParams& p) {
    if (std::abs(rho) < 2) throw Error(ErrorCode::PreconditionViolation, "birkhoff_basis needs |rho| >= 2");
    BirkhoffBasis b{rho, s, {}};
    const double w = 0.25 * std::sqrt(1.0 / p.alpha) * (p.delta - 1.0 / p.alpha) * s;
    for (int m = 0; m < 4; ++m) b.brackets[m] = 1.0 + w * sector().omega[m] / rho;
    return b;
}

double fit_decay_exponent(const std::vector<double>& x, const std::vector<double>& y, double* intercept, double* rms) {
    const std::size_t n = x.size();
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        A(i, 0) = std::log(x[i]);
        A(i, 1) = 1.0;
        rhs(i) = std::log(y[i]);
    }
    const Eigen::Vector2d sol = A.colPivHouseholderQr().solve(rhs);
    if (intercept) *intercept = sol(1);
    if (rms) *rms = std::sqrt((A * sol - rhs).squaredNorm() / double(n));
    return -sol(0);
}

LemmaDiagnostic lemma_diagnostic(cplx rho0, const PhysicalParams& p, int decades, int per_decade) {
    if (std::abs(rho0) < 2) throw Error(ErrorCode::PreconditionViolation, "lemma_diagnostic needs |rho| >= 2");
    LemmaDiagnostic out;
    const int count = decades * per_decade + 1;
    std::vector<double> radii;
    std::array<std::vector<double>, 4> gaps;
    std::vector<double> maxgap;
    std::array<cplx, 4> last_diff{};
    const cplx dir = rho0 / std::abs(rho0);
    for (int i = 0; i < count; ++i) {
        const double r = std::abs(rho0) * std::pow(10.0, double(i) / per_decade);
        const cplx rho = r * dir;
        const auto basis = characteristic_roots(quartic_coeffs(rho_to_lambda(rho, p.alpha), p));
        radii.push_back(r);
        double mx = 0;
        std::array<bool, 4> used{};
        for (int m = 0; m < 4; ++m) {
            const cplx target = rho * sector().omega[m];
            int best = -1;
            for (int k = 0; k < 4; ++k)
                if (!used[k] && (best < 0 || std::abs(basis.mu(k) - target) < std::abs(basis.mu(best) - target)))
                    best = k;
            used[best] = true;
            const double g = std::abs(basis.mu(best) - target);
            gaps[m].push_back(g);
            last_diff[m] = basis.mu(best) - target;
            mx = std::max(mx, g);
        }
        maxgap.push_back(mx);
    }
    auto positive = [](const std::vector<double>& x, const std::vector<double>& y, std::vector<double>& xo,
                       std::vector<double>& yo) {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (y[i] > 0) {
                xo.push_back(x[i]);
                yo.push_back(y[i]);
            }
    };
    for (int m = 0; m < 4; ++m) {
        std::vector<double> xs, ys;
        positive(radii, gaps[m], xs, ys);
        out.exponent[m] = xs.size() >= 2 ? fit_decay_exponent(xs, ys) : std::numeric_limits<double>::infinity();
        const double e = std::isfinite(out.exponent[m]) ? out.exponent[m] : 0.0;
        out.coefficient[m] = last_diff[m] * std::pow(radii.back(), e);
        for (int i = 0; i < count; ++i) out.rows.push_back({radii[i], m + 1, gaps[m][i], out.exponent[m]});
    }
    std::vector<double> xs, ys;
    positive(radii, maxgap, xs, ys);
    out.max_gap_exponent = xs.size() >= 2 ? fit_decay_exponent(xs, ys) : std::numeric_limits<double>::infinity();
    std::sort(out.rows.begin(), out.rows.end(), [](const LemmaRow& a, const LemmaRow& b) {
        return a.abs_rho != b.abs_rho ? a.abs_rho < b.abs_rho : a.m < b.m;
    });
    return out;
}

}  // namespace tubespec
