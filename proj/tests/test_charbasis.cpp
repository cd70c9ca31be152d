#include <gtest/gtest.h>

#include <algorithm>

#include "oracles.hpp"
#include "tubespec/charbasis.hpp"

using namespace tubespec;

namespace {

// Each expected value is matched to a distinct computed root.
bool same_root_set(const Eigen::Vector4cd& got, std::vector<cplx> want, double tol) {
    for (int i = 0; i < 4; ++i) {
        auto it = std::min_element(want.begin(), want.end(),
                                   [&](cplx a, cplx b) { return std::abs(a - got(i)) < std::abs(b - got(i)); });
        if (it == want.end() || std::abs(*it - got(i)) > tol) return false;
        want.erase(it);
    }
    return true;
}

QuarticCoeffs<double> raw(cplx a2, cplx a1, cplx a0) { return {a2, a1, a0}; }

}  // namespace

TEST(QuarticCoeffs, WorkedExamples) {
    const auto c = quartic_coeffs(cplx(0, 1), {1, 0.5, 4, 0.1});
    EXPECT_LT(std::abs(c.a2 - cplx(2, -2)), 1e-15);
    EXPECT_LT(std::abs(c.a1 - cplx(1, 1)), 1e-15);
    EXPECT_LT(std::abs(c.a0 - cplx(-0.45, 0.55)), 1e-15);
    const auto d = quartic_coeffs(-4.0, {1, 0.7, 0, 0});
    EXPECT_EQ(d.a2, cplx(0));
    EXPECT_EQ(d.a1, cplx(0));
    EXPECT_LT(std::abs(d.a0 - 16.0 / -3.0), 1e-15);
    EXPECT_THROW(quartic_coeffs(-1.0, {1, 0, 0, 0}), Error);
}

TEST(CharacteristicRoots, WorkedExamples) {
    EXPECT_TRUE(same_root_set(characteristic_roots(raw(0, 0, -16)).mu, {2, -2, cplx(0, 2), cplx(0, -2)}, 1e-13));
    EXPECT_TRUE(same_root_set(characteristic_roots(raw(0, 0, 1)).mu, {omega(1), omega(2), omega(3), omega(4)}, 1e-14));
    const auto z = characteristic_roots(raw(0, 0, 0));
    EXPECT_TRUE(z.confluent);
    EXPECT_LT(z.mu.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CharacteristicRoots, VietaAndResidualProperty) {
    std::mt19937_64 rng(21);
    const PhysicalParams p{0.3, 0.45, 2.5, 0.2};
    for (int i = 0; i < 300; ++i) {
        const cplx lam = oracle::random_disc(rng, 1e4);
        if (is_excluded(lam, p.alpha)) continue;
        const auto c = quartic_coeffs(lam, p);
        const auto b = characteristic_roots(c);
        const auto& m = b.mu;
        const double big = std::max(1.0, m.cwiseAbs().maxCoeff());
        EXPECT_LE(std::abs(m.sum()), 1e-9 * big);
        cplx e2 = 0, e3 = 0;
        for (int a = 0; a < 4; ++a)
            for (int bb = a + 1; bb < 4; ++bb) {
                e2 += m(a) * m(bb);
                for (int cc = bb + 1; cc < 4; ++cc) e3 += m(a) * m(bb) * m(cc);
            }
        EXPECT_LE(std::abs(e2 - c.a2), 1e-9 * std::max(std::abs(c.a2), big * big));
        EXPECT_LE(std::abs(-e3 - c.a1), 1e-9 * std::max(std::abs(c.a1), big * big * big));
        EXPECT_LE(std::abs(m.prod() - c.a0), 1e-9 * std::max(1.0, std::abs(c.a0)));
        for (int k = 0; k < 4; ++k) {
            EXPECT_LE(std::abs(quartic_value(c, m(k))), 1e-10 * std::max(1.0, std::pow(std::abs(m(k)), 4)));
            EXPECT_EQ(b.anchor(k), m(k).real() > 0 ? 1 : 0);
        }
        const auto bc = characteristic_roots(quartic_coeffs(std::conj(lam), p));
        Eigen::Vector4cd conj_mu = b.mu.conjugate();
        EXPECT_TRUE(same_root_set(bc.mu, {conj_mu(0), conj_mu(1), conj_mu(2), conj_mu(3)}, 1e-9 * big));
    }
}

TEST(BasisEval, AnchoredColumns) {
    FundamentalBasis<double> b = characteristic_roots(raw(0, 0, -16));
    const BasisEval e0 = basis_eval(b, 0.0);
    for (int m = 0; m < 4; ++m) {
        if (std::abs(b.mu(m) + 2.0) < 1e-12) {
            for (int j = 0; j < 4; ++j) EXPECT_LT(std::abs(e0.values(j, m) - std::pow(-2.0, j)), 1e-12);
        }
        const BasisEval at_anchor = basis_eval(b, double(b.anchor(m)));
        for (int j = 0; j < 4; ++j)
            EXPECT_NEAR(std::abs(at_anchor.values(j, m)), std::pow(std::abs(b.mu(m)), j), 1e-12);
    }
    EXPECT_THROW(basis_eval(characteristic_roots(raw(0, 0, 0)), 0.5), Error);
}

TEST(BasisEval, ColumnsSolveTheOdeProperty) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    const PhysicalParams p{0.1, 0.4, 4, 0.1};
    for (int i = 0; i < 40; ++i) {
        const cplx lam = oracle::random_disc(rng, 500);
        const auto c = quartic_coeffs(lam, p);
        const auto b = characteristic_roots(c);
        for (int k = 0; k < 10; ++k) {
            const BasisEval e = basis_eval(b, u(rng));
            for (int m = 0; m < 4; ++m) {
                const double col = e.values.col(m).norm();
                EXPECT_LE(std::abs(quartic_value(c, b.mu(m))) * std::abs(e.values(0, m)), 1e-8 * std::max(col, 1e-300));
                EXPECT_LE(e.values.col(m).cwiseAbs().maxCoeff(), std::pow(1 + std::abs(b.mu(m)), 3) * (1 + 1e-12));
            }
        }
    }
}

TEST(Birkhoff, BracketExamples) {
    const cplx rho(10, 5);
    const auto b = birkhoff_basis(rho, 0.6, {1, 0, 0, 0});
    for (int m = 1; m <= 4; ++m) EXPECT_LT(std::abs(b.brackets[m - 1] - (1.0 - omega(m) * 0.6 / 4.0 / rho)), 1e-14);
    for (const auto& x : birkhoff_basis(rho, 0.0, {0.3, 0.1, 2, 7}).brackets) EXPECT_EQ(x, cplx(1));
    for (const auto& x : birkhoff_basis(rho, 0.8, {0.5, 0.1, 2, 2}).brackets) EXPECT_LT(std::abs(x - 1.0), 1e-15);
}

TEST(LemmaDiagnostic, ZeroDriftGapDecaysFast) {
    const auto d = lemma_diagnostic(std::polar(10.0, 0.6), {1, 0, 0, 0}, 2, 5);
    EXPECT_GE(d.max_gap_exponent, 2.5);
}

TEST(LemmaDiagnostic, DriftGapDecaysLikeInverseSquare) {
    const PhysicalParams p{1, 0.5, 4, 0};
    const auto d = lemma_diagnostic(std::polar(10.0, 0.6), p, 2, 5);
    EXPECT_NEAR(d.max_gap_exponent, 2.0, 0.15);
    const double predicted = p.beta * std::sqrt(p.eta) / (2 * p.alpha);
    for (int m = 0; m < 4; ++m) EXPECT_NEAR(std::abs(d.coefficient[m]), predicted, 0.1 * predicted);
    for (int m = 1; m <= 4; ++m) {
        double prev = std::numeric_limits<double>::infinity();
        for (const auto& r : d.rows)
            if (r.m == m) {
                EXPECT_LE(r.gap, prev * (1 + 1e-9));
                prev = r.gap;
            }
    }
}

TEST(FitDecayExponent, RecoversPowerLaw) {
    std::vector<double> x, y;
    for (int i = 1; i <= 10; ++i) {
        x.push_back(i * 3.0);
        y.push_back(0.7 * std::pow(i * 3.0, -2.5));
    }
    double intercept = 0, rms = 1;
    EXPECT_NEAR(fit_decay_exponent(x, y, &intercept, &rms), 2.5, 1e-12);
    EXPECT_NEAR(std::exp(intercept), 0.7, 1e-10);
    EXPECT_LT(rms, 1e-12);
}
