#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "tubespec/model.hpp"

using namespace tubespec;

namespace {

bool has_issue(const ProblemSpec& s, ErrorCode code, const std::string& field) {
    for (const auto& i : validation_issues(s))
        if (i.code == code && i.field == field) return true;
    return false;
}

}  // namespace

TEST(Validate, AcceptsInRangeValues) {
    const auto s = oracle::spec(1, 0.5, 4, 0.1, Generalized{1, 1, 1, 1}, Generalized{1, 1, 1, 1});
    EXPECT_TRUE(validation_issues(s).empty());
    EXPECT_NO_THROW(validate(s));
}

TEST(Validate, ReportsEachOffendingField) {
    EXPECT_TRUE(has_issue(oracle::spec(0, 0, 0, 0, Clamped{}, Clamped{}), ErrorCode::NonPositiveAlpha, "alpha"));
    EXPECT_TRUE(has_issue(oracle::spec(1, 1.5, 0, 0, Clamped{}, Clamped{}), ErrorCode::BetaOutOfRange, "beta"));
    const auto many = oracle::spec(-1, 0.2, -1, -2, Generalized{1, -1, 1, 1}, Clamped{});
    EXPECT_TRUE(has_issue(many, ErrorCode::NonPositiveAlpha, "alpha"));
    EXPECT_TRUE(has_issue(many, ErrorCode::NegativeParameter, "eta"));
    EXPECT_TRUE(has_issue(many, ErrorCode::NegativeParameter, "delta"));
    EXPECT_EQ(validation_issues(many).size(), 4u);
    EXPECT_THROW(validate(many), ValidationError);
    EXPECT_TRUE(has_issue(oracle::spec(std::nan(""), 0, 0, 0, Clamped{}, Clamped{}), ErrorCode::NonFiniteParameter,
                          "alpha"));
}

TEST(Validate, BetaZeroIsAdmitted) {
    EXPECT_TRUE(validation_issues(oracle::spec(1e-5, 0, 0, 0, Clamped{}, Clamped{})).empty());
}

TEST(Sector, OmegaIdentities) {
    for (int m = 1; m <= 4; ++m) EXPECT_LT(std::abs(std::pow(omega(m), 4) + 1.0), 1e-15);
    EXPECT_LT(std::abs(omega(1) - omega(2) - cplx(0, std::sqrt(2.0))), 1e-15);
    EXPECT_LT(std::abs(omega(1) + omega(2) + std::sqrt(2.0)), 1e-15);
    EXPECT_LT(std::abs(omega(1) * omega(2) - 1.0), 1e-15);
}

TEST(Sector, OrderingPropertyOnRandomRho) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> arg(std::numbers::pi / 8, std::numbers::pi / 4), mag(0.1, 1e4);
    for (int i = 0; i < 1000; ++i) {
        const cplx rho = std::polar(mag(rng), arg(rng));
        const double r1 = (rho * omega(1)).real(), r2 = (rho * omega(2)).real(), r3 = (rho * omega(3)).real(),
                     r4 = (rho * omega(4)).real();
        const double tol = 1e-12 * std::abs(rho);
        EXPECT_LE(r1, r2 + tol);
        EXPECT_LE(r2, r3 + tol);
        EXPECT_LE(r3, r4 + tol);
    }
}

TEST(LambdaRho, WorkedExamples) {
    EXPECT_LT(std::abs(map_lambda_rho(-4.0, 1).rho - cplx(1, 1)), 1e-14);
    EXPECT_LT(std::abs(map_lambda_rho(cplx(0, 4), 1).rho - cplx(1.3065629648763766, 0.5411961001461970)), 1e-14);
    const cplx up = map_lambda_rho(cplx(-4, 1e-12), 1).rho;
    const cplx down = map_lambda_rho(cplx(-4, -1e-12), 1).rho;
    EXPECT_LT(std::abs(down - std::conj(up)), 1e-15);
}

TEST(LambdaRho, RoundTripAndConjugationProperty) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> logmag(0, 6), arg(-std::numbers::pi, std::numbers::pi);
    for (double alpha : {1e-3, 0.1, 1.0, 10.0}) {
        for (int i = 0; i < 1000; ++i) {
            const cplx lam = std::polar(std::pow(10.0, logmag(rng)), arg(rng));
            if (is_excluded(lam, alpha)) continue;
            const SpectralPoint p = map_lambda_rho(lam, alpha);
            EXPECT_LE(std::abs(alpha * std::pow(p.rho, 4) - lam), 1e-12 * std::abs(lam));
            EXPECT_LE(std::abs(rho_to_lambda(p.rho, alpha) - lam), 1e-12 * std::abs(lam));
            const SpectralPoint q = map_lambda_rho(std::conj(lam), alpha);
            EXPECT_LE(std::abs(q.rho - std::conj(p.rho)), 1e-14 * std::abs(p.rho));
            if (lam.imag() >= 0) {
                EXPECT_GE(std::arg(p.rho), -1e-15);
                EXPECT_LE(std::arg(p.rho), std::numbers::pi / 4 + 1e-15);
            }
        }
    }
}

TEST(LambdaRho, ExclusionDisk) {
    EXPECT_DOUBLE_EQ(exclusion_radius(0.1), 1e-6 * 11);
    EXPECT_THROW(map_lambda_rho(-10.0 + 1e-6, 0.1), Error);
    try {
        map_lambda_rho(-1.0, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ExcludedPoint);
    }
}

TEST(EndParameters, CanonicalVariantsCarryZeros) {
    const Generalized g = end_parameters(Free{});
    EXPECT_EQ(g.kA + g.kB + g.kC + g.kD, 0.0);
    const Generalized h = end_parameters(Generalized{1, 2, 3, 4});
    EXPECT_EQ(h.kC, 3.0);
    EXPECT_EQ(variant_name(Guided{}), "guided");
}
