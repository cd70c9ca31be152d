#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "tubespec/roots.hpp"

using namespace tubespec;

namespace {

SearchRegion lambda_box(cplx c, double half) {
    return {Plane::Lambda, Box{c.real() - half, c.real() + half, c.imag() - half, c.imag() + half}, 0};
}

int multiplicity_sum(const std::vector<EigenvalueRecord>& recs) {
    int total = 0;
    for (const auto& r : recs) total += r.multiplicity;
    return total;
}

}  // namespace

TEST(Winding, BoxAroundRefinedRootCountsOne) {
    const auto spec = oracle::spec_b();
    const auto recs = find_spectrum(spec, FirstPairs{4}).records;
    for (const auto& r : recs) {
        const double half = 1e-3 * (1 + std::abs(r.lambda));
        EXPECT_EQ(winding_number(lambda_box(r.lambda + cplx(0.13, 0.07) * half, half), spec), r.multiplicity);
    }
}

TEST(Winding, RightHalfPlaneIsEmptyWithoutFlow) {
    const auto spec = oracle::spec_c();
    EXPECT_EQ(winding_number({Plane::Lambda, Box{1, 500, -300, 301}, 0}, spec), 0);
    EXPECT_EQ(winding_number({Plane::Lambda, Box{0.01, 1e4, 1, 2e4}, 0}, spec), 0);
}

TEST(Winding, ConjugateRegionHasSameCount) {
    const auto spec = oracle::spec_a();
    const Box b{-60.3, 5.1, 0.7, 40.2};
    const Box mirrored{b.x0, b.x1, -b.y1, -b.y0};
    EXPECT_EQ(winding_number({Plane::Lambda, b, 0}, spec), winding_number({Plane::Lambda, mirrored, 0}, spec));
}

TEST(FindSpectrum, ClassicalBeamPair) {
    const auto spec = oracle::spec(1e-5, 0, 0, 0, Clamped{}, Clamped{});
    const double target = std::pow(oracle::beam_mu1(), 2);
    const auto res = find_spectrum(spec, FirstPairs{1});
    ASSERT_EQ(res.records.size(), 2u);
    EXPECT_LE(std::abs(res.records[0].lambda.imag() - target), 0.03);
    EXPECT_LE(std::abs(res.records[1].lambda.imag() + target), 0.03);
    for (const auto& r : res.records) EXPECT_LT(r.lambda.real(), 0);
    EXPECT_TRUE(res.search_meta.census_ok);
}

TEST(FindSpectrum, LeftHalfPlaneAndConjugatePairs) {
    for (const auto& end : {EndCondition(Clamped{}), EndCondition(Hinged{}), EndCondition(Generalized{1, 1, 1, 1})}) {
        const auto spec = oracle::spec(0.1, 0.4, 0, 0.1, end, end);
        const auto res = find_spectrum(spec, FirstPairs{8});
        EXPECT_TRUE(res.search_meta.census_ok);
        EXPECT_EQ(res.search_meta.rhp_winding, 0);
        for (const auto& r : res.records) {
            EXPECT_LE(r.lambda.real(), 1e-8 * (1 + std::abs(r.lambda)));
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : res.records) best = std::min(best, std::abs(q.lambda - std::conj(r.lambda)));
            EXPECT_LE(best, 1e-8 * (1 + std::abs(r.lambda)));
        }
    }
}

TEST(FindSpectrum, RecordsSortedAndDistinct) {
    const auto res = find_spectrum(oracle::spec_b(), FirstPairs{6});
    for (std::size_t i = 1; i < res.records.size(); ++i) {
        const cplx a = res.records[i - 1].lambda, b = res.records[i].lambda;
        EXPECT_TRUE(a.imag() > b.imag() || (a.imag() == b.imag() && a.real() <= b.real()));
    }
    for (std::size_t i = 0; i < res.records.size(); ++i)
        for (std::size_t j = i + 1; j < res.records.size(); ++j)
            EXPECT_GT(std::abs(res.records[i].lambda - res.records[j].lambda), dedupe_tolerance(res.records[i].lambda));
}

TEST(FindSpectrum, CensusOverRandomBoxesProperty) {
    const auto spec = oracle::spec_b();
    const auto reference = find_spectrum(spec, FirstPairs{10});
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> re(-80, 10), im(-10, 120), size(2, 60);
    for (int i = 0; i < 12; ++i) {
        const double x0 = re(rng), y0 = im(rng);
        const Box b{x0, x0 + size(rng), y0, y0 + size(rng)};
        if (b.contains(cplx(-10, 0), 0.5)) continue;
        const auto res = find_spectrum(spec, LambdaRegion{b});
        EXPECT_TRUE(res.search_meta.census_ok);
        EXPECT_EQ(multiplicity_sum(res.records), res.search_meta.region_winding);
        for (const auto& r : res.records) EXPECT_TRUE(b.contains(r.lambda, 1e-6 * (1 + std::abs(r.lambda))));
        for (const auto& r : reference.records)
            if (b.contains(r.lambda, -1e-6 * (1 + std::abs(r.lambda)))) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& q : res.records) best = std::min(best, std::abs(q.lambda - r.lambda));
                EXPECT_LE(best, 1e-7 * (1 + std::abs(r.lambda)));
            }
    }
}

TEST(Refine, FixedPointAndBasinMembership) {
    const auto spec = oracle::spec_b();
    const auto recs = find_spectrum(spec, FirstPairs{5}).records;
    for (const auto& r : recs) {
        const auto again = refine(r.lambda, spec);
        EXPECT_LE(std::abs(again.lambda - r.lambda), 1e-10 * (1 + std::abs(r.lambda)));
    }
    for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
        const auto mid = refine(0.5 * (recs[i].lambda + recs[i + 1].lambda), spec);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& r : find_spectrum(spec, LambdaRegion{Box{mid.lambda.real() - 1, mid.lambda.real() + 1,
                                                                    mid.lambda.imag() - 1, mid.lambda.imag() + 1}})
                                 .records)
            best = std::min(best, std::abs(r.lambda - mid.lambda));
        EXPECT_LE(best, 1e-8 * (1 + std::abs(mid.lambda)));
    }
}

TEST(PlaneMap, RoundTrip) {
    for (cplx lam : {cplx(-3, 4), cplx(100, -2), cplx(-1e5, 1e4)}) {
        EXPECT_LE(std::abs(lambda_to_plane(Plane::Lambda, lam, 0.1) - lam), 0);
        const cplx z = lambda_to_plane(Plane::Rho, lam, 0.1);
        EXPECT_LE(std::abs(plane_to_lambda(Plane::Rho, z, 0.1) - lam), 1e-12 * std::abs(lam));
    }
}

TEST(ModalStiffness, OrdersByEffectiveStiffness) {
    const PhysicalParams p{0.1, 0, 0, 0.1};
    EXPECT_NEAR(modal_stiffness(cplx(0, 10), p), std::abs(cplx(0, 10) * cplx(0.1, 10) / cplx(1, 1)), 1e-12);
    EXPECT_LT(modal_stiffness(cplx(-1, 5), p), modal_stiffness(cplx(-1, 50), p));
    EXPECT_DOUBLE_EQ(dedupe_tolerance(cplx(3, 4)), 6e-6);
}
