#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include "tubespec/model.hpp"

namespace oracle {

inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iterations = 200) {
    double flo = f(lo);
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// First positive root of cos(mu) cosh(mu) = 1 (clamped-clamped beam), bracketed in [4, 5].
inline double beam_mu1() {
    return bisect([](double m) { return std::cos(m) * std::cosh(m) - 1; }, 4.0, 5.0);
}

inline tubespec::ProblemSpec spec(double alpha, double beta, double eta, double delta, tubespec::EndCondition e0,
                                  tubespec::EndCondition e1) {
    tubespec::ProblemSpec s;
    s.physical = {alpha, beta, eta, delta};
    s.end0 = e0;
    s.end1 = e1;
    return s;
}

inline tubespec::ProblemSpec spec_a() { return spec(0.1, 0.4, 4, 0.1, tubespec::Clamped{}, tubespec::Clamped{}); }
inline tubespec::ProblemSpec spec_b() {
    return spec(0.1, 0.4, 4, 0.1, tubespec::Generalized{1, 1, 1, 1}, tubespec::Generalized{1, 1, 1, 1});
}
inline tubespec::ProblemSpec spec_c() { return spec(0.1, 0.4, 0, 0.1, tubespec::Hinged{}, tubespec::Free{}); }

inline tubespec::cplx random_disc(std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> u(-1, 1);
    for (;;) {
        const tubespec::cplx z(u(rng), u(rng));
        if (std::norm(z) <= 1) return radius * z;
    }
}

}  // namespace oracle
