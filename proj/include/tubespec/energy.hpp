#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <algorithm>
#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "tubespec/chebyshev.hpp"
#include "tubespec/model.hpp"

namespace tubespec {

inline constexpr int kMaxStateDegree = 512;

// Polynomial on [0, 1] stored as coefficients of T_k(2s - 1).
template <typename Scalar>
class BasicStateFunction {
public:
    using Coeffs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    BasicStateFunction() : c_(Coeffs::Zero(1)) {}
    explicit BasicStateFunction(Coeffs coeffs) : c_(std::move(coeffs)) {
        if (c_.size() == 0) c_ = Coeffs::Zero(1);
        if (degree() > kMaxStateDegree) throw Error(ErrorCode::DegreeOverflow, "state degree exceeds budget");
    }

    // Interpolant through values at cheb_nodes(n), n = values.size() - 1.
    static BasicStateFunction from_values(const Coeffs& values) {
        const int n = int(values.size()) - 1;
        if (n < 0) return {};
        if (n == 0) return BasicStateFunction(values);
        if (n > kMaxStateDegree) throw Error(ErrorCode::DegreeOverflow, "state degree exceeds budget");
        const double pi = std::numbers::pi;
        Coeffs c = Coeffs::Zero(n + 1);
        for (int k = 0; k <= n; ++k) {
            Scalar sum(0);
            for (int j = 0; j <= n; ++j) {
                const double wj = (j == 0 || j == n) ? 0.5 : 1.0;
                // x_j = -cos(j pi / n), so T_k(x_j) = (-1)^k cos(k j pi / n)
                sum += wj * values(j) * std::cos(pi * double((k * j) % (2 * n)) / n);
            }
            c(k) = (k % 2 ? -2.0 : 2.0) / n * sum;
        }
        c(0) *= 0.5;
        c(n) *= 0.5;
        return BasicStateFunction(c);
    }

    template <typename F>
    static BasicStateFunction interpolate(F&& f, int n) {
        const VectorX<double> s = cheb_nodes<double>(n);
        Coeffs v(n + 1);
        for (int j = 0; j <= n; ++j) v(j) = f(s(j));
        return from_values(v);
    }

    // sum_k p[k] s^k
    static BasicStateFunction from_power(const std::vector<Scalar>& p) {
        const int n = std::max<int>(1, int(p.size()) - 1);
        return interpolate(
            [&](double s) {
                Scalar acc(0);
                for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * s + *it;
                return acc;
            },
            n);
    }

    int degree() const { return int(c_.size()) - 1; }
    const Coeffs& coeffs() const { return c_; }

    Scalar operator()(double s) const {
        const double x = 2 * s - 1;
        Scalar b1(0), b2(0);
        for (int k = degree(); k >= 1; --k) {
            const Scalar b0 = c_(k) + 2 * x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        return c_(0) + x * b1 - b2;
    }

    BasicStateFunction derivative(int order = 1) const {
        Coeffs c = c_;
        for (int o = 0; o < order; ++o) {
            const int n = int(c.size()) - 1;
            if (n == 0) return {};
            Coeffs d = Coeffs::Zero(n);
            for (int k = n; k >= 1; --k) {
                const Scalar next = (k + 1 <= n - 1) ? d(k + 1) : Scalar(0);
                d(k - 1) = next + Scalar(2.0 * k) * c(k);
            }
            d(0) *= 0.5;
            c = 2.0 * d;  // d/ds = 2 d/dx
        }
        return BasicStateFunction(c);
    }

    // Antiderivative vanishing at s = 0.
    BasicStateFunction antiderivative() const {
        const int n = degree();
        Coeffs a = Coeffs::Zero(n + 2);
        auto c = [&](int k) { return k <= n ? c_(k) : Scalar(0); };
        a(1) = c(0) - c(2) / 2.0;
        for (int k = 2; k <= n + 1; ++k) a(k) = (c(k - 1) - c(k + 1)) / (2.0 * k);
        Scalar at_minus_one(0);
        for (int k = 1; k <= n + 1; ++k) at_minus_one += (k % 2 ? -1.0 : 1.0) * a(k);
        a(0) = -at_minus_one;
        return BasicStateFunction(Coeffs(0.5 * a));
    }

    BasicStateFunction& operator+=(const BasicStateFunction& o) {
        if (o.c_.size() > c_.size()) c_.conservativeResizeLike(Coeffs::Zero(o.c_.size()));
        c_.head(o.c_.size()) += o.c_;
        return *this;
    }
    BasicStateFunction& operator*=(Scalar a) {
        c_ *= a;
        return *this;
    }
    friend BasicStateFunction operator+(BasicStateFunction a, const BasicStateFunction& b) { return a += b; }
    friend BasicStateFunction operator-(BasicStateFunction a, const BasicStateFunction& b) {
        return a += Scalar(-1) * b;
    }
    friend BasicStateFunction operator*(Scalar a, BasicStateFunction b) { return b *= a; }

private:
    Coeffs c_;
};

using StateFunction = BasicStateFunction<cplx>;

struct State {
    StateFunction w;
    StateFunction v;
    Eigen::Vector4cd z = Eigen::Vector4cd::Zero();  // (theta0, xi0, theta1, xi1)

    State& operator+=(const State& o) {
        w += o.w;
        v += o.v;
        z += o.z;
        return *this;
    }
    friend State operator+(State a, const State& b) { return a += b; }
    friend State operator-(State a, const State& b) { return a += cplx(-1) * b; }
    friend State operator*(cplx s, State x) {
        x.w *= s;
        x.v *= s;
        x.z *= s;
        return x;
    }
};

struct EnergyWeights {
    Eigen::Vector4d m_diag = Eigen::Vector4d::Zero();      // (k02, k04, k12, k14)
    Eigen::Vector4d boundary_k = Eigen::Vector4d::Zero();  // (k01, k03, k11, k13)
    double alpha = 1;
};

EnergyWeights energy_weights(const ProblemSpec& spec);

// (v'(0), v(0), v'(1), v(1))
Eigen::Vector4cd gamma_trace(const StateFunction& v);

enum class InnerKind { X, X_prime, W2_part, L2_part, Z_part };

// Linear in the first argument, conjugate-linear in the second.  Z_part is (Mz, z~) without the alpha factor.
cplx inner_product(const State& x, const State& y, InnerKind kind, const EnergyWeights& weights);
cplx inner_product(const StateFunction& f, const StateFunction& g);  // integral of f conj(g) over [0, 1]

inline constexpr double kDomainTolerance = 1e-8;

State apply_A0(const State& x, const ProblemSpec& spec);
State apply_A1(const State& x, const ProblemSpec& spec);

struct DissipationIdentity {
    double lhs = 0;
    double rhs = 0;
};

DissipationIdentity dissipation_identity(const State& x, const ProblemSpec& spec);

// Coefficient matrix acting on (v(0), v'(0), v''(0), v'''(0)) in the inverse solve.
Eigen::Matrix4d a0_system_matrix(const EnergyWeights& weights);

State a0_inverse(const State& target, const ProblemSpec& spec);

// x = (w, (1 + alpha lambda) w, Gamma v) with w the eigenfunction at lambda interpolated at the given degree
// (degree 0 picks one from the coefficient decay).
State eigen_state(cplx lambda, const ProblemSpec& spec, int degree = 0);

// Random coefficients uniform in the unit disc; in_domain sets z = Gamma v.
State random_state(std::mt19937_64& rng, int degree, bool in_domain);

}  // namespace tubespec
