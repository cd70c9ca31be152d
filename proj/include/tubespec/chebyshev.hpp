#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <numbers>

namespace tubespec {

template <typename Real>
using MatrixX = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using VectorX = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

// Extrema-type points s_j = (1 - cos(j pi / n)) / 2, ascending on [0, 1].
template <typename Real>
VectorX<Real> cheb_nodes(int n) {
    const Real pi = std::numbers::pi_v<Real>;
    VectorX<Real> s(n + 1);
    for (int j = 0; j <= n; ++j) {
        const Real h = std::sin(pi * Real(j) / Real(2 * n));
        s(j) = h * h;
    }
    return s;
}

// Derivative matrices of orders 1..4 in s for cheb_nodes(n), built order by order
// from the barycentric recursion; each row sums to zero.
template <typename Real>
std::array<MatrixX<Real>, 4> cheb_diff_all(int n) {
    const Real pi = std::numbers::pi_v<Real>;
    auto c = [&](int i) { return Real((i == 0 || i == n) ? 2 : 1) * ((i % 2) ? Real(-1) : Real(1)); };
    MatrixX<Real> inv_dx = MatrixX<Real>::Zero(n + 1, n + 1), ratio = MatrixX<Real>::Zero(n + 1, n + 1);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            if (i == j) continue;
            // x_i - x_j with x = cos(k pi / n), written without cancellation.
            inv_dx(i, j) = Real(1) / (Real(2) * std::sin(pi * Real(i + j) / Real(2 * n)) *
                                      std::sin(pi * Real(j - i) / Real(2 * n)));
            ratio(i, j) = c(i) / c(j);
        }
    std::array<MatrixX<Real>, 4> out;
    MatrixX<Real> prev = MatrixX<Real>::Identity(n + 1, n + 1);
    Real scale = 1;
    for (int k = 1; k <= 4; ++k) {
        MatrixX<Real> D = MatrixX<Real>::Zero(n + 1, n + 1);
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; j <= n; ++j) {
                if (i == j) continue;
                D(i, j) = Real(k) * inv_dx(i, j) * (ratio(i, j) * prev(i, i) - prev(i, j));
            }
            D(i, i) = -D.row(i).sum();
        }
        prev = D;
        scale *= Real(-2);
        out[k - 1] = scale * D;
    }
    return out;
}

// First-derivative matrix in s for cheb_nodes(n).
template <typename Real>
MatrixX<Real> cheb_diff(int n) {
    return cheb_diff_all<Real>(n)[0];
}

template <typename Real>
struct ChebGrid {
    int n = 0;
    VectorX<Real> nodes;
    std::array<MatrixX<Real>, 5> diff;  // diff[k] is the k-th derivative matrix, diff[0] = I

    explicit ChebGrid(int degree) : n(degree), nodes(cheb_nodes<Real>(degree)) {
        diff[0] = MatrixX<Real>::Identity(n + 1, n + 1);
        const auto d = cheb_diff_all<Real>(n);
        for (int k = 1; k <= 4; ++k) diff[k] = d[k - 1];
    }
};

// Clenshaw-Curtis weights on [0, 1] for cheb_nodes(n).
template <typename Real>
VectorX<Real> clenshaw_curtis_weights(int n) {
    const Real pi = std::numbers::pi_v<Real>;
    VectorX<Real> w(n + 1);
    for (int j = 0; j <= n; ++j) {
        Real sum = 0;
        for (int k = 0; k <= n / 2; ++k) {
            const Real b = (k == 0 || 2 * k == n) ? Real(1) : Real(2);
            sum += b / Real(1 - 4 * k * k) * std::cos(Real(2 * k * j) * pi / Real(n));
        }
        const Real cj = (j == 0 || j == n) ? Real(1) : Real(2);
        w(j) = cj / Real(n) * sum * Real(0.5);
    }
    return w;
}

}  // namespace tubespec
