#pragma once

#include <array>
#include <vector>

#include "tubespec/chebyshev.hpp"
#include "tubespec/detfun.hpp"
#include "tubespec/model.hpp"
#include "tubespec/roots.hpp"

namespace tubespec {

// lambda^2 M2 w + lambda C w + K w = 0 on the collocation nodes. The problem has real
// coefficients, so the blocks are stored in the real scalar type.
template <typename Real>
struct QuadraticPencil {
    MatrixX<Real> K, C, M2;
    std::array<int, 4> bc_rows{};
    int n = 0;
};

template <typename Real>
QuadraticPencil<Real> build_pencil(const ProblemSpec& spec, int n) {
    if (n < 16) throw Error(ErrorCode::ResolutionTooLow, "collocation degree must be at least 16");
    const ChebGrid<Real> g(n);
    const auto& p = spec.physical;
    const Real alpha = p.alpha, eta = p.eta, delta = p.delta;
    const Real drift = Real(2) * Real(p.beta) * std::sqrt(Real(p.eta));
    const int N = n + 1;
    QuadraticPencil<Real> q;
    q.n = n;
    q.K = g.diff[4] + eta * g.diff[2];
    q.C = alpha * g.diff[4] + drift * g.diff[1] + delta * g.diff[0];
    q.M2 = MatrixX<Real>::Identity(N, N);

    const auto forms = boundary_rows(cplx(0), spec);
    q.bc_rows = {0, 1, n - 1, n};
    for (int i = 0; i < 4; ++i) {
        const int row = q.bc_rows[i];
        const int node = forms[i].endpoint == 0 ? 0 : n;
        q.K.row(row).setZero();
        q.C.row(row).setZero();
        q.M2.row(row).setZero();
        for (int j = 0; j < 4; ++j) {
            q.K.row(row) += Real(forms[i].coeffs0(j).real()) * g.diff[j].row(node);
            q.C.row(row) += Real(forms[i].coeffs1(j).real()) * g.diff[j].row(node);
        }
    }
    return q;
}

struct OracleSpectrum {
    std::vector<cplx> eigenvalues;
    std::vector<bool> kept;
    std::array<int, 2> n_used{};
    std::vector<double> movement;  // relative distance to the nearest eigenvalue at the second resolution
    std::vector<double> newton;    // |Delta / Delta'| / (1 + |lambda|)
};

// Finite eigenvalues of the companion linearisation, computed in the given scalar type.
template <typename Real>
std::vector<cplx> pencil_eigenvalues(const ProblemSpec& spec, int n);

OracleSpectrum oracle_spectrum(const ProblemSpec& spec, int n = 64, int n2 = 80, int workers = 1);

// Kept upper-half eigenvalues as records (method = collocation), ordered by modal stiffness.
std::vector<EigenvalueRecord> oracle_records(const OracleSpectrum& o, const ProblemSpec& spec);

}  // namespace tubespec
