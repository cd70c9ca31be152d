#include "tubespec/pencil.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "tubespec/workers.hpp"

namespace tubespec {

template <typename Real>
std::vector<cplx> pencil_eigenvalues(const ProblemSpec& spec, int n) {
    QuadraticPencil<Real> q = build_pencil<Real>(spec, n);
    const int N = n + 1;
    for (int i = 0; i < N; ++i) {
        const Real s = std::max({q.K.row(i).cwiseAbs().maxCoeff(), q.C.row(i).cwiseAbs().maxCoeff(),
                                 q.M2.row(i).cwiseAbs().maxCoeff()});
        if (s > 0) {
            q.K.row(i) /= s;
            q.C.row(i) /= s;
            q.M2.row(i) /= s;
        }
    }
    MatrixX<Real> A = MatrixX<Real>::Zero(2 * N, 2 * N), B = MatrixX<Real>::Zero(2 * N, 2 * N);
    A.topRightCorner(N, N).setIdentity();
    A.bottomLeftCorner(N, N) = -q.K;
    A.bottomRightCorner(N, N) = -q.C;
    B.topLeftCorner(N, N).setIdentity();
    B.bottomRightCorner(N, N) = q.M2;

    Eigen::GeneralizedEigenSolver<MatrixX<Real>> ges;
    ges.setMaxIterations(400 * 2 * N);
    ges.compute(A, B, false);
    if (ges.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "QZ iteration failed");
    const auto al = ges.alphas();
    const auto be = ges.betas();
    std::vector<cplx> out;
    for (Eigen::Index k = 0; k < al.size(); ++k) {
        const Real b = be(k);
        const std::complex<Real> a = al(k);
        if (std::abs(b) <= Real(1e-13) * std::abs(a) || b == Real(0)) continue;
        const std::complex<Real> lam = a / b;
        if (!std::isfinite(double(std::abs(lam)))) continue;
        out.emplace_back(double(lam.real()) + 0.0, double(lam.imag()) + 0.0);
    }
    return out;
}

template std::vector<cplx> pencil_eigenvalues<double>(const ProblemSpec&, int);
template std::vector<cplx> pencil_eigenvalues<long double>(const ProblemSpec&, int);

OracleSpectrum oracle_spectrum(const ProblemSpec& spec_in, int n, int n2, int workers) {
    const ProblemSpec spec = validate(spec_in);
    const double alpha = spec.physical.alpha;
    std::vector<cplx> ev[2];
    const int ns[2] = {n, n2};
    parallel_for(2, resolve_workers(workers), [&](std::size_t i) { ev[i] = pencil_eigenvalues<long double>(spec, ns[i]); });

    OracleSpectrum o;
    o.n_used = {n, n2};
    std::sort(ev[0].begin(), ev[0].end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    for (const cplx lam : ev[0]) {
        double best = std::numeric_limits<double>::infinity();
        for (const cplx other : ev[1]) best = std::min(best, std::abs(other - lam));
        const double move = best / (1 + std::abs(lam));
        double newton = std::numeric_limits<double>::infinity();
        bool keep = move < 1e-6 && !is_excluded(lam, alpha);
        if (keep) {
            try {
                newton = std::abs(newton_step(lam, spec)) / (1 + std::abs(lam));
            } catch (const Error&) {
                newton = std::numeric_limits<double>::infinity();
            }
            keep = newton <= 1e-6;
        }
        o.eigenvalues.push_back(lam);
        o.kept.push_back(keep);
        o.movement.push_back(move);
        o.newton.push_back(newton);
    }
    return o;
}

std::vector<EigenvalueRecord> oracle_records(const OracleSpectrum& o, const ProblemSpec& spec) {
    std::vector<EigenvalueRecord> out;
    const double alpha = spec.physical.alpha;
    for (std::size_t i = 0; i < o.eigenvalues.size(); ++i) {
        if (!o.kept[i] || o.eigenvalues[i].imag() < 0) continue;
        EigenvalueRecord r;
        r.lambda = o.eigenvalues[i];
        r.rho = map_lambda_rho(r.lambda, alpha).rho;
        r.residual = o.newton[i];
        r.method = Method::Collocation;
        out.push_back(r);
    }
    std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
        return modal_stiffness(a.lambda, spec.physical) < modal_stiffness(b.lambda, spec.physical);
    });
    return out;
}

}  // namespace tubespec
