#include "tubespec/detfun.hpp"

#include <cmath>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

namespace tubespec {

namespace {

void end_rows(const EndCondition& end, int endpoint, BoundaryForm& r1, BoundaryForm& r2) {
    r1.endpoint = r2.endpoint = endpoint;
    const double sgn = endpoint == 0 ? 1.0 : -1.0;
    if (const auto* g = std::get_if<Generalized>(&end)) {
        r1.coeffs0 << 0, -sgn * g->kA, 1, 0;
        r1.coeffs1 << 0, -sgn * g->kB, 0, 0;
        r2.coeffs0 << sgn * g->kC, 0, 0, 1;
        r2.coeffs1 << sgn * g->kD, 0, 0, 0;
    } else if (std::holds_alternative<Clamped>(end)) {
        r1.coeffs0 << 1, 0, 0, 0;
        r2.coeffs0 << 0, 1, 0, 0;
    } else if (std::holds_alternative<Free>(end)) {
        r1.coeffs0 << 0, 0, 1, 0;
        r2.coeffs0 << 0, 0, 0, 1;
    } else if (std::holds_alternative<Hinged>(end)) {
        r1.coeffs0 << 1, 0, 0, 0;
        r2.coeffs0 << 0, 0, 1, 0;
    } else {
        r1.coeffs0 << 0, 1, 0, 0;
        r2.coeffs0 << 0, 0, 0, 1;
    }
}

Eigen::Matrix4cd companion(const QuarticCoeffs<double>& c) {
    Eigen::Matrix4cd C = Eigen::Matrix4cd::Zero();
    C(0, 1) = C(1, 2) = C(2, 3) = 1.0;
    C(3, 0) = -c.a0;
    C(3, 1) = -c.a1;
    C(3, 2) = -c.a2;
    return C;
}

double max_re(const FundamentalBasis<double>& b) { return b.mu.real().cwiseAbs().maxCoeff(); }

// Boundary matrix in the chosen basis, before row normalisation.
struct RawMatrix {
    Eigen::Matrix4cd M;
    cplx factor = 1.0;  // unit-modulus phase multiplying det M
    double logscale = 0;
    DetRoute route;
    FundamentalBasis<double> basis;
    Eigen::Matrix4cd transfer;  // exp(C) for the matrix route
};

RawMatrix raw_matrix(cplx lambda, const ProblemSpec& spec, const FundamentalBasis<double>& b,
                     const QuarticCoeffs<double>& c) {
    const auto forms = boundary_rows(lambda, spec);
    RawMatrix r;
    r.basis = b;
    if (max_re(b) <= kMatrixRouteReMu) {
        r.route = DetRoute::MatrixExponential;
        r.transfer = companion(c).exp();
        for (int i = 0; i < 4; ++i) {
            const Eigen::RowVector4cd f = forms[i].at(lambda);
            r.M.row(i) = forms[i].endpoint == 0 ? f : Eigen::RowVector4cd(f * r.transfer);
        }
        return r;
    }
    r.route = DetRoute::ExponentialBasis;
    const BasisEval e0 = basis_eval(b, 0.0), e1 = basis_eval(b, 1.0);
    for (int i = 0; i < 4; ++i) r.M.row(i) = forms[i].at(lambda) * (forms[i].endpoint == 0 ? e0.values : e1.values);
    cplx vdm = 1.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) vdm *= b.mu(j) - b.mu(i);
    double phase = 0;
    for (int m = 0; m < 4; ++m) {
        r.logscale += b.mu(m).real() * b.anchor(m);
        phase += b.mu(m).imag() * b.anchor(m);
    }
    r.logscale -= std::log(std::abs(vdm));
    r.factor = std::polar(1.0, phase) * std::abs(vdm) / vdm;
    return r;
}

RawMatrix prepare(cplx lambda, const ProblemSpec& spec, bool& degenerate, cplx& used) {
    const auto& p = spec.physical;
    if (is_excluded(lambda, p.alpha)) throw Error(ErrorCode::ExcludedPoint, "determinant at -1/alpha");
    used = lambda;
    degenerate = false;
    const cplx dir = std::polar(1.0, std::numbers::pi / 7);
    for (int attempt = 0; attempt <= 3; ++attempt) {
        const auto c = quartic_coeffs(used, p);
        const auto b = characteristic_roots(c);
        if (!b.confluent || max_re(b) <= kMatrixRouteReMu) return raw_matrix(used, spec, b, c);
        degenerate = true;
        used = lambda + double(attempt + 1) * 1e-8 * (1 + std::abs(lambda)) * dir;
    }
    throw Error(ErrorCode::ConfluentBasis, "confluent exponents after perturbation retries");
}

}  // namespace

std::array<BoundaryForm, 4> boundary_rows(cplx, const ProblemSpec& spec) {
    std::array<BoundaryForm, 4> f;
    end_rows(spec.end0, 0, f[0], f[1]);
    end_rows(spec.end1, 1, f[2], f[3]);
    return f;
}

CharDetValue char_det(cplx lambda, const ProblemSpec& spec) {
    CharDetValue out;
    RawMatrix r = prepare(lambda, spec, out.degenerate, out.lambda_used);
    double hadamard = 1;
    out.logscale = r.logscale;
    for (int i = 0; i < 4; ++i) {
        const double scale = r.M.row(i).cwiseAbs().maxCoeff();
        if (scale == 0) throw Error(ErrorCode::SingularSystem, "zero boundary row");
        r.M.row(i) /= scale;
        out.logscale += std::log(scale);
        hadamard *= r.M.row(i).norm();
    }
    const cplx d = r.M.partialPivLu().determinant();
    out.value = d * r.factor;
    out.relative = std::abs(d) / hadamard;
    out.route = r.route;
    return out;
}

cplx char_det_derivative(cplx lambda, const ProblemSpec& spec, double h) {
    const double alpha = spec.physical.alpha;
    if (h <= 0) {
        h = 1e-6 * (1 + std::abs(lambda));
        h = std::min(h, 1e-3 * std::abs(lambda + 1.0 / alpha));
    }
    const CharDetValue f0 = char_det(lambda, spec);
    const CharDetValue fp = char_det(lambda + h, spec);
    const CharDetValue fm = char_det(lambda - h, spec);
    return (fp.value * std::exp(fp.logscale - f0.logscale) - fm.value * std::exp(fm.logscale - f0.logscale)) /
           (2 * h);
}

cplx newton_step(cplx lambda, const ProblemSpec& spec) {
    const CharDetValue f0 = char_det(lambda, spec);
    return f0.value / char_det_derivative(lambda, spec);
}

EigenfunctionSample eigenfunction(cplx lambda_star, const ProblemSpec& spec, int grid_size, double tolerance) {
    if (grid_size < 2) throw Error(ErrorCode::PreconditionViolation, "grid_size must be at least 2");
    std::vector<double> grid(grid_size);
    for (int k = 0; k < grid_size; ++k) grid[k] = double(k) / (grid_size - 1);
    return eigenfunction(lambda_star, spec, grid, tolerance);
}

EigenfunctionSample eigenfunction(cplx lambda_star, const ProblemSpec& spec, const std::vector<double>& grid,
                                  double tolerance) {
    if (grid.empty()) throw Error(ErrorCode::PreconditionViolation, "empty grid");
    const int grid_size = int(grid.size());
    bool degenerate;
    cplx used;
    RawMatrix r = prepare(lambda_star, spec, degenerate, used);
    for (int i = 0; i < 4; ++i) r.M.row(i) /= r.M.row(i).cwiseAbs().maxCoeff();
    Eigen::JacobiSVD<Eigen::Matrix4cd> svd(r.M, Eigen::ComputeFullV);
    const auto sv = svd.singularValues();

    EigenfunctionSample out;
    out.route = r.route;
    out.residual = sv(3) / sv(0);
    if (!(out.residual <= tolerance))
        throw Error(ErrorCode::NotAnEigenvalue, "boundary matrix is not singular enough");
    out.a = svd.matrixV().col(3);

    auto cauchy = [&](double s) -> Eigen::Vector4cd {
        if (r.route == DetRoute::MatrixExponential) {
            const auto c = quartic_coeffs(used, spec.physical);
            return (companion(c) * s).exp() * out.a;
        }
        return basis_eval(r.basis, s).values * out.a;
    };

    out.grid = grid;
    out.w_values.resize(grid_size);
    for (int k = 0; k < grid_size; ++k) out.w_values[k] = cauchy(grid[k])(0);
    int kmax = 0;
    for (int k = 1; k < grid_size; ++k)
        if (std::abs(out.w_values[k]) > std::abs(out.w_values[kmax])) kmax = k;
    const cplx norm = out.w_values[kmax];
    for (auto& w : out.w_values) w /= norm;
    out.a /= norm;
    out.endpoint0 = cauchy(0.0);
    out.endpoint1 = cauchy(1.0);

    const auto forms = boundary_rows(used, spec);
    out.bc_residual = 0;
    for (const auto& f : forms) {
        const Eigen::RowVector4cd row = f.at(used);
        const Eigen::Vector4cd& y = f.endpoint == 0 ? out.endpoint0 : out.endpoint1;
        const double scale = row.cwiseAbs().maxCoeff() * std::max(1.0, y.cwiseAbs().maxCoeff());
        out.bc_residual = std::max(out.bc_residual, std::abs((row * y).value()) / scale);
    }
    return out;
}

}  // namespace tubespec
