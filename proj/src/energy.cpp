#include "tubespec/energy.hpp"

#include "tubespec/detfun.hpp"

namespace tubespec {

namespace {

void require_positive_m(const EnergyWeights& wt) {
    if (!(wt.m_diag.minCoeff() > 0))
        throw Error(ErrorCode::PreconditionViolation, "boundary operator needs k02, k04, k12, k14 > 0");
}

void require_domain(const State& x) {
    const double gap = (x.z - gamma_trace(x.v)).cwiseAbs().maxCoeff();
    if (!(gap <= kDomainTolerance))
        throw Error(ErrorCode::DomainViolation, "z differs from the trace of v by " + std::to_string(gap));
}

cplx w2_product(const StateFunction& w, const StateFunction& u, const EnergyWeights& wt) {
    const Eigen::Vector4cd gw = gamma_trace(w), gu = gamma_trace(u);
    const Eigen::Vector4d& k = wt.boundary_k;  // (k01, k03, k11, k13) pairs with (w', w) at each end
    return inner_product(w.derivative(2), u.derivative(2)) + k(1) * gw(1) * std::conj(gu(1)) +
           k(0) * gw(0) * std::conj(gu(0)) + k(3) * gw(3) * std::conj(gu(3)) + k(2) * gw(2) * std::conj(gu(2));
}

cplx z_product(const Eigen::Vector4cd& z, const Eigen::Vector4cd& y, const EnergyWeights& wt) {
    cplx sum = 0;
    for (int i = 0; i < 4; ++i) sum += wt.m_diag(i) * z(i) * std::conj(y(i));
    return sum;
}

}  // namespace

EnergyWeights energy_weights(const ProblemSpec& spec) {
    const Generalized e0 = end_parameters(spec.end0), e1 = end_parameters(spec.end1);
    EnergyWeights wt;
    wt.m_diag << e0.kB, e0.kD, e1.kB, e1.kD;
    wt.boundary_k << e0.kA, e0.kC, e1.kA, e1.kC;
    wt.alpha = spec.physical.alpha;
    return wt;
}

Eigen::Vector4cd gamma_trace(const StateFunction& v) {
    const StateFunction d = v.derivative();
    return {d(0.0), v(0.0), d(1.0), v(1.0)};
}

cplx inner_product(const StateFunction& f, const StateFunction& g) {
    int n = f.degree() + g.degree() + 2;
    n += n % 2;
    const VectorX<double> s = cheb_nodes<double>(n);
    const VectorX<double> wq = clenshaw_curtis_weights<double>(n);
    cplx sum = 0;
    for (int j = 0; j <= n; ++j) sum += wq(j) * f(s(j)) * std::conj(g(s(j)));
    return sum;
}

cplx inner_product(const State& x, const State& y, InnerKind kind, const EnergyWeights& wt) {
    switch (kind) {
        case InnerKind::W2_part:
            return w2_product(x.w, y.w, wt);
        case InnerKind::L2_part:
            return inner_product(x.v, y.v);
        case InnerKind::Z_part:
            return z_product(x.z, y.z, wt);
        case InnerKind::X:
            return w2_product(x.w, y.w, wt) + inner_product(x.v, y.v) + wt.alpha * z_product(x.z, y.z, wt);
        case InnerKind::X_prime: {
            const double a = wt.alpha;
            return a * a * w2_product(x.w, y.w, wt) + inner_product(x.v - x.w, y.v - y.w) +
                   a * z_product(x.z - gamma_trace(x.w), y.z - gamma_trace(y.w), wt);
        }
    }
    return 0;
}

State apply_A0(const State& x, const ProblemSpec& spec) {
    const EnergyWeights wt = energy_weights(spec);
    require_positive_m(wt);
    require_domain(x);
    const double a = spec.physical.alpha, d = spec.physical.delta;
    const StateFunction diff = x.v - x.w;
    State out;
    out.w = cplx(1 / a) * diff;
    out.v = cplx(-a) * x.v.derivative(4) - cplx((a * d - 1) / a) * diff;
    const StateFunction v1 = x.v.derivative(1), v2 = x.v.derivative(2), v3 = x.v.derivative(3);
    const Eigen::Vector4d& k = wt.boundary_k;
    out.z << v2(0.0) - k(0) * v1(0.0), -v3(0.0) - k(1) * x.v(0.0), -v2(1.0) - k(2) * v1(1.0),
        v3(1.0) - k(3) * x.v(1.0);
    out.z = out.z.cwiseQuotient(wt.m_diag.cast<cplx>());
    return out;
}

State apply_A1(const State& x, const ProblemSpec& spec) {
    const auto& p = spec.physical;
    State out;
    out.v = cplx(-p.alpha * p.eta) * x.w.derivative(2) -
            cplx(2 * p.beta * std::sqrt(p.eta)) * (x.v.derivative() - x.w.derivative());
    return out;
}

DissipationIdentity dissipation_identity(const State& x, const ProblemSpec& spec) {
    const EnergyWeights wt = energy_weights(spec);
    const State ax = apply_A0(x, spec);
    DissipationIdentity r;
    r.lhs = 2 * inner_product(ax, x, InnerKind::X_prime, wt).real();

    const double a = spec.physical.alpha, d = spec.physical.delta;
    const StateFunction diff = x.v - x.w;
    const Eigen::Vector4cd g = gamma_trace(diff);
    const Eigen::Vector4d& m = wt.m_diag;
    const Eigen::Vector4d& k = wt.boundary_k;
    r.rhs = -2 * a * inner_product(diff.derivative(2), diff.derivative(2)).real() -
            2 * d * inner_product(diff, diff).real() - 2 * (m(1) + a * k(1)) * std::norm(g(1)) -
            2 * (m(0) + a * k(0)) * std::norm(g(0)) - 2 * (m(3) + a * k(3)) * std::norm(g(3)) -
            2 * (m(2) + a * k(2)) * std::norm(g(2));
    return r;
}

Eigen::Matrix4d a0_system_matrix(const EnergyWeights& wt) {
    const double k01 = wt.boundary_k(0), k03 = wt.boundary_k(1), k11 = wt.boundary_k(2), k13 = wt.boundary_k(3);
    Eigen::Matrix4d A;
    A << 0, -k01, 1, 0,
         k03, 0, 0, 1,
         0, k11, 1 + k11, 1 + k11 / 2,
         -k13, -k13, -k13 / 2, 1 - k13 / 6;
    return A;
}

State a0_inverse(const State& t, const ProblemSpec& spec) {
    const EnergyWeights wt = energy_weights(spec);
    require_positive_m(wt);
    const double a = spec.physical.alpha, d = spec.physical.delta;
    const StateFunction f = cplx(-(a * d - 1) / a) * t.w - cplx(1 / a) * t.v;
    const StateFunction i1 = f.antiderivative(), i2 = i1.antiderivative(), i3 = i2.antiderivative(),
                        i4 = i3.antiderivative();

    const Eigen::Matrix4d A = a0_system_matrix(wt);
    const double det = A.determinant();
    if (!(std::abs(det) > 1e-14 * std::max(1.0, A.cwiseAbs().maxCoeff())))
        throw Error(ErrorCode::SingularSystem, "inverse system determinant " + std::to_string(det));
    const Eigen::Vector4d& m = wt.m_diag;
    const double k11 = wt.boundary_k(2), k13 = wt.boundary_k(3);
    Eigen::Vector4cd rhs;
    rhs << m(0) * t.z(0), -m(1) * t.z(1), -m(2) * t.z(2) - i2(1.0) - k11 * i3(1.0),
        m(3) * t.z(3) - i1(1.0) + k13 * i4(1.0);
    const Eigen::Vector4cd c = A.cast<cplx>().partialPivLu().solve(rhs);

    State x;
    x.v = i4 + StateFunction::from_power({c(0), c(1), c(2) / 2.0, c(3) / 6.0});
    x.w = cplx(-a) * t.w + x.v;
    x.z = gamma_trace(x.v);
    return x;
}

State eigen_state(cplx lambda, const ProblemSpec& spec, int degree) {
    auto sample = [&](int n) {
        const VectorX<double> s = cheb_nodes<double>(n);
        const std::vector<double> grid(s.data(), s.data() + s.size());
        const EigenfunctionSample ef = eigenfunction(lambda, spec, grid);
        StateFunction::Coeffs values(n + 1);
        for (int j = 0; j <= n; ++j) values(j) = ef.w_values[j];
        return StateFunction::from_values(values);
    };
    StateFunction w;
    if (degree > 0) {
        w = sample(degree);
    } else {
        // smallest degree whose trailing coefficients have decayed
        for (int n = 16; n <= 128; n += 8) {
            w = sample(n);
            const auto& c = w.coeffs();
            if (c.tail(3).cwiseAbs().maxCoeff() <= 1e-13 * c.cwiseAbs().maxCoeff()) break;
        }
    }
    State x;
    x.w = w;
    x.v = (1.0 + spec.physical.alpha * lambda) * x.w;
    x.z = gamma_trace(x.v);
    return x;
}

State random_state(std::mt19937_64& rng, int degree, bool in_domain) {
    std::uniform_real_distribution<double> u(-1, 1);
    auto disc = [&] {
        for (;;) {
            const cplx c(u(rng), u(rng));
            if (std::norm(c) <= 1) return c;
        }
    };
    auto poly = [&] {
        StateFunction::Coeffs c(degree + 1);
        for (int k = 0; k <= degree; ++k) c(k) = disc();
        return StateFunction(c);
    };
    State x;
    x.w = poly();
    x.v = poly();
    if (in_domain) {
        x.z = gamma_trace(x.v);
    } else {
        for (int i = 0; i < 4; ++i) x.z(i) = disc();
    }
    return x;
}

}  // namespace tubespec
