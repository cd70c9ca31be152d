#include "tubespec/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tubespec/charbasis.hpp"

namespace tubespec {

namespace {

constexpr double kPi = std::numbers::pi;

double clamped_bracket_scale(const PhysicalParams& p) {
    return 0.25 * std::sqrt(1.0 / p.alpha) * (p.delta - 1.0 / p.alpha);
}

// Contribution of one end to the base offset theta (mod 1).
double end_offset(const EndCondition& end) {
    if (const auto* g = std::get_if<Generalized>(&end)) {
        const bool b = g->kB > 0, d = g->kD > 0;
        if (b && d) return 0.25;
        if (b) return 0.5;
        if (d) return 0.0;
        return 0.25;
    }
    if (std::holds_alternative<Clamped>(end) || std::holds_alternative<Free>(end)) return 0.25;
    if (std::holds_alternative<Hinged>(end)) return 0.0;
    return 0.5;
}

}  // namespace

const char* to_string(AsymptoticVariant v) {
    switch (v) {
    case AsymptoticVariant::GeneralizedNonzeroD: return "generalized-nonzero-d";
    case AsymptoticVariant::Clamped: return "clamped";
    case AsymptoticVariant::ZeroD: return "zero-d";
    case AsymptoticVariant::LeadingOrder: return "leading-order";
    }
    return "unknown";
}

const char* to_string(Study s) {
    switch (s) {
    case Study::ClampedLimit: return "clamped-limit";
    case Study::K02: return "k02";
    case Study::BetaEta: return "beta-eta";
    }
    return "unknown";
}

AsymptoticModel generalized_model(const PhysicalParams& p, double k04, double k14) {
    AsymptoticModel m;
    m.variant = AsymptoticVariant::GeneralizedNonzeroD;
    m.theta = 0.5;
    m.params = p;
    m.correction = (1.0 / p.alpha) * (1.0 / k04 + 1.0 / k14) * omega(1) + clamped_bracket_scale(p) * omega(2);
    return m;
}

AsymptoticModel clamped_model(const PhysicalParams& p) {
    AsymptoticModel m;
    m.variant = AsymptoticVariant::Clamped;
    m.theta = 0.5;
    m.params = p;
    m.correction = clamped_bracket_scale(p) * omega(2);
    return m;
}

AsymptoticModel zero_d_model(const PhysicalParams& p) {
    AsymptoticModel m;
    m.variant = AsymptoticVariant::ZeroD;
    m.theta = 0.0;
    m.params = p;
    m.correction = clamped_bracket_scale(p) * omega(2);
    return m;
}

AsymptoticModel make_model(const ProblemSpec& spec) {
    const auto& p = spec.physical;
    const auto* g0 = std::get_if<Generalized>(&spec.end0);
    const auto* g1 = std::get_if<Generalized>(&spec.end1);
    if (std::holds_alternative<Clamped>(spec.end0) && std::holds_alternative<Clamped>(spec.end1))
        return clamped_model(p);
    if (g0 && g1) {
        if (g0->kB > 0 && g0->kD > 0 && g1->kB > 0 && g1->kD > 0) return generalized_model(p, g0->kD, g1->kD);
        if (g0->kB > 0 && g1->kB > 0 && g0->kD == 0 && g1->kD == 0) return zero_d_model(p);
    }
    AsymptoticModel m;
    m.variant = AsymptoticVariant::LeadingOrder;
    m.params = p;
    m.correction = 0;
    m.theta = std::fmod(end_offset(spec.end0) + end_offset(spec.end1), 1.0);
    return m;
}

cplx rho_n_base(int n, const AsymptoticModel& model) { return (n + model.theta) * kPi * omega(2); }

cplx rho_n_predicted(int n, const AsymptoticModel& model) {
    const double b = (n + model.theta) * kPi;
    const cplx i(0, 1);
    switch (model.variant) {
    case AsymptoticVariant::GeneralizedNonzeroD:
    case AsymptoticVariant::Clamped: return b * omega(2) - i * model.correction / b;
    case AsymptoticVariant::ZeroD: return b * omega(2) + i * model.correction / b;
    case AsymptoticVariant::LeadingOrder: break;
    }
    return b * omega(2);
}

LambdaPrediction lambda_n_predicted(int n, const AsymptoticModel& model, double alpha) {
    const cplx base = rho_n_base(n, model);
    const cplx rho = rho_n_predicted(n, model);
    const cplx b2 = base * base;
    const cplx first = 4.0 * alpha * b2 * base * (rho - base);
    LambdaPrediction out;
    out.total = rho_to_lambda(rho, alpha);
    out.leading = (alpha * b2 * b2).real();
    out.real_correction = first.real();
    out.imag_correction = first.imag();
    return out;
}

cplx upper_rho(cplx lambda, double alpha) {
    return map_lambda_rho(lambda.imag() < 0 ? std::conj(lambda) : lambda, alpha).rho;
}

double asymptotic_radius(double) { return 3 * kPi; }

void assign_branches(std::vector<EigenvalueRecord>& records, const ProblemSpec& spec) {
    const double alpha = spec.physical.alpha;
    const AsymptoticModel model = make_model(spec);
    const cplx ray = std::polar(1.0, kPi / 4);
    const double r_asym = asymptotic_radius(alpha);
    // Separate claims for each half-plane; the nearest record wins a contested index.
    std::map<std::pair<int, bool>, std::pair<std::size_t, double>> claims;
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& r = records[i];
        r.branch_index.reset();
        if (is_excluded(r.lambda, alpha) || std::abs(1.0 + alpha * r.lambda) < 0.5) continue;
        const cplx rho = upper_rho(r.lambda, alpha);
        if (std::abs(rho) < r_asym) continue;
        const int n = int(std::lround((rho / ray).real() / kPi - model.theta));
        if (n < 1) continue;
        const double d = std::abs(rho - (n + model.theta) * kPi * ray);
        if (d >= kPi / 2) continue;
        const auto key = std::make_pair(n, r.lambda.imag() < 0);
        auto it = claims.find(key);
        if (it == claims.end() || d < it->second.second) claims[key] = {i, d};
    }
    for (const auto& [key, val] : claims) records[val.first].branch_index = key.first;
}

std::map<int, cplx> branch_map(const std::vector<EigenvalueRecord>& records, double alpha) {
    std::map<int, cplx> out;
    for (const auto& r : records)
        if (r.branch_index && r.lambda.imag() >= 0) out[*r.branch_index] = upper_rho(r.lambda, alpha);
    return out;
}

namespace {

// Longest run of consecutive indices >= n_min.
std::vector<std::pair<int, cplx>> consecutive_run(const std::map<int, cplx>& m, int n_min) {
    std::vector<std::pair<int, cplx>> best, cur;
    for (const auto& [n, rho] : m) {
        if (n < n_min) continue;
        if (!cur.empty() && n != cur.back().first + 1) {
            if (cur.size() > best.size()) best = cur;
            cur.clear();
        }
        cur.push_back({n, rho});
    }
    if (cur.size() > best.size()) best = cur;
    return best;
}

}  // namespace

FitReport fit_remainder(const std::vector<EigenvalueRecord>& records, const AsymptoticModel& model,
                        Reference reference, int n_min) {
    const double alpha = model.params.alpha;
    const auto run = consecutive_run(branch_map(records, alpha), n_min);
    if (run.size() < 6) throw Error(ErrorCode::InsufficientData, "fewer than 6 consecutive branch-matched records");
    FitReport rep;
    rep.n_lo = run.front().first;
    rep.n_hi = run.back().first;
    std::vector<double> ns, gaps;
    std::vector<cplx> diffs;
    double scale = 0;
    for (const auto& [n, rho] : run) {
        const cplx pred = reference == Reference::Full ? rho_n_predicted(n, model) : rho_n_base(n, model);
        const cplx diff = rho - upper_rho(rho_to_lambda(pred, alpha), alpha);
        ns.push_back(n);
        gaps.push_back(std::abs(diff));
        diffs.push_back(diff);
        scale = std::max(scale, std::abs(rho));
        rep.c_bound = std::max(rep.c_bound, std::abs(diff) * n);
    }
    rep.max_gap = *std::max_element(gaps.begin(), gaps.end());
    if (rep.max_gap <= 1e-12 * scale) {
        rep.at_floor = true;
        return rep;
    }
    for (auto& g : gaps) g = std::max(g, 1e-300);
    rep.exponent = fit_decay_exponent(ns, gaps, nullptr, &rep.residual_of_fit);
    cplx c = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) c += diffs[i] * std::pow(ns[i], rep.exponent);
    rep.coefficient = c / double(ns.size());
    return rep;
}

FirstOrderDiagnostic first_order_diagnostic(const std::vector<EigenvalueRecord>& records,
                                            const AsymptoticModel& model, int n_min) {
    const double alpha = model.params.alpha;
    const auto run = consecutive_run(branch_map(records, alpha), n_min);
    if (run.empty()) throw Error(ErrorCode::InsufficientData, "no branch-matched records");
    FirstOrderDiagnostic d{0.0, 0.0};
    // Only the upper half of the run, where the first-order term dominates the remainder.
    const std::size_t start = run.size() / 2;
    for (std::size_t i = start; i < run.size(); ++i) {
        const int n = run[i].first;
        const double b = (n + model.theta) * kPi;
        const cplx base = upper_rho(rho_to_lambda(rho_n_base(n, model), alpha), alpha);
        const cplx pred = upper_rho(rho_to_lambda(rho_n_predicted(n, model), alpha), alpha);
        d.measured += (run[i].second - base) * b;
        d.predicted += (pred - base) * b;
    }
    const double count = double(run.size() - start);
    d.measured /= count;
    d.predicted /= count;
    return d;
}

SpectrumResult branch_band_spectrum(const ProblemSpec& spec, int n_lo, int n_hi, const SearchOptions& opt) {
    const AsymptoticModel model = make_model(spec);
    RhoBand band;
    band.r_lo = (n_lo + model.theta - 0.5) * kPi;
    band.r_hi = (n_hi + model.theta + 0.5) * kPi;
    return find_spectrum(spec, band, opt);
}

namespace {

std::map<int, cplx> band_spectrum(const ProblemSpec& spec, int n_lo, int n_hi, const SearchOptions& opt) {
    const auto res = branch_band_spectrum(spec, n_lo, n_hi, opt);
    auto m = branch_map(res.records, spec.physical.alpha);
    std::map<int, cplx> out;
    for (const auto& [n, rho] : m)
        if (n >= n_lo && n <= n_hi) out[n] = rho;
    return out;
}

Generalized with_slots(const EndCondition& end, double kB, double kD) {
    Generalized g = std::holds_alternative<Generalized>(end) ? std::get<Generalized>(end) : Generalized{1, 1, 1, 1};
    g.kB = kB;
    g.kD = kD;
    return g;
}

void add_rows(StudyReport& rep, const std::map<int, cplx>& a, const std::map<int, cplx>& ref, double param) {
    for (const auto& [n, rho] : a)
        if (auto it = ref.find(n); it != ref.end()) rep.rows.push_back({rep.study, n, param, rho - it->second});
}

double fit_or_zero(const std::vector<double>& x, const std::vector<double>& y) {
    return x.size() >= 2 ? fit_decay_exponent(x, y) : 0.0;
}

}  // namespace

StudyReport limit_studies(const ProblemSpec& base_in, Study study, const SearchOptions& opt) {
    const ProblemSpec base = validate(base_in);
    StudyReport rep;
    rep.study = to_string(study);
    if (study == Study::ClampedLimit) {
        ProblemSpec clamped = base;
        clamped.end0 = Clamped{};
        clamped.end1 = Clamped{};
        const auto ref = band_spectrum(clamped, 5, 15, opt);
        const double ks[] = {1e2, 1e3, 1e4};
        std::vector<std::map<int, cplx>> sweeps;
        for (double K : ks) {
            ProblemSpec s = base;
            s.end0 = with_slots(base.end0, K, K);
            s.end1 = with_slots(base.end1, K, K);
            sweeps.push_back(band_spectrum(s, 5, 15, opt));
            add_rows(rep, sweeps.back(), ref, K);
        }
        bool monotone = true, complete = true;
        double terminal = 0;
        for (int n = 5; n <= 15; ++n) {
            double prev = std::numeric_limits<double>::infinity();
            for (const auto& sw : sweeps) {
                if (!sw.count(n) || !ref.count(n)) {
                    complete = false;
                    continue;
                }
                const double d = std::abs(sw.at(n) - ref.at(n));
                if (!(d < prev)) monotone = false;
                prev = d;
            }
            if (sweeps.back().count(n) && ref.count(n)) terminal = std::max(terminal, std::abs(sweeps.back().at(n) - ref.at(n)));
        }
        rep.numbers["terminal_distance"] = terminal;
        rep.flags["complete"] = complete;
        rep.flags["monotone_in_k"] = monotone;
        rep.flags["terminal_within_1e-3"] = terminal <= 1e-3;
    } else if (study == Study::K02) {
        const double values[] = {0.1, 1.0, 10.0};
        std::vector<std::map<int, cplx>> sweeps;
        for (double k : values) {
            ProblemSpec s = base;
            s.end0 = with_slots(base.end0, k, 0.0);
            Generalized g1 = with_slots(base.end1, 1.0, 0.0);
            if (const auto* g = std::get_if<Generalized>(&base.end1); g && g->kB > 0) g1.kB = g->kB;
            s.end1 = g1;
            sweeps.push_back(band_spectrum(s, 10, 20, opt));
        }
        std::map<int, cplx> avg;
        for (int n = 10; n <= 20; ++n)
            if (sweeps[0].count(n) && sweeps[1].count(n) && sweeps[2].count(n))
                avg[n] = (sweeps[0].at(n) + sweeps[1].at(n) + sweeps[2].at(n)) / 3.0;
        for (std::size_t i = 0; i < 3; ++i) add_rows(rep, sweeps[i], avg, values[i]);
        std::vector<double> ns, ds;
        double mx = 0;
        for (const auto& [n, a] : avg) {
            const double d = std::abs(sweeps[0].at(n) - sweeps[2].at(n));
            ns.push_back(n);
            ds.push_back(std::max(d, 1e-300));
            mx = std::max(mx, d);
        }
        rep.numbers["max_pair_distance"] = mx;
        rep.numbers["decay_exponent"] = fit_or_zero(ns, ds);
        rep.numbers["matched_indices"] = double(ns.size());
        rep.flags["complete"] = ns.size() == 11;
        rep.flags["decay_exponent_at_least_0.9"] = rep.numbers["decay_exponent"] >= 0.9;
    } else {
        ProblemSpec driven = base;
        driven.end0 = with_slots(base.end0, std::holds_alternative<Generalized>(base.end0) ? std::get<Generalized>(base.end0).kB : 1.0, 1.0);
        driven.end1 = with_slots(base.end1, std::holds_alternative<Generalized>(base.end1) ? std::get<Generalized>(base.end1).kB : 1.0, 1.0);
        if (driven.physical.beta == 0 && driven.physical.eta == 0) {
            driven.physical.beta = 0.4;
            driven.physical.eta = 4.0;
        }
        ProblemSpec still = driven;
        still.physical.beta = 0;
        still.physical.eta = 0;
        const auto a = band_spectrum(driven, 8, 25, opt);
        const auto ref = band_spectrum(still, 8, 25, opt);
        add_rows(rep, a, ref, driven.physical.eta);
        std::vector<double> ns, ds;
        for (const auto& [n, rho] : a)
            if (ref.count(n)) {
                ns.push_back(n);
                ds.push_back(std::max(std::abs(rho - ref.at(n)), 1e-300));
            }
        rep.numbers["decay_exponent"] = fit_or_zero(ns, ds);
        rep.numbers["first_distance"] = ds.empty() ? 0.0 : ds.front();
        rep.numbers["last_distance"] = ds.empty() ? 0.0 : ds.back();
        rep.flags["complete"] = ns.size() == 18;
        rep.flags["decreasing"] = !ds.empty() && ds.back() < ds.front();
    }
    return rep;
}

}  // namespace tubespec
