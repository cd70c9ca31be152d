#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "oracles.hpp"
#include "tubespec/asymptotics.hpp"
#include "tubespec/energy.hpp"
#include "tubespec/io.hpp"
#include "tubespec/pencil.hpp"
#include "tubespec/workers.hpp"

using namespace tubespec;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool ok = true;
    std::string detail;
};

// Checks for the criterion being run; printed as a single line once it finishes.
Outcome current;

void report(int, bool ok, const std::string& detail) {
    current.ok = current.ok && ok;
    if (!current.detail.empty()) current.detail += " | ";
    current.detail += (ok ? "" : "[failed] ") + detail;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

SearchOptions options() {
    SearchOptions o;
    o.workers = resolve_workers(int(std::max(1u, std::thread::hardware_concurrency())));
    return o;
}

double nearest_rel(cplx z, const std::vector<EigenvalueRecord>& pool) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : pool) best = std::min(best, std::abs(p.lambda - z) / (1 + std::abs(z)));
    return best;
}

double conjugate_mismatch(const std::vector<EigenvalueRecord>& recs) {
    double worst = 0;
    for (const auto& r : recs) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : recs) best = std::min(best, std::abs(q.lambda - std::conj(r.lambda)));
        worst = std::max(worst, best / (1 + std::abs(r.lambda)));
    }
    return worst;
}

std::vector<std::vector<EigenvalueRecord>> all_spectra;

void oracle_agreement() {
    const std::pair<const char*, ProblemSpec> specs[] = {
        {"a", oracle::spec_a()}, {"b", oracle::spec_b()}, {"c", oracle::spec_c()}};
    for (const auto& [name, spec] : specs) {
        const auto t0 = Clock::now();
        const auto res = find_spectrum(spec, FirstPairs{12}, options());
        const auto orec = oracle_records(oracle_spectrum(spec, 64, 80, options().workers), spec);
        const double elapsed = seconds_since(t0);
        all_spectra.push_back(res.records);

        std::vector<EigenvalueRecord> upper;
        for (const auto& r : res.records)
            if (r.lambda.imag() >= 0) upper.push_back(r);
        std::sort(upper.begin(), upper.end(),
                  [](const auto& a, const auto& b) { return std::abs(a.lambda) > std::abs(b.lambda); });
        double worst = 0, worst_large = 0;
        for (std::size_t k = 0; k < upper.size(); ++k) {
            const double d = nearest_rel(upper[k].lambda, orec);
            double& slot = k < 2 ? worst_large : worst;
            slot = std::max(slot, d);
        }
        double converse = 0;
        for (std::size_t k = 0; k < std::min<std::size_t>(12, orec.size()); ++k)
            converse = std::max(converse, nearest_rel(orec[k].lambda, res.records));
        const bool ok = upper.size() >= 12 && orec.size() >= 12 && worst <= 1e-5 && worst_large <= 1e-3 &&
                        converse <= 1e-5 && res.search_meta.census_ok && elapsed <= 60;
        report(1, ok,
               std::string("spec (") + name + ") " + std::to_string(upper.size()) + " upper eigenvalues" +
                   fmt(", worst rel diff %.2e (two largest %.2e)", worst, worst_large) +
                   fmt(", oracle-to-determinant %.2e, %.1f s", converse, elapsed));
    }
}

void left_half_plane() {
    const std::pair<const char*, ProblemSpec> specs[] = {
        {"clamped/clamped", oracle::spec(0.1, 0.4, 0, 0.1, Clamped{}, Clamped{})},
        {"generalized k=1", oracle::spec(0.1, 0.4, 0, 0.1, Generalized{1, 1, 1, 1}, Generalized{1, 1, 1, 1})},
        {"hinged/free", oracle::spec_c()}};
    for (const auto& [name, spec] : specs) {
        const auto res = find_spectrum(spec, FirstPairs{12}, options());
        all_spectra.push_back(res.records);
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& r : res.records) worst = std::max(worst, r.lambda.real() / (1 + std::abs(r.lambda)));
        const bool ok = worst <= 1e-8 && res.search_meta.rhp_winding == 0 && res.search_meta.census_ok;
        report(2, ok,
               std::string(name) + fmt(": max Re/(1+|l|) = %.2e, right half-plane winding %.0f over cap %.3g", worst,
                                       res.search_meta.rhp_winding, res.search_meta.rhp_cap));
    }
}

void conjugate_symmetry() {
    double worst = 0;
    std::size_t count = 0;
    for (const auto& recs : all_spectra) {
        worst = std::max(worst, conjugate_mismatch(recs));
        count += recs.size();
    }
    report(3, count > 0 && worst <= 1e-8,
           std::to_string(count) + " eigenvalues" + fmt(", worst conjugate mismatch %.2e", worst));
}

void classical_beam() {
    const auto t0 = Clock::now();
    const double mu1 = oracle::beam_mu1();
    const auto res = find_spectrum(oracle::spec(1e-5, 0, 0, 0, Clamped{}, Clamped{}), FirstPairs{1}, options());
    const double elapsed = seconds_since(t0);
    bool ok = res.records.size() == 2;
    double worst = 0;
    for (const auto& r : res.records) {
        worst = std::max(worst, std::abs(std::abs(r.lambda.imag()) - mu1 * mu1) / (mu1 * mu1));
        ok = ok && r.lambda.real() < 0;
    }
    ok = ok && worst <= 2e-3 && elapsed <= 10;
    report(4, ok, fmt("mu1 = %.6f, relative error %.2e, %.2f s", mu1, worst, elapsed));
}

void leading_asymptotics() {
    const std::pair<const char*, ProblemSpec> specs[] = {
        {"generalized k04=k14=1", oracle::spec_b()},
        {"clamped", oracle::spec_a()},
        {"k04=k14=0", oracle::spec(0.1, 0.4, 4, 0.1, Generalized{1, 1, 1, 0}, Generalized{1, 1, 1, 0})}};
    for (const auto& [name, spec] : specs) {
        const auto model = make_model(spec);
        const auto res = branch_band_spectrum(spec, 8, 25, options());
        all_spectra.push_back(res.records);
        std::string detail = std::string(name) + " (" + to_string(model.variant) + "): ";
        bool ok = false;
        try {
            const FitReport t1 = fit_remainder(res.records, model, Reference::Base, 8);
            ok = (t1.at_floor || t1.exponent >= 0.9) && t1.n_lo == 8 && t1.n_hi == 25;
            detail += fmt("n %.0f..%.0f, leading-term decay exponent %.3f", t1.n_lo, t1.n_hi, t1.exponent) +
                      fmt(", C = %.3g", t1.c_bound);
            if (!ok) {
                const auto longer = branch_band_spectrum(spec, 8, 120, options());
                const FitReport wide = fit_remainder(longer.records, model, Reference::Base, 8);
                detail += fmt(" (n 8..120 gives %.3f)", wide.exponent);
            }
            const auto fo = first_order_diagnostic(res.records, model, 8);
            detail += fmt("; 1/n coefficient diagnostic measured |%.3g| vs bracket |%.3g|", std::abs(fo.measured),
                          std::abs(fo.predicted));
        } catch (const Error& e) {
            detail += e.what();
        }
        report(5, ok, detail);
    }
}

void clamped_limit() {
    const auto rep = limit_studies(oracle::spec_b(), Study::ClampedLimit, options());
    const bool ok = rep.flags.at("complete") && rep.flags.at("monotone_in_k") && rep.flags.at("terminal_within_1e-3");
    report(6, ok,
           fmt("terminal distance %.2e, monotone %.0f, complete %.0f", rep.numbers.at("terminal_distance"),
               rep.flags.at("monotone_in_k"), rep.flags.at("complete")));
}

void k02_independence() {
    const auto base = oracle::spec(0.1, 0.4, 4, 0.1, Generalized{1, 1, 1, 0}, Generalized{1, 1, 1, 0});
    const auto rep = limit_studies(base, Study::K02, options());
    const bool ok = rep.flags.at("complete") && rep.flags.at("decay_exponent_at_least_0.9");
    report(7, ok,
           fmt("decay exponent %.3f over %.0f indices, max distance %.2e", rep.numbers.at("decay_exponent"),
               rep.numbers.at("matched_indices"), rep.numbers.at("max_pair_distance")));
}

double state_norm(const State& x, InnerKind kind, const EnergyWeights& wt) {
    return std::sqrt(std::max(0.0, inner_product(x, x, kind, wt).real()));
}

void dissipativity() {
    const auto spec = oracle::spec_b();
    const EnergyWeights wt = energy_weights(spec);
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    double worst_lhs = -std::numeric_limits<double>::infinity(), worst_match = 0;
    for (int i = 0; i < 200; ++i) {
        const State x = random_state(rng, 8, true);
        const auto d = dissipation_identity(x, spec);
        const double scale = std::pow(state_norm(x, InnerKind::X_prime, wt), 2);
        worst_lhs = std::max(worst_lhs, d.lhs / scale);
        worst_match = std::max(worst_match, std::abs(d.lhs - d.rhs) / (1 + std::abs(d.rhs)));
    }
    const double elapsed = seconds_since(t0);
    report(8, worst_lhs <= 1e-10 && worst_match <= 1e-8 && elapsed <= 5,
           fmt("max lhs/scale %.2e, identity mismatch %.2e, %.2f s", worst_lhs, worst_match, elapsed));
}

void inverse_round_trip() {
    const auto spec = oracle::spec_b();
    const EnergyWeights wt = energy_weights(spec);
    std::mt19937_64 rng(4048);
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
        const State t = random_state(rng, 8, false);
        const State back = apply_A0(a0_inverse(t, spec), spec);
        worst = std::max(worst, state_norm(back - t, InnerKind::X, wt) / state_norm(t, InnerKind::X, wt));
    }
    report(9, worst <= 1e-8, fmt("worst relative round-trip error %.2e over 50 states", worst));
}

void winding_census() {
    const auto spec = oracle::spec_b();
    const auto reference = find_spectrum(spec, FirstPairs{12}, options());
    std::vector<cplx> upper;
    double reach = 0;
    for (const auto& r : reference.records)
        if (r.lambda.imag() >= 0) {
            upper.push_back(r.lambda);
            reach = std::max(reach, std::abs(r.lambda));
        }
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0, 1);
    std::uniform_int_distribution<std::size_t> pick(0, upper.size() - 1);
    int boxes = 0, mismatches = 0, roots = 0, missed = 0;
    while (boxes < 50) {
        // Even boxes are placed around a known eigenvalue, odd ones anywhere in the searched disc.
        const double w = (0.01 + 0.3 * u(rng)) * reach, h = (0.01 + 0.3 * u(rng)) * reach;
        cplx corner;
        if (boxes % 2 == 0) {
            const cplx z = upper[pick(rng)];
            corner = z - cplx(u(rng) * w, u(rng) * h);
        } else {
            corner = cplx((2 * u(rng) - 1) * reach, (u(rng) - 0.1) * reach);
        }
        const Box b{corner.real(), corner.real() + w, corner.imag(), corner.imag() + h};
        if (b.contains(cplx(-1 / spec.physical.alpha, 0), 1.0)) continue;
        const auto res = find_spectrum(spec, LambdaRegion{b}, options());
        int total = 0;
        for (const auto& r : res.records) total += r.multiplicity;
        roots += total;
        if (total != res.search_meta.region_winding) ++mismatches;
        for (const auto& z : upper)
            if (b.contains(z, -1e-9 * (1 + std::abs(z)))) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& r : res.records) best = std::min(best, std::abs(r.lambda - z));
                if (best > 1e-7 * (1 + std::abs(z))) ++missed;
            }
        ++boxes;
    }
    report(10, mismatches == 0 && missed == 0,
           std::to_string(boxes) + " boxes, " + std::to_string(roots) + " roots, " + std::to_string(mismatches) +
               " census mismatches, " + std::to_string(missed) + " known eigenvalues missed");
}

void sector_location() {
    int checked = 0, violations = 0;
    for (const auto& recs : all_spectra)
        for (const auto& r : recs)
            if (r.branch_index && *r.branch_index >= 10) {
                ++checked;
                if (!(std::abs(r.lambda.imag()) <= std::abs(r.lambda.real()) && r.lambda.real() < 0)) ++violations;
            }
    report(11, checked > 0 && violations == 0,
           std::to_string(checked) + " indexed eigenvalues with n >= 10, " + std::to_string(violations) +
               " outside the sector");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void determinism() {
    const fs::path root = fs::temp_directory_path() / ("tubespec-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(root);
    {
        std::ofstream cfg(root / "run.cfg");
        cfg << "alpha = 0.1\nbeta = 0.4\neta = 4\ndelta = 0.1\nseed = 5\n"
               "end0.variant = generalized\nend0.k1 = 1\nend0.k2 = 1\nend0.k3 = 1\nend0.k4 = 1\n"
               "end1.variant = clamped\n";
    }
    bool ok = true;
    std::string detail;
    const char* workers[] = {"1", "3"};
    for (int run = 0; run < 2; ++run) {
        const fs::path out = root / ("run" + std::to_string(run));
        const std::string cmd = std::string(TUBESPEC_CLI) + " spectrum --config " + (root / "run.cfg").string() +
                                " --pairs 8 --workers " + workers[run] + " --output " + out.string() +
                                " > /dev/null";
        if (std::system(cmd.c_str()) != 0) {
            ok = false;
            detail = "CLI run failed: " + cmd;
        }
    }
    for (const char* file : {"spectrum.csv", "spectrum.json"}) {
        const std::string a = slurp(root / "run0" / file), b = slurp(root / "run1" / file);
        const bool same = !a.empty() && a == b;
        ok = ok && same;
        detail += std::string(file) + (same ? " identical (" + std::to_string(a.size()) + " bytes); " : " differs; ");
    }
    fs::remove_all(root);
    report(12, ok, detail + "runs used 1 and 3 workers");
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    int failures = 0;
    auto guarded = [&](int id, void (*fn)()) {
        current = {};
        try {
            fn();
        } catch (const std::exception& e) {
            report(id, false, std::string("exception: ") + e.what());
        }
        std::printf("%s criterion %d: %s\n", current.ok ? "PASS" : "FAIL", id, current.detail.c_str());
        std::fflush(stdout);
        if (!current.ok) ++failures;
    };
    guarded(1, oracle_agreement);
    guarded(2, left_half_plane);
    guarded(3, conjugate_symmetry);
    guarded(4, classical_beam);
    guarded(5, leading_asymptotics);
    guarded(6, clamped_limit);
    guarded(7, k02_independence);
    guarded(8, dissipativity);
    guarded(9, inverse_round_trip);
    guarded(10, winding_census);
    guarded(11, sector_location);
    guarded(12, determinism);
    std::printf("%d of 12 criteria failing, %.1f s total\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
