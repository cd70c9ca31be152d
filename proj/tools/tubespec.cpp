#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "tubespec/asymptotics.hpp"
#include "tubespec/energy.hpp"
#include "tubespec/io.hpp"
#include "tubespec/pencil.hpp"
#include "tubespec/workers.hpp"

using namespace tubespec;
namespace fs = std::filesystem;

namespace {

enum Exit { Ok = 0, Gated = 1, BadConfig = 2, Computation = 3 };

struct Check {
    std::string name;
    bool passed;
    double value;
    double threshold;
};

struct Suite {
    std::string name;
    std::vector<Check> checks;
    nlohmann::json extra = nlohmann::json::object();
    bool skipped = false;
    std::string note;

    void add(std::string n, bool ok, double v, double t) { checks.push_back({std::move(n), ok, v, t}); }
    bool passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    nlohmann::json json() const {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& c : checks)
            list.push_back({{"name", c.name},
                            {"passed", c.passed},
                            {"value", std::isfinite(c.value) ? nlohmann::json(c.value) : nlohmann::json(nullptr)},
                            {"threshold", c.threshold}});
        nlohmann::json j = {{"suite", name}, {"passed", passed()}, {"skipped", skipped}, {"checks", list}};
        if (!note.empty()) j["note"] = note;
        if (!extra.empty()) j["diagnostics"] = extra;
        return j;
    }
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::PreconditionViolation, "cannot write " + path.string());
    out << text;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

double state_norm(const State& x, InnerKind kind, const EnergyWeights& wt) {
    return std::sqrt(std::max(0.0, inner_product(x, x, kind, wt).real()));
}

Suite energy_suite(const ProblemSpec& spec, std::uint64_t seed, int workers) {
    Suite s{"energy"};
    const EnergyWeights wt = energy_weights(spec);
    if (!(wt.m_diag.minCoeff() > 0)) {
        s.skipped = true;
        s.note = "boundary operator needs k02, k04, k12, k14 > 0";
        return s;
    }
    std::mt19937_64 rng(seed);
    double worst_lhs = -std::numeric_limits<double>::infinity(), worst_match = 0;
    for (int i = 0; i < 200; ++i) {
        const State x = random_state(rng, 8, true);
        const auto d = dissipation_identity(x, spec);
        const double scale = std::pow(state_norm(x, InnerKind::X_prime, wt), 2);
        worst_lhs = std::max(worst_lhs, d.lhs / std::max(scale, 1e-300));
        worst_match = std::max(worst_match, std::abs(d.lhs - d.rhs) / (1 + std::abs(d.rhs)));
    }
    s.add("dissipativity_lhs_over_scale", worst_lhs <= 1e-10, worst_lhs, 1e-10);
    s.add("identity_relative_mismatch", worst_match <= 1e-8, worst_match, 1e-8);

    double worst_inv = 0;
    for (int i = 0; i < 50; ++i) {
        const State t = random_state(rng, 8, false);
        const State back = apply_A0(a0_inverse(t, spec), spec);
        worst_inv = std::max(worst_inv, state_norm(back - t, InnerKind::X, wt) / state_norm(t, InnerKind::X, wt));
    }
    s.add("a0_inverse_round_trip", worst_inv <= 1e-8, worst_inv, 1e-8);

    double worst_lin = 0;
    for (int i = 0; i < 20; ++i) {
        const State x = random_state(rng, 8, true), y = random_state(rng, 8, true);
        const cplx a(0.7, -0.3), b(-1.1, 0.4);
        const State lhs = apply_A0(a * x + b * y, spec);
        const State rhs = a * apply_A0(x, spec) + b * apply_A0(y, spec);
        worst_lin = std::max(worst_lin, state_norm(lhs - rhs, InnerKind::X, wt) / state_norm(rhs, InnerKind::X, wt));
    }
    s.add("a0_linearity", worst_lin <= 1e-10, worst_lin, 1e-10);

    SearchOptions opt;
    opt.workers = workers;
    const auto res = find_spectrum(spec, FirstPairs{4}, opt);
    double worst_eig = 0;
    for (const auto& r : res.records) {
        if (r.lambda.imag() < 0) continue;
        const State x = eigen_state(r.lambda, spec);
        const State res_x = apply_A0(x, spec) + apply_A1(x, spec) - r.lambda * x;
        worst_eig = std::max(worst_eig, state_norm(res_x, InnerKind::X, wt) / state_norm(x, InnerKind::X, wt));
    }
    s.add("eigen_consistency", worst_eig <= 1e-6, worst_eig, 1e-6);
    s.extra["a0_system_determinant"] = a0_system_matrix(wt).determinant();
    return s;
}

Suite lemma_suite(const ProblemSpec& spec, const fs::path& out) {
    Suite s{"lemma"};
    const cplx rho0 = std::polar(10.0, 3 * std::numbers::pi / 16);
    const LemmaDiagnostic d = lemma_diagnostic(rho0, spec.physical);
    std::ofstream csv(out / "lemma.csv", std::ios::binary);
    write_lemma_csv(csv, d);

    bool nonincreasing = true;
    for (int m = 1; m <= 4; ++m) {
        double prev = std::numeric_limits<double>::infinity();
        for (const auto& r : d.rows) {
            if (r.m != m) continue;
            if (r.gap > prev * (1 + 1e-9) && r.gap > 1e-12) nonincreasing = false;
            prev = r.gap;
        }
    }
    s.add("gaps_nonincreasing", nonincreasing, nonincreasing ? 1 : 0, 1);
    s.add("max_gap_decay_exponent", d.max_gap_exponent >= 1.5, d.max_gap_exponent, 1.5);
    nlohmann::json per_m = nlohmann::json::array();
    for (int m = 0; m < 4; ++m)
        per_m.push_back({{"m", m + 1},
                         {"exponent", d.exponent[m]},
                         {"coefficient", {d.coefficient[m].real(), d.coefficient[m].imag()}}});
    s.extra["per_m"] = per_m;
    return s;
}

Suite oracle_suite(const ProblemSpec& spec, int workers) {
    Suite s{"oracle"};
    SearchOptions opt;
    opt.workers = workers;
    const auto res = find_spectrum(spec, FirstPairs{12}, opt);
    std::vector<cplx> det;
    for (const auto& r : res.records)
        if (r.lambda.imag() >= 0) det.push_back(r.lambda);
    const auto oracle = oracle_spectrum(spec, 64, 80, workers);
    const auto orec = oracle_records(oracle, spec);

    auto nearest = [](cplx z, const auto& pool, auto get) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : pool) best = std::min(best, std::abs(get(p) - z) / (1 + std::abs(z)));
        return best;
    };
    std::vector<std::size_t> order(det.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(det[a]) > std::abs(det[b]); });
    double worst = 0, worst_large = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const double d = nearest(det[order[k]], orec, [](const EigenvalueRecord& r) { return r.lambda; });
        double& slot = k < 2 ? worst_large : worst;
        slot = std::max(slot, d);
    }
    double converse = 0;
    for (std::size_t k = 0; k < std::min<std::size_t>(12, orec.size()); ++k)
        converse = std::max(converse, nearest(orec[k].lambda, res.records, [](const EigenvalueRecord& r) { return r.lambda; }));
    s.add("determinant_records", det.size() >= 12, double(det.size()), 12);
    s.add("agreement", worst <= 1e-5, worst, 1e-5);
    s.add("agreement_two_largest", worst_large <= 1e-3, worst_large, 1e-3);
    s.add("oracle_first_12_found", converse <= 1e-5, converse, 1e-5);
    s.add("census", res.search_meta.census_ok, res.search_meta.census_ok ? 1 : 0, 1);
    if (spec.physical.eta == 0) {
        double worst_re = -std::numeric_limits<double>::infinity();
        for (const auto& r : res.records) worst_re = std::max(worst_re, r.lambda.real() / (1 + std::abs(r.lambda)));
        s.add("closed_left_half_plane", worst_re <= 1e-8, worst_re, 1e-8);
        s.add("right_half_plane_winding", res.search_meta.rhp_winding == 0, res.search_meta.rhp_winding, 0);
    }
    return s;
}

struct Common {
    std::string config;
    std::string output = ".";
    int workers = 0;
};

ConfigFile load(const Common& c) {
    if (c.config.empty()) throw ConfigError("--config is required");
    return load_config(c.config);
}

int resolve(const Common& c, const ConfigFile& cfg) {
    const int requested = c.workers > 0 ? c.workers : cfg.workers.value_or(1);
    return resolve_workers(requested);
}

fs::path prepare_output(const Common& c) {
    fs::path out(c.output);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (!fs::is_directory(out)) throw ConfigError("output directory '" + c.output + "' is not writable");
    return out;
}

int cmd_spectrum(const Common& c, int pairs, const std::string& region) {
    const ConfigFile cfg = load(c);
    SearchTarget target = FirstPairs{pairs};
    if (!region.empty()) {
        std::vector<double> v;
        std::stringstream ss(region);
        for (std::string tok; std::getline(ss, tok, ',');) {
            try {
                std::size_t used = 0;
                v.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ConfigError("--region expects re0,re1,im0,im1");
            }
        }
        if (v.size() != 4 || !(v[0] < v[1]) || !(v[2] < v[3])) throw ConfigError("--region expects re0<re1,im0<im1");
        target = LambdaRegion{Box{v[0], v[1], v[2], v[3]}};
    } else if (pairs < 1) {
        throw ConfigError("--pairs must be positive");
    }
    SearchOptions opt;
    opt.workers = resolve(c, cfg);
    const fs::path out = prepare_output(c);
    const SpectrumResult res = find_spectrum(cfg.spec, target, opt);

    std::ostringstream csv;
    write_spectrum_csv(csv, res.records);
    write_file(out / "spectrum.csv", csv.str());
    write_file(out / "spectrum.json", dump(spectrum_json(res)));
    std::vector<SvgPoint> pts;
    for (const auto& r : res.records) pts.push_back({r.lambda});
    write_file(out / "spectrum.svg", scatter_svg({pts}, config_echo(cfg), true, "Re lambda", "Im lambda"));
    std::cout << res.records.size() << " eigenvalues, census " << (res.search_meta.census_ok ? "ok" : "FAILED")
              << "\n";
    return res.search_meta.census_ok ? Ok : Gated;
}

int cmd_asymptote(const Common& c, int n_max) {
    const ConfigFile cfg = load(c);
    if (n_max < 1) throw ConfigError("--n-max must be positive");
    SearchOptions opt;
    opt.workers = resolve(c, cfg);
    const fs::path out = prepare_output(c);
    const AsymptoticModel model = make_model(cfg.spec);
    const double alpha = cfg.spec.physical.alpha;
    const SpectrumResult res = branch_band_spectrum(cfg.spec, 1, n_max, opt);
    const auto computed = branch_map(res.records, alpha);

    std::ostringstream csv;
    csv << "n,re_rho_pred,im_rho_pred,re_rho,im_rho,abs_gap,abs_gap_base,re_lambda_pred,im_lambda_pred,"
           "lambda_leading,lambda_real_correction,lambda_imag_correction\n";
    std::vector<SvgPoint> pred_pts, comp_pts;
    for (int n = 1; n <= n_max; ++n) {
        const cplx pred = rho_n_predicted(n, model);
        const LambdaPrediction lp = lambda_n_predicted(n, model, alpha);
        pred_pts.push_back({pred, "#d62728"});
        csv << n << ',' << format_double(pred.real()) << ',' << format_double(pred.imag()) << ',';
        const auto it = computed.find(n);
        if (it != computed.end()) {
            comp_pts.push_back({it->second});
            csv << format_double(it->second.real()) << ',' << format_double(it->second.imag()) << ','
                << format_double(std::abs(it->second - pred)) << ','
                << format_double(std::abs(it->second - rho_n_base(n, model)));
        } else {
            csv << ",,,";
        }
        csv << ',' << format_double(lp.total.real()) << ',' << format_double(lp.total.imag()) << ','
            << format_double(lp.leading) << ',' << format_double(lp.real_correction) << ','
            << format_double(lp.imag_correction) << '\n';
    }
    write_file(out / "asymptote.csv", csv.str());
    write_file(out / "asymptote.svg",
               scatter_svg({pred_pts, comp_pts}, config_echo(cfg), false, "Re rho", "Im rho"));

    nlohmann::json j;
    j["spec_echo"] = spec_json(cfg.spec);
    j["variant"] = to_string(model.variant);
    j["theta"] = model.theta;
    j["correction"] = {model.correction.real(), model.correction.imag()};
    bool pass = false;
    try {
        const FitReport t1 = fit_remainder(res.records, model, Reference::Base, 8);
        j["leading_term_fit"] = {{"exponent", t1.exponent}, {"n_lo", t1.n_lo}, {"n_hi", t1.n_hi},
                                 {"c_bound", t1.c_bound}, {"max_gap", t1.max_gap}, {"at_floor", t1.at_floor}};
        pass = t1.at_floor || t1.exponent >= 0.9;
        const FitReport full = fit_remainder(res.records, model, Reference::Full, 8);
        j["full_prediction_fit"] = {{"exponent", full.exponent},
                                    {"coefficient", {full.coefficient.real(), full.coefficient.imag()}},
                                    {"residual_of_fit", full.residual_of_fit},
                                    {"at_floor", full.at_floor}};
        const auto fo = first_order_diagnostic(res.records, model, 8);
        j["first_order_diagnostic"] = {{"measured", {fo.measured.real(), fo.measured.imag()}},
                                       {"predicted", {fo.predicted.real(), fo.predicted.imag()}}};
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientData) throw;
        j["leading_term_fit"] = nullptr;
        j["note"] = e.what();
    }
    j["leading_term_gate_passed"] = pass;
    write_file(out / "asymptote.json", dump(j));
    std::cout << computed.size() << " indexed branches, leading-term gate " << (pass ? "passed" : "FAILED") << "\n";
    return pass ? Ok : Gated;
}

int cmd_verify(const Common& c, const std::string& suite, std::optional<std::uint64_t> seed_flag) {
    const ConfigFile cfg = load(c);
    const int workers = resolve(c, cfg);
    const std::uint64_t seed = seed_flag.value_or(cfg.seed.value_or(1));
    const fs::path out = prepare_output(c);
    std::vector<Suite> suites;
    if (suite == "energy" || suite == "all") suites.push_back(energy_suite(cfg.spec, seed, workers));
    if (suite == "lemma" || suite == "all") suites.push_back(lemma_suite(cfg.spec, out));
    if (suite == "oracle" || suite == "all") suites.push_back(oracle_suite(cfg.spec, workers));
    bool pass = true;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& s : suites) {
        pass = pass && s.passed();
        list.push_back(s.json());
        std::cout << s.name << ": " << (s.skipped ? "skipped" : s.passed() ? "passed" : "FAILED") << "\n";
        for (const auto& ch : s.checks)
            if (!ch.passed) std::cout << "  " << ch.name << " = " << ch.value << " (threshold " << ch.threshold << ")\n";
    }
    const nlohmann::json report = {
        {"spec_echo", spec_json(cfg.spec)}, {"seed", seed}, {"passed", pass}, {"suites", list}};
    write_file(out / "verify.json", dump(report));
    return pass ? Ok : Gated;
}

int cmd_sweep(const Common& c, const std::string& study) {
    const ConfigFile cfg = load(c);
    Study st;
    if (study == "clamped-limit") st = Study::ClampedLimit;
    else if (study == "k02") st = Study::K02;
    else if (study == "beta-eta") st = Study::BetaEta;
    else throw ConfigError("unknown study '" + study + "'");
    SearchOptions opt;
    opt.workers = resolve(c, cfg);
    const fs::path out = prepare_output(c);
    const StudyReport rep = limit_studies(cfg.spec, st, opt);
    std::ostringstream csv;
    write_study_csv(csv, rep);
    write_file(out / ("study_" + study + ".csv"), csv.str());
    nlohmann::json j = study_json(rep);
    j["spec_echo"] = spec_json(cfg.spec);
    write_file(out / ("study_" + study + ".json"), dump(j));
    bool pass = true;
    for (const auto& [name, ok] : rep.flags) {
        std::cout << name << ": " << (ok ? "yes" : "no") << "\n";
        pass = pass && ok;
    }
    return pass ? Ok : Gated;
}

int cmd_selfcheck() {
    Suite s{"selfcheck"};
    ProblemSpec beam;
    beam.physical = {1e-5, 0, 0, 0};
    const double mu1 = 4.730040744862704;
    const auto res = find_spectrum(beam, FirstPairs{1});
    double beam_err = std::numeric_limits<double>::infinity();
    for (const auto& r : res.records)
        beam_err = std::min(beam_err, std::abs(r.lambda.imag() - mu1 * mu1) / (mu1 * mu1));
    s.add("beam_pair", beam_err <= 2e-3, beam_err, 2e-3);

    ProblemSpec gen;
    gen.physical = {0.1, 0.4, 4, 0.1};
    gen.end0 = Generalized{1, 1, 1, 1};
    gen.end1 = Generalized{1, 1, 1, 1};
    std::mt19937_64 rng(7);
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        const auto d = dissipation_identity(random_state(rng, 8, true), gen);
        worst = std::max(worst, std::abs(d.lhs - d.rhs) / (1 + std::abs(d.rhs)));
    }
    s.add("dissipation_identity", worst <= 1e-8, worst, 1e-8);

    const auto roots = characteristic_roots(quartic_coeffs(cplx(-3, 7), gen.physical));
    const cplx sum = roots.mu.sum();
    s.add("quartic_root_sum", std::abs(sum) <= 1e-9, std::abs(sum), 1e-9);

    ConfigFile cf;
    cf.spec = gen;
    const bool round_trip = config_echo(parse_config_text(config_echo(cf))) == config_echo(cf);
    s.add("config_round_trip", round_trip, round_trip ? 1 : 0, 1);

    for (const auto& ch : s.checks)
        std::cout << (ch.passed ? "PASS " : "FAIL ") << ch.name << " " << ch.value << "\n";
    return s.passed() ? Ok : Gated;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral analysis of a damped tube with generalized end conditions"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub, bool config) {
        if (config) sub->add_option("--config", common.config, "flat key = value configuration file")->required();
        sub->add_option("--output", common.output, "output directory");
        sub->add_option("--workers", common.workers, "worker threads (TUBESPEC_WORKERS overrides)");
    };

    int pairs = 12;
    std::string region;
    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues by the argument principle");
    add_common(spectrum, true);
    auto* pairs_opt = spectrum->add_option("--pairs", pairs, "number of upper half-plane eigenvalues");
    spectrum->add_option("--region", region, "lambda rectangle re0,re1,im0,im1")->excludes(pairs_opt);

    int n_max = 25;
    auto* asymptote = app.add_subcommand("asymptote", "computed branches against the asymptotic formulae");
    add_common(asymptote, true);
    asymptote->add_option("--n-max", n_max, "largest branch index");

    std::string suite = "all";
    std::optional<std::uint64_t> seed;
    auto* verify = app.add_subcommand("verify", "energy, lemma and oracle checks");
    add_common(verify, true);
    verify->add_option("--suite", suite)->check(CLI::IsMember({"energy", "lemma", "oracle", "all"}));
    verify->add_option("--seed", seed, "seed for randomized states");

    std::string study;
    auto* sweep = app.add_subcommand("sweep", "parameter studies");
    add_common(sweep, true);
    sweep->add_option("--study", study)->required()->check(CLI::IsMember({"clamped-limit", "k02", "beta-eta"}));

    auto* selfcheck = app.add_subcommand("selfcheck", "fast invariant smoke checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return BadConfig;
    }

    try {
        if (*spectrum) return cmd_spectrum(common, pairs, region);
        if (*asymptote) return cmd_asymptote(common, n_max);
        if (*verify) return cmd_verify(common, suite, seed);
        if (*sweep) return cmd_sweep(common, study);
        if (*selfcheck) return cmd_selfcheck();
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return BadConfig;
    } catch (const std::exception& e) {
        std::cerr << "computation error: " << e.what() << "\n";
        return Computation;
    }
    return Ok;
}
