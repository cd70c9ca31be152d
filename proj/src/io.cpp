#include "tubespec/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace tubespec {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
    return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError("'" + key + "' expects an integer, got '" + text + "'");
    return v;
}

EndCondition parse_end(const std::string& prefix, std::map<std::string, std::string>& kv) {
    const auto it = kv.find(prefix + ".variant");
    if (it == kv.end()) throw ConfigError("missing key '" + prefix + ".variant'");
    const std::string name = it->second;
    kv.erase(it);
    const std::string ks[4] = {prefix + ".k1", prefix + ".k2", prefix + ".k3", prefix + ".k4"};
    if (name != "generalized") {
        for (const auto& k : ks)
            if (kv.count(k)) throw ConfigError("'" + k + "' is not allowed for a " + name + " end");
        if (name == "clamped") return Clamped{};
        if (name == "free") return Free{};
        if (name == "hinged") return Hinged{};
        if (name == "guided") return Guided{};
        throw ConfigError("unknown end variant '" + name + "'");
    }
    double v[4];
    for (int i = 0; i < 4; ++i) {
        const auto kit = kv.find(ks[i]);
        if (kit == kv.end()) throw ConfigError("missing key '" + ks[i] + "'");
        v[i] = parse_double(ks[i], kit->second);
        kv.erase(kit);
    }
    return Generalized{v[0], v[1], v[2], v[3]};
}

void end_echo(std::ostream& out, const std::string& prefix, const EndCondition& end) {
    out << prefix << ".variant = " << variant_name(end) << '\n';
    if (const auto* g = std::get_if<Generalized>(&end)) {
        out << prefix << ".k1 = " << format_double(g->kA) << '\n';
        out << prefix << ".k2 = " << format_double(g->kB) << '\n';
        out << prefix << ".k3 = " << format_double(g->kC) << '\n';
        out << prefix << ".k4 = " << format_double(g->kD) << '\n';
    }
}

nlohmann::json number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

nlohmann::json box_json(const Box& b) { return {number(b.x0), number(b.x1), number(b.y0), number(b.y1)}; }

std::string fixed(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string xml_comment_safe(std::string s) {
    for (std::size_t p = s.find("--"); p != std::string::npos; p = s.find("--", p)) s.replace(p, 2, "- -");
    return s;
}

}  // namespace

ConfigFile parse_config(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        if (!kv.emplace(key, value).second) throw ConfigError("duplicate key '" + key + "'");
    }

    ConfigFile c;
    auto take = [&](const std::string& key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    const auto alpha = take("alpha");
    if (!alpha) throw ConfigError("missing key 'alpha'");
    c.spec.physical.alpha = parse_double("alpha", *alpha);
    if (auto v = take("beta")) c.spec.physical.beta = parse_double("beta", *v);
    if (auto v = take("eta")) c.spec.physical.eta = parse_double("eta", *v);
    if (auto v = take("delta")) c.spec.physical.delta = parse_double("delta", *v);
    if (auto v = take("workers")) c.workers = parse_int<int>("workers", *v);
    if (auto v = take("seed")) c.seed = parse_int<std::uint64_t>("seed", *v);
    c.spec.end0 = parse_end("end0", kv);
    c.spec.end1 = parse_end("end1", kv);
    if (!kv.empty()) throw ConfigError("unknown key '" + kv.begin()->first + "'");
    c.spec = validate(c.spec);
    return c;
}

ConfigFile parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

std::string config_echo(const ConfigFile& c) {
    std::ostringstream out;
    const auto& p = c.spec.physical;
    out << "alpha = " << format_double(p.alpha) << '\n';
    out << "beta = " << format_double(p.beta) << '\n';
    out << "eta = " << format_double(p.eta) << '\n';
    out << "delta = " << format_double(p.delta) << '\n';
    end_echo(out, "end0", c.spec.end0);
    end_echo(out, "end1", c.spec.end1);
    if (c.workers) out << "workers = " << *c.workers << '\n';
    if (c.seed) out << "seed = " << *c.seed << '\n';
    return out.str();
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0) x = 0;  // drop the sign of negative zero
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

void write_spectrum_csv(std::ostream& out, const std::vector<EigenvalueRecord>& records) {
    out << "branch_index,re_lambda,im_lambda,re_rho,im_rho,residual,multiplicity,method\n";
    for (const auto& r : records) {
        if (r.branch_index) out << *r.branch_index;
        out << ',' << format_double(r.lambda.real()) << ',' << format_double(r.lambda.imag()) << ','
            << format_double(r.rho.real()) << ',' << format_double(r.rho.imag()) << ',' << format_double(r.residual)
            << ',' << r.multiplicity << ',' << to_string(r.method) << '\n';
    }
}

void write_oracle_csv(std::ostream& out, const OracleSpectrum& oracle, const ProblemSpec& spec) {
    std::vector<EigenvalueRecord> all;
    for (std::size_t i = 0; i < oracle.eigenvalues.size(); ++i) {
        if (!oracle.kept[i]) continue;
        EigenvalueRecord r;
        r.lambda = oracle.eigenvalues[i];
        r.rho = map_lambda_rho(r.lambda, spec.physical.alpha).rho;
        r.residual = oracle.newton[i];
        r.method = Method::Collocation;
        all.push_back(r);
    }
    sort_records(all);
    write_spectrum_csv(out, all);
}

void write_study_csv(std::ostream& out, const StudyReport& report) {
    out << "study,n,parameter_value,re_gap,im_gap,abs_gap\n";
    for (const auto& r : report.rows)
        out << r.study << ',' << r.n << ',' << format_double(r.parameter_value) << ',' << format_double(r.gap.real())
            << ',' << format_double(r.gap.imag()) << ',' << format_double(std::abs(r.gap)) << '\n';
}

void write_lemma_csv(std::ostream& out, const LemmaDiagnostic& d) {
    out << "abs_rho,m,gap,fitted_exponent\n";
    for (const auto& r : d.rows)
        out << format_double(r.abs_rho) << ',' << r.m << ',' << format_double(r.gap) << ','
            << format_double(r.fitted_exponent) << '\n';
}

void write_eigenfunction_csv(std::ostream& out, const EigenfunctionSample& f) {
    out << "s,re_w,im_w\n";
    for (std::size_t i = 0; i < f.grid.size(); ++i)
        out << format_double(f.grid[i]) << ',' << format_double(f.w_values[i].real()) << ','
            << format_double(f.w_values[i].imag()) << '\n';
}

nlohmann::json spec_json(const ProblemSpec& spec) {
    auto end = [](const EndCondition& e) {
        nlohmann::json j = {{"variant", variant_name(e)}};
        if (const auto* g = std::get_if<Generalized>(&e)) j["k"] = {g->kA, g->kB, g->kC, g->kD};
        return j;
    };
    const auto& p = spec.physical;
    return {{"alpha", p.alpha}, {"beta", p.beta}, {"eta", p.eta}, {"delta", p.delta},
            {"end0", end(spec.end0)}, {"end1", end(spec.end1)}};
}

nlohmann::json record_json(const EigenvalueRecord& r) {
    nlohmann::json j;
    j["branch_index"] = r.branch_index ? nlohmann::json(*r.branch_index) : nlohmann::json(nullptr);
    j["lambda"] = {number(r.lambda.real() + 0.0), number(r.lambda.imag() + 0.0)};
    j["rho"] = {number(r.rho.real() + 0.0), number(r.rho.imag() + 0.0)};
    j["residual"] = number(r.residual);
    j["multiplicity"] = r.multiplicity;
    j["method"] = to_string(r.method);
    j["degenerate"] = r.degenerate;
    return j;
}

nlohmann::json meta_json(const SearchMeta& m) {
    nlohmann::json j;
    j["target"] = m.target;
    j["plane"] = m.plane;
    j["outer"] = box_json(m.outer);
    j["hole"] = m.hole ? box_json(*m.hole) : nlohmann::json(nullptr);
    j["region_winding"] = m.region_winding;
    j["census_total"] = m.census_total;
    j["census_ok"] = m.census_ok;
    j["evaluations"] = m.evaluations;
    j["boxes"] = m.boxes;
    j["depth_cap_hits"] = m.depth_cap_hits;
    j["contour_retries"] = m.contour_retries;
    j["excluded_boxes"] = m.excluded_boxes;
    j["iterations"] = m.iterations;
    j["stiffness_bound"] = number(m.stiffness_bound);
    j["rhp_cap"] = number(m.rhp_cap);
    j["rhp_winding"] = m.rhp_winding;
    j["warnings"] = m.warnings;
    return j;
}

nlohmann::json spectrum_json(const SpectrumResult& r) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& rec : r.records) records.push_back(record_json(rec));
    return {{"spec_echo", spec_json(r.spec_echo)}, {"search_meta", meta_json(r.search_meta)}, {"records", records}};
}

nlohmann::json study_json(const StudyReport& r) {
    nlohmann::json numbers = nlohmann::json::object(), flags = nlohmann::json::object();
    for (const auto& [k, v] : r.numbers) numbers[k] = number(v);
    for (const auto& [k, v] : r.flags) flags[k] = v;
    return {{"study", r.study}, {"rows", r.rows.size()}, {"numbers", numbers}, {"flags", flags}};
}

std::string scatter_svg(const std::vector<std::vector<SvgPoint>>& layers, const std::string& echo, bool sector,
                        const std::string& x_label, const std::string& y_label) {
    const double W = 640, H = 480, pad = 50;
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    bool any = false;
    for (const auto& layer : layers)
        for (const auto& p : layer) {
            if (!std::isfinite(p.z.real()) || !std::isfinite(p.z.imag())) continue;
            if (!any) {
                x0 = x1 = p.z.real();
                y0 = y1 = p.z.imag();
                any = true;
            }
            x0 = std::min(x0, p.z.real());
            x1 = std::max(x1, p.z.real());
            y0 = std::min(y0, p.z.imag());
            y1 = std::max(y1, p.z.imag());
        }
    if (sector) {
        x1 = std::max(x1, 0.0);
        y0 = std::min(y0, 0.0);
        y1 = std::max(y1, 0.0);
    }
    if (x1 - x0 <= 0) x1 = x0 + 1;
    if (y1 - y0 <= 0) y1 = y0 + 1;
    const double mx = 0.05 * (x1 - x0), my = 0.05 * (y1 - y0);
    x0 -= mx, x1 += mx, y0 -= my, y1 += my;
    auto X = [&](double x) { return pad + (x - x0) / (x1 - x0) * (W - 2 * pad); };
    auto Y = [&](double y) { return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<!--\n" << xml_comment_safe(echo) << "-->\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (sector) {
        const double r = std::max({-x0, std::abs(y0), std::abs(y1)});
        out << "<polygon points=\"" << fixed(X(0)) << ',' << fixed(Y(0)) << ' ' << fixed(X(-r)) << ','
            << fixed(Y(r)) << ' ' << fixed(X(-r)) << ',' << fixed(Y(-r))
            << "\" fill=\"#e8e8e8\" stroke=\"#999\"/>\n";
    }
    if (x0 < 0 && x1 > 0)
        out << "<line x1=\"" << fixed(X(0)) << "\" y1=\"" << fixed(pad) << "\" x2=\"" << fixed(X(0)) << "\" y2=\""
            << fixed(H - pad) << "\" stroke=\"#555\"/>\n";
    if (y0 < 0 && y1 > 0)
        out << "<line x1=\"" << fixed(pad) << "\" y1=\"" << fixed(Y(0)) << "\" x2=\"" << fixed(W - pad) << "\" y2=\""
            << fixed(Y(0)) << "\" stroke=\"#555\"/>\n";
    out << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << W - 2 * pad << "\" height=\"" << H - 2 * pad
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (const auto& layer : layers)
        for (const auto& p : layer) {
            if (!std::isfinite(p.z.real()) || !std::isfinite(p.z.imag())) continue;
            out << "<circle cx=\"" << fixed(X(p.z.real())) << "\" cy=\"" << fixed(Y(p.z.imag()))
                << "\" r=\"3\" fill=\"" << p.color << "\"/>\n";
        }
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
    out << "<text x=\"14\" y=\"" << H / 2 << "\" transform=\"rotate(-90 14 " << H / 2
        << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
    out << "<text x=\"" << pad << "\" y=\"" << pad - 8 << "\">[" << format_double(x0) << ", " << format_double(x1)
        << "] x [" << format_double(y0) << ", " << format_double(y1) << "]</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace tubespec
