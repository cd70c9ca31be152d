#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tubespec/asymptotics.hpp"
#include "tubespec/charbasis.hpp"
#include "tubespec/pencil.hpp"
#include "tubespec/roots.hpp"

namespace tubespec {

// Flat "key = value" text, '#' starts a comment.
//   alpha beta eta delta                physical parameters (alpha required, others default to 0)
//   end0.variant end1.variant           generalized | clamped | free | hinged | guided
//   end0.k1 .. end0.k4, end1.k1 .. k4   generalized ends only, all four required
//   workers seed                        optional run settings
struct ConfigFile {
    ProblemSpec spec;
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
};

ConfigFile parse_config(std::istream& in);
ConfigFile parse_config_text(const std::string& text);
ConfigFile load_config(const std::string& path);

// Canonical key = value rendering; parse_config(config_echo(c)) reproduces c.
std::string config_echo(const ConfigFile& c);

// Shortest text that round-trips the double.
std::string format_double(double x);

void write_spectrum_csv(std::ostream& out, const std::vector<EigenvalueRecord>& records);
void write_oracle_csv(std::ostream& out, const OracleSpectrum& oracle, const ProblemSpec& spec);
void write_study_csv(std::ostream& out, const StudyReport& report);
void write_lemma_csv(std::ostream& out, const LemmaDiagnostic& d);
void write_eigenfunction_csv(std::ostream& out, const EigenfunctionSample& f);

nlohmann::json spec_json(const ProblemSpec& spec);
nlohmann::json record_json(const EigenvalueRecord& r);
nlohmann::json meta_json(const SearchMeta& m);
nlohmann::json spectrum_json(const SpectrumResult& r);
nlohmann::json study_json(const StudyReport& r);

struct SvgPoint {
    cplx z;
    std::string color = "#1f77b4";
};

// Scatter in the complex plane; sector draws the wedge |Im| <= |Re|, Re <= 0.
std::string scatter_svg(const std::vector<std::vector<SvgPoint>>& layers, const std::string& echo, bool sector,
                        const std::string& x_label, const std::string& y_label);

}  // namespace tubespec
