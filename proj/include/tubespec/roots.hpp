#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tubespec/detfun.hpp"
#include "tubespec/model.hpp"

namespace tubespec {

// In the rho plane boxes live in log-polar coordinates: z = log(rho), lambda = alpha exp(4 z).
enum class Plane { Lambda, Rho };

struct Box {
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;

    cplx center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    bool contains(cplx z, double margin = 0) const {
        return z.real() >= x0 - margin && z.real() <= x1 + margin && z.imag() >= y0 - margin &&
               z.imag() <= y1 + margin;
    }
};

struct SearchRegion {
    Plane plane = Plane::Lambda;
    Box rect;
    int depth = 0;
};

cplx plane_to_lambda(Plane plane, cplx z, double alpha);
cplx lambda_to_plane(Plane plane, cplx lambda, double alpha, cplx near = {0.0, 0.0});

enum class Method { Determinant, Collocation, Asymptotic };
const char* to_string(Method m);

struct EigenvalueRecord {
    cplx lambda;
    cplx rho;
    double residual = 0;
    int multiplicity = 1;
    std::optional<int> branch_index;
    Method method = Method::Determinant;
    bool degenerate = false;
};

struct SearchMeta {
    std::string target;
    std::string plane;
    Box outer;
    std::optional<Box> hole;
    int region_winding = 0;
    int census_total = 0;
    bool census_ok = true;
    long evaluations = 0;
    int boxes = 0;
    int depth_cap_hits = 0;
    int contour_retries = 0;
    int excluded_boxes = 0;
    int iterations = 0;
    double stiffness_bound = 0;  // every upper-half eigenvalue with |a0| below this was searched for
    double rhp_cap = 0;
    int rhp_winding = 0;
    double seconds = 0;  // wall clock; kept out of the deterministic exports
    std::vector<std::string> warnings;
};

struct SpectrumResult {
    std::vector<EigenvalueRecord> records;
    ProblemSpec spec_echo;
    SearchMeta search_meta;
};

struct FirstPairs {
    int n = 12;
};
struct LambdaRegion {
    Box rect;
};
struct RhoBand {
    double r_lo = 0, r_hi = 0;
};
using SearchTarget = std::variant<FirstPairs, LambdaRegion, RhoBand>;

struct SearchOptions {
    int workers = 1;
    int depth_cap = 48;
    double rhp_cap = -1;  // negative: alpha (8 pi)^4
    bool right_half_plane = true;
};

// Argument-principle count; shifts are the caller's responsibility (throws RootOnContour).
int winding_number(const SearchRegion& region, const ProblemSpec& spec);

struct RefineOptions {
    int max_iterations = 100;
    bool multiplicity = true;
};

EigenvalueRecord refine(cplx lambda0, const ProblemSpec& spec, const RefineOptions& opt = {});

SpectrumResult find_spectrum(const ProblemSpec& spec, const SearchTarget& target, const SearchOptions& opt = {});

// Effective modal stiffness |lambda (lambda + delta) / (1 + alpha lambda)| used to order eigenvalues.
double modal_stiffness(cplx lambda, const PhysicalParams& p);

void sort_records(std::vector<EigenvalueRecord>& records);
double dedupe_tolerance(cplx lambda);

}  // namespace tubespec
