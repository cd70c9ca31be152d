#include "tubespec/roots.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <numbers>
#include <unordered_map>

#include "tubespec/asymptotics.hpp"
#include "tubespec/workers.hpp"

namespace tubespec {

namespace {

constexpr double kPi = std::numbers::pi;

struct Sample {
    cplx z;
    cplx f;
    double logabs;
    double rate;  // |F'/F|, the inverse of a local distance-to-zero estimate
};

struct KeyHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const {
        return std::hash<std::uint64_t>()(k.first * 0x9E3779B97F4A7C15ull ^ k.second);
    }
};

class Evaluator {
public:
    Evaluator(const ProblemSpec& spec, Plane plane) : spec_(spec), plane_(plane) {}

    Sample at(cplx z) {
        std::pair<std::uint64_t, std::uint64_t> key;
        const double re = z.real(), im = z.imag();
        std::memcpy(&key.first, &re, 8);
        std::memcpy(&key.second, &im, 8);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        const cplx lambda = plane_to_lambda(plane_, z, spec_.physical.alpha);
        if (is_excluded(lambda, spec_.physical.alpha))
            throw Error(ErrorCode::RootOnContour, "contour enters the exclusion disk");
        const CharDetValue v = char_det(lambda, spec_);
        if (v.value == cplx(0) || !std::isfinite(std::abs(v.value)))
            throw Error(ErrorCode::RootOnContour, "determinant vanishes on the contour");
        const double h = 1e-8 * (1 + std::abs(z));
        const cplx lambda_h = plane_to_lambda(plane_, z + h, spec_.physical.alpha);
        double rate = 0;
        if (!is_excluded(lambda_h, spec_.physical.alpha)) {
            const CharDetValue vh = char_det(lambda_h, spec_);
            rate = std::abs((vh.value * std::exp(vh.logscale - v.logscale) - v.value) / (h * v.value));
        }
        evaluations += 2;
        Sample s{z, v.value, std::log(std::abs(v.value)) + v.logscale, rate};
        cache_.emplace(key, s);
        return s;
    }

    Plane plane() const { return plane_; }
    const ProblemSpec& spec() const { return spec_; }
    long evaluations = 0;

private:
    const ProblemSpec& spec_;
    Plane plane_;
    std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, Sample, KeyHash> cache_;
};

struct Walk {
    double total = 0;
    std::vector<cplx> z;
    std::vector<cplx> logf;  // continuous branch of log Delta along the walk
};

double phase_step(cplx from, cplx to) { return std::arg(to / from); }

class ContourWalker {
public:
    explicit ContourWalker(Evaluator& ev) : ev_(ev) {}

    Walk walk(const std::vector<cplx>& vertices, int pieces_per_edge) {
        Walk w;
        Sample start = ev_.at(vertices[0]);
        double theta = 0;
        const double base = start.logabs;
        w.z.push_back(start.z);
        w.logf.push_back({0.0, 0.0});
        Sample prev = start;
        const std::size_t nv = vertices.size();
        for (std::size_t e = 0; e < nv; ++e) {
            const cplx a = vertices[e], b = vertices[(e + 1) % nv];
            for (int k = 1; k <= pieces_per_edge; ++k) {
                const cplx q = k == pieces_per_edge ? b : a + (b - a) * (double(k) / pieces_per_edge);
                const Sample sq = ev_.at(q);
                segment(prev, sq, 0, theta, base, w);
                prev = sq;
            }
        }
        w.total = theta;
        return w;
    }

private:
    void push(const Sample& s, double theta, double base, Walk& w) {
        w.z.push_back(s.z);
        w.logf.push_back({s.logabs - base, theta});
    }

    void segment(const Sample& p, const Sample& q, int depth, double& theta, double base, Walk& w) {
        const cplx mz = 0.5 * (p.z + q.z);
        const Sample m = ev_.at(mz);
        const double d1 = phase_step(p.f, m.f), d2 = phase_step(m.f, q.f), d = phase_step(p.f, q.f);
        const double quarter = kPi / 2;
        const double reach = std::abs(q.z - p.z) * std::max({p.rate, m.rate, q.rate});
        if (std::abs(d1) < quarter && std::abs(d2) < quarter && std::abs(d1 + d2 - d) < 1e-9 && reach <= 1.0) {
            theta += d1;
            push(m, theta, base, w);
            theta += d2;
            push(q, theta, base, w);
            return;
        }
        if (depth > 64 || std::abs(q.z - p.z) < 1e-14 * (1 + std::abs(p.z)))
            throw Error(ErrorCode::RootOnContour, "argument increments do not resolve on the contour");
        segment(p, m, depth + 1, theta, base, w);
        segment(m, q, depth + 1, theta, base, w);
    }

    Evaluator& ev_;
};

std::vector<cplx> box_vertices(const Box& b) {
    return {{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}};
}

int round_winding(double total) {
    const double w = total / (2 * kPi);
    const double r = std::round(w);
    if (std::abs(w - r) > 0.25) throw Error(ErrorCode::RootOnContour, "winding number is not near an integer");
    return int(r);
}

struct BoxWinding {
    int count;
    cplx seed;  // mean of enclosed zeros, from the contour moment
};

BoxWinding box_winding(Evaluator& ev, const Box& b) {
    ContourWalker walker(ev);
    const Walk w = walker.walk(box_vertices(b), 4);
    BoxWinding out{round_winding(w.total), b.center()};
    if (out.count > 0) {
        cplx integral = 0;
        const std::size_t n = w.z.size();
        for (std::size_t k = 0; k + 1 < n; ++k) integral += 0.5 * (w.logf[k] + w.logf[k + 1]) * (w.z[k + 1] - w.z[k]);
        const cplx two_pi_i(0, 2 * kPi);
        const cplx sum = (two_pi_i * double(out.count) * w.z[0] - integral) / two_pi_i;
        out.seed = sum / double(out.count);
    }
    return out;
}

int circle_winding(Evaluator& ev, cplx center, double radius) {
    std::vector<cplx> v;
    for (int k = 0; k < 12; ++k) v.push_back(center + std::polar(radius, 2 * kPi * k / 12 + 0.1));
    ContourWalker walker(ev);
    return round_winding(walker.walk(v, 1).total);
}

double cdist(cplx a, cplx b) { return std::abs(a - b); }

struct LocalState {
    std::vector<EigenvalueRecord> records;
    std::vector<std::string> warnings;
    int boxes = 0, depth_cap_hits = 0, retries = 0;
};

const double kFractions[] = {0.5137, 0.4581, 0.5529, 0.4213, 0.5871, 0.3797};

class QuadSearch {
public:
    QuadSearch(Evaluator& ev, int depth_cap, LocalState& st) : ev_(ev), depth_cap_(depth_cap), st_(st) {}

    void process(const Box& box, int winding, cplx seed, int depth) {
        ++st_.boxes;
        if (winding <= 0) return;
        const double alpha = ev_.spec().physical.alpha;
        const Plane plane = ev_.plane();
        const cplx center_lambda = plane_to_lambda(plane, box.center(), alpha);
        const double lam_size = cdist(plane_to_lambda(plane, {box.x1, box.y1}, alpha), center_lambda);
        const bool tiny = lam_size < 1e-7 * (1 + std::abs(center_lambda));

        if (winding == 1 || tiny) {
            for (cplx s : {seed, box.center()}) {
                if (!box.contains(s)) continue;
                try {
                    RefineOptions ro;
                    ro.multiplicity = false;
                    EigenvalueRecord r = refine(plane_to_lambda(plane, s, alpha), ev_.spec(), ro);
                    const cplx z = lambda_to_plane(plane, r.lambda, alpha, box.center());
                    const double margin = 1e-9 * std::max(box.width(), box.height());
                    if (!box.contains(z, margin)) continue;
                    r.multiplicity = winding;
                    st_.records.push_back(r);
                    return;
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::NoConvergence && e.code() != ErrorCode::ExcludedPoint) throw;
                }
            }
        }
        if (depth >= depth_cap_ || tiny) {
            ++st_.depth_cap_hits;
            st_.warnings.push_back("DepthCapExceeded near lambda " + std::to_string(center_lambda.real()) + "," +
                                   std::to_string(center_lambda.imag()));
            return;
        }
        for (int attempt = 0; attempt < 6; ++attempt) {
            const double fx = kFractions[attempt], fy = kFractions[(attempt + 1) % 6];
            const double xs = box.x0 + fx * box.width(), ys = box.y0 + fy * box.height();
            const Box kids[4] = {{box.x0, xs, box.y0, ys}, {xs, box.x1, box.y0, ys}, {box.x0, xs, ys, box.y1},
                                 {xs, box.x1, ys, box.y1}};
            BoxWinding kw[4];
            int total = 0;
            try {
                for (int i = 0; i < 4; ++i) {
                    kw[i] = box_winding(ev_, kids[i]);
                    total += kw[i].count;
                }
            } catch (const Error& e) {
                if (e.code() != ErrorCode::RootOnContour) throw;
                ++st_.retries;
                continue;
            }
            if (total != winding) {
                ++st_.retries;
                continue;
            }
            for (int i = 0; i < 4; ++i) process(kids[i], kw[i].count, kw[i].seed, depth + 1);
            return;
        }
        st_.warnings.push_back("subdivision failed near lambda " + std::to_string(center_lambda.real()) + "," +
                               std::to_string(center_lambda.imag()));
    }

private:
    Evaluator& ev_;
    int depth_cap_;
    LocalState& st_;
};

struct PieceResult {
    int winding = 0;
    LocalState state;
    long evaluations = 0;
};

// Windings of all top-level pieces first (so that contour failures restart the geometry), then the quadtrees.
std::vector<PieceResult> search_pieces(const ProblemSpec& spec, Plane plane, const std::vector<Box>& pieces,
                                       int depth_cap, int workers) {
    std::vector<PieceResult> out(pieces.size());
    std::vector<BoxWinding> windings(pieces.size());
    parallel_for(pieces.size(), workers, [&](std::size_t i) {
        Evaluator ev(spec, plane);
        windings[i] = box_winding(ev, pieces[i]);
        out[i].evaluations += ev.evaluations;
    });
    parallel_for(pieces.size(), workers, [&](std::size_t i) {
        Evaluator ev(spec, plane);
        out[i].winding = windings[i].count;
        QuadSearch qs(ev, depth_cap, out[i].state);
        qs.process(pieces[i], windings[i].count, windings[i].seed, 0);
        out[i].evaluations += ev.evaluations;
    });
    return out;
}

// Splits the outer box around a square hole, dropping empty pieces.
std::vector<Box> partition(const Box& outer, const std::optional<Box>& hole) {
    if (!hole || hole->x1 <= outer.x0 || hole->x0 >= outer.x1 || hole->y1 <= outer.y0 || hole->y0 >= outer.y1)
        return {outer};
    const Box& h = *hole;
    std::vector<Box> out;
    auto add = [&](Box b) {
        if (b.x1 > b.x0 && b.y1 > b.y0) out.push_back(b);
    };
    add({outer.x0, std::max(outer.x0, h.x0), outer.y0, outer.y1});
    add({std::min(outer.x1, h.x1), outer.x1, outer.y0, outer.y1});
    const double cx0 = std::max(outer.x0, h.x0), cx1 = std::min(outer.x1, h.x1);
    add({cx0, cx1, std::min(outer.y1, h.y1), outer.y1});
    add({cx0, cx1, outer.y0, std::max(outer.y0, h.y0)});
    return out;
}

struct RegionOutcome {
    std::vector<EigenvalueRecord> records;
    int winding = 0;
    int census = 0;
    long evaluations = 0;
    int boxes = 0, depth_cap_hits = 0, retries = 0;
    std::vector<std::string> warnings;
};

RegionOutcome search_region(const ProblemSpec& spec, Plane plane, const Box& outer, const std::optional<Box>& hole,
                            const SearchOptions& opt) {
    RegionOutcome r;
    const auto pieces = partition(outer, hole);
    const auto results = search_pieces(spec, plane, pieces, opt.depth_cap, resolve_workers(opt.workers));
    for (const auto& p : results) {
        r.winding += p.winding;
        r.evaluations += p.evaluations;
        r.boxes += p.state.boxes;
        r.depth_cap_hits += p.state.depth_cap_hits;
        r.retries += p.state.retries;
        r.warnings.insert(r.warnings.end(), p.state.warnings.begin(), p.state.warnings.end());
        for (const auto& rec : p.state.records) {
            r.census += rec.multiplicity;
            r.records.push_back(rec);
        }
    }
    return r;
}

// Retries a region search with slightly moved outer edges when a zero sits on a contour.
template <typename Geometry>
RegionOutcome search_with_shifts(const ProblemSpec& spec, Plane plane, Geometry geometry, const SearchOptions& opt,
                                 int& shifts) {
    for (int attempt = 0;; ++attempt) {
        const auto [outer, hole] = geometry(attempt);
        try {
            return search_region(spec, plane, outer, hole, opt);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::RootOnContour || attempt >= 5) throw;
            ++shifts;
        }
    }
}

void snap_and_canonicalise(std::vector<EigenvalueRecord>& recs, double alpha) {
    for (auto& r : recs) {
        if (std::abs(r.lambda.imag()) <= 1e-9 * (1 + std::abs(r.lambda))) r.lambda.imag(0.0);
        r.rho = map_lambda_rho(r.lambda, alpha).rho;
    }
}

std::vector<EigenvalueRecord> dedupe(std::vector<EigenvalueRecord> recs) {
    std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) {
        return a.lambda.real() != b.lambda.real() ? a.lambda.real() < b.lambda.real() : a.lambda.imag() < b.lambda.imag();
    });
    std::vector<EigenvalueRecord> out;
    for (const auto& r : recs) {
        bool dup = false;
        for (auto it = out.rbegin(); it != out.rend(); ++it) {
            if (r.lambda.real() - it->lambda.real() > dedupe_tolerance(r.lambda)) break;
            if (cdist(r.lambda, it->lambda) <= dedupe_tolerance(r.lambda)) {
                dup = true;
                break;
            }
        }
        if (!dup) out.push_back(r);
    }
    return out;
}

// Upper-half representatives (lower-strip records folded by conjugation).
std::vector<EigenvalueRecord> fold_upper(std::vector<EigenvalueRecord> recs, double alpha) {
    snap_and_canonicalise(recs, alpha);
    for (auto& r : recs)
        if (r.lambda.imag() < 0) {
            r.lambda = std::conj(r.lambda);
            r.rho = map_lambda_rho(r.lambda, alpha).rho;
        }
    return dedupe(std::move(recs));
}

std::vector<EigenvalueRecord> with_conjugates(const std::vector<EigenvalueRecord>& upper, double alpha) {
    std::vector<EigenvalueRecord> out = upper;
    for (const auto& r : upper)
        if (r.lambda.imag() != 0) {
            EigenvalueRecord c = r;
            c.lambda = std::conj(r.lambda);
            c.rho = map_lambda_rho(c.lambda, alpha).rho;
            out.push_back(c);
        }
    return out;
}

double min_stiffness_on_box(const Box& b, const PhysicalParams& p) {
    double m = std::numeric_limits<double>::infinity();
    const auto v = box_vertices(b);
    const int n = 4000;
    for (int e = 0; e < 4; ++e)
        for (int k = 0; k < n; ++k) {
            const cplx z = v[e] + (v[(e + 1) % 4] - v[e]) * (double(k) / n);
            if (!is_excluded(z, p.alpha)) m = std::min(m, modal_stiffness(z, p));
        }
    return m;
}

void merge_meta(SearchMeta& meta, const RegionOutcome& r) {
    meta.evaluations += r.evaluations;
    meta.boxes += r.boxes;
    meta.depth_cap_hits += r.depth_cap_hits;
    meta.contour_retries += r.retries;
    meta.warnings.insert(meta.warnings.end(), r.warnings.begin(), r.warnings.end());
}

}  // namespace

const char* to_string(Method m) {
    switch (m) {
    case Method::Determinant: return "determinant";
    case Method::Collocation: return "collocation";
    case Method::Asymptotic: return "asymptotic";
    }
    return "unknown";
}

double dedupe_tolerance(cplx lambda) { return 1e-6 * (1 + std::abs(lambda)); }

double modal_stiffness(cplx lambda, const PhysicalParams& p) {
    return std::abs(lambda * (lambda + p.delta) / (1.0 + p.alpha * lambda));
}

void sort_records(std::vector<EigenvalueRecord>& records) {
    std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        if (a.lambda.imag() != b.lambda.imag()) return a.lambda.imag() > b.lambda.imag();
        return a.lambda.real() < b.lambda.real();
    });
}

cplx plane_to_lambda(Plane plane, cplx z, double alpha) {
    return plane == Plane::Lambda ? z : alpha * std::exp(4.0 * z);
}

cplx lambda_to_plane(Plane plane, cplx lambda, double alpha, cplx near) {
    if (plane == Plane::Lambda) return lambda;
    const cplx rho0 = std::pow(lambda / alpha, 0.25);
    cplx best = std::log(rho0);
    for (int k = 0; k < 4; ++k) {
        cplx z = std::log(rho0) + cplx(0, k * kPi / 2);
        for (int wrap = -1; wrap <= 1; ++wrap) {
            const cplx zz = z + cplx(0, 2 * kPi * wrap);
            if (std::abs(zz.imag() - near.imag()) < std::abs(best.imag() - near.imag())) best = zz;
        }
    }
    return best;
}

int winding_number(const SearchRegion& region, const ProblemSpec& spec) {
    Evaluator ev(spec, region.plane);
    return box_winding(ev, region.rect).count;
}

namespace {

struct Scaled {
    cplx value;
    double logscale;
};

Scaled eval_scaled(cplx lambda, const ProblemSpec& spec) {
    const auto v = char_det(lambda, spec);
    return {v.value, v.logscale};
}

bool muller(cplx& lambda, const ProblemSpec& spec, int iterations) {
    const double alpha = spec.physical.alpha;
    cplx x0 = lambda + 1e-3 * (1 + std::abs(lambda)), x1 = lambda - 1e-3 * (1 + std::abs(lambda)), x2 = lambda;
    for (int it = 0; it < iterations; ++it) {
        const Scaled s0 = eval_scaled(x0, spec), s1 = eval_scaled(x1, spec), s2 = eval_scaled(x2, spec);
        const double ref = s2.logscale;
        const cplx f0 = s0.value * std::exp(s0.logscale - ref), f1 = s1.value * std::exp(s1.logscale - ref), f2 = s2.value;
        const cplx h1 = x1 - x0, h2 = x2 - x1;
        const cplx d1 = (f1 - f0) / h1, d2 = (f2 - f1) / h2;
        const cplx a = (d2 - d1) / (h2 + h1);
        const cplx b = a * h2 + d2;
        const cplx disc = std::sqrt(b * b - 4.0 * f2 * a);
        const cplx den = std::abs(b + disc) > std::abs(b - disc) ? b + disc : b - disc;
        if (den == cplx(0)) return false;
        cplx step = -2.0 * f2 / den;
        cplx x3 = x2 + step;
        for (int k = 0; k < 30 && is_excluded(x3, alpha); ++k) {
            step *= 0.5;
            x3 = x2 + step;
        }
        x0 = x1;
        x1 = x2;
        x2 = x3;
        if (std::abs(step) <= 1e-12 * (1 + std::abs(x2))) {
            lambda = x2;
            return true;
        }
    }
    return false;
}

}  // namespace

EigenvalueRecord refine(cplx lambda0, const ProblemSpec& spec, const RefineOptions& opt) {
    const double alpha = spec.physical.alpha;
    if (is_excluded(lambda0, alpha)) throw Error(ErrorCode::ExcludedPoint, "refine seed inside the exclusion disk");
    cplx lambda = lambda0;
    bool converged = false;
    double prev = std::numeric_limits<double>::infinity();
    int stalls = 0;
    for (int it = 0; it < opt.max_iterations && !converged; ++it) {
        const Scaled f = eval_scaled(lambda, spec);
        if (f.value == cplx(0)) {
            converged = true;
            break;
        }
        const cplx d = char_det_derivative(lambda, spec);
        if (d == cplx(0) || !std::isfinite(std::abs(d))) break;
        cplx step = f.value / d;
        const double tol = 1e-12 * (1 + std::abs(lambda));
        // Damping only matters far from a root; near it the noise floor would defeat the test.
        if (std::abs(step) > 1e-6 * (1 + std::abs(lambda))) {
            const double cur = std::log(std::abs(f.value)) + f.logscale;
            for (int k = 0; k < 12; ++k) {
                const cplx trial = lambda - step;
                if (!is_excluded(trial, alpha)) {
                    const Scaled g = eval_scaled(trial, spec);
                    if (std::log(std::abs(g.value)) + g.logscale < cur) break;
                }
                step *= 0.5;
            }
        }
        if (is_excluded(lambda - step, alpha)) break;
        lambda -= step;
        const double s = std::abs(step);
        if (s <= tol) converged = true;
        else if (s < 1e-9 * (1 + std::abs(lambda)) && s >= 0.5 * prev) {
            if (++stalls >= 3) converged = true;
        }
        if (it > 40 && s > 1e-6 * (1 + std::abs(lambda))) break;
        prev = s;
    }
    if (!converged) {
        cplx m = lambda;
        if (muller(m, spec, 60)) {
            lambda = m;
            converged = true;
        }
    }
    if (!converged) throw Error(ErrorCode::NoConvergence, "refinement did not converge");

    EigenvalueRecord rec;
    const CharDetValue v = char_det(lambda, spec);
    rec.lambda = lambda;
    rec.rho = map_lambda_rho(lambda, alpha).rho;
    rec.residual = v.relative;
    rec.degenerate = v.degenerate;
    rec.method = Method::Determinant;
    if (opt.multiplicity) {
        Evaluator ev(spec, Plane::Lambda);
        double r = 1e-7 * (1 + std::abs(lambda));
        for (int k = 0; k < 5; ++k, r *= 1.7) {
            try {
                rec.multiplicity = std::max(1, circle_winding(ev, lambda, r));
                break;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::RootOnContour) throw;
            }
        }
    }
    return rec;
}

SpectrumResult find_spectrum(const ProblemSpec& spec_in, const SearchTarget& target, const SearchOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const ProblemSpec spec = validate(spec_in);
    const auto& p = spec.physical;
    const double alpha = p.alpha;
    const cplx pole(-1.0 / alpha, 0.0);
    SpectrumResult result;
    result.spec_echo = spec;
    SearchMeta& meta = result.search_meta;
    std::vector<EigenvalueRecord> upper;

    auto hole_box = [&](double h) { return Box{pole.real() - h, pole.real() + h, -h, h}; };
    const double hole_limit = 0.25 * std::min(1.0 / alpha, std::abs(1.0 / alpha - p.delta) + 1e-300);

    if (const auto* fp = std::get_if<FirstPairs>(&target)) {
        meta.target = "pairs:" + std::to_string(fp->n);
        meta.plane = "lambda";
        double R = 32, h = hole_limit;
        for (int iter = 0; iter < 16; ++iter) {
            meta.iterations = iter + 1;
            auto geometry = [&](int shift) {
                const double Rs = R * (1 + 0.0131 * shift), hs = h * (1 - 0.0373 * shift);
                const double eps = 1e-9 * (1 + Rs) * (1 + shift);
                return std::pair<Box, std::optional<Box>>{Box{-Rs, Rs, -eps, Rs}, hole_box(hs)};
            };
            const RegionOutcome r = search_with_shifts(spec, Plane::Lambda, geometry, opt, meta.contour_retries);
            merge_meta(meta, r);
            const auto [outer, hole] = geometry(0);
            meta.outer = outer;
            const bool hole_inside = pole.real() - h > -R;
            meta.hole = hole_inside ? std::optional<Box>(*hole) : std::nullopt;
            meta.region_winding = r.winding;
            meta.census_total = r.census;
            meta.census_ok = r.winding == r.census;

            upper = fold_upper(r.records, alpha);
            const double a_outer = min_stiffness_on_box({-R, R, -R, R}, p);
            const double a_hole = hole_inside ? min_stiffness_on_box(hole_box(h), p)
                                              : std::numeric_limits<double>::infinity();
            const double bound = std::min(a_outer, a_hole);
            meta.stiffness_bound = bound;
            const auto count = std::count_if(upper.begin(), upper.end(),
                                             [&](const auto& rec) { return modal_stiffness(rec.lambda, p) < bound; });
            if (count >= fp->n) break;
            if (a_outer <= a_hole) R *= 4;
            else h /= 8;
        }
        std::stable_sort(upper.begin(), upper.end(), [&](const auto& a, const auto& b) {
            return modal_stiffness(a.lambda, p) < modal_stiffness(b.lambda, p);
        });
        if (int(upper.size()) > fp->n) upper.resize(fp->n);
    } else if (const auto* lr = std::get_if<LambdaRegion>(&target)) {
        meta.target = "region";
        meta.plane = "lambda";
        const double h = std::min(hole_limit, 1e-3 * (1 + 1.0 / alpha));
        auto geometry = [&](int shift) {
            const double g = 1e-7 * shift * (1 + std::max(lr->rect.width(), lr->rect.height()));
            const Box b{lr->rect.x0 - g, lr->rect.x1 + g, lr->rect.y0 - g, lr->rect.y1 + g};
            return std::pair<Box, std::optional<Box>>{b, hole_box(h * (1 - 0.0373 * shift))};
        };
        const RegionOutcome r = search_with_shifts(spec, Plane::Lambda, geometry, opt, meta.contour_retries);
        merge_meta(meta, r);
        const auto [outer, hole] = geometry(0);
        meta.outer = outer;
        if (partition(outer, hole).size() > 1) meta.hole = hole;
        meta.region_winding = r.winding;
        meta.census_total = r.census;
        meta.census_ok = r.winding == r.census;
        std::vector<EigenvalueRecord> recs = r.records;
        snap_and_canonicalise(recs, alpha);
        result.records = dedupe(std::move(recs));
    } else {
        const auto& band = std::get<RhoBand>(target);
        meta.target = "rho-band";
        meta.plane = "rho";
        const double eps = 1e-7;
        const cplx pole_z(-0.5 * std::log(alpha), kPi / 4);
        auto geometry = [&](int shift) {
            const double lo = std::log(band.r_lo) - 1e-3 * shift, hi = std::log(band.r_hi) + 1.3e-3 * shift;
            const double hz = 0.02 * (1 - 0.0373 * shift);
            return std::pair<Box, std::optional<Box>>{
                Box{lo, hi, -eps * (1 + shift), kPi / 4 + eps * (1 + shift)},
                Box{pole_z.real() - hz, pole_z.real() + hz, pole_z.imag() - hz, pole_z.imag() + hz}};
        };
        const RegionOutcome r = search_with_shifts(spec, Plane::Rho, geometry, opt, meta.contour_retries);
        merge_meta(meta, r);
        const auto [outer, hole] = geometry(0);
        meta.outer = outer;
        if (partition(outer, hole).size() > 1) meta.hole = hole;
        meta.region_winding = r.winding;
        meta.census_total = r.census;
        meta.census_ok = r.winding == r.census;
        upper = fold_upper(r.records, alpha);
    }

    if (opt.right_half_plane) {
        const double cap = opt.rhp_cap > 0 ? opt.rhp_cap : alpha * std::pow(8 * kPi, 4);
        const double eps_r = 1e-8 * (1 + 1.0 / alpha);
        meta.rhp_cap = cap;
        int shifts = 0;
        auto full = [&](int shift) {
            return std::pair<Box, std::optional<Box>>{Box{eps_r * (1 + shift), cap * (1 + 0.0131 * shift), -cap, cap},
                                                      std::nullopt};
        };
        Evaluator ev(spec, Plane::Lambda);
        for (int attempt = 0;; ++attempt) {
            try {
                meta.rhp_winding = box_winding(ev, full(attempt).first).count;
                break;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::RootOnContour || attempt >= 5) throw;
                ++shifts;
            }
        }
        meta.evaluations += ev.evaluations;
        if (meta.rhp_winding > 0 && !std::holds_alternative<LambdaRegion>(target)) {
            auto half = [&](int shift) {
                const Box b = full(shift).first;
                return std::pair<Box, std::optional<Box>>{Box{b.x0, b.x1, -1e-9 * (1 + cap), b.y1}, std::nullopt};
            };
            const RegionOutcome r = search_with_shifts(spec, Plane::Lambda, half, opt, shifts);
            merge_meta(meta, r);
            auto extra = fold_upper(r.records, alpha);
            upper.insert(upper.end(), extra.begin(), extra.end());
            upper = dedupe(std::move(upper));
        }
        meta.contour_retries += shifts;
    }

    if (!std::holds_alternative<LambdaRegion>(target)) result.records = with_conjugates(upper, alpha);
    for (auto& r : result.records) r.method = Method::Determinant;
    assign_branches(result.records, spec);
    sort_records(result.records);
    meta.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace tubespec
