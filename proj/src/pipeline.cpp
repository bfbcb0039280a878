#include "chronoreg/pipeline.hpp"

#include "chronoreg/error.hpp"
#include "chronoreg/interpolation.hpp"
#include "chronoreg/lp_holder.hpp"
#include "chronoreg/potentials.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace chronoreg {

namespace {

using nlohmann::json;

template <class F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
    const std::string prefix = std::string("stage '") + name + "': ";
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(prefix + e.what());
    } catch (const Error& e) {
        throw Error(prefix + e.what());
    } catch (const std::exception& e) {
        throw Error(prefix + e.what());
    }
}

std::string scheme_name(Scheme s) { return s == Scheme::explicit_euler ? "explicit" : "semi-implicit"; }

Scheme scheme_from(const std::string& s) {
    if (s == "semi-implicit") return Scheme::semi_implicit;
    if (s == "explicit") return Scheme::explicit_euler;
    throw ConfigError("unknown scheme '" + s + "'");
}

Grid level_grid(const PipelineConfig& c, int n) { return Grid(c.d, n, n, c.L_t, c.L_x, c.N); }

std::vector<double> effective_eps(const PipelineConfig& c) {
    if (!c.eps_list.empty()) return c.eps_list;
    const Grid g = level_grid(c, c.ladder.back());
    const double h = std::max(g.dt(), g.dx());
    const double seam = std::min(c.L_t, c.L_x) / 8.0;
    std::vector<double> out;
    for (int k = 5; k >= 0; --k) {
        const double e = 2.0 * h * std::pow(2.0, 0.5 * k);
        if (e <= seam) out.push_back(e);
    }
    return out;
}

NestedDomains effective_domains(const PipelineConfig& c) {
    if (c.domains) return *c.domains;
    NestedDomains nd = default_domains(level_grid(c, c.ladder.back()));
    nd.I_dprime = {3.0 * c.L_t / 8.0, 5.0 * c.L_t / 8.0};
    nd.Q_dprime = {3.0 * c.L_x / 8.0, 5.0 * c.L_x / 8.0};
    return nd;
}

double vec_modulus(const GridFunction& f, int it, std::size_t ix) {
    double s = 0.0;
    for (int c = 0; c < f.grid().N(); ++c) s += std::norm(f.at(it, ix, c));
    return std::sqrt(s);
}

// ||f(t_it, .)||_{L^q} over space.
double slice_lq(const GridFunction& f, int it, double q) {
    const Grid& g = f.grid();
    const double dvol = std::pow(g.dx(), g.d());
    double acc = 0.0;
    for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) acc += std::pow(vec_modulus(f, it, ix), q);
    return std::pow(acc * dvol, 1.0 / q);
}

struct TimeHolder {
    double sup = 0.0;
    double quotient = 0.0;
    std::vector<double> by_lag;  // sup over pairs at each lag
};

// L^q(space)-valued sup and alpha-Hoelder quotient over all row pairs.
TimeHolder time_holder_lq(const GridFunction& f, double q, double alpha) {
    const Grid& g = f.grid();
    const int n = g.n_t();
    const double dvol = std::pow(g.dx(), g.d());
    TimeHolder out;
    out.by_lag.assign(n, 0.0);
    for (int i = 0; i < n; ++i) out.sup = std::max(out.sup, slice_lq(f, i, q));
    for (int i = 0; i < n; ++i) {
        for (int k = i + 1; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) {
                double s = 0.0;
                for (int c = 0; c < g.N(); ++c) s += std::norm(f.at(k, ix, c) - f.at(i, ix, c));
                acc += std::pow(s, 0.5 * q);
            }
            const double diff = std::pow(acc * dvol, 1.0 / q);
            const double quot = diff / std::pow((k - i) * g.dt(), alpha);
            out.by_lag[k - i] = std::max(out.by_lag[k - i], quot);
            out.quotient = std::max(out.quotient, quot);
        }
    }
    return out;
}

// Last of the successive differences d below 10% of the first; anything under
// 1e-12 * scale counts as roundoff.
bool cauchy_differences(const std::vector<double>& d, double scale) {
    if (d.size() < 2) return false;
    for (double x : d)
        if (!std::isfinite(x)) return false;
    return std::abs(d.back()) <= 0.1 * std::abs(d.front()) + 1e-12 * scale;
}

bool cauchy_in_eps(const std::vector<double>& v, double scale = 0.0) {
    std::vector<double> d;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!std::isfinite(v[k])) return false;
        scale = std::max(scale, std::abs(v[k]));
        if (k > 0) d.push_back(v[k] - v[k - 1]);
    }
    return cauchy_differences(d, scale);
}

bool within(double x, double ref, double tol) { return std::abs(x - ref) <= tol * std::abs(ref); }

json series(std::vector<std::string> columns, const std::vector<std::vector<double>>& rows) {
    return {{"columns", columns}, {"rows", rows}};
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
std::optional<double> opt_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

double bump_profile(double x, double c, double r) {
    const double s = (x - c) / r;
    return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
}

}  // namespace

// ---------------------------------------------------------------- config

json to_json(const PipelineConfig& c) {
    json j{{"preset", c.preset},
           {"d", c.d},
           {"N", c.N},
           {"epsilon_reg", c.epsilon_reg},
           {"ladder", c.ladder},
           {"L_t", c.L_t},
           {"L_x", c.L_x},
           {"domains", c.domains ? to_json(*c.domains) : json(nullptr)},
           {"eps_list", c.eps_list},
           {"delta_grid", c.delta_grid},
           {"alpha_override", opt_json(c.alpha_override)},
           {"q_hat", c.q_hat},
           {"initial", c.initial},
           {"time_step", c.time_step},
           {"scheme", scheme_name(c.scheme)},
           {"line_pass_fraction", c.line_pass_fraction},
           {"three_lines_b_step", c.three_lines_b_step},
           {"seed", c.seed},
           {"output_dir", c.output_dir}};
    return j;
}

PipelineConfig pipeline_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
    static const std::set<std::string> known{"preset",   "d",          "N",          "epsilon_reg",
                                             "ladder",   "L_t",        "L_x",        "domains",
                                             "eps_list", "delta_grid", "alpha_override", "q_hat",
                                             "initial",  "time_step",  "scheme",     "line_pass_fraction",
                                             "three_lines_b_step", "seed", "output_dir"};
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw ConfigError("pipeline config: unknown key '" + k + "'");
    PipelineConfig c;
    try {
        if (j.contains("preset")) c.preset = j["preset"].get<std::string>();
        if (j.contains("d")) c.d = j["d"].get<int>();
        if (j.contains("N")) c.N = j["N"].get<int>();
        if (j.contains("epsilon_reg")) c.epsilon_reg = j["epsilon_reg"].get<double>();
        if (j.contains("ladder")) c.ladder = j["ladder"].get<std::vector<int>>();
        if (j.contains("L_t")) c.L_t = j["L_t"].get<double>();
        if (j.contains("L_x")) c.L_x = j["L_x"].get<double>();
        if (j.contains("domains") && !j["domains"].is_null()) c.domains = nested_domains_from_json(j["domains"]);
        if (j.contains("eps_list")) c.eps_list = j["eps_list"].get<std::vector<double>>();
        if (j.contains("delta_grid")) c.delta_grid = j["delta_grid"].get<std::vector<double>>();
        if (j.contains("alpha_override")) c.alpha_override = opt_from(j["alpha_override"]);
        if (j.contains("q_hat")) c.q_hat = j["q_hat"].get<double>();
        if (j.contains("initial")) c.initial = j["initial"].get<std::string>();
        if (j.contains("time_step")) c.time_step = j["time_step"].get<double>();
        if (j.contains("scheme")) c.scheme = scheme_from(j["scheme"].get<std::string>());
        if (j.contains("line_pass_fraction")) c.line_pass_fraction = j["line_pass_fraction"].get<double>();
        if (j.contains("three_lines_b_step")) c.three_lines_b_step = j["three_lines_b_step"].get<double>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("pipeline config: ") + e.what());
    }
    return c;
}

void validate(const PipelineConfig& c) {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), c.preset) == names.end())
        throw ConfigError("pipeline config: unknown preset '" + c.preset + "'");
    if (c.ladder.size() < 3) throw ConfigError("pipeline config: ladder needs at least 3 levels");
    for (std::size_t i = 1; i < c.ladder.size(); ++i)
        if (c.ladder[i] <= c.ladder[i - 1]) throw ConfigError("pipeline config: ladder must be increasing");
    if (c.ladder.front() < 8) throw ConfigError("pipeline config: coarsest level needs at least 8 points");
    const Grid fine = level_grid(c, c.ladder.back());
    effective_domains(c).validate(fine);
    const auto eps = effective_eps(c);
    if (eps.size() < 3) throw ConfigError("pipeline config: eps_list needs at least 3 values");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw ConfigError("pipeline config: eps values must be positive");
        if (i > 0 && !(eps[i] < eps[i - 1])) throw ConfigError("pipeline config: eps_list must be strictly decreasing");
    }
    if (eps.front() > std::min(c.L_t, c.L_x) / 8.0)
        throw ConfigError("pipeline config: eps " + fmt(eps.front()) + " exceeds the seam bound min(L_t, L_x)/8");
    if (c.delta_grid.empty()) throw ConfigError("pipeline config: delta_grid is empty");
    for (double dl : c.delta_grid)
        if (!(dl >= 0.0)) throw ConfigError("pipeline config: delta values must be nonnegative");
    if (c.alpha_override && !(*c.alpha_override > 0.0 && *c.alpha_override < 1.0))
        throw ConfigError("pipeline config: alpha_override must lie in (0, 1)");
    if (!(c.line_pass_fraction > 0.0 && c.line_pass_fraction <= 1.0))
        throw ConfigError("pipeline config: line_pass_fraction must lie in (0, 1]");
    if (!(c.three_lines_b_step > 0.0)) throw ConfigError("pipeline config: three_lines_b_step must be positive");
    if (c.time_step < 0.0) throw ConfigError("pipeline config: time_step must be nonnegative");
    if (c.initial != "sine" && c.initial != "bump" && c.initial != "zero")
        throw ConfigError("pipeline config: unknown initial condition '" + c.initial + "'");
    if (!(c.q_hat > 1.0)) throw ConfigError("pipeline config: q_hat must exceed 1");
}

std::string config_hash(const PipelineConfig& c) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(c).dump())));
    return buf;
}

GridFunction named_initial_condition(const std::string& name, const Grid& g) {
    const double L = g.L_x();
    if (name == "zero") return GridFunction(g);
    if (name == "sine")
        return initial_condition(g, [L](std::span<const double> x, int c) {
            double v = 1.0 + 0.5 * c;
            for (double xk : x) v *= std::sin(2.0 * std::numbers::pi * xk / L);
            return v;
        });
    if (name == "bump")
        return initial_condition(g, [L](std::span<const double> x, int c) {
            double v = 1.0 + 0.5 * c;
            for (double xk : x) v *= bump_profile(xk, 0.45 * L, 0.3 * L);
            return v;
        });
    throw ConfigError("unknown initial condition '" + name + "'");
}

// ---------------------------------------------------------------- step 2

Step2Result step2_line_analysis(const GridFunction& v, const NestedDomains& nd, const std::vector<double>& eps_list,
                                double q, double alpha, double pass_fraction) {
    if (eps_list.size() < 3) throw ConfigError("step2: eps_list needs at least 3 values");
    if (!(q > 1.0)) throw ConfigError("step2: q must exceed 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("step2: alpha must lie in (0, 1)");
    const Grid& g = v.grid();
    const int nt = g.n_t();
    const int N = g.N();

    std::vector<std::size_t> lines;
    std::vector<double> coords(g.d());
    for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) {
        g.spatial_coords(ix, coords);
        if (std::all_of(coords.begin(), coords.end(), [&](double x) { return nd.Q_dprime.contains(x); }))
            lines.push_back(ix);
    }

    GridFunction clean = v;
    std::vector<bool> corrupted(g.spatial_points(), false);
    for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) {
        for (int it = 0; it < nt && !corrupted[ix]; ++it)
            for (int c = 0; c < N; ++c) {
                const cplx z = v.at(it, ix, c);
                if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) corrupted[ix] = true;
            }
    }
    // corrupted lines take the mean of their clean axis neighbours so that
    // mollification does not spread the fault to adjacent lines
    for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) {
        if (!corrupted[ix]) continue;
        std::vector<std::size_t> nb;
        for (int k = 0; k < g.d(); ++k)
            for (int sh : {-1, 1}) {
                const std::size_t j = g.spatial_neighbor(ix, k, sh);
                if (!corrupted[j]) nb.push_back(j);
            }
        for (int it = 0; it < nt; ++it)
            for (int c = 0; c < N; ++c) {
                cplx m = 0.0;
                for (std::size_t j : nb) m += v.at(it, j, c);
                clean.at(it, ix, c) = nb.empty() ? cplx(0.0) : m / static_cast<double>(nb.size());
            }
    }

    const auto dp = build_partition(g);
    const std::size_t E = eps_list.size();
    std::vector<std::vector<double>> norms(lines.size(), std::vector<double>(E));
    std::vector<std::vector<double>> numer(lines.size(), std::vector<double>(E));
    Step2Result out;
    out.lines.resize(lines.size());
    std::vector<double> pow_lag(nt);
    for (int lag = 1; lag < nt; ++lag) pow_lag[lag] = std::pow(lag * g.dt(), -alpha);

    for (std::size_t e = 0; e < E; ++e) {
        const auto ve = mollify(clean, eps_list[e]);
        const auto w = bessel_t(ve, PotentialOrder(-0.5));
        for (std::size_t l = 0; l < lines.size(); ++l) {
            const std::size_t ix = lines[l];
            double acc = 0.0, sup = 0.0, quot = 0.0;
            std::vector<double> mod(nt);
            for (int it = 0; it < nt; ++it) {
                acc += std::pow(vec_modulus(w, it, ix), q);
                mod[it] = vec_modulus(ve, it, ix);
                sup = std::max(sup, mod[it]);
            }
            for (int i = 0; i < nt; ++i)
                for (int k = i + 1; k < nt; ++k) {
                    double s = 0.0;
                    for (int c = 0; c < N; ++c) s += std::norm(ve.at(k, ix, c) - ve.at(i, ix, c));
                    quot = std::max(quot, std::sqrt(s) * pow_lag[k - i]);
                }
            norms[l][e] = std::pow(acc * g.dt(), 1.0 / q);
            numer[l][e] = sup + quot;
            if (e + 1 == E) {
                double lpv = 0.0, dv = 0.0;
                for (int c = 0; c < N; ++c) {
                    const auto line = ve.time_line(ix, c);
                    lpv = std::max(lpv, holder_lp(line, alpha, dp));
                    dv = std::max(dv, holder_direct(line, alpha, g.dt()));
                }
                out.lines[l].lp_value = lpv;
                out.lines[l].direct_value = dv;
            }
        }
    }

    double field_scale = 0.0;
    for (std::size_t l = 0; l < lines.size(); ++l)
        if (!corrupted[lines[l]])
            for (double x : norms[l]) field_scale = std::max(field_scale, std::abs(x));
    std::size_t passed = 0;
    double cmin = HUGE_VAL;
    for (std::size_t l = 0; l < lines.size(); ++l) {
        auto& r = out.lines[l];
        r.x_index = lines[l];
        r.norms = norms[l];
        if (corrupted[lines[l]]) {
            r.verdict = Verdict::fail;
            r.norms.assign(E, 0.0);
            r.lp_value = r.direct_value = 0.0;
            out.failing.push_back(r.x_index);
            continue;
        }
        bool finite = true;
        double c = 0.0;
        for (std::size_t e = 0; e < E; ++e) {
            if (norms[l][e] > 0.0) c = std::max(c, numer[l][e] / norms[l][e]);
            else if (numer[l][e] > 0.0) finite = false;
        }
        if (finite && std::isfinite(c)) r.c_line = c;
        r.cauchy = cauchy_in_eps(norms[l], field_scale);
        r.verdict = r.c_line && r.cauchy ? Verdict::pass : Verdict::fail;
        if (r.verdict == Verdict::pass) {
            ++passed;
        } else {
            out.failing.push_back(r.x_index);
        }
        if (r.c_line) {
            out.worst_constant = std::max(out.worst_constant, *r.c_line);
            if (norms[l].back() > 0.0 && *r.c_line > 0.0) cmin = std::min(cmin, *r.c_line);
        }
    }
    if (lines.empty()) return out;
    out.fraction = static_cast<double>(passed) / static_cast<double>(lines.size());
    out.constant_spread = std::isfinite(cmin) ? out.worst_constant / cmin : 1.0;
    out.verdict = out.fraction >= pass_fraction ? Verdict::pass : Verdict::fail;
    return out;
}

// ---------------------------------------------------------------- localization

std::vector<double> localization_profile(const GridFunction& u, const NestedDomains& nd, double q, int steps) {
    if (steps < 1) throw ConfigError("localization_profile: steps must be positive");
    std::vector<double> out;
    for (int k = 0; k <= steps; ++k) {
        const double s = 0.9 * k / steps;
        NestedDomains m = nd;
        m.I_dprime.lo = nd.I_dprime.lo + s * (nd.I_prime.lo - nd.I_dprime.lo);
        m.I_dprime.hi = nd.I_dprime.hi + s * (nd.I_prime.hi - nd.I_dprime.hi);
        m.Q_dprime.lo = nd.Q_dprime.lo + s * (nd.Q_prime.lo - nd.Q_dprime.lo);
        m.Q_dprime.hi = nd.Q_dprime.hi + s * (nd.Q_prime.hi - nd.Q_dprime.hi);
        const auto chi = build_cutoff(u.grid(), m);
        out.push_back(lq_norm(multiply_scalar_field(u, chi.chi), q));
    }
    return out;
}

// ---------------------------------------------------------------- report json

namespace {

json step1_json(const Step1Result& s) {
    return {{"levels", s.levels},       {"sup_lq", s.sup_lq},
            {"quotient", s.quotient},   {"eps", s.eps},
            {"eps_total", s.eps_total}, {"eps_step", s.eps_step},
            {"potential_norm", s.potential_norm},
            {"constant", s.constant},   {"verdict", to_string(s.verdict)},
            {"note", s.note}};
}

Step1Result step1_from(const json& j) {
    Step1Result s;
    s.levels = j.at("levels").get<std::vector<int>>();
    s.sup_lq = j.at("sup_lq").get<std::vector<double>>();
    s.quotient = j.at("quotient").get<std::vector<double>>();
    s.eps = j.at("eps").get<std::vector<double>>();
    s.eps_total = j.at("eps_total").get<std::vector<double>>();
    s.eps_step = j.at("eps_step").get<std::vector<double>>();
    s.potential_norm = j.at("potential_norm").get<std::vector<double>>();
    s.constant = j.at("constant").get<double>();
    s.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    s.note = j.at("note").get<std::string>();
    return s;
}

json step2_json(const Step2Result& s) {
    json lines = json::array();
    for (const auto& l : s.lines)
        lines.push_back({{"x_index", l.x_index},
                         {"norms", l.norms},
                         {"c_line", opt_json(l.c_line)},
                         {"lp_value", l.lp_value},
                         {"direct_value", l.direct_value},
                         {"cauchy", l.cauchy},
                         {"verdict", to_string(l.verdict)}});
    return {{"lines", lines},
            {"fraction", s.fraction},
            {"worst_constant", s.worst_constant},
            {"constant_spread", s.constant_spread},
            {"failing", s.failing},
            {"verdict", to_string(s.verdict)}};
}

Step2Result step2_from(const json& j) {
    Step2Result s;
    for (const auto& l : j.at("lines")) {
        LineResult r;
        r.x_index = l.at("x_index").get<std::size_t>();
        r.norms = l.at("norms").get<std::vector<double>>();
        r.c_line = opt_from(l.at("c_line"));
        r.lp_value = l.at("lp_value").get<double>();
        r.direct_value = l.at("direct_value").get<double>();
        r.cauchy = l.at("cauchy").get<bool>();
        r.verdict = verdict_from_string(l.at("verdict").get<std::string>());
        s.lines.push_back(r);
    }
    s.fraction = j.at("fraction").get<double>();
    s.worst_constant = j.at("worst_constant").get<double>();
    s.constant_spread = j.at("constant_spread").get<double>();
    s.failing = j.at("failing").get<std::vector<std::size_t>>();
    s.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    return s;
}

}  // namespace

json to_json(const RegularityReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name}, {"verdict", to_string(c.verdict)}, {"detail", c.detail}});
    return {{"schema_version", r.schema_version},
            {"preset", r.preset},
            {"measured_delta", r.measured_delta},
            {"exponents", r.exponents ? to_json(*r.exponents) : json(nullptr)},
            {"alpha", r.alpha},
            {"scan", r.scan},
            {"step1", step1_json(r.step1)},
            {"step2", step2_json(r.step2)},
            {"checks", checks},
            {"series", r.series},
            {"verdict", to_string(r.verdict)},
            {"message", r.message},
            {"provenance", r.provenance}};
}

RegularityReport regularity_report_from_json(const json& j) {
    if (!j.is_object() || !j.contains("schema_version"))
        throw ConfigError("report: missing schema_version");
    if (j["schema_version"].get<int>() != kReportSchemaVersion)
        throw ConfigError("report: unsupported schema_version " + j["schema_version"].dump());
    RegularityReport r;
    try {
        r.preset = j.at("preset").get<std::string>();
        r.measured_delta = j.at("measured_delta").get<double>();
        if (!j.at("exponents").is_null()) r.exponents = exponent_set_from_json(j.at("exponents"));
        r.alpha = j.at("alpha").get<double>();
        r.scan = j.at("scan");
        r.step1 = step1_from(j.at("step1"));
        r.step2 = step2_from(j.at("step2"));
        for (const auto& c : j.at("checks"))
            r.checks.push_back({c.at("name").get<std::string>(), verdict_from_string(c.at("verdict").get<std::string>()),
                                c.at("detail")});
        r.series = j.at("series");
        r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
        r.message = j.at("message").get<std::string>();
        r.provenance = j.at("provenance");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("report: ") + e.what());
    }
    return r;
}

// ---------------------------------------------------------------- run

RegularityReport run_pipeline(const PipelineConfig& cfg) {
    stage("config", [&] {
        validate(cfg);
        return 0;
    });
    RegularityReport rep;
    rep.preset = cfg.preset;
    rep.provenance = {{"config_hash", config_hash(cfg)},
                      {"library_version", kLibraryVersion},
                      {"fftw_version", std::string(fftw_version)},
                      {"json_version", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};

    const auto spec = stage("structure", [&] { return make_preset(cfg.preset, cfg.d, cfg.N, cfg.epsilon_reg); });
    const NestedDomains nd = effective_domains(cfg);
    const auto eps = effective_eps(cfg);

    std::vector<GridFunction> fields = stage("solve", [&] {
        std::vector<GridFunction> out;
        for (int n : cfg.ladder) {
            SolveConfig sc;
            sc.grid = level_grid(cfg, n);
            sc.time_step = cfg.time_step > 0.0 ? cfg.time_step : sc.grid.dt() / 4.0;
            sc.scheme = cfg.scheme;
            out.push_back(solve(spec, named_initial_condition(cfg.initial, sc.grid), sc).field);
        }
        return out;
    });
    const GridFunction& u = fields.back();
    const Grid& g = u.grid();

    const auto scan = stage("integrability", [&] { return higher_integrability_scan(fields, spec.p, nd, cfg.delta_grid); });
    rep.measured_delta = scan.measured_delta;
    rep.scan = to_json(scan);

    try {
        rep.exponents = ExponentSet(cfg.d, spec.p, scan.measured_delta, cfg.q_hat);
    } catch (const ConfigError& e) {
        rep.message = std::string("measured_delta = ") + fmt(scan.measured_delta) + " gives no exponent: " + e.what();
        rep.step1.verdict = Verdict::fail;
        rep.step1.note = "no Hoelder exponent";
        rep.step2.verdict = Verdict::fail;
        rep.verdict = Verdict::fail;
        return rep;
    }
    const ExponentSet& exps = *rep.exponents;
    rep.alpha = cfg.alpha_override.value_or(exps.alpha);
    const double q = exps.q;

    // localization v = chi u on every level
    std::vector<GridFunction> vs = stage("localize", [&] {
        std::vector<GridFunction> out;
        for (const auto& f : fields) out.push_back(multiply_scalar_field(f, build_cutoff(f.grid(), nd).chi));
        return out;
    });
    const GridFunction& v = vs.back();
    const Cutoff chi = build_cutoff(g, nd);

    const auto apriori = stage("apriori", [&] { return apriori_bounds_check(u, chi, eps, exps); });
    {
        std::vector<std::vector<double>> rows;
        for (const auto& r : apriori.rows) rows.push_back({r.eps, r.potential_norm, r.mixed_norm});
        rep.series["apriori"] = series({"eps", "potential_norm", "mixed_norm"}, rows);
        rep.checks.push_back({"apriori", apriori.verdict, to_json(apriori)});
    }

    stage("caccioppoli", [&] {
        const auto c = caccioppoli_check(fields, exps, nd);
        json ratios = json::array();
        for (const auto& r : c.ratios) ratios.push_back(opt_json(r));
        rep.checks.push_back({"caccioppoli", c.verdict, {{"ratios", ratios}, {"spread", c.spread}}});
        return 0;
    });

    stage("localization", [&] {
        const auto prof = localization_profile(u, nd, q, 4);
        bool mono = true;
        for (std::size_t k = 1; k < prof.size(); ++k) mono = mono && prof[k] >= prof[k - 1] * (1.0 - 1e-12);
        rep.checks.push_back({"localization", mono ? Verdict::pass : Verdict::fail, {{"norms", prof}, {"q", q}}});
        return 0;
    });

    // Step 1
    std::vector<GridFunction> v_eps = stage("step1", [&] {
        Step1Result& s = rep.step1;
        TimeHolder finest;
        for (std::size_t l = 0; l < vs.size(); ++l) {
            const auto th = time_holder_lq(vs[l], q, rep.alpha);
            s.levels.push_back(cfg.ladder[l]);
            s.sup_lq.push_back(th.sup);
            s.quotient.push_back(th.quotient);
            if (l + 1 == vs.size()) finest = th;
        }
        std::vector<GridFunction> mollified;
        s.eps = eps;
        for (double e : eps) {
            mollified.push_back(mollify(v, e));
            const auto th = time_holder_lq(mollified.back(), q, rep.alpha);
            const double pn = lq_norm(bessel_t(mollified.back(), PotentialOrder(-0.5)), q);
            s.eps_total.push_back(th.sup + th.quotient);
            s.potential_norm.push_back(pn);
            if (pn > 0.0) s.constant = std::max(s.constant, (th.sup + th.quotient) / pn);
        }
        bool stable = true;
        for (std::size_t l = 0; l < vs.size(); ++l)
            stable = stable && within(s.sup_lq[l], s.sup_lq.back(), 0.2) && within(s.quotient[l], s.quotient.back(), 0.2);
        for (double x : s.eps_total) stable = stable && within(x, s.eps_total.back(), 0.2);
        double scale = 0.0;
        for (const auto& m : mollified) scale = std::max(scale, lq_norm(m, q));
        for (std::size_t k = 1; k < mollified.size(); ++k)
            s.eps_step.push_back(lq_norm(mollified[k] - mollified[k - 1], q));
        const bool cauchy = cauchy_differences(s.eps_step, scale);
        bool finite = true;
        for (double x : s.quotient) finite = finite && std::isfinite(x);
        for (double x : s.eps_total) finite = finite && std::isfinite(x);
        s.verdict = stable && cauchy && finite ? Verdict::pass : Verdict::fail;
        if (!finite) s.note = "non-finite quotient";
        else if (!stable) s.note = "not stable within 20% across levels and eps";
        else if (!cauchy) s.note = "v_eps not Cauchy in eps";
        std::vector<std::vector<double>> rows;
        for (int lag = 1; lag < g.n_t(); ++lag) rows.push_back({lag * g.dt(), finest.by_lag[lag]});
        rep.series["step1_quotient"] = series({"lag", "quotient"}, rows);
        return mollified;
    });
    const GridFunction& v_small = v_eps.back();

    // Step 2
    rep.step2 = stage("step2", [&] { return step2_line_analysis(v, nd, eps, q, rep.alpha, cfg.line_pass_fraction); });
    {
        json rows = json::array();
        for (const auto& l : rep.step2.lines)
            rows.push_back({static_cast<double>(l.x_index), opt_json(l.c_line), l.lp_value, l.direct_value});
        rep.series["line_holder"] = {{"columns", {"x_index", "c_line", "lp_value", "direct_value"}}, {"rows", rows}};
    }

    stage("interpolation", [&] {
        const double q0 = spec.p + exps.delta, q1 = exps.p_prime;
        const double qt = q_theta(0.5, q0, q1);
        const double identity = std::abs(2.0 / qt - (1.0 / q0 + 1.0 / q1));
        const auto suite = interpolation_suite(v_eps, {{0.5, q0, q1}});
        Verdict vd = suite.verdict;
        if (identity > 1e-14 || std::abs(qt - q) > 1e-12 * q) vd = Verdict::fail;
        json ratios = json::array();
        for (const auto& r : suite.rows) ratios.push_back(r.skipped ? json(nullptr) : json(r.ratio));
        rep.checks.push_back({"interpolation", vd,
                              {{"q0", q0}, {"q1", q1}, {"q_theta", qt}, {"identity_error", identity},
                               {"c_suite", suite.c_suite}, {"ratios", ratios}}});
        return 0;
    });

    stage("three_lines", [&] {
        const double q0 = spec.p + exps.delta, q1 = exps.p_prime;
        const auto w = mixed_potential(v_small, MixedOrder(0.5));
        if (lq_norm(w, q) == 0.0) {
            rep.checks.push_back({"three_lines", Verdict::skipped, {{"reason", "zero probe"}}});
            return 0;
        }
        // dual element of w in L^{q'}: |w|^{q-1} w / |w|
        GridFunction phi = w;
        for (auto& z : phi.values()) z = std::abs(z) > 0.0 ? std::pow(std::abs(z), q - 2.0) * z : cplx(0.0);
        phi = normalize_in_lq(phi, q / (q - 1.0));
        const auto ss = sample_H(v_small, phi, 0.5, q0, q1, default_a_grid(0.5), default_b_grid(cfg.three_lines_b_step));
        const auto tl = three_lines_check(ss);
        rep.checks.push_back({"three_lines", tl.verdict,
                              {{"M", tl.M}, {"H_theta", tl.H_theta}, {"bound", tl.bound}, {"log_convex", tl.log_convex}}});
        std::vector<std::vector<double>> rows;
        for (std::size_t a = 0; a < ss.a_grid.size(); ++a)
            for (std::size_t b = 0; b < ss.b_grid.size(); ++b)
                rows.push_back({ss.a_grid[a], ss.b_grid[b], ss.H_values[a][b].real(), ss.H_values[a][b].imag()});
        rep.series["three_lines"] = series({"a", "b", "re_H", "im_H"}, rows);
        return 0;
    });

    stage("bernstein", [&] {
        const auto dp = build_partition(g);
        std::vector<std::vector<cplx>> probes;
        for (const auto& l : rep.step2.lines)
            if (l.verdict == Verdict::pass)
                for (int c = 0; c < g.N(); ++c) probes.push_back(v_small.time_line(l.x_index, c));
        std::vector<int> js;
        for (int j = dp.j_min; j <= dp.j_max; ++j) js.push_back(j);
        if (probes.empty()) {
            rep.checks.push_back({"bernstein", Verdict::skipped, {{"reason", "no probe lines"}}});
            return 0;
        }
        const auto br = bernstein_check(probes, js, q, dp);
        rep.checks.push_back({"bernstein", br.verdict, {{"fitted_c", br.fitted_c}, {"max_ratio", br.max_ratio}}});
        return 0;
    });

    stage("complex_order", [&] {
        const std::vector<double> as{0.0, 0.5, 1.0, 2.0}, bs{0.0, 2.0, 8.0, 16.0};
        if (lq_norm(v_small, q) == 0.0) return 0;
        const auto co = complex_order_bound_check(as, bs, {v_small}, q);
        std::vector<std::vector<double>> rows;
        for (const auto& r : co.rows) rows.push_back({r.a, r.b, q, r.ratio, co.fitted_C * r.growth});
        rep.series["complex_order"] = series({"a", "b", "q", "ratio", "bound"}, rows);
        return 0;
    });

    Verdict overall = combine(rep.step1.verdict, rep.step2.verdict);
    for (const auto& c : rep.checks) overall = combine(overall, c.verdict);
    rep.verdict = overall;
    if (overall == Verdict::fail) {
        std::ostringstream os;
        os << "failing:";
        if (rep.step1.verdict == Verdict::fail) os << " step1";
        if (rep.step2.verdict == Verdict::fail) os << " step2";
        for (const auto& c : rep.checks)
            if (c.verdict == Verdict::fail) os << ' ' << c.name;
        rep.message = os.str();
    }
    return rep;
}

// ---------------------------------------------------------------- plots

std::vector<std::filesystem::path> emit_plots(const RegularityReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    json files = json::array();
    for (const auto& [name, s] : report.series.items()) {
        const auto path = dir / (name + ".csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("emit_plots: cannot write " + path.string());
        const auto cols = s.at("columns").get<std::vector<std::string>>();
        for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
        out << '\n';
        std::size_t nrows = 0;
        for (const auto& row : s.at("rows")) {
            if (row.size() != cols.size()) throw Error("emit_plots: ragged series '" + name + "'");
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "," : "") << (row[i].is_null() ? std::string("nan") : fmt(row[i].get<double>()));
            out << '\n';
            ++nrows;
        }
        written.push_back(path);
        files.push_back({{"file", name + ".csv"}, {"columns", cols}, {"rows", nrows}});
    }
    const auto manifest = dir / "manifest.json";
    std::ofstream out(manifest, std::ios::binary);
    if (!out) throw Error("emit_plots: cannot write " + manifest.string());
    out << json{{"schema_version", report.schema_version},
                {"verdict", to_string(report.verdict)},
                {"config_hash", report.provenance.value("config_hash", "")},
                {"files", files}}
               .dump(2)
        << '\n';
    written.push_back(manifest);
    return written;
}

}  // namespace chronoreg
