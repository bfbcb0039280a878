// chronoreg_cli: command-line front end for the regularity toolkit.
//
// Exit codes: 0 all PASS, 1 any FAIL, 2 usage or config error, 3 internal error.

#include <CLI11.hpp>
#include <json.hpp>

#include "chronoreg/error.hpp"
#include "chronoreg/interpolation.hpp"
#include "chronoreg/io.hpp"
#include "chronoreg/lp_holder.hpp"
#include "chronoreg/parallel.hpp"
#include "chronoreg/pde.hpp"
#include "chronoreg/pipeline.hpp"
#include "chronoreg/potentials.hpp"
#include "chronoreg/spectral.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <string>

using namespace chronoreg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
}

// Fills options of `sub` that were not given on the command line from a JSON
// object whose keys are the long option names without dashes.
void apply_config(CLI::App* sub, const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config") throw ConfigError("config: unknown key '" + key + "' for " + sub->get_name());
        if (opt->count() > 0) continue;
        std::string text;
        if (value.is_string()) text = value.get<std::string>();
        else if (value.is_boolean()) text = value.get<bool>() ? "true" : "false";
        else if (value.is_number()) text = value.dump();
        else throw ConfigError("config: key '" + key + "' must be a string, number or boolean");
        opt->add_result(text);
        try {
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw ConfigError("config: key '" + key + "': " + e.what());
        }
    }
}

Scheme parse_scheme(const std::string& s) {
    if (s == "semi-implicit") return Scheme::semi_implicit;
    if (s == "explicit") return Scheme::explicit_euler;
    throw ConfigError("unknown scheme '" + s + "'");
}

int exit_for(Verdict v) { return v == Verdict::fail ? kExitFail : kExitPass; }

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

// random trigonometric polynomial with |k_t|, |k_x| <= band
GridFunction band_limited_probe(const Grid& g, int band, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    std::vector<double> a(static_cast<std::size_t>((2 * band + 1) * (2 * band + 1)));
    for (auto& c : a) c = n01(rng);
    const double wt = 2.0 * std::numbers::pi / g.L_t();
    const double wx = 2.0 * std::numbers::pi / g.L_x();
    return GridFunction::sample(g, [&](double t, std::span<const double> x, int) {
        double v = 0.0;
        std::size_t i = 0;
        for (int kt = -band; kt <= band; ++kt)
            for (int kx = -band; kx <= band; ++kx) {
                double ph = kt * wt * t;
                for (double xk : x) ph += kx * wx * xk;
                v += a[i++] * std::cos(ph);
            }
        return cplx(v);
    });
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
    std::string preset = "heat";
    int d = 1, N = 1, nt = 64, nx = 64;
    double Lt = 1.0, Lx = 2.0 * std::numbers::pi;
    double time_step = 0.0;
    std::string scheme = "semi-implicit";
    std::string initial = "sine";
    std::string out;
};

int run_solve(const SolveArgs& a) {
    const auto spec = make_preset(a.preset, a.d, a.N);
    SolveConfig sc;
    sc.grid = Grid(a.d, a.nt, a.nx, a.Lt, a.Lx, a.N);
    sc.time_step = a.time_step > 0.0 ? a.time_step : sc.grid.dt() / 4.0;
    sc.scheme = parse_scheme(a.scheme);
    const auto r = solve(spec, named_initial_condition(a.initial, sc.grid), sc);
    if (!a.out.empty()) save_grid_function(r.field, a.out);
    // the conservation checks only apply without zero-order terms
    const bool conservative = !spec.B && !(spec.forcing && spec.forcing->f);
    Verdict v = Verdict::skipped;
    if (conservative) v = r.max_mass_drift <= 1e-10 ? Verdict::pass : Verdict::fail;
    emit({{"verb", "solve"},
          {"preset", a.preset},
          {"steps", r.steps},
          {"step_size", r.step_size},
          {"max_picard_used", r.max_picard_used},
          {"max_mass_drift", r.max_mass_drift},
          {"max_energy_increase", r.max_energy_increase},
          {"l2_norm", lq_norm(r.field, 2.0)},
          {"output", a.out},
          {"verdict", to_string(v)}});
    return exit_for(v);
}

// ---------------------------------------------------------------- potential

struct PotentialArgs {
    std::string in, out;
    std::string axis = "x";
    double s = 1.0, s_im = 0.0, s_t = 0.0, theta = 0.5, q = 2.0;
};

int run_potential(const PotentialArgs& a) {
    const auto f = load_grid_function(a.in);
    GridFunction g(f.grid());
    if (a.axis == "x") g = bessel_x(f, PotentialOrder(a.s, a.s_im));
    else if (a.axis == "t") g = bessel_t(f, PotentialOrder(a.s, a.s_im));
    else if (a.axis == "xt") g = bessel_xt(f, PotentialOrder(a.s, a.s_im), PotentialOrder(a.s_t));
    else if (a.axis == "mixed") g = mixed_potential(f, MixedOrder(a.theta));
    else throw ConfigError("potential: axis must be x, t, xt or mixed");
    if (!a.out.empty()) save_grid_function(g, a.out);
    const double nin = lq_norm(f, a.q), nout = lq_norm(g, a.q);
    const Verdict v = std::isfinite(nout) ? Verdict::pass : Verdict::fail;
    emit({{"verb", "potential"},
          {"axis", a.axis},
          {"q", a.q},
          {"input_norm", nin},
          {"output_norm", nout},
          {"output", a.out},
          {"verdict", to_string(v)}});
    return exit_for(v);
}

// ---------------------------------------------------------------- holder

struct HolderArgs {
    std::string in, csv;
    double alpha = 0.25;
    int component = 0;
};

int run_holder(const HolderArgs& a) {
    if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw ConfigError("holder: alpha must lie in (0, 1)");
    const auto f = load_grid_function(a.in);
    const Grid& g = f.grid();
    if (a.component < 0 || a.component >= g.N()) throw ConfigError("holder: component out of range");
    const auto dp = build_partition(g);
    std::vector<LineHolderRow> rows;
    double worst = 0.0;
    bool finite = true;
    for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) {
        const auto line = f.time_line(ix, a.component);
        LineHolderRow r{ix, holder_lp(line, a.alpha, dp), holder_direct(line, a.alpha, g.dt())};
        finite = finite && std::isfinite(r.lp_value) && std::isfinite(r.direct_value);
        if (r.lp_value > 0.0) worst = std::max(worst, r.direct_value / r.lp_value);
        rows.push_back(r);
    }
    if (!a.csv.empty()) write_line_holder_csv(rows, a.csv);
    const Verdict v = finite ? Verdict::pass : Verdict::fail;
    emit({{"verb", "holder"},
          {"alpha", a.alpha},
          {"lines", rows.size()},
          {"max_direct_over_lp", worst},
          {"csv", a.csv},
          {"verdict", to_string(v)}});
    return exit_for(v);
}

// ---------------------------------------------------------------- interp-check

struct InterpArgs {
    std::string in;
    double theta = 0.5, q0 = 2.5, q1 = 1.8;
    int probes = 8, n = 64, band = 4;
    std::uint64_t seed = 1;
};

int run_interp(const InterpArgs& a) {
    std::vector<GridFunction> probes;
    if (!a.in.empty()) {
        probes.push_back(load_grid_function(a.in));
    } else {
        if (a.probes < 1) throw ConfigError("interp-check: probes must be positive");
        const Grid g(1, a.n, a.n, 2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
        std::mt19937_64 rng(a.seed);
        for (int i = 0; i < a.probes; ++i) probes.push_back(band_limited_probe(g, a.band, rng));
    }
    const auto suite = interpolation_suite(probes, {{a.theta, a.q0, a.q1}});
    json rows = json::array();
    for (const auto& r : suite.rows)
        rows.push_back({{"lhs", r.lhs}, {"rhs0", r.rhs0}, {"rhs1", r.rhs1}, {"ratio", r.ratio}, {"skipped", r.skipped}});
    const double qt = q_theta(a.theta, a.q0, a.q1);
    json out{{"verb", "interp-check"},
             {"theta", a.theta},
             {"q0", a.q0},
             {"q1", a.q1},
             {"q_theta", qt},
             {"c_suite", suite.c_suite},
             {"rows", rows},
             {"verdict", to_string(suite.verdict)}};
    if (a.theta == 0.5) out["identity_error"] = std::abs(2.0 / qt - (1.0 / a.q0 + 1.0 / a.q1));
    emit(out);
    return exit_for(suite.verdict);
}

// ---------------------------------------------------------------- mihlin

struct MihlinArgs {
    std::string symbol = "riesz";
    int d = 2, order = 0, samples = 64;
    double b = 1.0;
};

int run_mihlin(const MihlinArgs& a) {
    if (a.d < 1) throw ConfigError("mihlin: d must be positive");
    SpectralMultiplier m;
    m.dims = a.d;
    if (a.symbol == "riesz") {
        m.symbol = [](std::span<const double> v) {
            double r = 0.0;
            for (double x : v) r += x * x;
            return cplx(v[0] / std::sqrt(r));
        };
    } else if (a.symbol == "imaginary-bessel") {
        const double b = a.b;
        m.symbol = [b](std::span<const double> v) {
            double r = 1.0;
            for (double x : v) r += x * x;
            return std::pow(cplx(r), cplx(0.0, -0.5 * b));
        };
        m.value_at_zero = cplx(1.0);
    } else {
        throw ConfigError("mihlin: symbol must be riesz or imaginary-bessel");
    }
    const int order = a.order > 0 ? a.order : a.d + 2;
    m.declared_smoothness = order;
    const double M = mihlin_norm_estimate(m, order, a.samples);
    const Verdict v = std::isfinite(M) ? Verdict::pass : Verdict::fail;
    emit({{"verb", "mihlin"},
          {"symbol", a.symbol},
          {"d", a.d},
          {"order", order},
          {"samples", a.samples},
          {"estimate", M},
          {"verdict", to_string(v)}});
    return exit_for(v);
}

// ---------------------------------------------------------------- pipeline

struct PipelineArgs {
    std::string config, out, preset, initial;
};

int run_pipeline_verb(const PipelineArgs& a) {
    PipelineConfig cfg = a.config.empty() ? PipelineConfig{} : pipeline_config_from_json(read_json_file(a.config));
    if (!a.preset.empty()) cfg.preset = a.preset;
    if (!a.initial.empty()) cfg.initial = a.initial;
    if (!a.out.empty()) cfg.output_dir = a.out;
    const auto report = run_pipeline(cfg);
    json summary{{"verb", "pipeline"},
                 {"preset", report.preset},
                 {"measured_delta", report.measured_delta},
                 {"alpha", report.alpha},
                 {"step1", to_string(report.step1.verdict)},
                 {"step2", to_string(report.step2.verdict)},
                 {"line_fraction", report.step2.fraction},
                 {"verdict", to_string(report.verdict)},
                 {"message", report.message}};
    if (!cfg.output_dir.empty()) {
        const fs::path dir(cfg.output_dir);
        fs::create_directories(dir);
        std::ofstream rep(dir / "report.json", std::ios::binary);
        if (!rep) throw Error("cannot write " + (dir / "report.json").string());
        rep << to_json(report).dump(2) << '\n';
        emit_plots(report, dir / "plots");
        summary["report"] = (dir / "report.json").string();
    }
    emit(summary);
    return exit_for(report.verdict);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chronoreg: time regularity checks for parabolic systems"};
    app.require_subcommand(1);
    int workers = 1;
    app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

    std::string config;
    auto add_config = [&](CLI::App* sub) { sub->add_option("--config", config, "JSON document with option values"); };

    SolveArgs sa;
    auto* solve_cmd = app.add_subcommand("solve", "time-march a preset and store the field");
    solve_cmd->add_option("--preset", sa.preset);
    solve_cmd->add_option("--d", sa.d);
    solve_cmd->add_option("--N", sa.N);
    solve_cmd->add_option("--nt", sa.nt);
    solve_cmd->add_option("--nx", sa.nx);
    solve_cmd->add_option("--Lt", sa.Lt);
    solve_cmd->add_option("--Lx", sa.Lx);
    solve_cmd->add_option("--time-step", sa.time_step, "substep; 0 = a quarter of the row spacing");
    solve_cmd->add_option("--scheme", sa.scheme, "semi-implicit or explicit");
    solve_cmd->add_option("--initial", sa.initial, "sine, bump or zero");
    solve_cmd->add_option("--out", sa.out, "binary output path (sidecar JSON written next to it)");
    add_config(solve_cmd);

    PotentialArgs pa;
    auto* pot_cmd = app.add_subcommand("potential", "apply a Bessel potential to a stored field");
    pot_cmd->add_option("--in", pa.in)->required();
    pot_cmd->add_option("--out", pa.out);
    pot_cmd->add_option("--axis", pa.axis, "x, t, xt or mixed");
    pot_cmd->add_option("--s", pa.s, "real part of the order");
    pot_cmd->add_option("--s-im", pa.s_im, "imaginary part of the order");
    pot_cmd->add_option("--s-t", pa.s_t, "time order for axis xt");
    pot_cmd->add_option("--theta", pa.theta, "theta for axis mixed");
    pot_cmd->add_option("--q", pa.q, "norm exponent of the reported norms");
    add_config(pot_cmd);

    HolderArgs ha;
    auto* holder_cmd = app.add_subcommand("holder", "per-line Hoelder estimates of a stored field");
    holder_cmd->add_option("--in", ha.in)->required();
    holder_cmd->add_option("--alpha", ha.alpha);
    holder_cmd->add_option("--component", ha.component);
    holder_cmd->add_option("--csv", ha.csv);
    add_config(holder_cmd);

    InterpArgs ia;
    auto* interp_cmd = app.add_subcommand("interp-check", "mixed-potential interpolation inequality");
    interp_cmd->add_option("--in", ia.in, "stored probe; random band-limited probes otherwise");
    interp_cmd->add_option("--theta", ia.theta);
    interp_cmd->add_option("--q0", ia.q0);
    interp_cmd->add_option("--q1", ia.q1);
    interp_cmd->add_option("--probes", ia.probes);
    interp_cmd->add_option("--n", ia.n, "points per axis of generated probes");
    interp_cmd->add_option("--band", ia.band);
    interp_cmd->add_option("--seed", ia.seed);
    add_config(interp_cmd);

    MihlinArgs ma;
    auto* mihlin_cmd = app.add_subcommand("mihlin", "sampled Mihlin constant of a symbol");
    mihlin_cmd->add_option("--symbol", ma.symbol, "riesz or imaginary-bessel");
    mihlin_cmd->add_option("--d", ma.d);
    mihlin_cmd->add_option("--order", ma.order, "derivative cap; 0 = d + 2");
    mihlin_cmd->add_option("--samples", ma.samples);
    mihlin_cmd->add_option("--b", ma.b, "imaginary order for imaginary-bessel");
    add_config(mihlin_cmd);

    PipelineArgs pla;
    auto* pipe_cmd = app.add_subcommand("pipeline", "end-to-end regularity report");
    pipe_cmd->add_option("--config", pla.config, "pipeline config JSON");
    pipe_cmd->add_option("--out", pla.out, "directory for report.json and plots/");
    pipe_cmd->add_option("--preset", pla.preset);
    pipe_cmd->add_option("--initial", pla.initial);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitPass : kExitUsage;
    }

    try {
        set_worker_count(workers);
        for (CLI::App* sub : {solve_cmd, pot_cmd, holder_cmd, interp_cmd, mihlin_cmd})
            if (sub->parsed() && !config.empty()) apply_config(sub, read_json_file(config));
        if (solve_cmd->parsed()) return run_solve(sa);
        if (pot_cmd->parsed()) return run_potential(pa);
        if (holder_cmd->parsed()) return run_holder(ha);
        if (interp_cmd->parsed()) return run_interp(ia);
        if (mihlin_cmd->parsed()) return run_mihlin(ma);
        if (pipe_cmd->parsed()) return run_pipeline_verb(pla);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitUsage;
}
