#pragma once

#include "chronoreg/exponents.hpp"
#include "chronoreg/grid.hpp"
#include "chronoreg/mollify.hpp"
#include "chronoreg/pde.hpp"
#include "chronoreg/verdict.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace chronoreg {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kLibraryVersion = "1.0.0";

struct PipelineConfig {
    std::string preset = "heat";
    int d = 1;
    int N = 1;
    double epsilon_reg = 1e-8;
    /// Points per axis on each refinement level (n_t = n_x); the last level is the finest.
    std::vector<int> ladder{32, 64, 128};
    double L_t = 6.283185307179586;
    double L_x = 6.283185307179586;
    /// Defaults to default_domains of the finest grid with the plateau I'' x Q''
    /// shrunk to the middle quarter [3L/8, 5L/8] on every axis.
    std::optional<NestedDomains> domains;
    /// Strictly decreasing mollification radii; empty means 2h * 2^(k/2) for
    /// k = 5, ..., 0 with h the finest grid spacing max(dt, dx), keeping the
    /// values at or below min(L_t, L_x)/8.
    std::vector<double> eps_list;
    std::vector<double> delta_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    std::optional<double> alpha_override;
    double q_hat = 2.0;
    /// "sine", "bump" or "zero".
    std::string initial = "sine";
    /// Solver substep; 0 means a quarter of the row spacing on each level.
    double time_step = 0.0;
    Scheme scheme = Scheme::semi_implicit;
    double line_pass_fraction = 0.95;
    double three_lines_b_step = 0.1;
    std::uint64_t seed = 1;
    std::string output_dir;

    bool operator==(const PipelineConfig&) const = default;
};

nlohmann::json to_json(const PipelineConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
/// Throws ConfigError for an unknown preset, a ladder shorter than 3 or not
/// increasing, domains that do not fit the finest grid with padding, or an
/// eps list that is not strictly decreasing or exceeds min(L_t, L_x)/8.
void validate(const PipelineConfig& c);
/// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const PipelineConfig& c);

struct Step1Result {
    std::vector<int> levels;
    std::vector<double> sup_lq;     // per level: sup_t ||v(t)||_{L^q}
    std::vector<double> quotient;   // per level: sup_{t != s} ||v(t) - v(s)||_{L^q} / |t - s|^alpha
    std::vector<double> eps;        // finest level
    std::vector<double> eps_total;  // sup_lq + quotient of v_eps
    std::vector<double> eps_step;   // ||v_eps[k+1] - v_eps[k]||_{L^q}
    std::vector<double> potential_norm;  // ||J_t^{-1/2} v_eps||_{L^q}
    double constant = 0.0;          // max over eps of eps_total / potential_norm
    Verdict verdict = Verdict::skipped;
    std::string note;
    bool operator==(const Step1Result&) const = default;
};

struct LineResult {
    std::size_t x_index = 0;
    std::vector<double> norms;       // ||J_t^{-1/2} v_eps(., x)||_{L^q(R)} per eps
    std::optional<double> c_line;    // max over eps of (sup + Hoelder quotient) / norm; empty if not finite
    double lp_value = 0.0;           // holder_lp at the smallest eps
    double direct_value = 0.0;       // holder_direct at the smallest eps
    bool cauchy = false;
    Verdict verdict = Verdict::skipped;
    bool operator==(const LineResult&) const = default;
};

struct Step2Result {
    std::vector<LineResult> lines;   // spatial nodes inside the plateau Q''^d
    double fraction = 0.0;           // PASS lines / lines
    double worst_constant = 0.0;
    double constant_spread = 1.0;    // max / min of c_line over lines with nonzero norm
    std::vector<std::size_t> failing;
    Verdict verdict = Verdict::skipped;
    bool operator==(const Step2Result&) const = default;
};

/// Per spatial line of v over the plateau Q'': Cauchy-in-eps check of the half-order time potential
/// norms (last successive difference below 10% of the first) and the per-line
/// bound sup + alpha-Hoelder quotient <= C_line * norm. Lines holding a
/// non-finite value are reported FAIL; before mollification they are replaced
/// by the mean of their clean axis neighbours.
Step2Result step2_line_analysis(const GridFunction& v, const NestedDomains& nd, const std::vector<double>& eps_list,
                                double q, double alpha, double pass_fraction = 0.95);

struct SubCheck {
    std::string name;
    Verdict verdict = Verdict::skipped;
    nlohmann::json detail;
    bool operator==(const SubCheck&) const = default;
};

struct RegularityReport {
    int schema_version = kReportSchemaVersion;
    std::string preset;
    double measured_delta = 0.0;
    std::optional<ExponentSet> exponents;
    double alpha = 0.0;
    nlohmann::json scan;
    Step1Result step1;
    Step2Result step2;
    std::vector<SubCheck> checks;
    /// name -> {"columns": [...], "rows": [[...], ...]}; one CSV each.
    nlohmann::json series = nlohmann::json::object();
    Verdict verdict = Verdict::skipped;
    std::string message;
    nlohmann::json provenance = nlohmann::json::object();
    bool operator==(const RegularityReport&) const = default;
};

nlohmann::json to_json(const RegularityReport& r);
/// Throws ConfigError for a missing or different schema version.
RegularityReport regularity_report_from_json(const nlohmann::json& j);

/// solve -> cutoff and v = chi u -> a-priori bounds -> half-order potential
/// bound -> per-line Hoelder estimates -> Step 1 and Step 2 aggregation. A
/// stage error is rethrown with the stage name prefixed. measured_delta = 0
/// yields a FAIL report, not an exception.
RegularityReport run_pipeline(const PipelineConfig& cfg);

/// Writes one CSV per series plus manifest.json into dir (created if needed)
/// and returns the written paths, manifest last.
std::vector<std::filesystem::path> emit_plots(const RegularityReport& report, const std::filesystem::path& dir);

/// ||chi u||_{L^q} for cutoffs whose plateau I'' x Q'' grows toward I' x Q' in
/// `steps` equal increments; the sequence should be nondecreasing.
std::vector<double> localization_profile(const GridFunction& u, const NestedDomains& nd, double q, int steps);

/// Initial data by name on the given grid ("sine", "bump", "zero").
GridFunction named_initial_condition(const std::string& name, const Grid& g);

}  // namespace chronoreg
