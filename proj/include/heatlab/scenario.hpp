#pragma once

#include "heatlab/bounds.hpp"
#include "heatlab/space.hpp"
#include "heatlab/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace heatlab {

struct DaviesParams {
    double x1 = 0.0;
    double r1 = 0.5;
    double x2 = 1.0;
    double r2 = 0.5;
    double t = 1.0;
    double inflate = 1.0;
};

struct DoublingParams {
    double x = 0.0;
    double r = 1.0;
    double inflate = 1.0;
};

struct AnnulusParams {
    double x = 0.0;
    double r1 = 0.5;
    double r2 = 1.0;
    double R1 = 1.0;
    double R2 = 2.0;
};

struct BallShiftParams {
    double x = 0.0;
    double y = 1.0;
    double r = 1.0;
};

struct GaussianParams {
    enum class Kind { Upper, Lower, AltLower };
    Kind kind = Kind::Upper;
    GaussianOptions options;
};

struct HarnackParams {
    std::vector<ParabolicCylinders> cylinders;
    HarnackStudyOptions study;
    /// Verify mode: check the holdout trials against (c1, c2) instead of fitting.
    std::optional<std::vector<double>> constants;
    double margin = 0.0;
};

struct EigenParams {
    EigenOptions options;
};

struct GreenParams {
    double x = 0.0;
    std::vector<double> ys;
    GreenEnvelopeOptions options;
};

struct ParabolicityParams {
    double center = 0.0;
};

using CheckerParams = std::variant<DaviesParams, DoublingParams, AnnulusParams, BallShiftParams, GaussianParams,
                                   HarnackParams, EigenParams, GreenParams, ParabolicityParams>;

struct CheckerSpec {
    /// Row label; defaults to the checker's own id.
    std::string label;
    CheckerParams params;
};

struct Scenario {
    std::string id;
    SpaceSpec space;
    SamplePlan plan;
    std::vector<CheckerSpec> checkers;
    /// 1 runs the given resolution only; k > 1 also runs k - 1 halvings of h
    /// and reports the largest relative change of the fitted constants.
    int refinement_levels = 1;
};

struct ScenarioBatch {
    std::vector<Scenario> scenarios;
    std::string csv_path;
    std::string json_path;
};

/// Parses one scenario object. Schema violations throw SchemaViolation with
/// the JSON pointer of the offending value; `pointer` prefixes those paths.
Scenario parse_scenario(const nlohmann::ordered_json& doc, const std::string& pointer = "");

/// Either a single scenario object or {"scenarios": [...], "output": {...}}.
ScenarioBatch parse_batch(const nlohmann::ordered_json& doc);
ScenarioBatch load_batch(const std::filesystem::path& path);

struct ReportRow {
    std::string scenario_id;
    std::string space_kind;
    std::string potential;
    int resolution = 0;
    BoundReport report;
    /// The checker threw on the base resolution; `report` carries no verdict.
    bool failed = false;
    /// Message of the failure, or of a failure at a finer refinement level.
    std::string error;
};

std::vector<ReportRow> run_scenario(const Scenario& scenario);
std::vector<ReportRow> run_batch(const ScenarioBatch& batch);
bool any_violated(const std::vector<ReportRow>& rows);

struct ConvergenceLevel {
    int resolution = 0;
    double h = 0.0;
    std::vector<double> values;
};

/// One column per quantity. Kernel errors are against the closed form when the
/// space has one ("oracle"), otherwise against the next finer level ("self").
/// orders[l][q] = log2(err_l / err_{l+1}); fitted constants use successive
/// differences as their error.
struct ConvergenceTable {
    std::string scenario_id;
    std::string reference;
    std::vector<std::string> quantities;
    std::vector<ConvergenceLevel> levels;
    std::vector<std::vector<double>> orders;
};

ConvergenceTable convergence_study(const Scenario& scenario, int levels);

/// Kernel at the nodes nearest x and y.
struct KernelQuery {
    double x_node = 0.0;
    double y_node = 0.0;
    double t = 0.0;
    double H = 0.0;
    std::optional<double> closed_form;
};

KernelQuery query_kernel(const Scenario& scenario, double x, double y, double t);

// Serialization. Floats use 17 significant digits; non-finite values are
// written as the strings "inf", "-inf" and "nan".
std::string format_real(double v);
std::string rows_to_csv(const std::vector<ReportRow>& rows);
nlohmann::ordered_json rows_to_json(const std::vector<ReportRow>& rows);
std::vector<ReportRow> rows_from_json(const nlohmann::ordered_json& doc);
std::string convergence_to_csv(const ConvergenceTable& table);
nlohmann::ordered_json convergence_to_json(const ConvergenceTable& table);
/// indent < 0 writes a single line.
std::string dump_json(const nlohmann::ordered_json& doc, int indent = 2);

} // namespace heatlab
