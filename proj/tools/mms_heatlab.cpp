#include "heatlab/error.hpp"
#include "heatlab/kernels.hpp"
#include "heatlab/scenario.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>

using namespace heatlab;

namespace {

constexpr int kExitViolated = 1;
constexpr int kExitInput = 2;

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
    out << text;
}

const Scenario& pick(const ScenarioBatch& batch, const std::string& id) {
    if (id.empty()) return batch.scenarios.front();
    for (const auto& s : batch.scenarios)
        if (s.id == id) return s;
    throw Error(ErrorCode::InvalidArgument, "no scenario with id '" + id + "'");
}

int cmd_run(const std::string& file, std::string csv, std::string json) {
    const auto batch = load_batch(file);
    if (csv.empty()) csv = batch.csv_path;
    if (json.empty()) json = batch.json_path;
    const auto rows = run_batch(batch);
    for (const auto& row : rows)
        if (!row.error.empty())
            std::cerr << fmt::format("{}/{}: {}\n", row.scenario_id, row.report.id, row.error);
    const auto csv_text = rows_to_csv(rows);
    if (!csv.empty()) write_file(csv, csv_text);
    if (!json.empty()) write_file(json, dump_json(rows_to_json(rows)) + "\n");
    if (csv.empty() && json.empty()) std::cout << csv_text;
    return any_violated(rows) ? kExitViolated : 0;
}

int cmd_converge(const std::string& file, int levels, const std::string& format, const std::string& id) {
    const auto batch = load_batch(file);
    std::vector<const Scenario*> chosen;
    if (id.empty())
        for (const auto& s : batch.scenarios) chosen.push_back(&s);
    else
        chosen.push_back(&pick(batch, id));
    if (format == "json") {
        nlohmann::ordered_json all = nlohmann::ordered_json::array();
        for (const auto* s : chosen) all.push_back(convergence_to_json(convergence_study(*s, levels)));
        std::cout << dump_json(all) << "\n";
    } else {
        for (std::size_t k = 0; k < chosen.size(); ++k) {
            if (k > 0) std::cout << "\n";
            std::cout << convergence_to_csv(convergence_study(*chosen[k], levels));
        }
    }
    return 0;
}

int cmd_kernel(const std::string& file, double x, double y, double t, const std::string& id) {
    const auto batch = load_batch(file);
    const auto q = query_kernel(pick(batch, id), x, y, t);
    nlohmann::ordered_json doc;
    doc["x_node"] = q.x_node;
    doc["y_node"] = q.y_node;
    doc["t"] = q.t;
    doc["H"] = q.H;
    if (q.closed_form) {
        doc["closed_form"] = *q.closed_form;
        doc["relative_error"] = std::abs(q.H - *q.closed_form) / std::abs(*q.closed_form);
    }
    std::cout << dump_json(doc) << "\n";
    return 0;
}

int cmd_report(const std::string& file, const std::string& format) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open report " + file);
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::ordered_json::parse_error& e) {
        throw Error(ErrorCode::SchemaViolation, file + ": " + e.what());
    }
    const auto rows = rows_from_json(doc);
    if (format == "json") std::cout << dump_json(rows_to_json(rows)) << "\n";
    else std::cout << rows_to_csv(rows);
    return any_violated(rows) ? kExitViolated : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted heat kernel laboratory: scenario runner and convergence studies"};
    app.require_subcommand(1);

    std::string file;
    std::string csv;
    std::string json;
    std::string format = "csv";
    std::string scenario_id;
    int levels = 3;
    double x = 0.0;
    double y = 0.0;
    double t = 1.0;

    auto* run = app.add_subcommand("run", "Run every checker of a scenario file");
    run->add_option("file", file, "Scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--csv", csv, "CSV report path (overrides the file's output.csv)");
    run->add_option("--json", json, "JSON report path (overrides the file's output.json)");

    auto* converge = app.add_subcommand("converge", "Kernel errors and fitted constants under h -> h/2");
    converge->add_option("file", file, "Scenario file")->required()->check(CLI::ExistingFile);
    converge->add_option("--levels", levels, "Number of resolutions")->check(CLI::Range(2, 6));
    converge->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    converge->add_option("--scenario", scenario_id, "Only this scenario id");

    auto* kernel = app.add_subcommand("kernel", "Evaluate H(x, y, t) on a scenario's space");
    kernel->add_option("file", file, "Scenario file")->required()->check(CLI::ExistingFile);
    kernel->add_option("--x", x, "First point")->required();
    kernel->add_option("--y", y, "Second point")->required();
    kernel->add_option("--t", t, "Time")->required();
    kernel->add_option("--scenario", scenario_id, "Scenario id (default: first)");

    auto* report = app.add_subcommand("report", "Re-emit a JSON report as CSV or JSON");
    report->add_option("file", file, "JSON report written by run")->required()->check(CLI::ExistingFile);
    report->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version exit 0; every other usage error is an input error.
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    configure_threads();
    try {
        if (*run) return cmd_run(file, csv, json);
        if (*converge) return cmd_converge(file, levels, format, scenario_id);
        if (*kernel) return cmd_kernel(file, x, y, t, scenario_id);
        return cmd_report(file, format);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}
