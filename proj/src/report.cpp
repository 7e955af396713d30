#include "heatlab/error.hpp"
#include "heatlab/scenario.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace heatlab {

using Json = nlohmann::ordered_json;

namespace {

// Floats that JSON cannot carry travel as strings.
Json real(double v) {
    if (std::isfinite(v)) return v;
    return format_real(v);
}

double real_from(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    throw Error(ErrorCode::SchemaViolation, "expected a number or inf/-inf/nan, got " + j.dump());
}

Verdict verdict_from(const std::string& s) {
    for (auto v : {Verdict::Holds, Verdict::HoldsWithFitted, Verdict::Violated, Verdict::Skipped})
        if (to_string(v) == s) return v;
    throw Error(ErrorCode::SchemaViolation, "unknown verdict '" + s + "'");
}

Json named_values(const std::vector<NamedValue>& values) {
    Json out = Json::object();
    for (const auto& v : values) out[v.name] = real(v.value);
    return out;
}

std::vector<NamedValue> named_values_from(const Json& j) {
    std::vector<NamedValue> out;
    for (const auto& item : j.items()) out.push_back({item.key(), real_from(item.value())});
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string verdict_cell(const ReportRow& row) { return row.failed ? "Error" : to_string(row.report.verdict); }

void write_json(const Json& j, int indent, int depth, std::string& out) {
    const bool pretty = indent >= 0;
    auto newline = [&](int d) {
        if (!pretty) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += '{';
        bool first = true;
        for (const auto& item : j.items()) {
            if (!first) out += ',';
            first = false;
            newline(depth + 1);
            out += Json(item.key()).dump();
            out += pretty ? ": " : ":";
            write_json(item.value(), indent, depth + 1, out);
        }
        newline(depth);
        out += '}';
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += '[';
        bool first = true;
        for (const auto& item : j) {
            if (!first) out += ',';
            first = false;
            newline(depth + 1);
            write_json(item, indent, depth + 1, out);
        }
        newline(depth);
        out += ']';
        return;
    }
    case Json::value_t::number_float: out += format_real(j.get<double>()); return;
    default: out += j.dump(); return;
    }
}

} // namespace

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", v);
}

std::string dump_json(const Json& doc, int indent) {
    std::string out;
    write_json(doc, indent, 0, out);
    return out;
}

std::string rows_to_csv(const std::vector<ReportRow>& rows) {
    std::string out = "scenario_id,inequality_id,space_kind,potential,resolution,verdict,worst_deficit,"
                      "fitted_constants,stability_pct\n";
    for (const auto& row : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", csv_field(row.scenario_id), csv_field(row.report.id),
                           csv_field(row.space_kind), csv_field(row.potential), row.resolution, verdict_cell(row),
                           format_real(row.report.worst_deficit),
                           csv_field(dump_json(named_values(row.report.constants), -1)),
                           format_real(row.report.stability_pct));
    }
    return out;
}

Json rows_to_json(const std::vector<ReportRow>& rows) {
    Json list = Json::array();
    for (const auto& row : rows) {
        Json r;
        r["scenario_id"] = row.scenario_id;
        r["inequality_id"] = row.report.id;
        r["space_kind"] = row.space_kind;
        r["potential"] = row.potential;
        r["resolution"] = row.resolution;
        r["verdict"] = verdict_cell(row);
        r["worst_deficit"] = real(row.report.worst_deficit);
        r["fitted_constants"] = named_values(row.report.constants);
        r["stability_pct"] = real(row.report.stability_pct);
        r["sample_count"] = row.report.sample_count;
        r["budget_form"] = row.report.budget_form;
        r["extras"] = named_values(row.report.extras);
        r["flags"] = row.report.flags;
        if (!row.error.empty()) r["error"] = row.error;
        list.push_back(std::move(r));
    }
    Json doc;
    doc["rows"] = std::move(list);
    return doc;
}

std::vector<ReportRow> rows_from_json(const Json& doc) {
    if (!doc.is_object() || !doc.contains("rows") || !doc["rows"].is_array())
        throw Error(ErrorCode::SchemaViolation, "/rows: expected an array of report rows");
    std::vector<ReportRow> rows;
    std::size_t index = 0;
    for (const auto& r : doc["rows"]) {
        try {
            ReportRow row;
            row.scenario_id = r.at("scenario_id").get<std::string>();
            row.report.id = r.at("inequality_id").get<std::string>();
            row.space_kind = r.at("space_kind").get<std::string>();
            row.potential = r.at("potential").get<std::string>();
            row.resolution = r.at("resolution").get<int>();
            const auto verdict = r.at("verdict").get<std::string>();
            row.failed = verdict == "Error";
            if (!row.failed) row.report.verdict = verdict_from(verdict);
            row.report.worst_deficit = real_from(r.at("worst_deficit"));
            row.report.constants = named_values_from(r.at("fitted_constants"));
            row.report.stability_pct = real_from(r.at("stability_pct"));
            row.report.sample_count = r.value("sample_count", std::size_t{0});
            row.report.budget_form = r.value("budget_form", std::string{});
            if (r.contains("extras")) row.report.extras = named_values_from(r["extras"]);
            if (r.contains("flags")) row.report.flags = r["flags"].get<std::vector<std::string>>();
            row.error = r.value("error", std::string{});
            rows.push_back(std::move(row));
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::SchemaViolation, fmt::format("/rows/{}: {}", index, e.what()));
        }
        ++index;
    }
    return rows;
}

std::string convergence_to_csv(const ConvergenceTable& table) {
    std::string out = "scenario_id,reference,level,resolution,h";
    for (const auto& q : table.quantities) out += "," + csv_field(q) + "," + csv_field(q + "_order");
    out += '\n';
    for (std::size_t L = 0; L < table.levels.size(); ++L) {
        const auto& lv = table.levels[L];
        out += fmt::format("{},{},{},{},{}", csv_field(table.scenario_id), table.reference, L, lv.resolution,
                           format_real(lv.h));
        for (std::size_t q = 0; q < table.quantities.size(); ++q) {
            const double order = L < table.orders.size() ? table.orders[L][q] : std::numeric_limits<double>::quiet_NaN();
            out += "," + format_real(lv.values[q]) + "," + format_real(order);
        }
        out += '\n';
    }
    return out;
}

Json convergence_to_json(const ConvergenceTable& table) {
    Json doc;
    doc["scenario_id"] = table.scenario_id;
    doc["reference"] = table.reference;
    doc["quantities"] = table.quantities;
    Json levels = Json::array();
    for (std::size_t L = 0; L < table.levels.size(); ++L) {
        Json lv;
        lv["resolution"] = table.levels[L].resolution;
        lv["h"] = real(table.levels[L].h);
        Json values = Json::object();
        Json orders = Json::object();
        for (std::size_t q = 0; q < table.quantities.size(); ++q) {
            values[table.quantities[q]] = real(table.levels[L].values[q]);
            if (L < table.orders.size()) orders[table.quantities[q]] = real(table.orders[L][q]);
        }
        lv["values"] = std::move(values);
        if (L < table.orders.size()) lv["order_to_next"] = std::move(orders);
        levels.push_back(std::move(lv));
    }
    doc["levels"] = std::move(levels);
    return doc;
}

} // namespace heatlab
