#include "heatlab/scenario.hpp"

#include "heatlab/error.hpp"
#include "heatlab/kernels.hpp"
#include "heatlab/operator.hpp"
#include "heatlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <set>

#include <fmt/format.h>

namespace heatlab {

using Json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Errors below this are round-off and carry no convergence order.
constexpr double kRoundOff = 1e-10;

std::string escape_pointer(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

// A JSON value together with its pointer, so every schema error names its location.
class Node {
public:
    Node(const Json& value, std::string pointer) : value_(value), pointer_(std::move(pointer)) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::SchemaViolation, fmt::format("{}: {}", pointer_.empty() ? "/" : pointer_, what));
    }

    const Json& value() const { return value_; }
    const std::string& pointer() const { return pointer_; }

    void require_object() const {
        if (!value_.is_object()) fail("expected an object");
    }

    void allow_only(std::initializer_list<const char*> keys) const {
        require_object();
        for (const auto& item : value_.items()) {
            const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; });
            if (!known) child(item.key()).fail("unknown key");
        }
    }

    bool has(const char* key) const { return value_.is_object() && value_.contains(key); }

    Node child(const std::string& key) const {
        require_object();
        if (!value_.contains(key)) Node(value_, pointer_ + "/" + escape_pointer(key)).fail("missing required key");
        return Node(value_.at(key), pointer_ + "/" + escape_pointer(key));
    }

    Node element(std::size_t i) const { return Node(value_.at(i), fmt::format("{}/{}", pointer_, i)); }

    double number() const {
        if (!value_.is_number()) fail("expected a number");
        const double v = value_.get<double>();
        if (!std::isfinite(v)) fail("expected a finite number");
        return v;
    }

    long long integer() const {
        if (!value_.is_number_integer()) fail("expected an integer");
        return value_.get<long long>();
    }

    std::string string() const {
        if (!value_.is_string()) fail("expected a string");
        return value_.get<std::string>();
    }

    std::size_t array_size() const {
        if (!value_.is_array()) fail("expected an array");
        return value_.size();
    }

    /// A list of numbers, or {"from": a, "to": b, "step": s} (inclusive of b up to rounding).
    std::vector<double> reals() const {
        std::vector<double> out;
        if (value_.is_object()) {
            allow_only({"from", "to", "step"});
            const double a = child("from").number();
            const double b = child("to").number();
            const double s = child("step").number();
            if (!(s > 0.0)) child("step").fail("step must be positive");
            if (b < a) child("to").fail("range end before its start");
            const auto count = static_cast<long long>(std::floor((b - a) / s + 1e-9));
            if (count > 100000) fail("range too long");
            for (long long k = 0; k <= count; ++k) out.push_back(a + static_cast<double>(k) * s);
            return out;
        }
        const std::size_t n = array_size();
        for (std::size_t i = 0; i < n; ++i) out.push_back(element(i).number());
        return out;
    }

    double number_or(const char* key, double fallback) const { return has(key) ? child(key).number() : fallback; }

    double positive_or(const char* key, double fallback) const {
        const double v = number_or(key, fallback);
        if (!(v > 0.0)) child(key).fail("must be positive");
        return v;
    }

    std::size_t count_or(const char* key, std::size_t fallback) const {
        if (!has(key)) return fallback;
        const long long v = child(key).integer();
        if (v < 0) child(key).fail("must be nonnegative");
        return static_cast<std::size_t>(v);
    }

private:
    const Json& value_;
    std::string pointer_;
};

PotentialSpec parse_potential(const Node& node) {
    if (node.value().is_string()) {
        const auto name = node.string();
        if (name == "zero") return PotentialSpec::zero();
        node.fail("unknown potential '" + name + "' (use an object for parametrised families)");
    }
    node.require_object();
    const auto family = node.child("family").string();
    if (family == "zero") {
        node.allow_only({"family"});
        return PotentialSpec::zero();
    }
    if (family == "linear") {
        node.allow_only({"family", "a", "b"});
        return PotentialSpec::linear(node.child("a").number(), node.number_or("b", 0.0));
    }
    if (family == "quadratic") {
        node.allow_only({"family", "c"});
        return PotentialSpec::quadratic(node.child("c").number());
    }
    if (family == "custom") {
        node.allow_only({"family", "values"});
        return PotentialSpec::custom(node.child("values").reals());
    }
    node.child("family").fail("unknown potential family '" + family + "'");
}

BoundaryKind parse_boundary(const Node& node) {
    const auto name = node.string();
    if (name == "neumann") return BoundaryKind::Neumann;
    if (name == "dirichlet") return BoundaryKind::Dirichlet;
    if (name == "periodic") return BoundaryKind::Periodic;
    node.fail("unknown boundary '" + name + "'");
}

SpaceSpec parse_space(const Node& node) {
    node.require_object();
    const auto kind = node.child("kind").string();
    SpaceSpec spec;
    const auto res_node = node.child("resolution");
    const long long res = res_node.integer();
    if (res < 32 || res > 8192 || (res & (res - 1)) != 0)
        res_node.fail("resolution must be a power of two between 32 and 8192");
    const int resolution = static_cast<int>(res);
    const PotentialSpec f = node.has("potential") ? parse_potential(node.child("potential")) : PotentialSpec::zero();
    if (kind == "interval") {
        node.allow_only({"kind", "lo", "hi", "resolution", "potential", "boundary"});
        const auto bc = node.has("boundary") ? parse_boundary(node.child("boundary")) : BoundaryKind::Neumann;
        spec = SpaceSpec::interval(node.child("lo").number(), node.child("hi").number(), resolution, f, bc);
    } else if (kind == "circle") {
        node.allow_only({"kind", "length", "resolution", "potential", "boundary"});
        spec = SpaceSpec::circle(node.child("length").number(), resolution, f);
        if (node.has("boundary")) spec.boundary = parse_boundary(node.child("boundary"));
    } else if (kind == "radial") {
        node.allow_only({"kind", "dim", "radius", "resolution", "potential", "boundary"});
        const auto bc = node.has("boundary") ? parse_boundary(node.child("boundary")) : BoundaryKind::Neumann;
        spec = SpaceSpec::radial(static_cast<int>(node.child("dim").integer()), node.child("radius").number(),
                                 resolution, f, bc);
    } else {
        node.child("kind").fail("unknown space kind '" + kind + "'");
    }
    if (f.family == PotentialSpec::Family::Custom && f.table.size() != static_cast<std::size_t>(spec.resolution))
        node.child("potential").child("values").fail(
            fmt::format("custom table has {} values for {} nodes", f.table.size(), spec.resolution));
    try {
        WeightedSpace probe(spec);
    } catch (const Error& e) {
        node.fail(e.what());
    }
    return spec;
}

SamplePlan parse_plan(const Node& node) {
    node.allow_only({"xs", "ys", "ts", "triples", "origin", "R", "min_time_factor", "max_gaussian_exponent",
                     "max_dispersion"});
    SamplePlan plan;
    if (node.has("xs")) plan.xs = node.child("xs").reals();
    if (node.has("ys")) plan.ys = node.child("ys").reals();
    if (node.has("ts")) plan.ts = node.child("ts").reals();
    if (node.has("triples")) {
        const auto list = node.child("triples");
        for (std::size_t i = 0; i < list.array_size(); ++i) {
            const auto item = list.element(i);
            if (item.array_size() != 3) item.fail("expected [x, y, t]");
            plan.triples.push_back({item.element(0).number(), item.element(1).number(), item.element(2).number()});
        }
    }
    for (double t : plan.ts)
        if (!(t > 0.0)) node.child("ts").fail("times must be positive");
    plan.origin = node.number_or("origin", plan.origin);
    plan.R = node.number_or("R", plan.R);
    plan.min_time_factor = node.number_or("min_time_factor", plan.min_time_factor);
    plan.max_gaussian_exponent = node.positive_or("max_gaussian_exponent", plan.max_gaussian_exponent);
    plan.max_dispersion = node.positive_or("max_dispersion", plan.max_dispersion);
    return plan;
}

std::optional<std::vector<double>> optional_reals(const Node& node, const char* key) {
    if (!node.has(key)) return std::nullopt;
    return node.child(key).reals();
}

CheckerSpec parse_checker(const Node& node, std::uint64_t seed) {
    node.require_object();
    const auto type = node.child("type").string();
    CheckerSpec out;
    out.label = node.has("label") ? node.child("label").string() : type;
    if (type == "davies") {
        node.allow_only({"type", "label", "x1", "r1", "x2", "r2", "t", "inflate"});
        DaviesParams p;
        p.x1 = node.child("x1").number();
        p.x2 = node.child("x2").number();
        p.r1 = node.positive_or("r1", p.r1);
        p.r2 = node.positive_or("r2", p.r2);
        p.t = node.positive_or("t", p.t);
        p.inflate = node.positive_or("inflate", p.inflate);
        out.params = p;
    } else if (type == "doubling") {
        node.allow_only({"type", "label", "x", "r", "inflate"});
        DoublingParams p;
        p.x = node.child("x").number();
        p.r = node.positive_or("r", p.r);
        p.inflate = node.positive_or("inflate", p.inflate);
        out.params = p;
    } else if (type == "annulus") {
        node.allow_only({"type", "label", "x", "r1", "r2", "R1", "R2"});
        AnnulusParams p;
        p.x = node.child("x").number();
        p.r1 = node.child("r1").number();
        p.r2 = node.child("r2").number();
        p.R1 = node.child("R1").number();
        p.R2 = node.child("R2").number();
        out.params = p;
    } else if (type == "ball_shift") {
        node.allow_only({"type", "label", "x", "y", "r"});
        BallShiftParams p;
        p.x = node.child("x").number();
        p.y = node.child("y").number();
        p.r = node.positive_or("r", p.r);
        out.params = p;
    } else if (type == "gaussian_upper" || type == "gaussian_lower" || type == "alt_lower") {
        node.allow_only({"type", "label", "epsilon", "constants", "margin", "inflate"});
        GaussianParams p;
        p.kind = type == "gaussian_upper"   ? GaussianParams::Kind::Upper
                 : type == "gaussian_lower" ? GaussianParams::Kind::Lower
                                            : GaussianParams::Kind::AltLower;
        p.options.epsilon = node.positive_or("epsilon", p.options.epsilon);
        p.options.constants = optional_reals(node, "constants");
        if (p.options.constants && p.options.constants->size() != 3)
            node.child("constants").fail("expected three constants");
        p.options.margin = node.number_or("margin", 0.0);
        p.options.inflate = node.positive_or("inflate", 1.0);
        out.params = p;
    } else if (type == "harnack") {
        node.allow_only({"type", "label", "center", "radii", "s_factor", "eps", "eta", "delta", "time_points",
                         "calibration_trials", "holdout_trials", "seed", "holdout_factor", "constants", "margin"});
        HarnackParams p;
        const double center = node.number_or("center", 0.0);
        const auto radii = node.has("radii") ? node.child("radii").reals() : std::vector<double>{1.0};
        const double s_factor = node.positive_or("s_factor", 1.5);
        for (double r : radii) {
            ParabolicCylinders cyl;
            cyl.center = center;
            cyl.r = r;
            cyl.s = s_factor * r * r;
            cyl.eps = node.number_or("eps", cyl.eps);
            cyl.eta = node.number_or("eta", cyl.eta);
            cyl.delta = node.number_or("delta", cyl.delta);
            cyl.time_points = static_cast<int>(node.count_or("time_points", 8));
            try {
                cyl.validate();
            } catch (const Error& e) {
                node.fail(e.what());
            }
            p.cylinders.push_back(cyl);
        }
        if (p.cylinders.empty()) node.child("radii").fail("need at least one radius");
        p.study.calibration_trials = node.count_or("calibration_trials", p.study.calibration_trials);
        p.study.holdout_trials = node.count_or("holdout_trials", p.study.holdout_trials);
        if (p.study.calibration_trials == 0) node.child("calibration_trials").fail("must be positive");
        if (p.study.holdout_trials == 0) node.child("holdout_trials").fail("must be positive");
        p.study.seed = node.has("seed") ? static_cast<std::uint64_t>(node.count_or("seed", 0)) : seed;
        p.study.holdout_factor = node.positive_or("holdout_factor", p.study.holdout_factor);
        p.constants = optional_reals(node, "constants");
        if (p.constants && (p.constants->size() != 2 || !((*p.constants)[0] > 0.0)))
            node.child("constants").fail("expected [c1 > 0, c2]");
        p.margin = node.number_or("margin", 0.0);
        out.params = p;
    } else if (type == "eigen_lower") {
        node.allow_only({"type", "label", "k_max", "constant"});
        EigenParams p;
        p.options.k_max = node.count_or("k_max", 0);
        if (node.has("constant")) p.options.constant = node.positive_or("constant", 1.0);
        out.params = p;
    } else if (type == "green_envelope") {
        node.allow_only({"type", "label", "x", "ys", "constants"});
        GreenParams p;
        p.x = node.child("x").number();
        p.ys = node.child("ys").reals();
        if (p.ys.empty()) node.child("ys").fail("need at least one point");
        p.options.constants = optional_reals(node, "constants");
        if (p.options.constants && (p.options.constants->size() != 2 || !((*p.options.constants)[0] > 0.0) ||
                                    (*p.options.constants)[1] < (*p.options.constants)[0]))
            node.child("constants").fail("expected [c1, c2] with 0 < c1 <= c2");
        out.params = p;
    } else if (type == "parabolicity") {
        node.allow_only({"type", "label", "center"});
        ParabolicityParams p;
        p.center = node.number_or("center", 0.0);
        out.params = p;
    } else {
        node.child("type").fail("unknown checker type '" + type + "'");
    }
    return out;
}

bool needs_samples(const Scenario& s) {
    return std::any_of(s.checkers.begin(), s.checkers.end(),
                       [](const CheckerSpec& c) { return std::holds_alternative<GaussianParams>(c.params); });
}

} // namespace

Scenario parse_scenario(const Json& doc, const std::string& pointer) {
    const Node node(doc, pointer);
    node.allow_only({"id", "space", "samples", "checkers", "refinement_levels", "seed", "output"});
    Scenario s;
    s.id = node.child("id").string();
    s.space = parse_space(node.child("space"));
    const std::uint64_t seed = node.count_or("seed", 1);
    if (node.has("samples")) s.plan = parse_plan(node.child("samples"));
    if (node.has("refinement_levels")) {
        const auto lv = node.child("refinement_levels");
        const long long k = lv.integer();
        if (k < 1 || k > 4) lv.fail("refinement_levels must be between 1 and 4");
        s.refinement_levels = static_cast<int>(k);
    }
    const auto list = node.child("checkers");
    const std::size_t n = list.array_size();
    if (n == 0) list.fail("at least one checker is required");
    for (std::size_t i = 0; i < n; ++i) s.checkers.push_back(parse_checker(list.element(i), seed));
    if (needs_samples(s)) {
        const bool grid = !s.plan.xs.empty() && !s.plan.ys.empty() && !s.plan.ts.empty();
        if (!grid && s.plan.triples.empty())
            Node(doc, pointer + "/samples").fail("Gaussian checkers need xs, ys and ts, or triples");
    }
    return s;
}

ScenarioBatch parse_batch(const Json& doc) {
    const Node root(doc, "");
    root.require_object();
    ScenarioBatch batch;
    auto read_output = [&](const Node& node) {
        if (!node.has("output")) return;
        const auto out = node.child("output");
        out.allow_only({"csv", "json"});
        if (out.has("csv")) batch.csv_path = out.child("csv").string();
        if (out.has("json")) batch.json_path = out.child("json").string();
    };
    if (root.has("scenarios")) {
        root.allow_only({"scenarios", "output"});
        read_output(root);
        const auto list = root.child("scenarios");
        const std::size_t n = list.array_size();
        if (n == 0) list.fail("at least one scenario is required");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < n; ++i) {
            const auto item = list.element(i);
            if (item.has("output")) item.child("output").fail("outputs belong to the batch");
            batch.scenarios.push_back(parse_scenario(item.value(), item.pointer()));
            if (!ids.insert(batch.scenarios.back().id).second) item.child("id").fail("duplicate scenario id");
        }
    } else {
        read_output(root);
        batch.scenarios.push_back(parse_scenario(doc));
    }
    return batch;
}

ScenarioBatch load_batch(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::SchemaViolation, "cannot open scenario file " + path.string());
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::SchemaViolation, fmt::format("{}: {}", path.string(), e.what()));
    }
    return parse_batch(doc);
}

namespace {

// One resolution of a scenario; spectral data and samples are built on first use.
class Level {
public:
    Level(const SpaceSpec& spec, const SamplePlan& plan, double guard_h)
        : space_(std::make_shared<const WeightedSpace>(spec)), plan_(plan) {
        plan_.guard_spacing = guard_h;
    }

    const WeightedSpace& space() const { return *space_; }

    const SpectralData& spectral() {
        if (!spec_) spec_ = decompose(assemble(space_));
        return *spec_;
    }

    const std::vector<KernelSample>& samples() {
        if (!samples_) samples_ = kernel_sample_grid(spectral(), plan_).samples;
        return *samples_;
    }

    std::size_t node(double position) const { return space_->nearest_node(position); }

private:
    std::shared_ptr<const WeightedSpace> space_;
    SamplePlan plan_;
    std::optional<SpectralData> spec_;
    std::optional<std::vector<KernelSample>> samples_;
};

BoundReport harnack_verify(const SpectralData& spec, const HarnackParams& p) {
    const WeightedSpace& space = spec.space();
    BoundReport report;
    report.id = "harnack";
    report.budget_form = "log c1 + c2 (A'^2 + kappa) r^2";
    report.constants = {{"c1", (*p.constants)[0]}, {"c2", (*p.constants)[1]}};
    report.worst_deficit = -std::numeric_limits<double>::infinity();
    report.verdict = Verdict::Holds;
    HarnackOptions opt{p.constants, p.margin};
    const std::uint64_t first = p.study.seed * 2 + 1 + (std::uint64_t{1} << 32);
    for (std::size_t trial = 0; trial < p.study.holdout_trials; ++trial) {
        const auto u0 = random_positive_data(space, first + trial);
        for (const auto& cyl : p.cylinders) {
            const auto one = harnack_check(spec, cyl, u0, opt);
            report.worst_deficit = std::max(report.worst_deficit, one.worst_deficit);
            if (one.verdict == Verdict::Violated) report.verdict = Verdict::Violated;
            ++report.sample_count;
        }
    }
    return report;
}

std::vector<std::size_t> ball_of(const Level& level, double x, double r) {
    return level.space().ball_nodes(level.node(x), r);
}

BoundReport run_checker(const CheckerSpec& checker, Level& level) {
    return std::visit(
        [&](const auto& p) -> BoundReport {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, DaviesParams>) {
                const auto b1 = ball_of(level, p.x1, p.r1);
                const auto b2 = ball_of(level, p.x2, p.r2);
                return davies_check(level.spectral(), b1, b2, p.t, p.inflate);
            } else if constexpr (std::is_same_v<P, DoublingParams>) {
                return doubling_check(level.space(), level.node(p.x), p.r, p.inflate);
            } else if constexpr (std::is_same_v<P, AnnulusParams>) {
                return annulus_comparison_check(level.space(), level.node(p.x), p.r1, p.r2, p.R1, p.R2);
            } else if constexpr (std::is_same_v<P, BallShiftParams>) {
                return ball_shift_check(level.space(), level.node(p.x), level.node(p.y), p.r);
            } else if constexpr (std::is_same_v<P, GaussianParams>) {
                const auto& samples = level.samples();
                switch (p.kind) {
                case GaussianParams::Kind::Upper: return gaussian_upper_check(samples, p.options);
                case GaussianParams::Kind::Lower: return gaussian_lower_check(samples, p.options);
                case GaussianParams::Kind::AltLower: return alt_lower_check(samples, p.options);
                }
                throw Error(ErrorCode::InvalidArgument, "unknown Gaussian checker");
            } else if constexpr (std::is_same_v<P, HarnackParams>) {
                if (p.constants) return harnack_verify(level.spectral(), p);
                return harnack_study(level.spectral(), p.cylinders, p.study).report;
            } else if constexpr (std::is_same_v<P, EigenParams>) {
                return eigen_lower_check(level.spectral(), p.options);
            } else if constexpr (std::is_same_v<P, GreenParams>) {
                std::vector<std::size_t> ys;
                for (double y : p.ys) ys.push_back(level.node(y));
                return green_envelope_check(level.spectral(), level.node(p.x), ys, p.options);
            } else {
                return to_report(parabolicity_probe(level.space(), level.node(p.center)));
            }
        },
        checker.params);
}

} // namespace

std::vector<ReportRow> run_scenario(const Scenario& scenario) {
    std::vector<ReportRow> rows;
    for (const auto& checker : scenario.checkers) {
        ReportRow row;
        row.scenario_id = scenario.id;
        row.space_kind = to_string(scenario.space.kind);
        row.potential = scenario.space.potential.describe();
        row.resolution = scenario.space.resolution;
        row.report.id = checker.label;
        rows.push_back(std::move(row));
    }
    const double guard_h = scenario.space.spacing();
    std::vector<std::vector<BoundReport>> per_level(scenario.checkers.size());
    std::vector<std::string> level_errors(scenario.checkers.size());
    for (int lv = 0; lv < scenario.refinement_levels; ++lv) {
        std::optional<Level> level;
        std::string build_error;
        try {
            level.emplace(scenario.space.refined(1 << lv), scenario.plan, guard_h);
        } catch (const std::exception& e) {
            build_error = e.what();
        }
        for (std::size_t c = 0; c < scenario.checkers.size(); ++c) {
            if (lv > 0 && (!rows[c].error.empty() || !level_errors[c].empty())) continue;
            try {
                if (!level) throw Error(ErrorCode::InvalidArgument, build_error);
                auto report = run_checker(scenario.checkers[c], *level);
                report.id = scenario.checkers[c].label;
                per_level[c].push_back(std::move(report));
            } catch (const std::exception& e) {
                if (lv == 0) rows[c].error = e.what();
                else level_errors[c] = fmt::format("refinement level {}: {}", lv, e.what());
            }
        }
    }
    for (std::size_t c = 0; c < rows.size(); ++c) {
        ReportRow& row = rows[c];
        if (!row.error.empty()) {
            row.failed = true;
            row.report.worst_deficit = kNaN;
            continue;
        }
        const auto& reports = per_level[c];
        row.report = reports.front();
        if (!level_errors[c].empty()) {
            row.report.flags.push_back("RefinementError");
            row.error = level_errors[c];
        }
        for (std::size_t lv = 1; lv < reports.size(); ++lv) {
            if (reports[lv].verdict == Verdict::Violated && row.report.verdict != Verdict::Violated) {
                row.report.verdict = Verdict::Violated;
                row.report.flags.push_back(fmt::format("ViolatedAtLevel:{}", lv));
            }
        }
        if (reports.size() > 1 && !row.report.constants.empty()) {
            double worst = 0.0;
            for (std::size_t lv = 1; lv < reports.size(); ++lv)
                worst = std::max(worst, refinement_stability(reports[lv - 1], reports[lv]));
            row.report.stability_pct = worst;
        }
    }
    return rows;
}

std::vector<ReportRow> run_batch(const ScenarioBatch& batch) {
    std::vector<ReportRow> rows;
    for (const auto& s : batch.scenarios) {
        auto part = run_scenario(s);
        rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return rows;
}

bool any_violated(const std::vector<ReportRow>& rows) {
    return std::any_of(rows.begin(), rows.end(),
                       [](const ReportRow& r) { return !r.failed && r.report.verdict == Verdict::Violated; });
}

namespace {

struct PlanPoint {
    double x;
    double y;
    double t;
};

// Points of the plan that pass the resolution guards at spacing h.
std::vector<PlanPoint> plan_points(const Scenario& s, double h) {
    std::vector<PlanPoint> raw;
    for (const auto& tr : s.plan.triples) raw.push_back({tr.x, tr.y, tr.t});
    for (double t : s.plan.ts)
        for (double x : s.plan.xs)
            for (double y : s.plan.ys) raw.push_back({x, y, t});
    std::vector<PlanPoint> out;
    const bool circle = s.space.kind == GeometryKind::Circle;
    const double L = s.space.extent();
    for (const auto& p : raw) {
        double d = std::abs(p.x - p.y);
        if (circle) {
            d = std::fmod(d, L);
            d = std::min(d, L - d);
        }
        if (p.t < s.plan.min_time_factor * h * h) continue;
        if (d * d / (4.0 * p.t) > s.plan.max_gaussian_exponent) continue;
        if (std::pow(d, 4) * h * h / (192.0 * std::pow(p.t, 3)) > s.plan.max_dispersion) continue;
        out.push_back(p);
    }
    return out;
}

// Bilinear interpolation of the kernel between the nodes bracketing x and y.
double interpolated_kernel(const SpectralData& spec, double x, double y, double t) {
    const WeightedSpace& space = spec.space();
    auto bracket = [&](double p) {
        const double u = (p - space.lo()) / space.h() - 0.5;
        const double last = static_cast<double>(space.size() - 1);
        const double c = std::clamp(u, 0.0, last);
        const auto i = static_cast<std::size_t>(std::min(std::floor(c), last - 1.0));
        return std::pair{i, c - static_cast<double>(i)};
    };
    const auto [i, a] = bracket(x);
    const auto [j, b] = bracket(y);
    const double h00 = heat_kernel(spec, i, j, t);
    const double h10 = heat_kernel(spec, i + 1, j, t);
    const double h01 = heat_kernel(spec, i, j + 1, t);
    const double h11 = heat_kernel(spec, i + 1, j + 1, t);
    return (1 - a) * (1 - b) * h00 + a * (1 - b) * h10 + (1 - a) * b * h01 + a * b * h11;
}

// max over t of the sup-norm error relative to the sup-norm of the reference.
double windowed_error(const std::vector<PlanPoint>& pts, const std::vector<double>& value,
                      const std::vector<double>& reference) {
    std::map<double, std::pair<double, double>> by_time;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        auto& [err, scale] = by_time[pts[k].t];
        err = std::max(err, std::abs(value[k] - reference[k]));
        scale = std::max(scale, std::abs(reference[k]));
    }
    double worst = 0.0;
    for (const auto& [t, e] : by_time) worst = std::max(worst, e.second > 0.0 ? e.first / e.second : e.first);
    return worst;
}

double order_of(double coarse, double fine) {
    if (!(coarse > kRoundOff) || !(fine > kRoundOff) || !std::isfinite(coarse) || !std::isfinite(fine)) return kNaN;
    return std::log2(coarse / fine);
}

} // namespace

ConvergenceTable convergence_study(const Scenario& scenario, int levels) {
    if (levels < 2) throw Error(ErrorCode::InvalidArgument, "convergence study needs at least two levels");
    if (scenario.space.resolution << (levels - 1) > 8192)
        throw Error(ErrorCode::InvalidArgument, "finest level would exceed 8192 nodes");
    ConvergenceTable table;
    table.scenario_id = scenario.id;
    const double h0 = scenario.space.spacing();
    const auto pts = plan_points(scenario, h0);
    const bool oracle = !pts.empty() && oracle::closed_form_kernel(scenario.space, pts[0].x, pts[0].y, pts[0].t);
    table.reference = oracle ? "oracle" : "self";

    std::vector<std::vector<double>> kernel_values(static_cast<std::size_t>(levels));
    std::vector<double> kernel_error(static_cast<std::size_t>(levels), kNaN);
    std::vector<double> mass_error(static_cast<std::size_t>(levels), kNaN);
    std::vector<std::string> const_names;
    std::vector<std::map<std::string, double>> const_values(static_cast<std::size_t>(levels));

    for (int lv = 0; lv < levels; ++lv) {
        const auto L = static_cast<std::size_t>(lv);
        const SpaceSpec spec = scenario.space.refined(1 << lv);
        Level level(spec, scenario.plan, h0);
        ConvergenceLevel row;
        row.resolution = spec.resolution;
        row.h = spec.spacing();
        table.levels.push_back(row);
        const auto& sd = level.spectral();

        if (!pts.empty()) {
            std::vector<double> reference;
            for (const auto& p : pts) {
                if (oracle) {
                    // Compare at the nodes themselves so no interpolation error enters.
                    const std::size_t i = level.node(p.x);
                    const std::size_t j = level.node(p.y);
                    kernel_values[L].push_back(heat_kernel(sd, i, j, p.t));
                    reference.push_back(*oracle::closed_form_kernel(spec, level.space().node(i),
                                                                    level.space().node(j), p.t));
                } else {
                    kernel_values[L].push_back(interpolated_kernel(sd, p.x, p.y, p.t));
                }
            }
            if (oracle) kernel_error[L] = windowed_error(pts, kernel_values[L], reference);
        }
        if (sd.conservative()) {
            std::vector<double> ts = scenario.plan.ts;
            for (const auto& tr : scenario.plan.triples) ts.push_back(tr.t);
            if (ts.empty()) ts.push_back(1.0);
            const std::vector<double> one(level.space().size(), 1.0);
            double worst = 0.0;
            for (double t : ts)
                for (double v : parallel::semigroup_apply(sd, one, t)) worst = std::max(worst, std::abs(v - 1.0));
            mass_error[L] = worst;
        }
        for (const auto& checker : scenario.checkers) {
            try {
                const auto report = run_checker(checker, level);
                for (const auto& c : report.constants) {
                    const std::string name = checker.label + "." + c.name;
                    if (lv == 0) const_names.push_back(name);
                    const_values[L][name] = c.value;
                }
            } catch (const std::exception&) {
                // A failing checker leaves its constants undefined at this level.
            }
        }
    }
    if (!oracle && !pts.empty())
        for (std::size_t L = 0; L + 1 < kernel_values.size(); ++L)
            kernel_error[L] = windowed_error(pts, kernel_values[L], kernel_values[L + 1]);

    const auto nlev = static_cast<std::size_t>(levels);
    table.quantities = {"kernel_error", "constant_u0_error"};
    for (const auto& name : const_names) table.quantities.push_back(name);
    std::vector<std::vector<double>> errors(table.quantities.size(), std::vector<double>(nlev, kNaN));
    for (std::size_t L = 0; L < nlev; ++L) {
        table.levels[L].values.push_back(kernel_error[L]);
        table.levels[L].values.push_back(mass_error[L]);
        errors[0][L] = kernel_error[L];
        errors[1][L] = mass_error[L];
        for (std::size_t q = 0; q < const_names.size(); ++q) {
            const auto it = const_values[L].find(const_names[q]);
            const double v = it == const_values[L].end() ? kNaN : it->second;
            table.levels[L].values.push_back(v);
            if (L + 1 < nlev) {
                const auto next = const_values[L + 1].find(const_names[q]);
                if (next != const_values[L + 1].end()) errors[q + 2][L] = std::abs(next->second - v);
            }
        }
    }
    table.orders.assign(nlev - 1, std::vector<double>(table.quantities.size(), kNaN));
    for (std::size_t L = 0; L + 1 < nlev; ++L)
        for (std::size_t q = 0; q < table.quantities.size(); ++q)
            table.orders[L][q] = order_of(errors[q][L], errors[q][L + 1]);
    return table;
}

KernelQuery query_kernel(const Scenario& scenario, double x, double y, double t) {
    if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "kernel needs t > 0");
    Level level(scenario.space, scenario.plan, scenario.space.spacing());
    const std::size_t i = level.node(x);
    const std::size_t j = level.node(y);
    KernelQuery q;
    q.x_node = level.space().node(i);
    q.y_node = level.space().node(j);
    q.t = t;
    q.H = heat_kernel(level.spectral(), i, j, t);
    q.closed_form = oracle::closed_form_kernel(scenario.space, q.x_node, q.y_node, t);
    return q;
}

} // namespace heatlab
