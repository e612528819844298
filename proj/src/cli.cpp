#include "mde/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mde/afas.hpp"
#include "mde/config.hpp"
#include "mde/errors.hpp"
#include "mde/io.hpp"
#include "mde/residual.hpp"
#include "mde/scenarios.hpp"
#include "mde/transport.hpp"

namespace mde {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json scenario_json(const ScenarioSpec& spec)
{
    json j;
    j["name"] = spec.name;
    j["params"] = spec.params;
    j["options"] = spec.options;
    if (spec.atoms) {
        json atoms = json::array();
        for (Index i = 0; i < spec.atoms->size(); ++i) {
            const Vector x = spec.atoms->point(i);
            atoms.push_back({{"weight", spec.atoms->weight(i)}, {"x", std::vector<double>(x.data(), x.data() + x.size())}});
        }
        j["atoms"] = atoms;
    }
    return j;
}

int cmd_simulate(const std::string& config_path, const std::string& output_override, std::ostream& out)
{
    const auto start = std::chrono::steady_clock::now();
    const RunConfig cfg = load_config(config_path);
    const Scenario scenario = build_scenario(cfg.scenario);
    const Partition partition = config_partition(cfg, scenario);
    const MeasureCurve curve = build_afas(scenario.map, scenario.mu0, partition, cfg.afas);

    const fs::path dir = output_override.empty() ? fs::path(cfg.output) : fs::path(output_override);
    std::vector<std::string> files = write_curve(dir, curve);

    json manifest;
    manifest["tool"] = "mde";
    manifest["version"] = kVersion;
    manifest["scenario"] = scenario_json(cfg.scenario);
    manifest["partition"] = {{"T", partition.horizon()}, {"steps", partition.steps()}, {"max_step", partition.max_step()}};
    if (cfg.nodes) manifest["partition"]["nodes"] = *cfg.nodes;
    manifest["run"] = {{"budget", cfg.afas.particle_budget},
                       {"seed", cfg.afas.seed},
                       {"substeps", cfg.afas.flow_substeps},
                       {"record_half_steps", cfg.afas.record_half_steps},
                       {"reevaluate_after_f", cfg.afas.reevaluate_after_f}};
    manifest["config_fnv1a"] = fnv1a_hex(cfg.source);
    files.emplace_back("manifest.json");
    manifest["files"] = files;
    manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    out << "wrote " << curve.size() << " states to " << dir.string() << "\n";
    return kOk;
}

int cmd_verify(const std::string& curve_path, const std::string& config_path, double threshold, std::ostream& out)
{
    if (!(threshold >= 0.0)) throw InputError("threshold must be nonnegative");
    const MeasureCurve curve = read_curve(curve_path);
    const RunConfig cfg = load_config(config_path);
    const Scenario scenario = build_scenario(cfg.scenario);
    if (scenario.dim() != curve.dim()) throw InputError("curve and scenario differ in dimension");
    const double radius = cfg.battery_radius.value_or(scenario.battery_radius);
    const auto battery = standard_test_battery(curve.dim(), radius);
    const ResidualReport report = residual_suite(curve, scenario.map, battery, curve.times());

    json j;
    j["scenario"] = scenario.name;
    j["threshold"] = threshold;
    j["max_residual"] = report.max_residual;
    j["quadrature_error_estimate"] = report.quadrature_error_estimate;
    j["pass"] = report.max_residual <= threshold;
    json per = json::array();
    for (const auto& [id, r] : report.per_phi) per.push_back({{"id", id}, {"residual", r}});
    j["per_phi"] = per;
    out << j.dump(2) << "\n";
    return report.max_residual <= threshold ? kOk : kVerificationFailed;
}

std::string csv_number(const std::optional<double>& v)
{
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", *v);
    return buf;
}

int cmd_converge(const std::string& config_path, const std::string& csv_path, std::ostream& out, std::ostream& err)
{
    const RunConfig cfg = load_config(config_path);
    const Scenario scenario = build_scenario(cfg.scenario);
    ConvergenceOptions options;
    options.p = cfg.p;
    options.reference = scenario.reference;
    options.distance_points = cfg.distance_points;
    const double horizon = cfg.horizon.value_or(scenario.horizon);
    const ConvergenceReport report = convergence_study(scenario.map, scenario.mu0, horizon, cfg.levels, cfg.afas, options);

    std::string text = "level,sup_distance_to_next,distance_to_reference\n";
    for (const auto& row : report.rows)
        text += std::to_string(row.level) + "," + csv_number(row.sup_distance_to_next) + "," +
                csv_number(row.distance_to_reference) + "\n";
    if (csv_path.empty()) out << text;
    else write_text(csv_path, text);
    err << "noise_floor=" << report.noise_floor << " monotone=" << (report.monotone ? "true" : "false") << "\n";
    return kOk;
}

int cmd_distance(const std::string& a_path, const std::string& b_path, double p, const std::string& method,
                 std::ostream& out)
{
    if (p < 1.0) throw InputError("p must be >= 1");
    const EmpiricalMeasure a = read_cloud_csv(a_path);
    const EmpiricalMeasure b = read_cloud_csv(b_path);
    const TransportPlanReport r = wasserstein(a, b, p, parse_transport_method(method));
    json j{{"cost", r.cost}, {"method", to_string(r.method)}, {"iterations", r.iterations}, {"gap_bound", r.gap_bound}};
    out << j.dump(2) << "\n";
    return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Measure differential equation simulator and verifier", "mde"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path, output, curve_path, csv_path, a_path, b_path, method = "auto";
    double threshold = 0.0, p = 2.0;

    auto* sim = app.add_subcommand("simulate", "run AFAS for a scenario config and write the curve");
    sim->add_option("config", config_path, "scenario TOML")->required();
    sim->add_option("-o,--output", output, "output directory (overrides [run].output)");

    auto* ver = app.add_subcommand("verify", "weak-form residual of a curve against a scenario");
    ver->add_option("curve", curve_path, "curve index.json")->required();
    ver->add_option("config", config_path, "scenario TOML")->required();
    ver->add_option("-t,--threshold", threshold, "pass iff max residual <= threshold")->required();

    auto* conv = app.add_subcommand("converge", "AFAS convergence study across partition levels");
    conv->add_option("config", config_path, "scenario TOML")->required();
    conv->add_option("-o,--output", csv_path, "CSV path (default stdout)");

    auto* dist = app.add_subcommand("distance", "p-Wasserstein distance between two cloud CSVs");
    dist->add_option("a", a_path, "first cloud")->required();
    dist->add_option("b", b_path, "second cloud")->required();
    dist->add_option("-p", p, "order p >= 1");
    dist->add_option("-m,--method", method, "auto|exact1d|assignment|sinkhorn");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    try {
        if (*sim) return cmd_simulate(config_path, output, out);
        if (*ver) return cmd_verify(curve_path, config_path, threshold, out);
        if (*conv) return cmd_converge(config_path, csv_path, out, err);
        if (*dist) return cmd_distance(a_path, b_path, p, method, out);
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumericalError;
    }
    return kInputError;
}

}  // namespace mde
