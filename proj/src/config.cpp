#include "mde/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "mde/errors.hpp"
#include "mde/io.hpp"

namespace mde {

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& what)
{
    throw InputError(origin + ": " + what);
}

void allow_only(const toml::table& t, const std::set<std::string>& keys, const std::string& where,
                const std::string& origin)
{
    for (const auto& [k, v] : t) {
        (void)v;
        if (!keys.count(std::string(k.str()))) fail(origin, "unknown key '" + std::string(k.str()) + "' in " + where);
    }
}

double number(const toml::node& n, const std::string& key, const std::string& origin)
{
    if (auto v = n.value<double>()) return *v;
    fail(origin, "'" + key + "' must be a number");
}

std::int64_t integer(const toml::node& n, const std::string& key, const std::string& origin)
{
    if (auto v = n.value_exact<std::int64_t>()) return *v;
    fail(origin, "'" + key + "' must be an integer");
}

const toml::table* table_at(const toml::table& root, const std::string& key, const std::string& origin)
{
    const toml::node* n = root.get(key);
    if (!n) return nullptr;
    if (!n->is_table()) fail(origin, "'" + key + "' must be a table");
    return n->as_table();
}

std::vector<double> number_array(const toml::node& n, const std::string& key, const std::string& origin)
{
    const auto* arr = n.as_array();
    if (!arr) fail(origin, "'" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : *arr) out.push_back(number(e, key, origin));
    return out;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin)
{
    toml::table root;
    try {
        root = toml::parse(text, origin);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << e.description() << " (line " << e.source().begin.line << ")";
        fail(origin, os.str());
    }
    allow_only(root, {"scenario", "partition", "run", "converge", "verify"}, "top level", origin);

    RunConfig cfg;
    cfg.source = text;

    const toml::table* sc = table_at(root, "scenario", origin);
    if (!sc) fail(origin, "missing [scenario] table");
    allow_only(*sc, {"name", "params", "options", "atoms"}, "[scenario]", origin);
    const auto name = (*sc)["name"].value<std::string>();
    if (!name) fail(origin, "[scenario] needs a string 'name'");
    cfg.scenario.name = *name;
    if (const toml::table* params = table_at(*sc, "params", origin))
        for (const auto& [k, v] : *params) cfg.scenario.params[std::string(k.str())] = number(v, std::string(k.str()), origin);
    if (const toml::table* opts = table_at(*sc, "options", origin))
        for (const auto& [k, v] : *opts) {
            const auto s = v.value<std::string>();
            if (!s) fail(origin, "scenario option '" + std::string(k.str()) + "' must be a string");
            cfg.scenario.options[std::string(k.str())] = *s;
        }
    if (const toml::node* atoms = sc->get("atoms")) {
        const auto* arr = atoms->as_array();
        if (!arr || arr->empty()) fail(origin, "[[scenario.atoms]] must be a nonempty array of tables");
        std::vector<double> weights;
        std::vector<std::vector<double>> points;
        for (const auto& e : *arr) {
            const auto* t = e.as_table();
            if (!t) fail(origin, "[[scenario.atoms]] entries must be tables");
            allow_only(*t, {"weight", "x"}, "[[scenario.atoms]]", origin);
            if (!t->get("weight") || !t->get("x")) fail(origin, "each atom needs 'weight' and 'x'");
            weights.push_back(number(*t->get("weight"), "weight", origin));
            points.push_back(number_array(*t->get("x"), "x", origin));
            if (points.back().empty() || points.back().size() != points.front().size())
                fail(origin, "atom vectors must be nonempty and share one dimension");
        }
        Matrix pts(static_cast<Index>(points.front().size()), static_cast<Index>(points.size()));
        Vector w(static_cast<Index>(weights.size()));
        for (std::size_t i = 0; i < points.size(); ++i) {
            w(static_cast<Index>(i)) = weights[i];
            for (std::size_t k = 0; k < points[i].size(); ++k)
                pts(static_cast<Index>(k), static_cast<Index>(i)) = points[i][k];
        }
        cfg.scenario.atoms = EmpiricalMeasure(std::move(pts), std::move(w));
    }

    if (const toml::table* part = table_at(root, "partition", origin)) {
        allow_only(*part, {"T", "steps", "nodes"}, "[partition]", origin);
        if (const auto* n = part->get("T")) cfg.horizon = number(*n, "T", origin);
        if (const auto* n = part->get("steps")) cfg.steps = static_cast<int>(integer(*n, "steps", origin));
        if (const auto* n = part->get("nodes")) cfg.nodes = number_array(*n, "nodes", origin);
        if (cfg.steps < 1) fail(origin, "'steps' must be >= 1");
    }

    if (const toml::table* run = table_at(root, "run", origin)) {
        allow_only(*run, {"budget", "seed", "substeps", "record_half_steps", "reevaluate_after_f", "output"}, "[run]",
                   origin);
        if (const auto* n = run->get("budget")) cfg.afas.particle_budget = integer(*n, "budget", origin);
        if (const auto* n = run->get("seed")) {
            const auto s = integer(*n, "seed", origin);
            if (s < 0) fail(origin, "'seed' must be nonnegative");
            cfg.afas.seed = static_cast<std::uint64_t>(s);
        }
        if (const auto* n = run->get("substeps")) cfg.afas.flow_substeps = static_cast<int>(integer(*n, "substeps", origin));
        if (const auto* n = run->get("record_half_steps")) {
            const auto b = n->value<bool>();
            if (!b) fail(origin, "'record_half_steps' must be a boolean");
            cfg.afas.record_half_steps = *b;
        }
        if (const auto* n = run->get("reevaluate_after_f")) {
            const auto b = n->value<bool>();
            if (!b) fail(origin, "'reevaluate_after_f' must be a boolean");
            cfg.afas.reevaluate_after_f = *b;
        }
        if (const auto* n = run->get("output")) {
            const auto s = n->value<std::string>();
            if (!s) fail(origin, "'output' must be a string");
            cfg.output = *s;
        }
        if (cfg.afas.particle_budget < 1) fail(origin, "'budget' must be >= 1");
        if (cfg.afas.flow_substeps < 0) fail(origin, "'substeps' must be >= 0");
    }

    if (const toml::table* conv = table_at(root, "converge", origin)) {
        allow_only(*conv, {"levels", "p", "distance_points"}, "[converge]", origin);
        if (const auto* n = conv->get("levels")) {
            const auto* arr = n->as_array();
            if (!arr || arr->empty()) fail(origin, "'levels' must be a nonempty array of integers");
            cfg.levels.clear();
            for (const auto& e : *arr) cfg.levels.push_back(static_cast<int>(integer(e, "levels", origin)));
        }
        if (const auto* n = conv->get("p")) cfg.p = number(*n, "p", origin);
        if (const auto* n = conv->get("distance_points"))
            cfg.distance_points = integer(*n, "distance_points", origin);
        if (cfg.p < 1.0) fail(origin, "'p' must be >= 1");
    }

    if (const toml::table* ver = table_at(root, "verify", origin)) {
        allow_only(*ver, {"battery_radius"}, "[verify]", origin);
        if (const auto* n = ver->get("battery_radius")) cfg.battery_radius = number(*n, "battery_radius", origin);
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_text(path), path.string()); }

Partition config_partition(const RunConfig& cfg, const Scenario& scenario)
{
    if (cfg.nodes) return Partition(*cfg.nodes);
    return Partition::uniform(cfg.horizon.value_or(scenario.horizon), cfg.steps);
}

std::string fnv1a_hex(const std::string& text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace mde
