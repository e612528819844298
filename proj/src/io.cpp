#include "mde/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mde/errors.hpp"

namespace mde {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw InputError("write failed for '" + path.string() + "'");
}

void write_cloud_csv(const fs::path& path, const EmpiricalMeasure& m)
{
    std::string text = "w";
    for (Index k = 0; k < m.dim(); ++k) text += ",x" + std::to_string(k);
    text += '\n';
    char buf[32];
    for (Index i = 0; i < m.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", m.weight(i));
        text += buf;
        for (Index k = 0; k < m.dim(); ++k) {
            std::snprintf(buf, sizeof buf, ",%.17g", m.points()(k, i));
            text += buf;
        }
        text += '\n';
    }
    write_text(path, text);
}

EmpiricalMeasure read_cloud_csv(const fs::path& path)
{
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line)) throw InputError("'" + path.string() + "' is empty");
    Index dim = 0;
    {
        std::istringstream header(line);
        std::string cell;
        std::getline(header, cell, ',');
        if (cell != "w") throw InputError("'" + path.string() + "': header must start with 'w'");
        while (std::getline(header, cell, ',')) {
            if (cell != "x" + std::to_string(dim)) throw InputError("'" + path.string() + "': bad header column '" + cell + "'");
            ++dim;
        }
    }
    if (dim == 0) throw InputError("'" + path.string() + "': no coordinate columns");
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        Index cols = 0;
        while (std::getline(row, cell, ',')) {
            std::size_t used = 0;
            double v;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != cell.size())
                throw InputError("'" + path.string() + "' line " + std::to_string(rows + 2) + ": bad number '" + cell + "'");
            values.push_back(v);
            ++cols;
        }
        if (cols != dim + 1)
            throw InputError("'" + path.string() + "' line " + std::to_string(rows + 2) + ": wrong column count");
        ++rows;
    }
    if (rows == 0) throw InputError("'" + path.string() + "' has no particles");
    Matrix pts(dim, static_cast<Index>(rows));
    Vector w(static_cast<Index>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t base = i * static_cast<std::size_t>(dim + 1);
        w(static_cast<Index>(i)) = values[base];
        for (Index k = 0; k < dim; ++k) pts(k, static_cast<Index>(i)) = values[base + 1 + static_cast<std::size_t>(k)];
    }
    if (!pts.allFinite()) throw InputError("'" + path.string() + "' contains non-finite coordinates");
    return EmpiricalMeasure(std::move(pts), std::move(w));
}

std::vector<std::string> write_curve(const fs::path& dir, const MeasureCurve& curve)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create '" + dir.string() + "': " + ec.message());
    std::vector<std::string> files;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "state_%05zu.csv", i);
        write_cloud_csv(dir / name, curve.state(i));
        files.emplace_back(name);
    }
    nlohmann::json index;
    index["times"] = curve.times();
    index["files"] = files;
    index["dim"] = curve.dim();
    write_text(dir / "index.json", index.dump(2) + "\n");
    files.emplace_back("index.json");
    return files;
}

MeasureCurve read_curve(const fs::path& index_path)
{
    nlohmann::json index;
    try {
        index = nlohmann::json::parse(read_text(index_path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError("'" + index_path.string() + "': " + e.what());
    }
    if (!index.contains("times") || !index.contains("files"))
        throw InputError("'" + index_path.string() + "': index needs 'times' and 'files'");
    std::vector<double> times;
    std::vector<std::string> files;
    try {
        times = index["times"].get<std::vector<double>>();
        files = index["files"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError("'" + index_path.string() + "': " + e.what());
    }
    if (times.size() != files.size()) throw InputError("'" + index_path.string() + "': times and files differ in length");
    const fs::path base = index_path.parent_path();
    std::vector<EmpiricalMeasure> states;
    states.reserve(files.size());
    for (const auto& f : files) states.push_back(read_cloud_csv(base / f));
    MeasureCurve curve(std::move(times), std::move(states));
    if (index.contains("dim") && index["dim"].is_number_integer() && index["dim"].get<Index>() != curve.dim())
        throw InputError("'" + index_path.string() + "': declared dim does not match the state files");
    return curve;
}

}  // namespace mde
