#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mde/measure.hpp"

namespace mde {

/// CSV with header w,x0,...,x{n-1}; values printed with 17 significant
/// digits so that a round trip is exact.
void write_cloud_csv(const std::filesystem::path& path, const EmpiricalMeasure& m);
EmpiricalMeasure read_cloud_csv(const std::filesystem::path& path);

/// Writes state_NNNNN.csv files plus index.json {"times", "files", "dim"}
/// into `dir` (created if needed). Returns the file names written, index
/// last.
std::vector<std::string> write_curve(const std::filesystem::path& dir, const MeasureCurve& curve);

/// Reads a curve from its index.json; file names are resolved relative to
/// the index.
MeasureCurve read_curve(const std::filesystem::path& index_path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace mde
