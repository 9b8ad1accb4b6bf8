#pragma once

#include "imvar/calibration.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace imvar {

using Json = nlohmann::ordered_json;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// Identifies the run that produced a file. CSV outputs start with
/// "# imvar config_hash=<hex> seed=<n>"; JSON outputs carry the same fields
/// under "header".
struct OutputHeader {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;

  std::string csv_line() const;
  Json json() const;
};

/// Column roles for CSV ingestion. An empty censor name means no censoring.
struct CsvColumns {
  std::vector<std::string> response;
  std::vector<std::string> covariates;
  std::string censor;
};

/// Reads a comma-separated file with a header row. Missing files and
/// missing or non-numeric cells are configuration errors.
Dataset read_csv_dataset(const std::filesystem::path& path, const CsvColumns& columns);

/// One row per node: axis coordinates theta1..thetad, then value.
std::string grid_csv(const ContourGrid& grid, const OutputHeader& header);
Json grid_json(const ContourGrid& grid, const OutputHeader& header);

/// Columns t, xi1..xid, objective1..objectived.
std::string trace_csv(const FitTrace& trace, const OutputHeader& header);

/// Family kind, theta_hat, J (row-major), xi, alpha, seed, iterations and,
/// for the vector family, the eigen data.
Json family_json(const BuiltContour& fit, double alpha, const OutputHeader& header);

Json report_json(const CalibrationReport& report, const OutputHeader& header);
/// Columns alpha, cdf.
std::string report_csv(const CalibrationReport& report, const OutputHeader& header);

/// Staged output set: every file is written to a temporary sibling first
/// and renamed into place only after all writes succeeded, so a failing
/// run leaves no partial outputs behind.
class OutputSet {
 public:
  void add(std::filesystem::path path, std::string content);
  void add(std::filesystem::path path, const Json& content);
  void commit();
  std::size_t size() const { return files_.size(); }

 private:
  std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

/// Shortest round-trip decimal text for a double.
std::string format_double(double value);

}  // namespace imvar
