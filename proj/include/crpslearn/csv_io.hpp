#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "crpslearn/grid_types.hpp"

namespace crpslearn {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double x);
/// Strict parse of a full field; `context` is used in the error message.
double parse_double(std::string_view field, const std::string& context);

/// Comma-separated probabilities, e.g. "0.01,0.02". Round-trips bit-exactly.
std::string grid_to_string(const ProbGrid& grid);
ProbGrid grid_from_string(std::string_view text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws InputError naming the file if absent.
  std::size_t column(std::string_view name) const;
  std::string source;
};

/// Reads a header + rows CSV. Fields may be double-quoted. Rows whose field
/// count differs from the header are rejected with their line number.
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

struct ExpertData {
  ExpertPanel panel;
  ProbGrid grid = ProbGrid::percentiles();
  std::vector<std::string> times;
};

/// Long format `time,expert,probability,value`. Times and experts keep their
/// order of first appearance; probabilities are sorted. Every
/// (time, expert, probability) cell must be present exactly once.
ExpertData read_expert_csv(const std::filesystem::path& path);
void write_expert_csv(const std::filesystem::path& path, const ExpertData& data);

/// `time,value`.
ObservationStream read_observation_csv(const std::filesystem::path& path);
void write_observation_csv(const std::filesystem::path& path, const ObservationStream& obs);

struct QuantileForecasts {
  std::vector<std::string> times;
  ProbGrid grid = ProbGrid::percentiles();
  /// T x M.
  Matrix values;
};

/// `time,probability,value`.
QuantileForecasts read_quantiles_csv(const std::filesystem::path& path);
void write_quantiles_csv(const std::filesystem::path& path, const QuantileForecasts& forecasts);

/// `time,expert,probability,weight`; one M x K surface per time.
void write_weights_csv(const std::filesystem::path& path, const std::vector<std::string>& times,
                       const std::vector<std::string>& experts, const ProbGrid& grid,
                       const std::vector<Matrix>& surfaces);

/// Reorders observations to follow `times`. Throws InputError on any
/// misalignment (missing, extra or duplicated time labels).
ObservationStream align_observations(const ObservationStream& obs, const std::vector<std::string>& times);

}  // namespace crpslearn
