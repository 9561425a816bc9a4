#include "crpslearn/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace crpslearn {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string cell_context(const CsvTable& t, std::size_t row, std::size_t col) {
  std::ostringstream msg;
  msg << t.source << " row " << row + 2 << " column '" << t.header[col] << "'";
  return msg.str();
}

void require_header(const CsvTable& t, const std::vector<std::string>& expected) {
  for (const auto& name : expected) t.column(name);
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, const std::string& context) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw InputError(context + ": cannot parse '" + std::string(field) + "' as a number");
  }
  return value;
}

std::string grid_to_string(const ProbGrid& grid) {
  std::string out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += format_double(grid[i]);
  }
  return out;
}

ProbGrid grid_from_string(std::string_view text) {
  std::vector<double> probs;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    probs.push_back(parse_double(text.substr(start, end - start), "grid entry " + std::to_string(probs.size())));
    start = end + 1;
  }
  return ProbGrid(std::move(probs));
}

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InputError(source + ": missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  CsvTable t;
  t.source = path.string();
  std::string line;
  if (!std::getline(in, line)) throw InputError(t.source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  t.header = split_line(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != t.header.size()) {
      std::ostringstream msg;
      msg << t.source << " row " << line_no << ": expected " << t.header.size() << " fields, found " << fields.size();
      throw InputError(msg.str());
    }
    t.rows.push_back(std::move(fields));
  }
  return t;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << quote_if_needed(row[i]);
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
  if (!out) throw InputError("error while writing '" + path.string() + "'");
}

ExpertData read_expert_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  require_header(t, {"time", "expert", "probability", "value"});
  const std::size_t c_time = t.column("time"), c_expert = t.column("expert"), c_prob = t.column("probability"),
                    c_value = t.column("value");

  std::vector<std::string> times, experts;
  std::unordered_map<std::string, std::size_t> time_index, expert_index;
  std::vector<double> probs;
  struct Cell {
    std::size_t t, k;
    double p, v;
    std::size_t row;
  };
  std::vector<Cell> cells;
  cells.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto [ti, new_t] = time_index.try_emplace(row[c_time], times.size());
    if (new_t) times.push_back(row[c_time]);
    const auto [ki, new_k] = expert_index.try_emplace(row[c_expert], experts.size());
    if (new_k) experts.push_back(row[c_expert]);
    const double p = parse_double(row[c_prob], cell_context(t, r, c_prob));
    if (!(p > 0.0 && p < 1.0)) throw InputError(cell_context(t, r, c_prob) + ": probability outside (0,1)");
    const double v = parse_double(row[c_value], cell_context(t, r, c_value));
    if (!std::isfinite(v)) throw InputError(cell_context(t, r, c_value) + ": non-finite value");
    probs.push_back(p);
    cells.push_back({ti->second, ki->second, p, v, r});
  }
  if (cells.empty()) throw InputError(t.source + ": no expert rows");
  std::sort(probs.begin(), probs.end());
  probs.erase(std::unique(probs.begin(), probs.end()), probs.end());

  ExpertData data;
  data.grid = ProbGrid(probs);
  data.times = times;
  data.panel.expert_names = experts;
  const auto m_size = static_cast<Eigen::Index>(probs.size());
  const auto k_size = static_cast<Eigen::Index>(experts.size());
  data.panel.slabs.assign(times.size(), Matrix::Constant(m_size, k_size, std::numeric_limits<double>::quiet_NaN()));
  for (const auto& c : cells) {
    const auto m = static_cast<Eigen::Index>(std::lower_bound(probs.begin(), probs.end(), c.p) - probs.begin());
    double& slot = data.panel.slabs[c.t](m, static_cast<Eigen::Index>(c.k));
    if (!std::isnan(slot)) {
      std::ostringstream msg;
      msg << t.source << " row " << c.row + 2 << ": duplicate value for (time '" << times[c.t] << "', expert '"
          << experts[c.k] << "', probability " << format_double(c.p) << ")";
      throw InputError(msg.str());
    }
    slot = c.v;
  }
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    for (Eigen::Index m = 0; m < m_size; ++m) {
      for (Eigen::Index k = 0; k < k_size; ++k) {
        if (std::isnan(data.panel.slabs[ti](m, k))) {
          std::ostringstream msg;
          msg << t.source << ": missing expert value for (time '" << times[ti] << "', expert '"
              << experts[static_cast<std::size_t>(k)] << "', probability " << format_double(probs[static_cast<std::size_t>(m)])
              << ")";
          throw InputError(msg.str());
        }
      }
    }
  }
  return data;
}

void write_expert_csv(const std::filesystem::path& path, const ExpertData& data) {
  CsvTable t;
  t.header = {"time", "expert", "probability", "value"};
  for (std::size_t ti = 0; ti < data.panel.times(); ++ti) {
    for (std::size_t k = 0; k < data.panel.experts(); ++k) {
      for (std::size_t m = 0; m < data.grid.size(); ++m) {
        t.rows.push_back({data.times[ti], data.panel.expert_names[k], format_double(data.grid[m]),
                          format_double(data.panel.slabs[ti](static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)))});
      }
    }
  }
  write_csv(path, t);
}

ObservationStream read_observation_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  require_header(t, {"time", "value"});
  const std::size_t c_time = t.column("time"), c_value = t.column("value");
  ObservationStream obs;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double v = parse_double(t.rows[r][c_value], cell_context(t, r, c_value));
    if (!std::isfinite(v)) throw InputError(cell_context(t, r, c_value) + ": non-finite observation");
    obs.timestamps.push_back(t.rows[r][c_time]);
    obs.y.push_back(v);
  }
  return obs;
}

void write_observation_csv(const std::filesystem::path& path, const ObservationStream& obs) {
  CsvTable t;
  t.header = {"time", "value"};
  for (std::size_t i = 0; i < obs.size(); ++i) {
    t.rows.push_back({obs.timestamps.empty() ? std::to_string(i + 1) : obs.timestamps[i], format_double(obs.y[i])});
  }
  write_csv(path, t);
}

QuantileForecasts read_quantiles_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  require_header(t, {"time", "probability", "value"});
  const std::size_t c_time = t.column("time"), c_prob = t.column("probability"), c_value = t.column("value");
  std::vector<std::string> times;
  std::unordered_map<std::string, std::size_t> time_index;
  std::vector<double> probs;
  std::vector<std::tuple<std::size_t, double, double>> cells;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto [it, inserted] = time_index.try_emplace(row[c_time], times.size());
    if (inserted) times.push_back(row[c_time]);
    const double p = parse_double(row[c_prob], cell_context(t, r, c_prob));
    const double v = parse_double(row[c_value], cell_context(t, r, c_value));
    probs.push_back(p);
    cells.emplace_back(it->second, p, v);
  }
  if (cells.empty()) throw InputError(t.source + ": no forecast rows");
  std::sort(probs.begin(), probs.end());
  probs.erase(std::unique(probs.begin(), probs.end()), probs.end());
  QuantileForecasts f;
  f.grid = ProbGrid(probs);
  f.times = times;
  f.values = Matrix::Constant(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(probs.size()),
                              std::numeric_limits<double>::quiet_NaN());
  for (const auto& [ti, p, v] : cells) {
    const auto m = static_cast<Eigen::Index>(std::lower_bound(probs.begin(), probs.end(), p) - probs.begin());
    f.values(static_cast<Eigen::Index>(ti), m) = v;
  }
  if (f.values.hasNaN()) throw InputError(t.source + ": missing forecast value for some (time, probability)");
  return f;
}

void write_quantiles_csv(const std::filesystem::path& path, const QuantileForecasts& f) {
  CsvTable t;
  t.header = {"time", "probability", "value"};
  for (Eigen::Index ti = 0; ti < f.values.rows(); ++ti) {
    for (Eigen::Index m = 0; m < f.values.cols(); ++m) {
      t.rows.push_back({f.times[static_cast<std::size_t>(ti)], format_double(f.grid[static_cast<std::size_t>(m)]),
                        format_double(f.values(ti, m))});
    }
  }
  write_csv(path, t);
}

void write_weights_csv(const std::filesystem::path& path, const std::vector<std::string>& times,
                       const std::vector<std::string>& experts, const ProbGrid& grid,
                       const std::vector<Matrix>& surfaces) {
  CsvTable t;
  t.header = {"time", "expert", "probability", "weight"};
  for (std::size_t ti = 0; ti < surfaces.size(); ++ti) {
    for (std::size_t k = 0; k < experts.size(); ++k) {
      for (std::size_t m = 0; m < grid.size(); ++m) {
        t.rows.push_back({times[ti], experts[k], format_double(grid[m]),
                          format_double(surfaces[ti](static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)))});
      }
    }
  }
  write_csv(path, t);
}

ObservationStream align_observations(const ObservationStream& obs, const std::vector<std::string>& times) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < obs.timestamps.size(); ++i) {
    if (!index.emplace(obs.timestamps[i], i).second) {
      throw InputError("time-axis misalignment: duplicate observation time '" + obs.timestamps[i] + "'");
    }
  }
  if (obs.timestamps.size() != times.size()) {
    std::ostringstream msg;
    msg << "time-axis misalignment: " << times.size() << " forecast times vs " << obs.timestamps.size()
        << " observations";
    throw InputError(msg.str());
  }
  ObservationStream out;
  for (const auto& time : times) {
    const auto it = index.find(time);
    if (it == index.end()) throw InputError("time-axis misalignment: no observation for time '" + time + "'");
    out.timestamps.push_back(time);
    out.y.push_back(obs.y[it->second]);
  }
  return out;
}

}  // namespace crpslearn
