#include "crpslearn/workflows.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "crpslearn/baselines.hpp"
#include "crpslearn/combiner.hpp"
#include "crpslearn/csv_io.hpp"
#include "crpslearn/evaluate.hpp"
#include "crpslearn/loss.hpp"
#include "crpslearn/simulate.hpp"
#include "crpslearn/tuning.hpp"

namespace crpslearn {
namespace {

using nlohmann::json;

template <class T>
T json_get(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw InputError("config key '" + key + "': " + e.what());
  }
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    out.push_back(parse_double(std::string_view(text).substr(start, end - start), what));
    start = end + 1;
  }
  return out;
}

void require_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw InputError("output directory does not exist: '" + dir.string() + "'");
  }
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    body();
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "computational error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "computational error: " << e.what() << '\n';
    return 1;
  }
}

std::string labelled(const std::string& name, const std::string& value) { return name + "=" + value; }

// --- simulate --------------------------------------------------------------

std::vector<double> forget_rates(const RunConfig& cfg) {
  if (cfg.forget_grid == "auto" || cfg.forget_grid.empty()) return {};
  auto rates = parse_double_list(cfg.forget_grid, "--forget-grid");
  for (double r : rates) {
    if (!(r >= 0.0 && r < 1.0)) throw InputError("--forget-grid: forget rates must lie in [0, 1)");
  }
  return rates;
}

void write_weight_trace(const RunConfig& cfg, const SimSpec& sim, const ProbGrid& grid) {
  const std::size_t horizon = *std::max_element(sim.horizons.begin(), sim.horizons.end());
  Rng rng(derive_seed(*cfg.seed, 0));
  const DriftingSample sample = dgp_drifting_sample(horizon, rng);
  const auto experts = simulation_experts();
  const Matrix slab = expert_slab(experts, grid);
  CsvTable t;
  t.header = {"config", "time", "probability", "weight"};
  for (std::size_t ti = 0; ti < horizon; ++ti) {
    for (std::size_t m = 0; m < grid.size(); ++m) {
      t.rows.push_back({"Optimal", std::to_string(ti + 1), format_double(grid[m]),
                        format_double(1.0 - optimal_weight_shifted(grid[m], sample.location[ti]))});
    }
  }
  for (const auto& spec : sim.specs) {
    auto combiner = spec.make(grid, experts.size(), horizon);
    for (std::size_t ti = 0; ti < horizon; ++ti) {
      const Matrix& w = combiner->weights().weights;
      for (std::size_t m = 0; m < grid.size(); ++m) {
        t.rows.push_back({spec.name, std::to_string(ti + 1), format_double(grid[m]),
                          format_double(w(static_cast<Eigen::Index>(m), 1))});
      }
      combiner->update(slab, sample.obs.y[ti]);
    }
  }
  write_csv(cfg.output_dir / "weights_trace.csv", t);
}

void simulate_impl(const RunConfig& cfg) {
  if (!cfg.seed) throw InputError("simulate requires --seed");
  require_output_dir(cfg.output_dir);
  SimSpec sim;
  sim.seed = *cfg.seed;
  sim.threads = std::max<std::size_t>(1, cfg.threads);
  sim.reps = cfg.reps.value_or(cfg.desk_scale ? 100 : 1000);
  if (sim.reps < 1) throw InputError("--reps must be >= 1");
  std::vector<StudySpec> all;
  if (cfg.dgp == "static") {
    sim.dgp = Dgp::static_normal;
    sim.horizons = cfg.horizons.empty() ? std::vector<std::size_t>{32, 128, 512} : cfg.horizons;
    all = static_study_specs();
  } else if (cfg.dgp == "drifting") {
    sim.dgp = Dgp::drifting;
    sim.horizons = cfg.horizons.empty() ? std::vector<std::size_t>{512} : cfg.horizons;
    all = drifting_study_specs(forget_rates(cfg));
  } else {
    throw InputError("--dgp must be 'static' or 'drifting', got '" + cfg.dgp + "'");
  }
  if (cfg.specs.empty()) {
    sim.specs = all;
  } else {
    for (const auto& name : cfg.specs) {
      const auto it = std::find_if(all.begin(), all.end(), [&](const StudySpec& s) { return s.name == name; });
      if (it == all.end()) throw InputError("unknown study specification '" + name + "'");
      sim.specs.push_back(*it);
    }
  }

  const StudyResult res = run_study(sim);

  CsvTable results;
  results.header = {"config", "T", "reps", "mean_crps", "se_crps", "mean_ql", "se_ql", "mean_distance", "se_distance"};
  CsvTable plot;
  plot.header = {"config", "T", "metric", "value"};
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const StudyRow& r = res.rows[i];
    const std::string t = std::to_string(r.horizon);
    results.rows.push_back({r.spec, t, std::to_string(r.reps), format_double(r.mean_crps), format_double(r.se_crps),
                            format_double(r.mean_ql), format_double(r.se_ql), format_double(r.mean_distance),
                            format_double(r.se_distance)});
    const std::pair<const char*, double> scalars[] = {{"mean_crps", r.mean_crps},   {"se_crps", r.se_crps},
                                                      {"mean_ql", r.mean_ql},       {"se_ql", r.se_ql},
                                                      {"mean_distance", r.mean_distance},
                                                      {"se_distance", r.se_distance}};
    for (const auto& [name, value] : scalars) plot.rows.push_back({r.spec, t, name, format_double(value)});
    for (std::size_t m = 0; m < res.grid.size(); ++m) {
      plot.rows.push_back({r.spec, t, labelled("distance_p", format_double(res.grid[m])),
                           format_double(res.profiles[i][static_cast<Eigen::Index>(m)])});
    }
    for (std::size_t c = 0; c < res.config_crps[i].size(); ++c) {
      plot.rows.push_back({r.spec, t, labelled("config_crps", res.config_labels[i][c]),
                           format_double(res.config_crps[i][c])});
    }
  }
  write_csv(cfg.output_dir / "results.csv", results);
  write_csv(cfg.output_dir / "plot_data.csv", plot);

  if (sim.dgp == Dgp::drifting) {
    const auto& cols = table1_columns();
    const bool complete = std::all_of(cols.begin(), cols.end(), [&](const std::string& c) {
      return std::any_of(sim.specs.begin(), sim.specs.end(), [&](const StudySpec& s) { return s.name == c; });
    });
    if (complete) {
      CsvTable table;
      table.header = {"T", "metric"};
      table.header.insert(table.header.end(), cols.begin(), cols.end());
      for (std::size_t h : sim.horizons) {
        std::vector<std::string> mean{std::to_string(h), "mean_ql"}, se{std::to_string(h), "se_ql"};
        for (const auto& c : cols) {
          mean.push_back(format_double(res.row(c, h).mean_ql));
          se.push_back(format_double(res.row(c, h).se_ql));
        }
        table.rows.push_back(std::move(mean));
        table.rows.push_back(std::move(se));
      }
      write_csv(cfg.output_dir / "table1.csv", table);
    }
    write_weight_trace(cfg, sim, res.grid);
  }
}

// --- combine ---------------------------------------------------------------

std::unique_ptr<OnlineCombiner> make_method(const RunConfig& cfg, const std::string& method, const ProbGrid& grid,
                                            std::size_t k) {
  if (method == "naive") {
    return std::make_unique<NaiveCombiner>(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(k));
  }
  if (method == "boa") {
    BoaGridSpec spec;
    if (cfg.basis == "pointwise") {
      spec.basis = BasisChoice::pointwise;
    } else if (cfg.basis == "constant") {
      spec.basis = BasisChoice::constant;
    } else if (cfg.basis == "bspline") {
      spec.basis = BasisChoice::bspline;
    } else {
      throw InputError("--basis must be pointwise, constant or bspline, got '" + cfg.basis + "'");
    }
    spec.knot_distances = cfg.knot_distances;
    spec.degree = cfg.degree;
    spec.add_constant_basis = cfg.add_constant_basis;
    spec.lambdas = cfg.lambdas;
    spec.alpha = cfg.alpha;
    spec.forgets = cfg.forgets;
    spec.fixed_shares = cfg.fixed_shares;
    spec.soft_thresholds = cfg.soft_thresholds;
    spec.hard_thresholds = cfg.hard_thresholds;
    return std::make_unique<TuningGrid>(make_boa_grid(grid, k, spec));
  }
  if (method == "ewa") {
    const auto etas = cfg.etas.empty() ? ewa_eta_grid_default() : cfg.etas;
    return std::make_unique<TuningGrid>(make_ewa_grid(grid, k, etas, cfg.ewa_gradient));
  }
  throw InputError("unknown combination method '" + method + "' (expected naive, boa or ewa)");
}

void combine_impl(const RunConfig& cfg) {
  require_output_dir(cfg.output_dir);
  if (cfg.methods.empty()) throw InputError("no combination method selected");
  ExpertData data = read_expert_csv(cfg.experts_path);
  ObservationStream obs = align_observations(read_observation_csv(cfg.observations_path), data.times);
  const std::vector<std::string> times = data.times;
  const std::vector<std::string> names = data.panel.expert_names;
  CheckedInputs in = validate_panel(std::move(data.panel), data.grid, std::move(obs));
  const std::size_t k = in.panel.experts();

  CsvTable loss;
  loss.header = {"time", "method", "crps"};
  std::vector<LossSeries> series;
  for (const auto& method : cfg.methods) {
    auto combiner = make_method(cfg, method, in.grid, k);
    QuantileForecasts out;
    out.times = times;
    out.grid = in.grid;
    out.values.resize(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(in.grid.size()));
    std::vector<Matrix> surfaces;
    surfaces.reserve(times.size());
    LossSeries ls;
    ls.label = method;
    for (std::size_t t = 0; t < times.size(); ++t) {
      const Matrix& slab = in.panel.slabs[t];
      surfaces.push_back(combiner->weights().weights);
      const Vector forecast = combiner->predict(slab);
      combiner->update(slab, in.obs.y[t]);
      out.values.row(static_cast<Eigen::Index>(t)) = forecast.transpose();
      ls.values.push_back(crps_grid(forecast, in.obs.y[t], in.grid));
    }
    write_quantiles_csv(cfg.output_dir / ("combined_" + method + ".csv"), out);
    write_weights_csv(cfg.output_dir / ("weights_" + method + ".csv"), times, names, in.grid, surfaces);
    series.push_back(std::move(ls));
  }
  for (std::size_t t = 0; t < times.size(); ++t) {
    for (const auto& s : series) loss.rows.push_back({times[t], s.label, format_double(s.values[t])});
  }
  write_csv(cfg.output_dir / "loss.csv", loss);
}

// --- evaluate --------------------------------------------------------------

void evaluate_impl(const RunConfig& cfg) {
  require_output_dir(cfg.output_dir);
  if (cfg.forecasts.size() < 2) throw InputError("evaluate needs at least two forecast files (--forecast name=path)");
  const ObservationStream raw_obs = read_observation_csv(cfg.observations_path);

  std::vector<std::string> names;
  std::vector<QuantileForecasts> fc;
  for (const auto& [name, path] : cfg.forecasts) {
    if (std::find(names.begin(), names.end(), name) != names.end()) {
      throw InputError("duplicate method name '" + name + "'");
    }
    names.push_back(name);
    fc.push_back(read_quantiles_csv(path));
    if (!(fc.back().grid == fc.front().grid)) {
      throw InputError("probability grid of '" + name + "' differs from '" + names.front() + "'");
    }
    if (fc.back().times != fc.front().times) {
      throw InputError("time-axis misalignment between '" + name + "' and '" + names.front() + "'");
    }
  }
  const ObservationStream obs = align_observations(raw_obs, fc.front().times);
  const ProbGrid& grid = fc.front().grid;
  const std::vector<std::string>& times = fc.front().times;

  std::size_t base = 0;
  if (!cfg.baseline.empty()) {
    const auto it = std::find(names.begin(), names.end(), cfg.baseline);
    if (it == names.end()) throw InputError("baseline '" + cfg.baseline + "' is not among the forecasts");
    base = static_cast<std::size_t>(it - names.begin());
  }

  std::vector<LossSeries> series;
  std::vector<Vector> profiles;
  for (std::size_t i = 0; i < fc.size(); ++i) {
    series.push_back(crps_series(fc[i].values, obs, grid, names[i]));
    profiles.push_back(ql_profile(fc[i].values, obs, grid));
  }

  CsvTable crps;
  crps.header = {"method", "mean_crps", "crps_difference"};
  for (std::size_t i = 0; i < fc.size(); ++i) {
    crps.rows.push_back({names[i], format_double(series[i].mean()),
                         format_double(series[i].mean() - series[base].mean())});
  }
  write_csv(cfg.output_dir / "crps_table.csv", crps);

  CsvTable ql;
  ql.header = {"probability", "method", "mean_loss"};
  for (std::size_t m = 0; m < grid.size(); ++m) {
    for (std::size_t i = 0; i < fc.size(); ++i) {
      ql.rows.push_back({format_double(grid[m]), names[i], format_double(profiles[i][static_cast<Eigen::Index>(m)])});
    }
  }
  write_csv(cfg.output_dir / "ql_profile.csv", ql);

  CsvTable cum;
  cum.header = {"time", "method", "value"};
  std::vector<std::vector<double>> diffs;
  for (std::size_t i = 0; i < fc.size(); ++i) diffs.push_back(cumulative_difference(series[i], series[base]));
  for (std::size_t t = 0; t < times.size(); ++t) {
    for (std::size_t i = 0; i < fc.size(); ++i) cum.rows.push_back({times[t], names[i], format_double(diffs[i][t])});
  }
  write_csv(cfg.output_dir / "cumulative_difference.csv", cum);

  DmOptions opts;
  opts.newey_west_lag = cfg.dm_lag;
  opts.small_sample_correction = cfg.dm_small_sample;
  CsvTable dm;
  dm.header = {"method"};
  dm.header.insert(dm.header.end(), names.begin(), names.end());
  for (std::size_t i = 0; i < fc.size(); ++i) {
    std::vector<std::string> row{names[i]};
    for (std::size_t j = 0; j < fc.size(); ++j) {
      try {
        row.push_back(format_double(dm_test(series[i], series[j], opts).p_value));
      } catch (const NumericalError&) {
        row.push_back("NA");
      }
    }
    dm.rows.push_back(std::move(row));
  }
  write_csv(cfg.output_dir / "dm_pvalues.csv", dm);
}

}  // namespace

Workflow parse_workflow(const std::string& name) {
  if (name == "simulate") return Workflow::simulate;
  if (name == "combine") return Workflow::combine;
  if (name == "evaluate") return Workflow::evaluate;
  throw InputError("unknown workflow '" + name + "'");
}

void apply_json_config(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("config file '" + path.string() + "': " + e.what());
  }
  if (!j.is_object()) throw InputError("config file '" + path.string() + "' must hold a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "workflow") {
      cfg.workflow = parse_workflow(json_get<std::string>(v, key));
    } else if (key == "output_dir") {
      cfg.output_dir = json_get<std::string>(v, key);
    } else if (key == "threads") {
      cfg.threads = json_get<std::size_t>(v, key);
    } else if (key == "dgp") {
      cfg.dgp = json_get<std::string>(v, key);
    } else if (key == "T") {
      cfg.horizons = json_get<std::vector<std::size_t>>(v, key);
    } else if (key == "reps") {
      cfg.reps = json_get<std::size_t>(v, key);
    } else if (key == "seed") {
      cfg.seed = json_get<std::uint64_t>(v, key);
    } else if (key == "desk_scale") {
      cfg.desk_scale = json_get<bool>(v, key);
    } else if (key == "forget_grid") {
      if (v.is_array()) {
        std::string joined;
        for (const auto& x : json_get<std::vector<double>>(v, key)) {
          joined += (joined.empty() ? "" : ",") + format_double(x);
        }
        cfg.forget_grid = joined;
      } else {
        cfg.forget_grid = json_get<std::string>(v, key);
      }
    } else if (key == "specs") {
      cfg.specs = json_get<std::vector<std::string>>(v, key);
    } else if (key == "experts") {
      cfg.experts_path = json_get<std::string>(v, key);
    } else if (key == "observations") {
      cfg.observations_path = json_get<std::string>(v, key);
    } else if (key == "methods") {
      cfg.methods = json_get<std::vector<std::string>>(v, key);
    } else if (key == "basis") {
      cfg.basis = json_get<std::string>(v, key);
    } else if (key == "knot_distances") {
      cfg.knot_distances = json_get<std::vector<double>>(v, key);
    } else if (key == "degree") {
      cfg.degree = json_get<int>(v, key);
    } else if (key == "add_constant_basis") {
      cfg.add_constant_basis = json_get<bool>(v, key);
    } else if (key == "lambdas") {
      cfg.lambdas = json_get<std::vector<double>>(v, key);
    } else if (key == "alpha") {
      cfg.alpha = json_get<double>(v, key);
    } else if (key == "forgets") {
      cfg.forgets = json_get<std::vector<double>>(v, key);
    } else if (key == "fixed_shares") {
      cfg.fixed_shares = json_get<std::vector<double>>(v, key);
    } else if (key == "soft_thresholds") {
      cfg.soft_thresholds = json_get<std::vector<double>>(v, key);
    } else if (key == "hard_thresholds") {
      cfg.hard_thresholds = json_get<std::vector<double>>(v, key);
    } else if (key == "etas") {
      cfg.etas = json_get<std::vector<double>>(v, key);
    } else if (key == "ewa_gradient") {
      cfg.ewa_gradient = json_get<bool>(v, key);
    } else if (key == "forecasts") {
      cfg.forecasts.clear();
      for (const auto& [name, p] : json_get<std::map<std::string, std::string>>(v, key)) {
        cfg.forecasts.emplace_back(name, p);
      }
    } else if (key == "baseline") {
      cfg.baseline = json_get<std::string>(v, key);
    } else if (key == "dm_lag") {
      cfg.dm_lag = json_get<std::size_t>(v, key);
    } else if (key == "dm_small_sample") {
      cfg.dm_small_sample = json_get<bool>(v, key);
    } else {
      throw InputError("config file '" + path.string() + "': unknown key '" + key + "'");
    }
  }
}

int cmd_simulate(const RunConfig& config, std::ostream& err) {
  return guarded(err, [&] { simulate_impl(config); });
}

int cmd_combine(const RunConfig& config, std::ostream& err) {
  return guarded(err, [&] { combine_impl(config); });
}

int cmd_evaluate(const RunConfig& config, std::ostream& err) {
  return guarded(err, [&] { evaluate_impl(config); });
}

int run_workflow(const RunConfig& config, std::ostream& err) {
  switch (config.workflow) {
    case Workflow::simulate:
      return cmd_simulate(config, err);
    case Workflow::combine:
      return cmd_combine(config, err);
    case Workflow::evaluate:
      return cmd_evaluate(config, err);
  }
  return 2;
}

}  // namespace crpslearn
