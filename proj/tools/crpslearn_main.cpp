// crpslearn command-line driver: simulate, combine, evaluate.
#include <cstdlib>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crpslearn/errors.hpp"
#include "crpslearn/workflows.hpp"

namespace {

using crpslearn::RunConfig;

struct Override {
  CLI::Option* option;
  std::function<void(RunConfig&)> apply;
};

class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {}

  template <class T, class F>
  CLI::Option* option(const std::string& name, const std::string& desc, F apply) {
    auto holder = std::make_shared<T>();
    CLI::Option* opt = app_->add_option(name, *holder, desc);
    overrides_.push_back({opt, [holder, apply](RunConfig& c) { apply(c, *holder); }});
    return opt;
  }

  template <class F>
  CLI::Option* list(const std::string& name, const std::string& desc, F apply) {
    return option<std::vector<double>>(name, desc, apply)->delimiter(',');
  }

  template <class F>
  void flag(const std::string& name, const std::string& desc, F apply) {
    auto holder = std::make_shared<bool>(false);
    CLI::Option* opt = app_->add_flag(name, *holder, desc);
    overrides_.push_back({opt, [holder, apply](RunConfig& c) { apply(c, *holder); }});
  }

  void apply(RunConfig& cfg) const {
    for (const auto& o : overrides_) {
      if (o.option->count() > 0) o.apply(cfg);
    }
  }

 private:
  CLI::App* app_;
  std::vector<Override> overrides_;
};

std::size_t threads_from_env() {
  const char* v = std::getenv("CRPSLEARN_THREADS");
  if (v == nullptr || *v == '\0') return 1;
  char* end = nullptr;
  const unsigned long n = std::strtoul(v, &end, 10);
  if (*end != '\0' || n == 0) throw crpslearn::InputError("CRPSLEARN_THREADS must be a positive integer");
  return static_cast<std::size_t>(n);
}

void add_common(Flags& f, std::string& config_path, CLI::App* app) {
  app->add_option("--config", config_path, "JSON config file; flags override its keys");
  f.option<std::string>("-o,--output-dir", "Existing directory for output files",
                        [](RunConfig& c, const std::string& v) { c.output_dir = v; });
  f.option<std::size_t>("--threads", "Worker threads (default: CRPSLEARN_THREADS or 1)",
                        [](RunConfig& c, std::size_t v) { c.threads = v; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online CRPS learning for probabilistic forecast combination"};
  app.require_subcommand(1);

  std::string sim_cfg, comb_cfg, eval_cfg;
  auto* sim = app.add_subcommand("simulate", "Run a simulation study");
  auto* comb = app.add_subcommand("combine", "Combine expert quantile forecasts online");
  auto* eval = app.add_subcommand("evaluate", "Compare combined forecasts");
  Flags fs(sim), fc(comb), fe(eval);

  add_common(fs, sim_cfg, sim);
  fs.option<std::string>("--dgp", "static or drifting", [](RunConfig& c, const std::string& v) { c.dgp = v; });
  fs.option<std::vector<std::size_t>>("--T", "Comma-separated horizons",
                                      [](RunConfig& c, const std::vector<std::size_t>& v) { c.horizons = v; })
      ->delimiter(',');
  fs.option<std::size_t>("--reps", "Repetitions", [](RunConfig& c, std::size_t v) { c.reps = v; });
  fs.option<std::uint64_t>("--seed", "Master seed (required)", [](RunConfig& c, std::uint64_t v) { c.seed = v; });
  fs.flag("--full-scale", "Default to 1000 repetitions instead of 100",
          [](RunConfig& c, bool v) { c.desk_scale = !v; });
  fs.option<std::string>("--forget-grid", "'auto' or comma-separated forget rates",
                         [](RunConfig& c, const std::string& v) { c.forget_grid = v; });
  fs.option<std::vector<std::string>>("--specs", "Comma-separated subset of study specifications",
                                      [](RunConfig& c, const std::vector<std::string>& v) { c.specs = v; })
      ->delimiter(',');

  add_common(fc, comb_cfg, comb);
  fc.option<std::string>("--experts", "Expert CSV (time,expert,probability,value)",
                         [](RunConfig& c, const std::string& v) { c.experts_path = v; });
  fc.option<std::string>("--observations", "Observation CSV (time,value)",
                         [](RunConfig& c, const std::string& v) { c.observations_path = v; });
  fc.option<std::vector<std::string>>("--methods", "Comma-separated: naive, boa, ewa",
                                      [](RunConfig& c, const std::vector<std::string>& v) { c.methods = v; })
      ->delimiter(',');
  fc.option<std::string>("--basis", "pointwise, constant or bspline",
                         [](RunConfig& c, const std::string& v) { c.basis = v; });
  fc.list("--knot-distances", "B-spline knot distances", [](RunConfig& c, const auto& v) { c.knot_distances = v; });
  fc.option<int>("--degree", "B-spline degree", [](RunConfig& c, int v) { c.degree = v; });
  fc.flag("--add-constant-basis", "Add the constant basis to the bspline candidates",
          [](RunConfig& c, bool v) { c.add_constant_basis = v; });
  fc.list("--lambdas", "Smoothing penalties", [](RunConfig& c, const auto& v) { c.lambdas = v; });
  fc.option<double>("--alpha", "Weight of the first-difference penalty", [](RunConfig& c, double v) { c.alpha = v; });
  fc.list("--forgets", "Forget rates", [](RunConfig& c, const auto& v) { c.forgets = v; });
  fc.list("--fixed-shares", "Fixed-share rates", [](RunConfig& c, const auto& v) { c.fixed_shares = v; });
  fc.list("--soft-thresholds", "Soft-threshold levels", [](RunConfig& c, const auto& v) { c.soft_thresholds = v; });
  fc.list("--hard-thresholds", "Hard-threshold levels", [](RunConfig& c, const auto& v) { c.hard_thresholds = v; });
  fc.list("--etas", "EWA learning rates", [](RunConfig& c, const auto& v) { c.etas = v; });
  fc.flag("--ewa-loss", "EWA on the loss instead of its linearisation",
          [](RunConfig& c, bool v) { c.ewa_gradient = !v; });

  add_common(fe, eval_cfg, eval);
  fe.option<std::string>("--observations", "Observation CSV (time,value)",
                         [](RunConfig& c, const std::string& v) { c.observations_path = v; });
  fe.option<std::vector<std::string>>(
        "--forecast", "name=path of a combined quantile CSV (repeatable)",
        [](RunConfig& c, const std::vector<std::string>& v) {
          c.forecasts.clear();
          for (const auto& item : v) {
            const auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0) {
              throw crpslearn::InputError("--forecast expects name=path, got '" + item + "'");
            }
            c.forecasts.emplace_back(item.substr(0, eq), item.substr(eq + 1));
          }
        })
      ->allow_extra_args(false);
  fe.option<std::string>("--baseline", "Reference method (default: first forecast)",
                         [](RunConfig& c, const std::string& v) { c.baseline = v; });
  fe.option<std::size_t>("--dm-lag", "Newey-West lag for the DM variance", [](RunConfig& c, std::size_t v) {
    c.dm_lag = v;
  });
  fe.flag("--dm-small-sample", "Harvey-Leybourne-Newbold correction",
          [](RunConfig& c, bool v) { c.dm_small_sample = v; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  RunConfig cfg;
  try {
    cfg.threads = threads_from_env();
    const Flags* flags = nullptr;
    const std::string* config_path = nullptr;
    if (sim->parsed()) {
      cfg.workflow = crpslearn::Workflow::simulate;
      flags = &fs;
      config_path = &sim_cfg;
    } else if (comb->parsed()) {
      cfg.workflow = crpslearn::Workflow::combine;
      flags = &fc;
      config_path = &comb_cfg;
    } else {
      cfg.workflow = crpslearn::Workflow::evaluate;
      flags = &fe;
      config_path = &eval_cfg;
    }
    const crpslearn::Workflow chosen = cfg.workflow;
    if (!config_path->empty()) crpslearn::apply_json_config(cfg, *config_path);
    cfg.workflow = chosen;
    flags->apply(cfg);
  } catch (const crpslearn::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return crpslearn::run_workflow(cfg, std::cerr);
}
