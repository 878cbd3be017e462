// Copyright 2026 The scca Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// scca: command-line driver.
//
//   scca run      --solver appgrad --k 5 [--config file] [--x X --y Y] ...
//   scca generate --n 2000 --p1 50 --p2 50 --out-x X.csv --out-y Y.csv
//   scca compare  --solvers spectral,appgrad,nw ...

#include <deque>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scca/harness/config.hpp"
#include "scca/harness/experiment.hpp"
#include "scca/harness/io.hpp"
#include "scca/harness/planted.hpp"

namespace {

// Command-line values stay as strings so they go through the same typed
// parser as configuration files and override them key by key.
struct Overrides {
  std::deque<std::string> values;  // stable addresses for CLI11 bindings
  std::vector<std::pair<std::string, std::string*>> slots;
  std::string config_path;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    std::string* value = &values.emplace_back();
    app->add_option(flag, *value, help);
    slots.emplace_back(key, value);
  }

  scca::SolverConfig resolve() const {
    scca::SolverConfig c = config_path.empty() ? scca::SolverConfig{} : scca::load_config(config_path);
    for (const auto& [key, value] : slots) {
      if (!value->empty()) scca::set_config_value(c, key, *value);
    }
    return c;
  }
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_path, "key = value configuration file (flags override it)");
  o.add(app, "--solver", "solver",
        "spectral | qr | als | appgrad | stochastic-appgrad | nw | dw | pca-cca | kernel-appgrad");
  o.add(app, "--k", "k", "number of canonical pairs");
  o.add(app, "--oversample", "oversample", "extra directions l for iterative solvers");
  o.add(app, "--lambda", "lambda", "ridge regularization added to both Grams");
  o.add(app, "--eta", "eta", "step size (default 1 / (2 L))");
  o.add(app, "--eta-grid", "eta_grid", "comma separated steps to cross-validate");
  o.add(app, "--schedule", "schedule", "constant | inverse-t | inverse-sqrt-t");
  o.add(app, "--t0", "t0", "schedule decay offset");
  o.add(app, "--batch-size", "batch_size", "minibatch size m");
  o.add(app, "--sampling", "sampling", "with-replacement | without-replacement | sequential");
  o.add(app, "--one-pass", "one_pass", "stream each row once (true/false)");
  o.add(app, "--max-iters", "max_iters", "iteration budget");
  o.add(app, "--tol", "tol", "relative subspace movement tolerance");
  o.add(app, "--seed", "seed", "random seed");
  o.add(app, "--x", "x", "first view data file");
  o.add(app, "--y", "y", "second view data file");
  o.add(app, "--format", "format", "csv | matrix-market");
  o.add(app, "--holdout", "holdout", "fraction of rows held out for evaluation");
  o.add(app, "--kernel", "kernel", "linear | rbf:<sigma> | poly:<d>[:<c>]");
  o.add(app, "--pca-m", "pca_m", "PCA dimension for pca-cca (default 4k)");
  o.add(app, "--trace-every", "trace_every", "trace cadence in iterations");
  o.add(app, "--timing", "timing", "record wall time in traces (true/false)");
  o.add(app, "--n", "n", "planted: samples");
  o.add(app, "--p1", "p1", "planted: features of view 1");
  o.add(app, "--p2", "p2", "planted: features of view 2");
  o.add(app, "--correlations", "correlations", "planted: comma separated decreasing correlations");
  o.add(app, "--noise", "noise", "planted: extra Gaussian noise scale");
  o.add(app, "--profile", "profile", "planted: isotropic | rotated");
  o.add(app, "--condition", "condition", "planted: Gram condition number");
}

void print_summary(std::ostream& os, const scca::RunReport& r) {
  os << std::setprecision(6);
  os << "solver=" << r.solver << " iterations=" << r.iterations << " converged=" << (r.converged ? "yes" : "no")
     << " flops=" << r.total_flops;
  if (r.final_tcc) os << " tcc=" << *r.final_tcc;
  if (r.final_pcc) os << " pcc=" << *r.final_pcc;
  if (r.final_pcc_holdout) os << " pcc_holdout=" << *r.final_pcc_holdout;
  os << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scalable canonical correlation analysis"};
  app.require_subcommand(1);

  Overrides run_o;
  std::string report_path, trace_path, model_prefix, config_out;
  CLI::App* run = app.add_subcommand("run", "run one solver and write its report");
  add_common(run, run_o);
  run->add_option("--report", report_path, "line-delimited JSON report path");
  run->add_option("--trace", trace_path, "two-column (FLOPs, PCC) curve path");
  run->add_option("--model", model_prefix, "write <prefix>.phi.txt, .psi.txt, .lambda.txt");
  run->add_option("--write-config", config_out, "write the resolved configuration");

  Overrides gen_o;
  std::string out_x, out_y, out_model;
  CLI::App* gen = app.add_subcommand("generate", "write a planted instance to disk");
  add_common(gen, gen_o);
  gen->add_option("--out-x", out_x, "output path for X")->required();
  gen->add_option("--out-y", out_y, "output path for Y")->required();
  gen->add_option("--out-model", out_model, "output prefix for the planted model");

  Overrides cmp_o;
  std::string solvers = "spectral,appgrad,stochastic-appgrad,nw,dw,pca-cca";
  CLI::App* cmp = app.add_subcommand("compare", "run several solvers on the same data");
  add_common(cmp, cmp_o);
  cmp->add_option("--solvers", solvers, "comma separated solver list");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const scca::SolverConfig c = run_o.resolve();
      if (!config_out.empty()) {
        auto out = scca::io_detail::open_out(config_out);
        scca::write_config(out, c);
      }
      const scca::ExperimentResult r = scca::run_experiment(c);
      scca::write_experiment_outputs(r, report_path, trace_path, model_prefix);
      print_summary(std::cout, r.report);
    } else if (gen->parsed()) {
      const scca::SolverConfig c = gen_o.resolve();
      const scca::PlantedInstance inst = scca::generate_planted(c.planted, c.seed);
      scca::save_dataset(out_x, inst.x, c.format);
      scca::save_dataset(out_y, inst.y, c.format);
      if (!out_model.empty()) scca::save_model(out_model, inst.planted);
      std::cout << "wrote " << inst.x.rows() << " x " << inst.x.cols() << " and " << inst.y.rows() << " x "
                << inst.y.cols() << '\n';
    } else if (cmp->parsed()) {
      scca::SolverConfig c = cmp_o.resolve();
      const scca::ExperimentData data = scca::load_experiment_data(c);
      for (auto name : scca::io_detail::split(solvers, ',')) {
        c.solver = scca::parse_solver_kind(scca::io_detail::trim(name));
        try {
          print_summary(std::cout, scca::run_experiment(c, data).report);
        } catch (const scca::Error& e) {
          std::cout << "solver=" << scca::to_string(c.solver) << " error: " << e.what() << '\n';
        }
      }
    }
  } catch (const scca::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
