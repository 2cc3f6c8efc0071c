/*
 * Copyright (c) 2026, The STRIDE Toolkit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// stride: batch experiment runner.
//
//   stride run   --config spec.json [--out DIR] [--seed N] [--quiet]
//   stride sweep --config spec.json [--axis NAME --values JSON] [--out DIR] [--seed N] [--quiet]
//   stride demo  [--out DIR] [--seed N] [--quiet]
//
// Exit codes: 0 success, 2 invalid config, 3 I/O failure.

#include "stride/experiment.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

namespace ex = stride::experiment;

constexpr int kExitInvalidConfig = 2;
constexpr int kExitIoFailure = 3;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  std::string axis;
  std::string values;
};

ex::ExperimentSpec resolve(const Options& opt, ex::ExperimentSpec spec) {
  if (!opt.config.empty()) spec = ex::load_spec(opt.config);
  if (!opt.out.empty()) spec.output_dir = opt.out;
  if (opt.seed) spec.seed = *opt.seed;
  return spec;
}

std::pair<std::string, std::string> pareto_axes(const ex::ExperimentSpec& spec) {
  const std::string x = spec.wants("inbsim") ? "inbsim" : "energy";
  const std::string y = spec.wants("vendi") ? "vendi" : (spec.wants("kid") ? "kid" : "energy");
  return {x, y};
}

void write_outputs(const ex::ExperimentSpec& spec, const std::string& command,
                   const std::vector<ex::ResultRow>& rows, bool quiet) {
  const std::filesystem::path dir = spec.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw stride::io_error("cannot create output directory " + dir.string() + ": " + ec.message());

  ex::emit_csv(rows, dir / "results.csv");
  const auto [x, y] = pareto_axes(spec);
  ex::emit_pareto_svg(rows, x, y, dir / "pareto.svg");
  ex::write_text(dir / "manifest.json", ex::manifest(spec, command, rows).dump(2) + "\n");

  if (quiet) return;
  std::string last;
  for (const ex::ResultRow& r : rows) {
    const std::string key = r.method + (r.axis.empty() ? "" : " " + r.axis + "=" + r.axis_value);
    if (key == last) continue;
    last = key;
    std::cout << key << ":";
    if (r.mean_inbsim) std::cout << " mean InBSim " << ex::format_real(r.mean_inbsim);
    if (r.mean_vendi) std::cout << " mean Vendi " << ex::format_real(r.mean_vendi);
    if (r.kid) std::cout << " KID " << ex::format_real(r.kid);
    std::cout << "\n";
  }
  std::cout << "wrote " << (dir / "results.csv").string() << ", pareto.svg, manifest.json\n";
}

int run(const Options& opt) {
  const ex::ExperimentSpec spec = resolve(opt, ex::ExperimentSpec{});
  write_outputs(spec, "run", ex::run_experiment(spec), opt.quiet);
  return 0;
}

int sweep(const Options& opt) {
  ex::ExperimentSpec spec = resolve(opt, ex::ExperimentSpec{});
  ex::SweepSpec sweep = spec.sweep.value_or(ex::SweepSpec{});
  if (!opt.axis.empty()) sweep.axis = opt.axis;
  if (!opt.values.empty()) {
    try {
      sweep.values = ex::json::parse(opt.values);
    } catch (const ex::json::parse_error&) {
      throw std::invalid_argument("--values: expected a JSON array, got '" + opt.values + "'");
    }
  }
  if (sweep.axis.empty()) throw std::invalid_argument("sweep.axis: missing (use --axis or a \"sweep\" config section)");
  spec.sweep = sweep;
  write_outputs(spec, "sweep", ex::sweep(spec, sweep.axis, sweep.values), opt.quiet);
  return 0;
}

int demo(const Options& opt) {
  const ex::ExperimentSpec base = resolve(opt, ex::demo_spec());
  std::vector<ex::ResultRow> rows;
  for (ex::Method m : {ex::Method::Baseline, ex::Method::InputNoise, ex::Method::NoPca, ex::Method::Stride}) {
    ex::ExperimentSpec spec = base;
    spec.method = m;
    auto part = ex::run_experiment(spec);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  write_outputs(base, "demo", rows, opt.quiet);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STRIDE structured-perturbation experiments on a toy few-step generator"};
  app.require_subcommand(1);
  Options opt;

  const auto add_common = [&opt](CLI::App* sub, bool config_flag) {
    if (config_flag) sub->add_option("--config", opt.config, "experiment JSON config")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (overrides output_dir)");
    sub->add_option("--seed", opt.seed, "experiment seed (overrides seed)");
    sub->add_flag("--quiet", opt.quiet, "suppress the summary");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run one method over all prompts");
  add_common(run_cmd, true);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run one experiment per value of a parameter");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--axis", opt.axis, "alpha, f_alpha, P, K, layer_set or step_gate");
  sweep_cmd->add_option("--values", opt.values, "JSON array of values, e.g. '[2,4,8]' or '[[0],[0,1]]'");
  CLI::App* demo_cmd = app.add_subcommand("demo", "baseline / input-noise / No-PCA / STRIDE comparison");
  add_common(demo_cmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalidConfig;
  }

  try {
    if (*run_cmd) return run(opt);
    if (*sweep_cmd) return sweep(opt);
    return demo(opt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const stride::io_error& e) {
    std::cerr << "I/O failure: " << e.what() << "\n";
    return kExitIoFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O failure: " << e.what() << "\n";
    return kExitIoFailure;
  }
}
