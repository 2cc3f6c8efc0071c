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

#pragma once

#include "stride/common.hpp"
#include "stride/diversity_metrics.hpp"
#include "stride/rng.hpp"
#include "stride/stride_inject.hpp"
#include "stride/toy_generator.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace stride::experiment {

using json = nlohmann::json;

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kEmbeddingSource = "toy-generator pixels";

enum class Method { Baseline, InputNoise, NoPca, Stride };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::Baseline: return "baseline";
    case Method::InputNoise: return "input_noise";
    case Method::NoPca: return "no_pca";
    case Method::Stride: return "stride";
  }
  return "unknown";
}

inline Method parse_method(const std::string& name) {
  if (name == "baseline") return Method::Baseline;
  if (name == "input_noise") return Method::InputNoise;
  if (name == "no_pca") return Method::NoPca;
  if (name == "stride") return Method::Stride;
  throw std::invalid_argument("method: unknown value '" + name +
                              "' (expected baseline, input_noise, no_pca or stride)");
}

struct SweepSpec {
  std::string axis;
  json values = json::array();
};

/// Everything needed to reproduce one run. Mirrors the JSON config.
struct ExperimentSpec {
  toy::GeneratorShape generator;
  std::uint64_t generator_seed = 1;
  std::uint64_t seed = 0;                  // latent streams
  std::size_t prompts = 32;
  std::size_t samples_per_prompt = 4;
  Method method = Method::Stride;
  StrideConfig stride;
  std::vector<std::string> metrics{"inbsim", "vendi"};
  std::size_t kid_blocks = 10;
  std::string output_dir = "stride_out";
  std::optional<SweepSpec> sweep;

  bool wants(std::string_view metric) const {
    return std::find(metrics.begin(), metrics.end(), metric) != metrics.end();
  }
};

/// One (method, config, prompt) result. Run-level aggregates repeat on every row.
struct ResultRow {
  std::string method;
  std::string axis;
  std::string axis_value;
  std::string config_digest;
  std::size_t prompt = 0;
  std::optional<double> inbsim;
  std::optional<double> vendi;
  std::optional<double> mean_inbsim;
  std::optional<double> mean_vendi;
  std::optional<double> kid;
  double energy = 0.0;
  double wall_clock_ms = 0.0;   // not written to CSV
};

// ---------------------------------------------------------------------------
// Config (de)serialization

namespace detail {

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  stride::detail::require(obj.is_object(), where + ": expected a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& obj, const std::string& key, const std::string& where, T& target) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(where + "." + key + ": wrong type (" + obj.at(key).dump() + ")");
  }
}

inline bool is_count(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

inline void read_count(const json& obj, const std::string& key, const std::string& where, std::size_t& target) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!is_count(v))
    throw std::invalid_argument(where + "." + key + ": expected a non-negative integer (" + v.dump() + ")");
  target = v.get<std::size_t>();
}

inline void read_seed(const json& obj, const std::string& key, const std::string& where, std::uint64_t& target) {
  std::size_t value = target;
  read_count(obj, key, where, value);
  target = value;
}

inline std::set<std::size_t> read_index_set(const json& v, const std::string& where) {
  if (!v.is_array()) throw std::invalid_argument(where + ": expected an array of non-negative integers");
  std::set<std::size_t> out;
  for (const json& e : v) {
    if (!is_count(e)) throw std::invalid_argument(where + ": expected non-negative integers (" + e.dump() + ")");
    out.insert(e.get<std::size_t>());
  }
  return out;
}

inline StrideConfig stride_from_json(const json& obj, StrideConfig cfg) {
  const std::string w = "stride";
  check_keys(obj, w, {"alpha", "f_alpha", "patch_size", "stride", "k_components", "power_iterations",
                      "layer_set", "step_gate", "seed", "energy_match"});
  read(obj, "alpha", w, cfg.alpha);
  read(obj, "f_alpha", w, cfg.f_alpha);
  read_count(obj, "patch_size", w, cfg.patch_size);
  read_count(obj, "stride", w, cfg.stride);
  read_count(obj, "k_components", w, cfg.k_components);
  read_count(obj, "power_iterations", w, cfg.power_iterations);
  if (obj.contains("layer_set")) cfg.layer_set = read_index_set(obj.at("layer_set"), w + ".layer_set");
  if (obj.contains("step_gate")) cfg.step_gate = read_index_set(obj.at("step_gate"), w + ".step_gate");
  read_seed(obj, "seed", w, cfg.seed);
  read(obj, "energy_match", w, cfg.energy_match);
  return cfg;
}

}  // namespace detail

inline json to_json(const StrideConfig& cfg) {
  return json{{"alpha", cfg.alpha},
              {"f_alpha", cfg.f_alpha},
              {"patch_size", cfg.patch_size},
              {"stride", cfg.stride},
              {"k_components", cfg.k_components},
              {"power_iterations", cfg.power_iterations},
              {"layer_set", cfg.layer_set},
              {"step_gate", cfg.step_gate},
              {"seed", cfg.seed},
              {"energy_match", cfg.energy_match}};
}

inline json to_json(const ExperimentSpec& spec) {
  json j{{"generator",
          {{"seed", spec.generator_seed},
           {"depth", spec.generator.depth},
           {"steps", spec.generator.steps},
           {"height", spec.generator.height},
           {"width", spec.generator.width},
           {"feature_channels", spec.generator.feature_channels},
           {"output_channels", spec.generator.output_channels}}},
         {"seed", spec.seed},
         {"prompts", spec.prompts},
         {"samples_per_prompt", spec.samples_per_prompt},
         {"method", to_string(spec.method)},
         {"stride", to_json(spec.stride)},
         {"metrics", spec.metrics},
         {"kid_blocks", spec.kid_blocks},
         {"output_dir", spec.output_dir}};
  if (spec.sweep) j["sweep"] = json{{"axis", spec.sweep->axis}, {"values", spec.sweep->values}};
  return j;
}

/// Parses a config document. Absent keys keep their defaults; unknown keys throw.
inline ExperimentSpec spec_from_json(const json& doc) {
  ExperimentSpec spec;
  detail::check_keys(doc, "config", {"generator", "seed", "prompts", "samples_per_prompt", "method", "stride",
                                     "metrics", "kid_blocks", "output_dir", "sweep"});
  if (doc.contains("generator")) {
    const json& g = doc.at("generator");
    detail::check_keys(g, "generator",
                       {"seed", "depth", "steps", "height", "width", "feature_channels", "output_channels"});
    detail::read_seed(g, "seed", "generator", spec.generator_seed);
    detail::read_count(g, "depth", "generator", spec.generator.depth);
    detail::read_count(g, "steps", "generator", spec.generator.steps);
    detail::read_count(g, "height", "generator", spec.generator.height);
    detail::read_count(g, "width", "generator", spec.generator.width);
    detail::read_count(g, "feature_channels", "generator", spec.generator.feature_channels);
    detail::read_count(g, "output_channels", "generator", spec.generator.output_channels);
  }
  detail::read_seed(doc, "seed", "config", spec.seed);
  detail::read_count(doc, "prompts", "config", spec.prompts);
  detail::read_count(doc, "samples_per_prompt", "config", spec.samples_per_prompt);
  if (doc.contains("method")) {
    std::string name;
    detail::read(doc, "method", "config", name);
    spec.method = parse_method(name);
  }
  if (doc.contains("stride")) spec.stride = detail::stride_from_json(doc.at("stride"), spec.stride);
  detail::read(doc, "metrics", "config", spec.metrics);
  detail::read_count(doc, "kid_blocks", "config", spec.kid_blocks);
  detail::read(doc, "output_dir", "config", spec.output_dir);
  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    detail::check_keys(s, "sweep", {"axis", "values"});
    SweepSpec sweep;
    detail::read(s, "axis", "sweep", sweep.axis);
    if (s.contains("values")) sweep.values = s.at("values");
    spec.sweep = sweep;
  }
  return spec;
}

inline ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config: malformed JSON (" + std::string(e.what()) + ")");
  }
  return spec_from_json(doc);
}

/// Throws std::invalid_argument naming the offending field.
inline void validate(const ExperimentSpec& spec) {
  using stride::detail::require;
  const auto& g = spec.generator;
  require(g.depth >= 1, "generator.depth: must be >= 1");
  require(g.steps >= 1, "generator.steps: must be >= 1");
  require(g.height >= 1 && g.width >= 1, "generator.height/width: must be >= 1");
  require(g.feature_channels >= 1, "generator.feature_channels: must be >= 1");
  require(g.output_channels >= 1, "generator.output_channels: must be >= 1");
  require(spec.prompts >= 1, "prompts: must be >= 1");
  require(spec.samples_per_prompt >= 1, "samples_per_prompt: must be >= 1");
  for (const std::string& m : spec.metrics)
    require(m == "inbsim" || m == "vendi" || m == "kid", "metrics: unknown metric '" + m + "'");
  if (spec.wants("inbsim"))
    require(spec.samples_per_prompt >= 2, "samples_per_prompt: must be >= 2 for the inbsim metric");
  if (spec.wants("kid")) {
    require(spec.kid_blocks >= 1, "kid_blocks: must be >= 1");
    require(spec.prompts * spec.samples_per_prompt >= 2 * spec.kid_blocks,
            "kid_blocks: prompts * samples_per_prompt must be >= 2 * kid_blocks");
  }
  try {
    spec.stride.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("stride.") + e.what());
  }
  if (spec.method == Method::Stride || spec.method == Method::NoPca) {
    require(!spec.stride.layer_set.empty(), "stride.layer_set: must be non-empty");
    require(!spec.stride.step_gate.empty(), "stride.step_gate: must be non-empty");
    require(spec.stride.patch_size <= g.height && spec.stride.patch_size <= g.width,
            "stride.patch_size: exceeds the generator grid");
  }
  if (spec.method == Method::InputNoise)
    require(spec.stride.alpha <= 1.0, "stride.alpha: must be in [0, 1] for input_noise");
}

/// FNV-1a over the canonical JSON of everything except method, output and sweep.
inline std::string config_digest(const ExperimentSpec& spec) {
  json j = to_json(spec);
  j.erase("method");
  j.erase("output_dir");
  j.erase("sweep");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Running

inline constexpr std::uint64_t kLatentStream = 0x4c4154;     // "LAT"
inline constexpr std::uint64_t kReferenceStream = 0x524546;  // "REF"

/// Batch element id of sample j of prompt p.
inline std::uint64_t image_id(std::size_t prompt, std::size_t sample) {
  return (static_cast<std::uint64_t>(prompt) << 32) | static_cast<std::uint64_t>(sample);
}

struct PromptOutput {
  std::vector<Grid> images;
  double mean_energy = 0.0;
};

/// Generates every sample of one prompt under `method`.
inline PromptOutput generate_prompt(const toy::ToyGenerator& gen, const ExperimentSpec& spec, Method method,
                                    std::size_t prompt, std::uint64_t stream = kLatentStream) {
  PromptOutput out;
  const StrideConfig& cfg = spec.stride;
  double energy_total = 0.0;
  for (std::size_t j = 0; j < spec.samples_per_prompt; ++j) {
    const std::uint64_t id = image_id(prompt, j);
    Grid latent = toy::sample_latent(gen, rng::derive_seed(spec.seed, {stream, prompt, j}));
    double energy_sq = 0.0;
    toy::Hook hook;
    if (method == Method::InputNoise) {
      Grid blended = input_noise_blend(latent, cfg.alpha, cfg.f_alpha, cfg.seed, id);
      energy_sq = std::pow(frobenius_distance(blended, latent), 2);
      latent = std::move(blended);
    } else if (method == Method::Stride || method == Method::NoPca) {
      hook = [&cfg, &energy_sq, method](FeatureMap h) {
        FeatureMap after = method == Method::Stride ? stride_perturb(h, cfg) : no_pca_perturb(h, cfg);
        energy_sq += std::pow(perturbation_energy(h, after), 2);
        return after;
      };
    }
    out.images.push_back(toy::generate(gen, latent, hook ? &hook : nullptr, id).image);
    energy_total += std::sqrt(energy_sq);
  }
  out.mean_energy = energy_total / static_cast<double>(spec.samples_per_prompt);
  return out;
}

inline std::optional<double> mean_of(const std::vector<ResultRow>& rows, std::optional<double> ResultRow::*field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const ResultRow& r : rows)
    if ((r.*field).has_value()) { sum += *(r.*field); ++n; }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

/// One row per prompt, fully determined by the ExperimentSpec.
inline std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  const auto start = std::chrono::steady_clock::now();
  const toy::ToyGenerator gen = toy::build_generator(spec.generator, spec.generator_seed);
  const std::string digest = config_digest(spec);
  const std::string method = to_string(spec.method);

  std::vector<ResultRow> rows;
  std::vector<Grid> all_images;
  for (std::size_t p = 0; p < spec.prompts; ++p) {
    PromptOutput out = generate_prompt(gen, spec, spec.method, p);
    ResultRow row;
    row.method = method;
    row.config_digest = digest;
    row.prompt = p;
    row.energy = out.mean_energy;
    const metrics::EmbeddingSet set = metrics::embed(out.images, std::string(kEmbeddingSource));
    if (spec.wants("inbsim")) row.inbsim = metrics::in_batch_similarity(set);
    if (spec.wants("vendi")) row.vendi = metrics::vendi_score(set);
    rows.push_back(std::move(row));
    if (spec.wants("kid"))
      for (Grid& g : out.images) all_images.push_back(std::move(g));
  }

  std::optional<double> kid;
  if (spec.wants("kid")) {
    std::vector<Grid> reference;
    for (std::size_t p = 0; p < spec.prompts; ++p)
      for (Grid& g : generate_prompt(gen, spec, Method::Baseline, p, kReferenceStream).images)
        reference.push_back(std::move(g));
    kid = metrics::kid(metrics::embed(all_images, std::string(kEmbeddingSource)),
                       metrics::embed(reference, std::string(kEmbeddingSource)), spec.kid_blocks, spec.seed);
  }

  const auto mean_inbsim = mean_of(rows, &ResultRow::inbsim);
  const auto mean_vendi = mean_of(rows, &ResultRow::vendi);
  const double elapsed =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  for (ResultRow& r : rows) {
    r.mean_inbsim = mean_inbsim;
    r.mean_vendi = mean_vendi;
    r.kid = kid;
    r.wall_clock_ms = elapsed;
  }
  return rows;
}

inline const std::vector<std::string>& sweep_axes() {
  static const std::vector<std::string> axes{"alpha", "f_alpha", "P", "K", "layer_set", "step_gate"};
  return axes;
}

/// Applies one sweep value to a copy of the spec. P sets patch size and stride together.
inline ExperimentSpec apply_axis(ExperimentSpec spec, const std::string& axis, const json& value) {
  const auto as_count = [&](const json& v) {
    if (!detail::is_count(v)) throw std::invalid_argument("sweep." + axis + ": expected non-negative integers");
    return v.get<std::size_t>();
  };
  const auto as_real = [&](const json& v) {
    if (!v.is_number()) throw std::invalid_argument("sweep." + axis + ": expected numbers");
    return v.get<double>();
  };
  if (axis == "alpha") spec.stride.alpha = as_real(value);
  else if (axis == "f_alpha") spec.stride.f_alpha = as_real(value);
  else if (axis == "P") spec.stride.patch_size = spec.stride.stride = as_count(value);
  else if (axis == "K") spec.stride.k_components = as_count(value);
  else if (axis == "layer_set") spec.stride.layer_set = detail::read_index_set(value, "sweep.layer_set");
  else if (axis == "step_gate") spec.stride.step_gate = detail::read_index_set(value, "sweep.step_gate");
  else throw std::invalid_argument("sweep.axis: unknown axis '" + axis + "' (expected alpha, f_alpha, P, K, layer_set or step_gate)");
  return spec;
}

/// Compact label for a sweep value: numbers in %g, lists joined with ';'.
inline std::string axis_label(const json& value) {
  const auto number = [](const json& v) {
    if (v.is_number_integer()) return v.dump();
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v.get<double>());
    return std::string(buf);
  };
  if (!value.is_array()) return value.is_number() ? number(value) : value.dump();
  std::string out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (i) out += ';';
    out += number(value[i]);
  }
  return out;
}

inline std::vector<ResultRow> sweep(const ExperimentSpec& base, const std::string& axis, const json& values) {
  const auto& axes = sweep_axes();
  if (std::find(axes.begin(), axes.end(), axis) == axes.end())
    throw std::invalid_argument("sweep.axis: unknown axis '" + axis + "' (expected alpha, f_alpha, P, K, layer_set or step_gate)");
  stride::detail::require(values.is_array() && !values.empty(), "sweep.values: expected a non-empty array");
  std::vector<ResultRow> merged;
  for (const json& v : values) {
    auto rows = run_experiment(apply_axis(base, axis, v));
    for (ResultRow& r : rows) {
      r.axis = axis;
      r.axis_value = axis_label(v);
      merged.push_back(std::move(r));
    }
  }
  return merged;
}

// ---------------------------------------------------------------------------
// Output

inline std::string format_real(std::optional<double> v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", *v);
  return buf;
}

inline constexpr std::string_view kCsvHeader =
    "method,axis,axis_value,config_digest,prompt,inbsim,vendi,mean_inbsim,mean_vendi,kid,energy";

/// Header plus one LF-terminated line per row, reals at 6 significant digits.
inline std::string format_csv(const std::vector<ResultRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const ResultRow& r : rows) {
    out += r.method + ',' + r.axis + ',' + r.axis_value + ',' + r.config_digest + ',' + std::to_string(r.prompt) +
           ',' + format_real(r.inbsim) + ',' + format_real(r.vendi) + ',' + format_real(r.mean_inbsim) + ',' +
           format_real(r.mean_vendi) + ',' + format_real(r.kid) + ',' + format_real(r.energy) + '\n';
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  out << text;
  out.close();
  if (!out) throw io_error("write failed: " + path.string());
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  write_text(path, format_csv(rows));
}

namespace detail {

inline std::optional<double> metric_value(const ResultRow& r, const std::string& metric) {
  if (metric == "inbsim") return r.inbsim;
  if (metric == "vendi") return r.vendi;
  if (metric == "kid") return r.kid;
  if (metric == "energy") return r.energy;
  throw std::invalid_argument("pareto: unknown metric '" + metric + "' (expected inbsim, vendi, kid or energy)");
}

inline std::string metric_label(const std::string& metric) {
  if (metric == "inbsim") return "InBSim (lower = more diverse)";
  if (metric == "vendi") return "Vendi score per prompt";
  if (metric == "kid") return "KID";
  return "perturbation energy";
}

inline std::string svg_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

/**
 * @brief Static scatter of one point per (method, axis value, config).
 *
 * Each point is the mean of the metric over that group's prompt rows. One
 * series (colour and marker) per method, in order of first appearance.
 */
inline std::string render_pareto_svg(const std::vector<ResultRow>& rows, const std::string& x_metric,
                                     const std::string& y_metric) {
  struct Point {
    std::string method, label;
    double x_sum = 0, y_sum = 0;
    std::size_t n = 0;
  };
  std::vector<Point> points;
  std::vector<std::string> methods;
  for (const ResultRow& r : rows) {
    const auto x = detail::metric_value(r, x_metric);
    const auto y = detail::metric_value(r, y_metric);
    if (!x) throw std::invalid_argument("pareto: metric '" + x_metric + "' missing for method " + r.method);
    if (!y) throw std::invalid_argument("pareto: metric '" + y_metric + "' missing for method " + r.method);
    const std::string label = r.axis.empty() ? "" : r.axis + "=" + r.axis_value;
    auto it = std::find_if(points.begin(), points.end(), [&](const Point& p) {
      return p.method == r.method && p.label == label;
    });
    if (it == points.end()) {
      points.push_back({r.method, label});
      it = points.end() - 1;
    }
    it->x_sum += *x;
    it->y_sum += *y;
    ++it->n;
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
  }

  constexpr double width = 640, height = 480, left = 80, right = 170, top = 40, bottom = 60;
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  if (!points.empty()) {
    x_lo = y_lo = std::numeric_limits<double>::infinity();
    x_hi = y_hi = -std::numeric_limits<double>::infinity();
    for (const Point& p : points) {
      const double x = p.x_sum / p.n, y = p.y_sum / p.n;
      x_lo = std::min(x_lo, x); x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y); y_hi = std::max(y_hi, y);
    }
  }
  const auto pad = [](double& lo, double& hi) {
    const double span = hi - lo;
    const double margin = span > 0 ? 0.08 * span : std::max(1e-3, 0.05 * std::abs(lo));
    lo -= margin;
    hi += margin;
  };
  pad(x_lo, x_hi);
  pad(y_lo, y_hi);
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  const auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  const auto sy = [&](double y) { return top + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  const auto marker = [&](std::size_t series, double cx, double cy) {
    const std::string color = colors[series % 6];
    const std::string x = detail::svg_number(cx), y = detail::svg_number(cy);
    switch (series % 4) {
      case 0: return "<circle cx=\"" + x + "\" cy=\"" + y + "\" r=\"5\" fill=\"" + color + "\"/>";
      case 1:
        return "<rect x=\"" + detail::svg_number(cx - 5) + "\" y=\"" + detail::svg_number(cy - 5) +
               "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>";
      case 2:
        return "<polygon points=\"" + x + "," + detail::svg_number(cy - 6) + " " + detail::svg_number(cx - 6) + "," +
               detail::svg_number(cy + 5) + " " + detail::svg_number(cx + 6) + "," + detail::svg_number(cy + 5) +
               "\" fill=\"" + color + "\"/>";
      default:
        return "<polygon points=\"" + x + "," + detail::svg_number(cy - 6) + " " + detail::svg_number(cx + 6) + "," +
               y + " " + x + "," + detail::svg_number(cy + 6) + " " + detail::svg_number(cx - 6) + "," + y +
               "\" fill=\"" + color + "\"/>";
    }
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">Diversity trade-off ("
      << kEmbeddingSource << ")</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x_lo + (x_hi - x_lo) * i / 4.0, fy = y_lo + (y_hi - y_lo) * i / 4.0;
    svg << "<text x=\"" << detail::svg_number(sx(fx)) << "\" y=\"" << detail::svg_number(top + plot_h + 16)
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" << format_real(fx) << "</text>\n";
    svg << "<text x=\"" << detail::svg_number(left - 6) << "\" y=\"" << detail::svg_number(sy(fy) + 3)
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << format_real(fy) << "</text>\n";
  }
  svg << "<text x=\"" << detail::svg_number(left + plot_w / 2) << "\" y=\"" << height - 16
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
      << detail::xml_escape(detail::metric_label(x_metric)) << " [" << kEmbeddingSource << "]</text>\n";
  svg << "<text transform=\"translate(18," << detail::svg_number(top + plot_h / 2)
      << ") rotate(-90)\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
      << detail::xml_escape(detail::metric_label(y_metric)) << " [" << kEmbeddingSource << "]</text>\n";

  for (std::size_t s = 0; s < methods.size(); ++s) {
    svg << "<g class=\"series\" data-method=\"" << detail::xml_escape(methods[s]) << "\">\n";
    for (const Point& p : points) {
      if (p.method != methods[s]) continue;
      const double cx = sx(p.x_sum / p.n), cy = sy(p.y_sum / p.n);
      svg << marker(s, cx, cy);
      if (!p.label.empty())
        svg << "<text x=\"" << detail::svg_number(cx + 8) << "\" y=\"" << detail::svg_number(cy - 6)
            << "\" font-family=\"sans-serif\" font-size=\"9\">" << detail::xml_escape(p.label) << "</text>";
      svg << "\n";
    }
    svg << "</g>\n";
    const double ly = top + 14 + 20.0 * static_cast<double>(s);
    svg << marker(s, width - right + 20, ly) << "<text x=\"" << detail::svg_number(width - right + 32) << "\" y=\""
        << detail::svg_number(ly + 4) << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << detail::xml_escape(methods[s]) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

inline void emit_pareto_svg(const std::vector<ResultRow>& rows, const std::string& x_metric,
                            const std::string& y_metric, const std::filesystem::path& path) {
  write_text(path, render_pareto_svg(rows, x_metric, y_metric));
}

/// Resolved config plus tool version and per-run wall-clock.
inline json manifest(const ExperimentSpec& spec, const std::string& command, const std::vector<ResultRow>& rows) {
  json timing = json::object();
  for (const ResultRow& r : rows) {
    const std::string key = r.axis.empty() ? r.method : r.method + "@" + r.axis + "=" + r.axis_value;
    timing[key] = r.wall_clock_ms;
  }
  return json{{"tool", "stride"},
              {"version", std::string(kToolVersion)},
              {"command", command},
              {"config", to_json(spec)},
              {"config_digest", config_digest(spec)},
              {"wall_clock_ms", timing}};
}

/// The shipped collapse demonstration: default generator, 32 prompts x 4 samples.
inline ExperimentSpec demo_spec() {
  ExperimentSpec spec;
  spec.metrics = {"inbsim", "vendi", "kid"};
  spec.output_dir = "stride_demo";
  return spec;
}

}  // namespace stride::experiment
