#include "cqre/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "cqre/rng.hpp"
#include "cqre/schema.hpp"

namespace cqre::data {
namespace {

using nlohmann::json;

bool generator_known(const std::string& g) {
  return g == "rate_fan" || g == "mixture3";
}

double rate_to_u(double rate) {
  return (rate - kSynthRateMin) / (kSynthRateMax - kSynthRateMin);
}

double project_to_u(double project_size) {
  return (project_size - kSynthProjectMin) /
         static_cast<double>(kSynthProjectMax - kSynthProjectMin);
}

// Inactive columns get fixed plausible values; the normalizer drops them
// as constants, which is intended.
Eigen::VectorXd base_feature_row() {
  Eigen::VectorXd row(kFeatureCount);
  row.setZero();
  row(feature_index("avg_arrival_rate")) = kSynthRateMin;
  row(feature_index("stream_no")) = 1;
  row(feature_index("subquery_no")) = 0;
  row(feature_index("agg_func_no")) = 1;
  row(feature_index("join_predicate")) = 0;
  row(feature_index("project_size")) = 2;
  row(feature_index("equ_select_predicate")) = 1;
  row(feature_index("inequ_select_predicate")) = 0;
  row(feature_index("agg_column_no")) = 1;
  row(feature_index("opt_window")) = 1;
  row(feature_index("opt_filter")) = 1;
  row(feature_index("opt_project")) = 1;
  row(feature_index("opt_join")) = 0;
  row(feature_index("opt_aggregate")) = 1;
  row(feature_index("opt_distinct")) = 0;
  row(feature_index("win_type_size")) = 30;
  row(feature_index("win_type_slide")) = 30;
  return row;
}

json fn_to_json(const ComponentFn& fn) {
  return json{{"c0", fn.c0}, {"c1", fn.c1}, {"c2", fn.c2}};
}

ComponentFn fn_from_json(const json& j) {
  ComponentFn fn;
  fn.c0 = j.at("c0").get<double>();
  fn.c1 = j.at("c1").get<double>();
  fn.c2 = j.at("c2").get<double>();
  return fn;
}

json fns_to_json(const std::array<ComponentFn, 3>& fns) {
  json out = json::array();
  for (const auto& fn : fns) out.push_back(fn_to_json(fn));
  return out;
}

std::array<ComponentFn, 3> fns_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw std::runtime_error(std::string("truth file: expected 3 entries for ") +
                             what);
  std::array<ComponentFn, 3> fns;
  for (std::size_t i = 0; i < 3; ++i) fns[i] = fn_from_json(j.at(i));
  return fns;
}

}  // namespace

SynthSpec SynthSpec::defaults(const std::string& generator, int n_samples,
                              std::uint64_t seed) {
  SynthSpec spec;
  spec.generator = generator;
  spec.n_samples = n_samples;
  spec.seed = seed;
  if (generator == "rate_fan") {
    // Two modes sit close together and the third pulls away as the rate
    // grows, so a single Gaussian fit degrades visibly at high rates.
    spec.weight = {ComponentFn{0.33, -0.03, 0.0}, ComponentFn{0.27, -0.02, 0.0},
                   ComponentFn{0.40, 0.05, 0.0}};
    spec.mean = {ComponentFn{0.15, 0.05, 0.0}, ComponentFn{0.25, 0.08, 0.0},
                 ComponentFn{0.58, 0.30, 0.0}};
    spec.spread = {ComponentFn{0.015, 0.005, 0.0},
                   ComponentFn{0.015, 0.005, 0.0},
                   ComponentFn{0.018, 0.002, 0.0}};
  } else if (generator == "mixture3") {
    spec.weight = {ComponentFn{0.40, -0.15, 0.05},
                   ComponentFn{0.35, 0.05, -0.15},
                   ComponentFn{0.25, 0.10, 0.10}};
    spec.mean = {ComponentFn{0.20, 0.10, 0.0},
                 ComponentFn{0.45, -0.05, 0.10},
                 ComponentFn{0.60, 0.15, 0.10}};
    spec.spread = {ComponentFn{0.020, 0.0, 0.0}, ComponentFn{0.025, 0.0, 0.0},
                   ComponentFn{0.020, 0.0, 0.0}};
  } else {
    throw std::invalid_argument("unknown synth generator '" + generator + "'");
  }
  spec.validate();
  return spec;
}

void SynthSpec::validate() const {
  if (!generator_known(generator))
    throw std::invalid_argument("unknown synth generator '" + generator + "'");
  if (n_samples < 1)
    throw std::invalid_argument("synth spec: n_samples must be >= 1");
  // Probe the corners of the (u1, u2) box.
  for (double u1 : {0.0, 1.0}) {
    for (double u2 : {0.0, 1.0}) {
      double wsum = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double w = weight[static_cast<std::size_t>(i)].at(u1, u2);
        const double s = spread[static_cast<std::size_t>(i)].at(u1, u2);
        if (w <= 0.0)
          throw std::invalid_argument(
              "synth spec: component weight not positive over the input box");
        if (s <= 0.0)
          throw std::invalid_argument(
              "synth spec: component spread not positive over the input box");
        wsum += w;
      }
      if (std::abs(wsum - 1.0) > 1e-9)
        throw std::invalid_argument(
            "synth spec: component weights must sum to 1 over the input box");
    }
  }
}

SynthTruth::SynthTruth(SynthSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
}

mdn::MixtureParams SynthTruth::at_u(double u1, double u2) const {
  mdn::MixtureParams params;
  params.alphas.resize(3);
  params.mus.resize(3, 1);
  params.sigmas.resize(3);
  for (int i = 0; i < 3; ++i) {
    const auto k = static_cast<std::size_t>(i);
    params.alphas(i) = spec_.weight[k].at(u1, u2);
    params.mus(i, 0) = spec_.mean[k].at(u1, u2);
    params.sigmas(i) = spec_.spread[k].at(u1, u2);
  }
  params.alphas /= params.alphas.sum();
  return params;
}

mdn::MixtureParams SynthTruth::at_features(
    const Eigen::VectorXd& raw_row) const {
  if (raw_row.size() != kFeatureCount)
    throw std::invalid_argument("SynthTruth: expected full feature row");
  const double u1 = rate_to_u(raw_row(feature_index("avg_arrival_rate")));
  const double u2 = spec_.generator == "mixture3"
                        ? project_to_u(raw_row(feature_index("project_size")))
                        : 0.0;
  return at_u(u1, u2);
}

SynthResult synth_generate(const SynthSpec& spec) {
  spec.validate();
  SynthTruth truth(spec);
  Rng rng(spec.seed);

  const int rate_col = feature_index("avg_arrival_rate");
  const int project_col = feature_index("project_size");
  const Eigen::VectorXd base = base_feature_row();

  Dataset ds;
  ds.ids.reserve(static_cast<std::size_t>(spec.n_samples));
  ds.features.resize(spec.n_samples, kFeatureCount);
  ds.targets.resize(spec.n_samples, 2);

  for (int i = 0; i < spec.n_samples; ++i) {
    Eigen::VectorXd row = base;
    const double rate = rng.uniform(kSynthRateMin, kSynthRateMax);
    row(rate_col) = rate;
    double u2 = 0.0;
    if (spec.generator == "mixture3") {
      const int project =
          kSynthProjectMin +
          static_cast<int>(rng.index(kSynthProjectMax - kSynthProjectMin + 1));
      row(project_col) = project;
      u2 = project_to_u(project);
    }
    const double u1 = rate_to_u(rate);
    const mdn::MixtureParams params = truth.at_u(u1, u2);

    double cpu = -1.0;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      double r = rng.uniform01();
      int comp = 0;
      double acc = 0.0;
      for (int c = 0; c < 3; ++c) {
        acc += params.alphas(c);
        comp = c;
        if (r <= acc) break;
      }
      const double draw =
          rng.normal(params.mus(comp, 0), params.sigmas(comp));
      if (draw >= 0.0 && draw <= 1.0) {
        cpu = draw;
        break;
      }
    }
    if (cpu < 0.0)
      throw std::runtime_error(
          "synth_generate: rejection sampling failed; spec places mass "
          "outside [0, 1]");

    double mem = -1.0;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const double draw = rng.normal(0.05 + 0.15 * u1, 0.01);
      if (draw >= 0.0 && draw <= 1.0) {
        mem = draw;
        break;
      }
    }
    if (mem < 0.0)
      throw std::runtime_error("synth_generate: memory fill failed");

    char id[48];
    std::snprintf(id, sizeof(id), "%s-%06d", spec.generator.c_str(), i);
    ds.ids.emplace_back(id);
    ds.features.row(i) = row;
    ds.targets(i, 0) = cpu;
    ds.targets(i, 1) = mem;
  }
  return SynthResult{std::move(ds), spec};
}

void save_truth(const SynthSpec& spec, const std::string& path) {
  json j;
  j["format_version"] = 1;
  j["generator"] = spec.generator;
  j["n_samples"] = spec.n_samples;
  j["seed"] = spec.seed;
  j["weight"] = fns_to_json(spec.weight);
  j["mean"] = fns_to_json(spec.mean);
  j["spread"] = fns_to_json(spec.spread);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write truth file: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

SynthSpec load_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open truth file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("truth file " + path + ": " + e.what());
  }
  if (j.at("format_version").get<int>() != 1)
    throw std::runtime_error("truth file " + path +
                             ": unsupported format_version");
  SynthSpec spec;
  spec.generator = j.at("generator").get<std::string>();
  spec.n_samples = j.at("n_samples").get<int>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.weight = fns_from_json(j.at("weight"), "weight");
  spec.mean = fns_from_json(j.at("mean"), "mean");
  spec.spread = fns_from_json(j.at("spread"), "spread");
  spec.validate();
  return spec;
}

}  // namespace cqre::data
