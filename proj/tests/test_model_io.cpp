#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "json.hpp"

#include "cqre/dataset.hpp"
#include "cqre/model.hpp"
#include "cqre/synth.hpp"

using namespace cqre;
using namespace cqre::mdn;

namespace {

// A deterministic model over a synthetic trace set. Only the arrival rate
// varies in rate_fan traces, so 16 of the 17 columns get dropped and the
// fitted input width is 1: the round trip has to carry that bookkeeping.
MdnModel make_model() {
  data::SynthSpec spec = data::SynthSpec::defaults("rate_fan", 80, 3);
  data::Dataset ds = synth_generate(spec).data;
  data::Partitioned parts =
      data::materialize(ds, data::split_holdout(ds.rows(), 0.7, 1));

  MdnModel model;
  model.norm = data::fit_normalizers(parts.train, /*warn=*/false);
  model.target = data::Target::cpu;
  model.config.n_inputs = model.norm.input_dim();
  model.config.n_hidden = 5;
  model.config.n_mixtures = 2;
  model.config.target_dim = 1;
  model.config.train_cycles = 33;
  model.config.seed = 9;
  model.weights = init_weights(model.config);
  return model;
}

}  // namespace

TEST_CASE("model files round-trip exactly") {
  MdnModel model = make_model();
  save_model(model, "tmp_model.json");
  MdnModel back = load_model("tmp_model.json");

  CHECK(back.target == model.target);
  CHECK(back.config.n_inputs == model.config.n_inputs);
  CHECK(back.config.n_hidden == model.config.n_hidden);
  CHECK(back.config.n_mixtures == model.config.n_mixtures);
  CHECK(back.config.target_dim == model.config.target_dim);
  CHECK(back.config.train_cycles == model.config.train_cycles);
  CHECK(back.config.seed == model.config.seed);

  CHECK((back.weights.flatten() - model.weights.flatten())
            .cwiseAbs()
            .maxCoeff() == 0.0);

  CHECK(back.norm.feature_columns == model.norm.feature_columns);
  CHECK(back.norm.dropped_features == model.norm.dropped_features);
  CHECK((back.norm.feature_scaler.mean - model.norm.feature_scaler.mean)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((back.norm.feature_scaler.stddev - model.norm.feature_scaler.stddev)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK(back.norm.cpu_scaler.in_min == model.norm.cpu_scaler.in_min);
  CHECK(back.norm.cpu_scaler.in_max == model.norm.cpu_scaler.in_max);
  CHECK(back.norm.mem_scaler.in_min == model.norm.mem_scaler.in_min);
  CHECK(back.norm.mem_scaler.in_max == model.norm.mem_scaler.in_max);

  // Same predictions bit for bit.
  Eigen::VectorXd row(kFeatureCount);
  row.setConstant(1.0);
  row(feature_index("avg_arrival_rate")) = 4321.0;
  MixtureParams a = model.predict_normalized(row);
  MixtureParams b = back.predict_normalized(row);
  CHECK((a.alphas - b.alphas).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.mus - b.mus).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.sigmas - b.sigmas).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("denormalize is the affine image of the fitted band") {
  MixtureParams params;
  params.alphas.resize(2);
  params.alphas << 0.4, 0.6;
  params.mus.resize(2, 1);
  params.mus << 0.3, 0.7;
  params.sigmas.resize(2);
  params.sigmas << 0.05, 0.1;

  data::MinMax sc;
  sc.in_min = 0.2;
  sc.in_max = 0.9;
  MixtureParams raw = denormalize(params, sc);

  const double s = sc.scale();
  CHECK(s == doctest::Approx(0.875).epsilon(1e-15));
  for (int i = 0; i < 2; ++i) {
    CHECK(raw.mus(i, 0) ==
          doctest::Approx(sc.invert(params.mus(i, 0))).epsilon(1e-15));
    CHECK(raw.sigmas(i) ==
          doctest::Approx(params.sigmas(i) * s).epsilon(1e-15));
  }
  CHECK((raw.alphas - params.alphas).cwiseAbs().maxCoeff() == 0.0);

  // Moments transform affinely.
  MixtureMoments mn = mixture_stats(params);
  MixtureMoments mr = mixture_stats(raw);
  CHECK(mr.mean == doctest::Approx(sc.invert(mn.mean)).epsilon(1e-12));
  CHECK(mr.variance == doctest::Approx(mn.variance * s * s).epsilon(1e-12));

  // Densities obey the change of variables p_raw(y) = p_norm(F(y)) / s.
  for (double y : {0.35, 0.5, 0.81}) {
    CHECK(density(raw, y) ==
          doctest::Approx(density(params, sc.apply(y)) / s).epsilon(1e-12));
  }

  MixtureParams wide = params;
  wide.mus.resize(2, 2);
  CHECK_THROWS_AS((void)denormalize(wide, sc), std::invalid_argument);
}

TEST_CASE("predict_raw denormalizes predict_normalized") {
  MdnModel model = make_model();
  Eigen::VectorXd row(kFeatureCount);
  row.setConstant(1.0);
  row(feature_index("avg_arrival_rate")) = 2500.0;
  MixtureParams norm = model.predict_normalized(row);
  MixtureParams raw = model.predict_raw(row);
  MixtureParams expect = denormalize(norm, model.norm.cpu_scaler);
  CHECK((raw.mus - expect.mus).cwiseAbs().maxCoeff() == 0.0);
  CHECK((raw.sigmas - expect.sigmas).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("predict_all matches row-by-row prediction") {
  MdnModel model = make_model();
  data::Dataset ds =
      synth_generate(data::SynthSpec::defaults("rate_fan", 12, 8)).data;
  std::vector<MixtureParams> all = predict_all(model, ds.features);
  REQUIRE(all.size() == 12);
  for (int i = 0; i < 12; ++i) {
    MixtureParams one =
        model.predict_normalized(ds.features.row(i).transpose());
    CHECK((all[static_cast<std::size_t>(i)].mus - one.mus)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("score_on scores the normalized band") {
  MdnModel model = make_model();
  data::Dataset ds =
      synth_generate(data::SynthSpec::defaults("rate_fan", 25, 4)).data;
  metrics::ScoreReport rep = score_on(model, ds);
  CHECK(rep.rows == 25);
  CHECK(std::isfinite(rep.crps));
  CHECK(std::isfinite(rep.nlpd));
  CHECK(std::isfinite(rep.mse));

  std::vector<MixtureParams> preds = predict_all(model, ds.features);
  Eigen::VectorXd t = model.norm.apply_target(
      data::target_column(ds, data::Target::cpu), data::Target::cpu);
  metrics::ScoreReport manual = metrics::score_all(preds, t);
  CHECK(rep.crps == manual.crps);
  CHECK(rep.nlpd == manual.nlpd);
  CHECK(rep.mse == manual.mse);

  data::Dataset empty;
  empty.features.resize(0, kFeatureCount);
  empty.targets.resize(0, 2);
  CHECK_THROWS_AS((void)score_on(model, empty), std::invalid_argument);
}

TEST_CASE("foreign or future model files are refused") {
  MdnModel model = make_model();
  save_model(model, "tmp_model_v.json");

  nlohmann::json j;
  {
    std::ifstream in("tmp_model_v.json");
    in >> j;
  }

  nlohmann::json bumped = j;
  bumped["format_version"] = 2;
  {
    std::ofstream out("tmp_model_v2.json");
    out << bumped.dump(2);
  }
  CHECK_THROWS_WITH_AS((void)load_model("tmp_model_v2.json"),
                       doctest::Contains("format_version"),
                       std::runtime_error);

  nlohmann::json reshaped = j;
  reshaped["config"]["n_hidden"] = 6;
  {
    std::ofstream out("tmp_model_shape.json");
    out << reshaped.dump(2);
  }
  CHECK_THROWS_WITH_AS((void)load_model("tmp_model_shape.json"),
                       doctest::Contains("shapes disagree"),
                       std::runtime_error);

  nlohmann::json widened = j;
  widened["normalizers"]["mean"].push_back(0.0);
  widened["normalizers"]["stddev"].push_back(1.0);
  widened["normalizers"]["feature_columns"].push_back(3);
  {
    std::ofstream out("tmp_model_norm.json");
    out << widened.dump(2);
  }
  CHECK_THROWS_WITH_AS((void)load_model("tmp_model_norm.json"),
                       doctest::Contains("normalizer width"),
                       std::runtime_error);

  {
    std::ofstream out("tmp_model_garbage.json");
    out << "{definitely not json";
  }
  CHECK_THROWS_AS((void)load_model("tmp_model_garbage.json"),
                  std::runtime_error);
  CHECK_THROWS_WITH_AS((void)load_model("tmp_model_missing.json"),
                       doctest::Contains("cannot open"), std::runtime_error);
}

TEST_CASE("a model with non-finite weights cannot be reloaded") {
  MdnModel model = make_model();
  model.weights.hidden_b(0) = std::numeric_limits<double>::quiet_NaN();
  save_model(model, "tmp_model_nan.json");
  CHECK_THROWS((void)load_model("tmp_model_nan.json"));
}
