// cqre: train, query, and evaluate resource-usage density estimators for
// continuous streaming queries.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cqre/cfs.hpp"
#include "cqre/cql.hpp"
#include "cqre/dataset.hpp"
#include "cqre/features.hpp"
#include "cqre/metrics.hpp"
#include "cqre/model.hpp"
#include "cqre/synth.hpp"
#include "cqre/train.hpp"

namespace {

using nlohmann::json;
namespace data = cqre::data;
namespace mdn = cqre::mdn;
namespace metrics = cqre::metrics;
namespace query = cqre::query;

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream os;
    os << std::cin.rdbuf();
    return os.str();
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const std::size_t dot = path.rfind('.');
  const std::size_t slash = path.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

json params_to_json(const mdn::MixtureParams& p) {
  json j;
  j["alphas"] = json::array();
  j["mus"] = json::array();
  j["sigmas"] = json::array();
  for (int i = 0; i < p.components(); ++i) {
    j["alphas"].push_back(p.alphas(i));
    j["mus"].push_back(p.mus(i, 0));
    j["sigmas"].push_back(p.sigmas(i));
  }
  return j;
}

json report_to_json(const metrics::ScoreReport& r) {
  json j;
  j["crps"] = r.crps;
  j["nlpd"] = r.nlpd;
  j["mse_median"] = r.mse;
  j["rows"] = r.rows;
  return j;
}

// ---------------------------------------------------------------- train --

struct TrainFlags {
  std::string data_path;
  std::string target = "cpu";
  int mixtures = 3;
  int hidden_per_feature = 5;
  int cycles = 200;
  std::uint64_t seed = 0;
  double holdout = 0.66;
  int kfold = 0;
  bool select_features = false;
  int runs = 1;
  std::string model_out;
  std::string curve_out;
  std::string report_out;
};

struct FitOutcome {
  metrics::ScoreReport report;
  std::string stop_reason;
  int cycles = 0;
};

// One fit on a fixed split: normalizers from the training rows only,
// optional CFS restriction, training, learning curve, test scoring.
FitOutcome train_once(const data::Dataset& ds, const data::SplitPlan& plan,
                      const TrainFlags& flags, std::uint64_t seed,
                      const std::string& model_out,
                      const std::string& curve_out) {
  const data::Partitioned parts = data::materialize(ds, plan);
  data::Normalizers norm = data::fit_normalizers(parts.train);
  const data::Target target = data::parse_target(flags.target);

  Eigen::MatrixXd X = norm.apply_features(parts.train.data.features);
  Eigen::VectorXd y = norm.apply_target(
      data::target_column(parts.train.data, target), target);

  if (flags.select_features) {
    query::FeatureSelection sel = query::cfs_select(X, y);
    if (sel.selected.empty())
      throw std::runtime_error("feature selection kept no features");
    std::cerr << "selected " << sel.selected.size() << " of "
              << norm.input_dim() << " features (merit " << fmt(sel.merit)
              << ")\n";
    norm = data::restrict_features(norm, sel.selected);
    X = norm.apply_features(parts.train.data.features);
  }

  mdn::MdnConfig config;
  config.n_inputs = norm.input_dim();
  config.n_hidden = flags.hidden_per_feature * norm.input_dim();
  config.n_mixtures = flags.mixtures;
  config.target_dim = 1;
  config.train_cycles = flags.cycles;
  config.seed = seed;

  Eigen::MatrixXd T(y.size(), 1);
  T.col(0) = y;
  Eigen::MatrixXd X_test = norm.apply_features(parts.test.data.features);
  Eigen::VectorXd y_test = norm.apply_target(
      data::target_column(parts.test.data, target), target);
  Eigen::MatrixXd T_test(y_test.size(), 1);
  T_test.col(0) = y_test;

  std::vector<double> test_curve;
  mdn::CycleCallback on_cycle;
  if (!curve_out.empty()) {
    test_curve.push_back(mdn::nll_and_gradient(mdn::init_weights(config),
                                               X_test, T_test, nullptr));
    on_cycle = [&](int, const mdn::NetworkWeights& w, double) {
      test_curve.push_back(mdn::nll_and_gradient(w, X_test, T_test, nullptr));
    };
  }

  mdn::TrainResult fit = mdn::train_mdn(config, X, T, on_cycle);

  if (!curve_out.empty()) {
    std::string csv = "cycle,train_nll,test_nll\n";
    for (std::size_t c = 0; c < fit.nll_per_cycle.size(); ++c) {
      csv += std::to_string(c);
      csv += ',';
      csv += fmt(fit.nll_per_cycle[c]);
      csv += ',';
      csv += fmt(test_curve.at(c));
      csv += '\n';
    }
    write_text(curve_out, csv);
  }

  mdn::MdnModel model;
  model.config = config;
  model.weights = fit.weights;
  model.norm = norm;
  model.target = target;
  if (!model_out.empty()) mdn::save_model(model, model_out);

  FitOutcome outcome;
  outcome.report = mdn::score_on(model, parts.test.data);
  outcome.stop_reason = fit.stop_reason;
  outcome.cycles = fit.cycles;
  return outcome;
}

int run_train(const TrainFlags& flags) {
  const data::Dataset ds = data::load_traces(flags.data_path);

  if (flags.kfold > 0 && flags.runs > 1)
    throw std::runtime_error("--kfold and --runs cannot be combined");

  if (flags.kfold > 0) {
    const std::vector<data::SplitPlan> plans =
        data::split_kfold(ds.rows(), flags.kfold, flags.seed);
    json folds = json::array();
    double crps = 0.0, nlpd = 0.0, mse = 0.0;
    for (std::size_t f = 0; f < plans.size(); ++f) {
      const std::string tag = "-fold" + std::to_string(f);
      FitOutcome outcome = train_once(
          ds, plans[f], flags, flags.seed, with_suffix(flags.model_out, tag),
          flags.curve_out.empty() ? ""
                                  : with_suffix(flags.curve_out, tag));
      std::cerr << "fold " << f << ": " << outcome.stop_reason << " after "
                << outcome.cycles << " cycles\n";
      std::cout << "fold " << f << '\n'
                << metrics::render_table(outcome.report);
      folds.push_back(report_to_json(outcome.report));
      crps += outcome.report.crps;
      nlpd += outcome.report.nlpd;
      mse += outcome.report.mse;
    }
    const double n = static_cast<double>(plans.size());
    json out;
    out["format_version"] = 1;
    out["folds"] = folds;
    out["mean"] = {{"crps", crps / n}, {"nlpd", nlpd / n},
                   {"mse_median", mse / n}};
    if (!flags.report_out.empty())
      write_text(flags.report_out, out.dump(2) + "\n");
    std::cout << "kfold mean: crps " << fmt(crps / n) << " nlpd "
              << fmt(nlpd / n) << " mse_median " << fmt(mse / n) << '\n';
    return 0;
  }

  std::vector<metrics::ScoreReport> reports;
  for (int run = 0; run < flags.runs; ++run) {
    const std::uint64_t seed = flags.seed + static_cast<std::uint64_t>(run);
    const data::SplitPlan plan =
        data::split_holdout(ds.rows(), flags.holdout, seed);
    FitOutcome outcome =
        train_once(ds, plan, flags, seed,
                   run == 0 ? flags.model_out : std::string(),
                   run == 0 ? flags.curve_out : std::string());
    std::cerr << "run " << run << " (seed " << seed
              << "): " << outcome.stop_reason << " after " << outcome.cycles
              << " cycles\n";
    reports.push_back(outcome.report);
  }

  if (flags.runs == 1) {
    std::cout << metrics::render_table(reports[0]);
    if (!flags.report_out.empty()) {
      json out = report_to_json(reports[0]);
      out["format_version"] = 1;
      write_text(flags.report_out, out.dump(2) + "\n");
    }
    return 0;
  }

  // Multi-run summary: per-score mean and unbiased variance over the runs.
  auto summarize = [&](auto pick) {
    double mean = 0.0;
    for (const auto& r : reports) mean += pick(r);
    mean /= static_cast<double>(reports.size());
    double var = 0.0;
    for (const auto& r : reports) {
      const double d = pick(r) - mean;
      var += d * d;
    }
    var /= static_cast<double>(reports.size() - 1);
    return std::pair<double, double>(mean, var);
  };
  const auto [crps_m, crps_v] =
      summarize([](const metrics::ScoreReport& r) { return r.crps; });
  const auto [nlpd_m, nlpd_v] =
      summarize([](const metrics::ScoreReport& r) { return r.nlpd; });
  const auto [mse_m, mse_v] =
      summarize([](const metrics::ScoreReport& r) { return r.mse; });

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "metric        mean     variance\n"
                "crps       %12.6f %12.8f\n"
                "nlpd       %12.6f %12.8f\n"
                "mse_median %12.6f %12.8f\n"
                "runs       %12d\n",
                crps_m, crps_v, nlpd_m, nlpd_v, mse_m, mse_v, flags.runs);
  std::cout << buf;

  if (!flags.report_out.empty()) {
    json out;
    out["format_version"] = 1;
    out["runs"] = json::array();
    for (const auto& r : reports) out["runs"].push_back(report_to_json(r));
    out["mean"] = {{"crps", crps_m}, {"nlpd", nlpd_m}, {"mse_median", mse_m}};
    out["variance"] = {{"crps", crps_v},
                       {"nlpd", nlpd_v},
                       {"mse_median", mse_v}};
    write_text(flags.report_out, out.dump(2) + "\n");
  }
  return 0;
}

// -------------------------------------------------------------- predict --

struct PredictFlags {
  std::string model_path;
  std::string query_path;
  std::string row_path;
  double rate = 0.0;
  std::string out;
  std::string pdf_out;
};

Eigen::VectorXd read_feature_row(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string header, line;
  if (!std::getline(in, header))
    throw std::runtime_error(path + ": missing header");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  std::string expected;
  for (int i = 0; i < cqre::kFeatureCount; ++i) {
    if (i) expected += ',';
    expected += cqre::kFeatureNames[static_cast<std::size_t>(i)];
  }
  if (header != expected)
    throw std::runtime_error(path + ": feature names mismatch, want '" +
                             expected + "'");
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": missing data row");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  Eigen::VectorXd v(cqre::kFeatureCount);
  std::size_t start = 0;
  for (int i = 0; i < cqre::kFeatureCount; ++i) {
    std::size_t comma = line.find(',', start);
    const bool last = i == cqre::kFeatureCount - 1;
    if (last != (comma == std::string::npos))
      throw std::runtime_error(path + ": row 2: expected " +
                               std::to_string(cqre::kFeatureCount) +
                               " columns");
    const std::string field = last ? line.substr(start)
                                   : line.substr(start, comma - start);
    double value = 0.0;
    auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
      throw std::runtime_error(path + ": row 2: non-numeric field '" + field +
                               "'");
    v(i) = value;
    start = comma + 1;
  }
  return v;
}

int run_predict(const PredictFlags& flags) {
  if (flags.query_path.empty() == flags.row_path.empty())
    throw std::runtime_error("predict needs exactly one of --query, --row");

  const mdn::MdnModel model = mdn::load_model(flags.model_path);

  Eigen::VectorXd raw;
  if (!flags.query_path.empty()) {
    if (!(flags.rate > 0.0))
      throw std::runtime_error("--rate must be positive with --query");
    const query::QueryAst ast = query::parse_cql(read_text(flags.query_path));
    raw = query::extract_features(ast, flags.rate).to_vector();
  } else {
    raw = read_feature_row(flags.row_path);
  }

  const mdn::MixtureParams normalized = model.predict_normalized(raw);
  const mdn::MixtureParams raw_scale = model.predict_raw(raw);
  const mdn::MixtureMoments moments = mdn::mixture_stats(raw_scale);
  const double median = mdn::mixture_median(raw_scale);

  json out;
  out["format_version"] = 1;
  out["target"] = data::target_name(model.target);
  out["normalized"] = params_to_json(normalized);
  out["denormalized"] = params_to_json(raw_scale);
  out["mean"] = moments.mean;
  out["variance"] = moments.variance;
  out["median"] = median;
  write_text(flags.out, out.dump(2) + "\n");

  if (!flags.pdf_out.empty()) {
    const mdn::PdfGrid grid = mdn::pdf_grid(raw_scale, 512);
    std::string csv = "t,density,cdf\n";
    for (int i = 0; i < grid.t.size(); ++i) {
      csv += fmt(grid.t(i));
      csv += ',';
      csv += fmt(grid.density(i));
      csv += ',';
      csv += fmt(grid.cdf(i));
      csv += '\n';
    }
    write_text(flags.pdf_out, csv);
  }
  return 0;
}

// ------------------------------------------------------------- evaluate --

struct EvaluateFlags {
  std::string model_path;
  std::string data_path;
  std::string out;
  std::string per_sample;
};

int run_evaluate(const EvaluateFlags& flags) {
  const mdn::MdnModel model = mdn::load_model(flags.model_path);
  const data::Dataset ds = data::load_traces(flags.data_path);
  if (ds.rows() == 0)
    throw std::runtime_error(flags.data_path + ": empty test file");

  const metrics::ScoreReport report = mdn::score_on(model, ds);
  std::cout << metrics::render_table(report);
  if (!flags.out.empty()) {
    json out = report_to_json(report);
    out["format_version"] = 1;
    write_text(flags.out, out.dump(2) + "\n");
  }

  if (!flags.per_sample.empty()) {
    const std::vector<mdn::MixtureParams> preds =
        mdn::predict_all(model, ds.features);
    const Eigen::VectorXd targets = model.norm.apply_target(
        data::target_column(ds, model.target), model.target);
    std::string csv = "query_id,crps,nlpd,squared_error_median\n";
    for (int i = 0; i < ds.rows(); ++i) {
      const auto& p = preds[static_cast<std::size_t>(i)];
      Eigen::VectorXd t(1);
      t(0) = targets(i);
      const double med = mdn::mixture_median(p);
      csv += ds.ids[static_cast<std::size_t>(i)];
      csv += ',';
      csv += fmt(metrics::crps_sample(p, targets(i)));
      csv += ',';
      csv += fmt(-mdn::log_density(p, t));
      csv += ',';
      csv += fmt((med - targets(i)) * (med - targets(i)));
      csv += '\n';
    }
    write_text(flags.per_sample, csv);
  }
  return 0;
}

// ------------------------------------------------------------- features --

struct FeatureFlags {
  std::string query_path = "-";
  double rate = 0.0;
  std::string format = "json";
  std::string out;
};

int run_features(const FeatureFlags& flags) {
  const query::QueryAst ast = query::parse_cql(read_text(flags.query_path));
  const query::QueryFeatures f = query::extract_features(ast, flags.rate);
  if (flags.format == "json")
    write_text(flags.out, f.to_json() + "\n");
  else
    write_text(flags.out, f.to_csv_row() + "\n");
  return 0;
}

// ---------------------------------------------------------------- synth --

struct SynthFlags {
  std::string generator = "rate_fan";
  int n = 1000;
  std::uint64_t seed = 0;
  std::string out;
  std::string truth_out;
};

int run_synth(const SynthFlags& flags) {
  const data::SynthSpec spec =
      data::SynthSpec::defaults(flags.generator, flags.n, flags.seed);
  const data::SynthResult result = data::synth_generate(spec);
  data::save_traces(result.data, flags.out);
  const std::string truth_path = flags.truth_out.empty()
                                     ? flags.out + ".truth.json"
                                     : flags.truth_out;
  data::save_truth(result.spec, truth_path);
  std::cerr << "wrote " << result.data.rows() << " rows to " << flags.out
            << " (truth: " << truth_path << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"resource-usage density estimation for continuous queries"};
  app.require_subcommand(1);

  TrainFlags train;
  CLI::App* t = app.add_subcommand("train", "fit a density network");
  t->add_option("--data", train.data_path, "trace CSV")->required();
  t->add_option("--target", train.target, "cpu or mem")
      ->check(CLI::IsMember({"cpu", "mem"}));
  t->add_option("--mixtures", train.mixtures, "mixture components")
      ->check(CLI::PositiveNumber);
  t->add_option("--hidden-per-feature", train.hidden_per_feature,
                "hidden units per input feature")
      ->check(CLI::PositiveNumber);
  t->add_option("--cycles", train.cycles,
                "max training cycles (0 keeps the initial weights)")
      ->check(CLI::NonNegativeNumber);
  t->add_option("--seed", train.seed, "rng seed");
  t->add_option("--holdout", train.holdout, "train fraction");
  t->add_option("--kfold", train.kfold, "k-fold cross validation");
  t->add_flag("--select-features", train.select_features,
              "CFS feature selection on the training split");
  t->add_option("--runs", train.runs, "repeat train/evaluate with N seeds")
      ->check(CLI::PositiveNumber);
  t->add_option("--out", train.model_out, "model JSON path")->required();
  t->add_option("--curve", train.curve_out, "learning-curve CSV path");
  t->add_option("--report", train.report_out, "score-report JSON path");

  PredictFlags predict;
  CLI::App* p = app.add_subcommand("predict", "predict a usage density");
  p->add_option("--model", predict.model_path, "model JSON")->required();
  p->add_option("--query", predict.query_path, "query text file ('-' stdin)");
  p->add_option("--row", predict.row_path, "feature-row CSV");
  p->add_option("--rate", predict.rate, "avg arrival rate (tuples/sec)");
  p->add_option("--out", predict.out, "output JSON ('-' stdout)");
  p->add_option("--pdf-out", predict.pdf_out, "512-point pdf grid CSV");

  EvaluateFlags evaluate;
  CLI::App* e = app.add_subcommand("evaluate", "score a model on traces");
  e->add_option("--model", evaluate.model_path, "model JSON")->required();
  e->add_option("--data", evaluate.data_path, "trace CSV")->required();
  e->add_option("--out", evaluate.out, "score-report JSON path");
  e->add_option("--per-sample", evaluate.per_sample, "per-row score CSV");

  FeatureFlags features;
  CLI::App* f = app.add_subcommand("features", "extract query features");
  f->add_option("--query", features.query_path,
                "query text file ('-' stdin)");
  f->add_option("--rate", features.rate, "avg arrival rate (tuples/sec)")
      ->required();
  f->add_option("--format", features.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  f->add_option("--out", features.out, "output path ('-' stdout)");

  SynthFlags synth;
  CLI::App* s = app.add_subcommand("synth", "generate synthetic traces");
  s->add_option("--generator", synth.generator, "rate_fan or mixture3")
      ->check(CLI::IsMember({"rate_fan", "mixture3"}));
  s->add_option("--n", synth.n, "rows to generate")
      ->check(CLI::PositiveNumber);
  s->add_option("--seed", synth.seed, "rng seed");
  s->add_option("--out", synth.out, "trace CSV path")->required();
  s->add_option("--truth-out", synth.truth_out, "truth JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (t->parsed()) return run_train(train);
    if (p->parsed()) return run_predict(predict);
    if (e->parsed()) return run_evaluate(evaluate);
    if (f->parsed()) return run_features(features);
    if (s->parsed()) return run_synth(synth);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
