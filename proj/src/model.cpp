#include "cqre/model.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace cqre::mdn {
namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw std::runtime_error(std::string("model file: bad matrix for ") +
                             what);
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<int>(row.size()) != cols)
      throw std::runtime_error(std::string("model file: ragged matrix for ") +
                               what);
    for (int k = 0; k < cols; ++k)
      m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j, const char* what) {
  if (!j.is_array())
    throw std::runtime_error(std::string("model file: bad vector for ") +
                             what);
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i)
    v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

}  // namespace

MixtureParams MdnModel::predict_normalized(
    const Eigen::VectorXd& raw_features) const {
  Eigen::VectorXd x = norm.apply_features_row(raw_features);
  Eigen::VectorXd z = mlp_forward(weights, x);
  return activate(z, config.n_mixtures, config.target_dim);
}

MixtureParams MdnModel::predict_raw(const Eigen::VectorXd& raw_features) const {
  return denormalize(predict_normalized(raw_features),
                     norm.target_scaler(target));
}

MixtureParams denormalize(const MixtureParams& params,
                          const data::MinMax& scaler) {
  if (params.target_dim() != 1)
    throw std::invalid_argument(
        "denormalize: only scalar-target mixtures can be rescaled");
  MixtureParams out = params;
  const double s = scaler.scale();
  for (int i = 0; i < params.components(); ++i)
    out.mus(i, 0) = scaler.invert(params.mus(i, 0));
  out.sigmas = params.sigmas * s;
  return out;
}

std::vector<MixtureParams> predict_all(const MdnModel& model,
                                       const Eigen::MatrixXd& raw_features) {
  std::vector<MixtureParams> preds;
  preds.reserve(static_cast<std::size_t>(raw_features.rows()));
  for (int i = 0; i < raw_features.rows(); ++i)
    preds.push_back(model.predict_normalized(raw_features.row(i).transpose()));
  return preds;
}

metrics::ScoreReport score_on(const MdnModel& model,
                              const data::Dataset& test) {
  if (test.rows() == 0)
    throw std::invalid_argument("score_on: empty test set");
  const std::vector<MixtureParams> preds = predict_all(model, test.features);
  const Eigen::VectorXd targets = model.norm.apply_target(
      data::target_column(test, model.target), model.target);
  return metrics::score_all(preds, targets);
}

void save_model(const MdnModel& model, const std::string& path) {
  json j;
  j["format_version"] = MdnModel::kFormatVersion;
  j["target"] = data::target_name(model.target);

  j["config"]["n_inputs"] = model.config.n_inputs;
  j["config"]["n_hidden"] = model.config.n_hidden;
  j["config"]["n_mixtures"] = model.config.n_mixtures;
  j["config"]["target_dim"] = model.config.target_dim;
  j["config"]["train_cycles"] = model.config.train_cycles;
  j["config"]["seed"] = model.config.seed;

  j["weights"]["hidden_w"] = matrix_to_json(model.weights.hidden_w);
  j["weights"]["hidden_b"] = vector_to_json(model.weights.hidden_b);
  j["weights"]["output_w"] = matrix_to_json(model.weights.output_w);
  j["weights"]["output_b"] = vector_to_json(model.weights.output_b);

  j["normalizers"]["feature_columns"] = model.norm.feature_columns;
  j["normalizers"]["dropped_features"] = model.norm.dropped_features;
  j["normalizers"]["mean"] = vector_to_json(model.norm.feature_scaler.mean);
  j["normalizers"]["stddev"] =
      vector_to_json(model.norm.feature_scaler.stddev);
  for (data::Target t : {data::Target::cpu, data::Target::mem}) {
    const data::MinMax& mm = model.norm.target_scaler(t);
    json& dst = j["normalizers"][data::target_name(t)];
    dst["in_min"] = mm.in_min;
    dst["in_max"] = mm.in_max;
    dst["out_lo"] = mm.out_lo;
    dst["out_hi"] = mm.out_hi;
  }

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

MdnModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("model file " + path + ": " + e.what());
  }

  int version = j.at("format_version").get<int>();
  if (version != MdnModel::kFormatVersion)
    throw std::runtime_error("model file " + path +
                             ": unsupported format_version " +
                             std::to_string(version));

  MdnModel model;
  model.target = data::parse_target(j.at("target").get<std::string>());

  const json& cfg = j.at("config");
  model.config.n_inputs = cfg.at("n_inputs").get<int>();
  model.config.n_hidden = cfg.at("n_hidden").get<int>();
  model.config.n_mixtures = cfg.at("n_mixtures").get<int>();
  model.config.target_dim = cfg.at("target_dim").get<int>();
  model.config.train_cycles = cfg.at("train_cycles").get<int>();
  model.config.seed = cfg.at("seed").get<std::uint64_t>();
  model.config.validate();

  const json& w = j.at("weights");
  model.weights.hidden_w = matrix_from_json(w.at("hidden_w"), "hidden_w");
  model.weights.hidden_b = vector_from_json(w.at("hidden_b"), "hidden_b");
  model.weights.output_w = matrix_from_json(w.at("output_w"), "output_w");
  model.weights.output_b = vector_from_json(w.at("output_b"), "output_b");
  if (model.weights.hidden_w.rows() != model.config.n_hidden ||
      model.weights.hidden_w.cols() != model.config.n_inputs ||
      model.weights.output_w.rows() != model.config.output_width() ||
      model.weights.output_w.cols() != model.config.n_hidden ||
      model.weights.hidden_b.size() != model.config.n_hidden ||
      model.weights.output_b.size() != model.config.output_width())
    throw std::runtime_error("model file " + path +
                             ": weight shapes disagree with config");

  const json& n = j.at("normalizers");
  model.norm.feature_columns = n.at("feature_columns").get<std::vector<int>>();
  model.norm.dropped_features =
      n.at("dropped_features").get<std::vector<std::string>>();
  model.norm.feature_scaler.mean = vector_from_json(n.at("mean"), "mean");
  model.norm.feature_scaler.stddev =
      vector_from_json(n.at("stddev"), "stddev");
  if (model.norm.feature_scaler.mean.size() != model.config.n_inputs ||
      model.norm.feature_scaler.stddev.size() != model.config.n_inputs ||
      static_cast<int>(model.norm.feature_columns.size()) !=
          model.config.n_inputs)
    throw std::runtime_error("model file " + path +
                             ": normalizer width disagrees with config");
  for (data::Target t : {data::Target::cpu, data::Target::mem}) {
    const json& src = n.at(data::target_name(t));
    data::MinMax mm;
    mm.in_min = src.at("in_min").get<double>();
    mm.in_max = src.at("in_max").get<double>();
    mm.out_lo = src.at("out_lo").get<double>();
    mm.out_hi = src.at("out_hi").get<double>();
    if (t == data::Target::cpu)
      model.norm.cpu_scaler = mm;
    else
      model.norm.mem_scaler = mm;
  }
  if (!model.weights.all_finite())
    throw std::runtime_error("model file " + path +
                             ": non-finite weight values");
  return model;
}

}  // namespace cqre::mdn
