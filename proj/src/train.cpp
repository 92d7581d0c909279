#include "cqre/train.hpp"

#include <sstream>
#include <stdexcept>

#include "cqre/scg.hpp"

namespace cqre::mdn {
namespace {

std::string norm_diagnostic(const NetworkWeights& w) {
  std::ostringstream os;
  os << "|hidden_w|=" << w.hidden_w.norm() << " |hidden_b|=" << w.hidden_b.norm()
     << " |output_w|=" << w.output_w.norm()
     << " |output_b|=" << w.output_b.norm();
  return os.str();
}

}  // namespace

TrainResult train_mdn(const MdnConfig& config, const Eigen::MatrixXd& X,
                      const Eigen::MatrixXd& T, const CycleCallback& on_cycle) {
  config.validate();
  if (X.rows() == 0) throw std::invalid_argument("train_mdn: no training rows");
  if (X.cols() != config.n_inputs)
    throw std::invalid_argument("train_mdn: X width != n_inputs");
  if (T.rows() != X.rows())
    throw std::invalid_argument("train_mdn: X and T row counts differ");
  if (T.cols() != config.target_dim)
    throw std::invalid_argument("train_mdn: T width != target_dim");

  NetworkWeights w0 = init_weights(config);

  ScgObjective objective = [&](const Eigen::VectorXd& flat,
                               Eigen::VectorXd& grad_out) {
    NetworkWeights w = NetworkWeights::unflatten(flat, config);
    NetworkWeights grad = NetworkWeights::zeros(config);
    double nll = nll_and_gradient(w, X, T, &grad);
    grad_out = grad.flatten();
    return nll;
  };

  ScgOptions options;
  options.max_cycles = config.train_cycles;
  if (on_cycle)
    options.on_cycle = [&](int cycle, const Eigen::VectorXd& x, double f) {
      on_cycle(cycle, NetworkWeights::unflatten(x, config), f);
    };

  ScgResult fit = scg_minimize(objective, w0.flatten(), options);

  if (fit.stop_reason == "non-finite objective" ||
      fit.stop_reason == "non-finite gradient") {
    NetworkWeights at = NetworkWeights::unflatten(fit.x, config);
    std::ostringstream os;
    os << "train_mdn: " << fit.stop_reason << " at cycle " << fit.cycles
       << " (" << norm_diagnostic(at) << ")";
    throw std::runtime_error(os.str());
  }

  TrainResult result;
  result.weights = NetworkWeights::unflatten(fit.x, config);
  result.nll_per_cycle = std::move(fit.f_per_cycle);
  result.final_nll = fit.f;
  result.cycles = fit.cycles;
  result.stop_reason = std::move(fit.stop_reason);
  return result;
}

}  // namespace cqre::mdn
