#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "cqre/dataset.hpp"
#include "cqre/mixture.hpp"

namespace cqre::data {

// One mixture-component parameter as an affine function of the generator's
// normalized inputs u1, u2 (each in [0, 1]).
struct ComponentFn {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;

  double at(double u1, double u2) const { return c0 + c1 * u1 + c2 * u2; }
};

// Ground-truth conditional mixture for synthetic workload traces. Two
// generator kinds:
//   rate_fan  - one active input (avg_arrival_rate); the target's modes
//               fan out and widen as the rate grows.
//   mixture3  - two active inputs (avg_arrival_rate, project_size) driving
//               a smooth 3-component mixture.
// Defaults are committed constants chosen so every component stays at
// least five spreads inside [0, 1]; they are the acceptance oracle.
struct SynthSpec {
  std::string generator = "rate_fan";
  int n_samples = 1000;
  std::uint64_t seed = 0;
  std::array<ComponentFn, 3> weight;
  std::array<ComponentFn, 3> mean;
  std::array<ComponentFn, 3> spread;

  static SynthSpec defaults(const std::string& generator, int n_samples,
                            std::uint64_t seed);
  void validate() const;
};

inline constexpr double kSynthRateMin = 100.0;
inline constexpr double kSynthRateMax = 10000.0;
inline constexpr int kSynthProjectMin = 1;
inline constexpr int kSynthProjectMax = 10;

// Exact conditional density evaluator for oracle scoring.
class SynthTruth {
 public:
  explicit SynthTruth(SynthSpec spec);

  mdn::MixtureParams at_u(double u1, double u2) const;
  // Reads the active inputs out of a full raw feature row.
  mdn::MixtureParams at_features(const Eigen::VectorXd& raw_row) const;

  const SynthSpec& spec() const { return spec_; }

 private:
  SynthSpec spec_;
};

struct SynthResult {
  Dataset data;
  SynthSpec spec;
};

SynthResult synth_generate(const SynthSpec& spec);

void save_truth(const SynthSpec& spec, const std::string& path);
SynthSpec load_truth(const std::string& path);

}  // namespace cqre::data
