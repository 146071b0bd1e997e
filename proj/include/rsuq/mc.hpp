#ifndef RSUQ_MC_HPP_
#define RSUQ_MC_HPP_

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsuq/lrsuq.hpp"
#include "rsuq/rsuq.hpp"

namespace rsuq {

class InsufficientSamplesError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Smallest sample count for which a test quotes a significance level.
inline constexpr std::size_t kMinTestSamples = 1000;

enum class InputLaw { UniformBall, FixedPoint, Gaussian };

struct TrialPlan {
  std::size_t samples = 100000;
  /// Radius of the input ball, or the standard deviation for Gaussian input.
  double tau = 50.0;
  std::uint64_t seed_base = 0;
  InputLaw input_law = InputLaw::UniformBall;
  VectorXd fixed_point;
};

struct TestResult {
  std::string name;
  double statistic = 0.0;
  /// Significance level or acceptance band the statistic is judged against.
  double threshold = 0.0;
  bool pass = false;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string detail;
};

/// A quantizer driven trial by trial with its own shared seed per trial.
class TrialQuantizer {
 public:
  virtual ~TrialQuantizer() = default;
  virtual int dim() const = 0;
  virtual Description encode(const VectorXd& x, std::uint64_t seed) const = 0;
  virtual VectorXd decode(const Description& d, std::uint64_t seed) const = 0;
  /// Per-dither acceptance probability; K ~ Geom of this.
  virtual double acceptance_probability() const = 0;
  /// Volume of the error law's support in bits, when uniform.
  virtual double log2_error_volume() const = 0;
};

class RsuqTrial final : public TrialQuantizer {
 public:
  RsuqTrial(Lattice lat, double radius);
  int dim() const override { return cfg_.dim(); }
  Description encode(const VectorXd& x, std::uint64_t seed) const override;
  VectorXd decode(const Description& d, std::uint64_t seed) const override;
  double acceptance_probability() const override { return cfg_.acceptance_probability(); }
  double log2_error_volume() const override;
  const RsuqConfig& config() const { return cfg_; }

 private:
  RsuqConfig cfg_;
};

class LrsuqTrial final : public TrialQuantizer {
 public:
  explicit LrsuqTrial(Lattice lat);
  int dim() const override { return lat_.dim(); }
  Description encode(const VectorXd& x, std::uint64_t seed) const override;
  VectorXd decode(const Description& d, std::uint64_t seed) const override;
  double acceptance_probability() const override;
  double log2_error_volume() const override;
  const Lattice& lattice() const { return lat_; }
  const GaussianNoise& noise() const { return noise_; }

 private:
  Lattice lat_;
  GaussianNoise noise_;
};

/// Seed used for trial i of a plan.
std::uint64_t trial_seed(std::uint64_t seed_base, std::size_t trial);

/// Input vector of trial i, a pure function of (plan, n, i).
VectorXd sample_input(const TrialPlan& plan, int n, std::size_t trial);

struct TrialRecord {
  Eigen::MatrixXd inputs;  // n × samples
  Eigen::MatrixXd errors;  // n × samples
  std::vector<Description> descriptions;
};

TrialRecord run_trials(const TrialQuantizer& q, const TrialPlan& plan);

/// Plug-in entropy in bits of empirical counts.
double plugin_entropy(const std::vector<std::size_t>& counts);
double plugin_entropy_of_indices(const std::vector<Description>& descriptions);
double plugin_entropy_of_points(const std::vector<Description>& descriptions);

struct RateEstimate {
  double entropy_k;
  double entropy_m;
  /// Mean Golomb + fixed-width code length per vector.
  double mean_code_length;
  /// log2 of the input-support volume (uniform-ball plans).
  double log2_support_volume;
  /// H(K) + H(M) - log vol(support): estimate of the normalized entropy.
  double normalized() const { return entropy_k + entropy_m - log2_support_volume; }
};

RateEstimate estimate_rate(const TrialQuantizer& q, const TrialPlan& plan);
RateEstimate estimate_rate(const TrialQuantizer& q, const TrialPlan& plan, const TrialRecord& record);

/// Radial KS of U = (||Z||/r)^n against Unif[0,1] plus a 3-sigma band on
/// each coordinate mean.
TestResult test_uniform_ball(const Eigen::MatrixXd& errors, double r, double alpha = 0.01);

/// Per-coordinate KS against the standard normal, max |cov - I| below
/// cov_tol, and KS of ||Z||^2 against chi^2_n.
TestResult test_gaussian(const Eigen::MatrixXd& errors, double alpha = 0.01, double cov_tol = 0.02);

/// Max |corr(x_i, z_j)| below 4/sqrt(N), plus two-sample KS of z_0 and ||z||
/// between inputs above and below the median first coordinate. Passes
/// vacuously when the inputs do not vary.
TestResult test_independence(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& errors, double alpha = 0.01);

/// Two-sample KS statistic and asymptotic p-value.
TestResult two_sample_ks(std::vector<double> a, std::vector<double> b, double alpha = 0.01);

/// One-sample KS against a continuous CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf);

double estimate_mse(const TrialQuantizer& q, const TrialPlan& plan);

struct KDistribution {
  TestResult test;
  double mean_k;
};

/// Chi-square fit of K against Geom(p) on the mass points 1..10 with the
/// tail pooled; cells with expected count below 5 merge into the tail.
KDistribution estimate_k_distribution(const TrialQuantizer& q, const TrialPlan& plan);
KDistribution k_distribution_test(const std::vector<Description>& descriptions, double p, double alpha = 0.01);

/// CSV rows "test,statistic,threshold,verdict,samples,seed".
void write_results_csv(std::ostream& out, const std::vector<TestResult>& results);

template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace rsuq

#endif  // RSUQ_MC_HPP_
