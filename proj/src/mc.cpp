#include "rsuq/mc.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "rsuq/bounds.hpp"
#include "rsuq/coding.hpp"
#include "rsuq/philox.hpp"
#include "rsuq/special_functions.hpp"

namespace rsuq {

namespace {

void require_samples(std::size_t n, const char* what) {
  if (n < kMinTestSamples) {
    throw InsufficientSamplesError(std::string(what) + ": need at least " + std::to_string(kMinTestSamples) +
                                   " samples, got " + std::to_string(n));
  }
}

std::string describe(double v) { return format_double(v); }

}  // namespace

RsuqTrial::RsuqTrial(Lattice lat, double radius) : cfg_(RsuqConfig::ball(std::move(lat), radius, 0)) {}

Description RsuqTrial::encode(const VectorXd& x, std::uint64_t seed) const {
  RsuqConfig cfg = cfg_;
  cfg.seed = seed;
  return rsuq_encode(cfg, x);
}

VectorXd RsuqTrial::decode(const Description& d, std::uint64_t seed) const {
  RsuqConfig cfg = cfg_;
  cfg.seed = seed;
  return rsuq_decode(cfg, d);
}

double RsuqTrial::log2_error_volume() const {
  return log2_unit_ball_volume(dim()) + dim() * std::log2(cfg_.radius);
}

LrsuqTrial::LrsuqTrial(Lattice lat) : lat_(std::move(lat)), noise_(lat_.dim()) {}

Description LrsuqTrial::encode(const VectorXd& x, std::uint64_t seed) const {
  return lrsuq_encode(noise_, lat_, seed, x);
}

VectorXd LrsuqTrial::decode(const Description& d, std::uint64_t seed) const {
  return lrsuq_decode(noise_, lat_, seed, d);
}

double LrsuqTrial::acceptance_probability() const { return std::min(1.0, packing_density(lat_)); }

double LrsuqTrial::log2_error_volume() const {
  throw std::logic_error("Gaussian error law has no uniform support volume");
}

std::uint64_t trial_seed(std::uint64_t seed_base, std::size_t trial) { return mix_seed(seed_base, trial); }

VectorXd sample_input(const TrialPlan& plan, int n, std::size_t trial) {
  if (plan.input_law == InputLaw::FixedPoint) {
    if (plan.fixed_point.size() != n) throw std::invalid_argument("fixed input has the wrong dimension");
    return plan.fixed_point;
  }
  // Inputs use their own generator domain so they never alias dithers.
  const Philox4x32 rng(plan.seed_base);
  const std::uint64_t stride = static_cast<std::uint64_t>(n) + 2;
  const std::uint64_t base = static_cast<std::uint64_t>(trial) * stride;
  VectorXd g(n);
  for (int i = 0; i < n; i += 2) {
    const double u1 = open_unit_uniform(rng.word(base + i, 1));
    const double u2 = unit_uniform(rng.word(base + i + 1, 1));
    const double radius = std::sqrt(-2.0 * std::log(u1));
    g[i] = radius * std::cos(2.0 * kPi * u2);
    if (i + 1 < n) g[i + 1] = radius * std::sin(2.0 * kPi * u2);
  }
  if (plan.input_law == InputLaw::Gaussian) return plan.tau * g;
  const double u = unit_uniform(rng.word(base + stride - 1, 1));
  return plan.tau * std::pow(u, 1.0 / n) * g.normalized();
}

TrialRecord run_trials(const TrialQuantizer& q, const TrialPlan& plan) {
  const int n = q.dim();
  TrialRecord rec;
  rec.inputs.resize(n, static_cast<Eigen::Index>(plan.samples));
  rec.errors.resize(n, static_cast<Eigen::Index>(plan.samples));
  rec.descriptions.reserve(plan.samples);
  for (std::size_t t = 0; t < plan.samples; ++t) {
    const VectorXd x = sample_input(plan, n, t);
    const std::uint64_t seed = trial_seed(plan.seed_base, t);
    Description d = q.encode(x, seed);
    const auto col = static_cast<Eigen::Index>(t);
    rec.inputs.col(col) = x;
    rec.errors.col(col) = q.decode(d, seed) - x;
    rec.descriptions.push_back(std::move(d));
  }
  return rec;
}

double plugin_entropy(const std::vector<std::size_t>& counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total == 0.0) throw InsufficientSamplesError("plugin_entropy: no samples");
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

namespace {

template <typename Key>
std::vector<std::size_t> run_lengths(std::vector<Key> keys) {
  std::sort(keys.begin(), keys.end());
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    counts.push_back(j - i);
    i = j;
  }
  return counts;
}

}  // namespace

double plugin_entropy_of_indices(const std::vector<Description>& descriptions) {
  std::vector<std::uint64_t> keys;
  keys.reserve(descriptions.size());
  for (const auto& d : descriptions) keys.push_back(d.index);
  return plugin_entropy(run_lengths(std::move(keys)));
}

double plugin_entropy_of_points(const std::vector<Description>& descriptions) {
  std::vector<std::vector<std::int64_t>> keys;
  keys.reserve(descriptions.size());
  for (const auto& d : descriptions) keys.emplace_back(d.coords.data(), d.coords.data() + d.coords.size());
  return plugin_entropy(run_lengths(std::move(keys)));
}

RateEstimate estimate_rate(const TrialQuantizer& q, const TrialPlan& plan, const TrialRecord& record) {
  if (record.descriptions.empty()) throw InsufficientSamplesError("estimate_rate: no trials");
  const GolombCode code = GolombCode::for_probability(std::min(1.0, q.acceptance_probability()));
  const int width = coordinate_width(coordinate_bound(record.descriptions));
  double bits = 0.0;
  for (const auto& d : record.descriptions) bits += static_cast<double>(code.length(d.index)) + q.dim() * width;
  const double support = plan.input_law == InputLaw::UniformBall
                             ? log2_unit_ball_volume(q.dim()) + q.dim() * std::log2(plan.tau)
                             : 0.0;
  return {plugin_entropy_of_indices(record.descriptions), plugin_entropy_of_points(record.descriptions),
          bits / static_cast<double>(record.descriptions.size()), support};
}

RateEstimate estimate_rate(const TrialQuantizer& q, const TrialPlan& plan) {
  return estimate_rate(q, plan, run_trials(q, plan));
}

TestResult test_uniform_ball(const Eigen::MatrixXd& errors, double r, double alpha) {
  const auto samples = static_cast<std::size_t>(errors.cols());
  require_samples(samples, "test_uniform_ball");
  const int n = static_cast<int>(errors.rows());
  std::vector<double> radial(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    radial[i] = std::pow(errors.col(static_cast<Eigen::Index>(i)).norm() / r, n);
  }
  const double d = ks_statistic(radial, [](double u) { return std::clamp(u, 0.0, 1.0); });
  const double p = ks_p_value(d, static_cast<double>(samples));

  // Each coordinate of Unif(r B^n) has variance r^2 / (n + 2).
  const double sigma = r / std::sqrt(n + 2.0) / std::sqrt(static_cast<double>(samples));
  const VectorXd mean = errors.rowwise().mean();
  const double worst_z = mean.cwiseAbs().maxCoeff() / sigma;

  TestResult res;
  res.name = "uniform_ball";
  res.statistic = d;
  res.threshold = alpha;
  res.samples = samples;
  res.pass = p >= alpha && worst_z <= 3.0;
  res.detail = "ks_p=" + describe(p) + " max_mean_z=" + describe(worst_z);
  return res;
}

TestResult test_gaussian(const Eigen::MatrixXd& errors, double alpha, double cov_tol) {
  const auto samples = static_cast<std::size_t>(errors.cols());
  require_samples(samples, "test_gaussian");
  const int n = static_cast<int>(errors.rows());
  double min_p = 1.0;
  double worst_d = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> coord(errors.row(i).data(), errors.row(i).data() + 0);
    coord.resize(samples);
    for (std::size_t t = 0; t < samples; ++t) coord[t] = errors(i, static_cast<Eigen::Index>(t));
    const double d = ks_statistic(std::move(coord), [](double z) { return normal_cdf(z); });
    worst_d = std::max(worst_d, d);
    min_p = std::min(min_p, ks_p_value(d, static_cast<double>(samples)));
  }
  const Eigen::MatrixXd centered = errors.colwise() - errors.rowwise().mean();
  const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(samples - 1);
  const double cov_dev = (cov - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();

  std::vector<double> norms(samples);
  for (std::size_t t = 0; t < samples; ++t) norms[t] = errors.col(static_cast<Eigen::Index>(t)).squaredNorm();
  const double d_norm = ks_statistic(std::move(norms), [n](double v) { return chi_square_cdf(n, v); });
  const double p_norm = ks_p_value(d_norm, static_cast<double>(samples));

  TestResult res;
  res.name = "gaussian";
  res.statistic = worst_d;
  res.threshold = alpha;
  res.samples = samples;
  res.pass = min_p >= alpha && cov_dev < cov_tol && p_norm >= alpha;
  res.detail = "coord_ks_min_p=" + describe(min_p) + " cov_dev=" + describe(cov_dev) +
               " norm_ks_p=" + describe(p_norm);
  return res;
}

TestResult two_sample_ks(std::vector<double> a, std::vector<double> b, double alpha) {
  if (a.empty() || b.empty()) throw InsufficientSamplesError("two_sample_ks: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double p = ks_p_value(d, na * nb / (na + nb));
  TestResult res;
  res.name = "two_sample_ks";
  res.statistic = d;
  res.threshold = alpha;
  res.samples = a.size() + b.size();
  res.pass = p >= alpha;
  res.detail = "p=" + describe(p);
  return res;
}

TestResult test_independence(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& errors, double alpha) {
  const auto samples = static_cast<std::size_t>(errors.cols());
  require_samples(samples, "test_independence");
  if (inputs.cols() != errors.cols() || inputs.rows() != errors.rows()) {
    throw std::invalid_argument("test_independence: inputs and errors differ in shape");
  }
  TestResult res;
  res.name = "independence";
  res.samples = samples;
  res.threshold = 4.0 / std::sqrt(static_cast<double>(samples));

  const Eigen::MatrixXd xc = inputs.colwise() - inputs.rowwise().mean();
  const Eigen::MatrixXd zc = errors.colwise() - errors.rowwise().mean();
  const VectorXd x_sd = xc.rowwise().norm();
  const VectorXd z_sd = zc.rowwise().norm();
  if (x_sd.maxCoeff() == 0.0) {
    res.pass = true;
    res.detail = "vacuous: inputs do not vary";
    return res;
  }
  double worst = 0.0;
  for (Eigen::Index i = 0; i < xc.rows(); ++i) {
    if (x_sd[i] == 0.0) continue;
    for (Eigen::Index j = 0; j < zc.rows(); ++j) {
      if (z_sd[j] == 0.0) continue;
      worst = std::max(worst, std::abs(xc.row(i).dot(zc.row(j))) / (x_sd[i] * z_sd[j]));
    }
  }
  res.statistic = worst;

  // Split by the median of the first varying input coordinate.
  Eigen::Index axis = 0;
  while (x_sd[axis] == 0.0) ++axis;
  std::vector<double> key(inputs.row(axis).data(), inputs.row(axis).data() + 0);
  key.resize(samples);
  for (std::size_t t = 0; t < samples; ++t) key[t] = inputs(axis, static_cast<Eigen::Index>(t));
  std::vector<double> sorted = key;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(samples / 2), sorted.end());
  const double median = sorted[samples / 2];
  std::vector<double> low_first, high_first, low_norm, high_norm;
  for (std::size_t t = 0; t < samples; ++t) {
    const auto col = static_cast<Eigen::Index>(t);
    const bool low = key[t] < median;
    (low ? low_first : high_first).push_back(errors(0, col));
    (low ? low_norm : high_norm).push_back(errors.col(col).norm());
  }
  bool split_ok = true;
  std::string split_detail = "split=skipped";
  if (!low_first.empty() && !high_first.empty()) {
    const TestResult a = two_sample_ks(low_first, high_first, alpha);
    const TestResult b = two_sample_ks(low_norm, high_norm, alpha);
    split_ok = a.pass && b.pass;
    split_detail = "split_coord_" + a.detail + " split_norm_" + b.detail;
  }
  res.pass = worst < res.threshold && split_ok;
  res.detail = "max_corr=" + describe(worst) + " " + split_detail;
  return res;
}

double estimate_mse(const TrialQuantizer& q, const TrialPlan& plan) {
  const TrialRecord rec = run_trials(q, plan);
  if (rec.errors.cols() == 0) throw InsufficientSamplesError("estimate_mse: no trials");
  return rec.errors.colwise().squaredNorm().mean();
}

KDistribution k_distribution_test(const std::vector<Description>& descriptions, double p, double alpha) {
  const std::size_t samples = descriptions.size();
  require_samples(samples, "k_distribution_test");
  constexpr int kMassPoints = 10;
  std::vector<double> observed(kMassPoints + 1, 0.0);
  double sum_k = 0.0;
  for (const auto& d : descriptions) {
    sum_k += static_cast<double>(d.index);
    observed[std::min<std::uint64_t>(d.index, kMassPoints + 1) - 1] += 1.0;
  }
  std::vector<double> expected(kMassPoints + 1);
  const double total = static_cast<double>(samples);
  for (int k = 1; k <= kMassPoints; ++k) expected[k - 1] = total * p * std::pow(1.0 - p, k - 1);
  expected[kMassPoints] = total * std::pow(1.0 - p, kMassPoints);

  // Pool sparse cells into the tail.
  while (expected.size() > 2 && expected.back() < 5.0) {
    const double e = expected.back();
    const double o = observed.back();
    expected.pop_back();
    observed.pop_back();
    expected.back() += e;
    observed.back() += o;
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double diff = observed[i] - expected[i];
    chi2 += diff * diff / expected[i];
  }
  const double dof = static_cast<double>(expected.size() - 1);
  const double pv = chi_square_sf(dof, chi2);

  KDistribution out;
  out.mean_k = sum_k / total;
  out.test.name = "k_geometric";
  out.test.statistic = chi2;
  out.test.threshold = alpha;
  out.test.samples = samples;
  out.test.pass = pv >= alpha;
  out.test.detail = "cells=" + std::to_string(expected.size()) + " p=" + describe(pv) +
                    " mean_k=" + describe(out.mean_k);
  return out;
}

KDistribution estimate_k_distribution(const TrialQuantizer& q, const TrialPlan& plan) {
  KDistribution out = k_distribution_test(run_trials(q, plan).descriptions, q.acceptance_probability());
  out.test.seed = plan.seed_base;
  return out;
}

void write_results_csv(std::ostream& out, const std::vector<TestResult>& results) {
  out << "test,statistic,threshold,verdict,samples,seed\n";
  for (const auto& r : results) {
    out << r.name << ',' << format_double(r.statistic) << ',' << format_double(r.threshold) << ','
        << (r.pass ? "pass" : "fail") << ',' << r.samples << ',' << r.seed << '\n';
  }
}

}  // namespace rsuq
