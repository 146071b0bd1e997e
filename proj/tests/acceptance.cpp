// Acceptance suite: one verdict line per criterion. Usage: acceptance <path-to-cli>

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rsuq/bounds.hpp"
#include "rsuq/coding.hpp"
#include "rsuq/mc.hpp"
#include "rsuq/philox.hpp"
#include "rsuq/special_functions.hpp"

namespace fs = std::filesystem;
using namespace rsuq;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

bool run_criterion(int id, const std::string& title, double budget_s, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto start = Clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << " [exception: " << e.what() << "]";
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  v.require(elapsed < budget_s, "runtime " + format_double(elapsed) + " s over " + format_double(budget_s) + " s");
  std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << title << "  ("
            << std::fixed;
  std::cout.precision(2);
  std::cout << elapsed << " s)" << v.detail.str() << std::endl;
  std::cout.unsetf(std::ios::floatfield);
  return v.pass;
}

void criterion_table(Verdict& v) {
  struct Row {
    int n;
    double h_l, lower, lrsuq, lspq;
  };
  const Row rows[] = {
      {1, 1.52632, 0.52077, 0.52077, 6.13777},  {2, 3.26144, 0.41637, 1.13772, 4.03337},
      {3, 5.08819, 0.35103, 0.83193, 3.30136},  {4, 6.96559, 0.30570, 0.66637, 2.92270},
      {5, 8.87490, 0.27212, 0.56065, 2.68912},  {6, 10.80611, 0.24608, 0.48653, 2.52974},
      {7, 12.75325, 0.22520, 0.43130, 2.41363}, {8, 14.71250, 0.20803, 0.38837, 2.32503},
      {24, 46.71338, 0.10070, 0.16082, 1.88437},
  };
  double worst = 0.0;
  for (const Row& r : rows) {
    const double errs[] = {gaussian_layered_entropy(r.n) - r.h_l, excess_info(r.n, ExcessVariant::Lower) - r.lower,
                           excess_info(r.n, ExcessVariant::Lrsuq) - r.lrsuq,
                           excess_info(r.n, ExcessVariant::Lspq) - r.lspq};
    for (double e : errs) worst = std::max(worst, std::abs(e));
  }
  v.detail << " max_abs_dev=" << format_double(worst);
  v.require(worst < 1e-4, "table deviation");
}

void criterion_exactness(Verdict& v) {
  const RsuqTrial q(builtin_lattice("Zn", 2), 0.5);
  TrialPlan plan;
  plan.samples = 100000;
  plan.tau = 50.0;
  plan.seed_base = 2001;
  const TrialRecord rec = run_trials(q, plan);
  const TestResult ball = test_uniform_ball(rec.errors, 0.5, 0.01);
  const double mse = rec.errors.colwise().squaredNorm().mean();
  const double rel = std::abs(mse / ball_mse(2, 0.5) - 1.0);
  v.detail << " " << ball.detail << " mse=" << format_double(mse);
  v.require(ball.pass, "radial KS or mean band");
  v.require(rel < 0.01, "MSE off by more than 1%");
}

void criterion_stopping(Verdict& v) {
  for (const auto& [name, n, seed] : {std::tuple{"Zn", 2, 3001}, {"E8", 8, 3002}}) {
    const Lattice lat = builtin_lattice(name, n);
    const RsuqTrial q(lat, 0.5);
    TrialPlan plan;
    plan.samples = 100000;
    plan.seed_base = static_cast<std::uint64_t>(seed);
    const KDistribution k = estimate_k_distribution(q, plan);
    const double expected = 1.0 / packing_density(lat);
    const double rel = std::abs(k.mean_k / expected - 1.0);
    v.detail << " " << name << ": mean_k=" << format_double(k.mean_k) << " expected=" << format_double(expected)
             << " " << k.test.detail;
    v.require(rel < 0.02, std::string(name) + " mean K");
    v.require(k.test.pass, std::string(name) + " chi-square");
  }
}

void criterion_rate(Verdict& v) {
  for (const auto& [name, n, seed] : {std::tuple{"Zn", 2, 4001}, {"A2", 2, 4002}, {"Dn", 4, 4003}}) {
    const RsuqTrial q(builtin_lattice(name, n), 0.5);
    TrialPlan plan;
    plan.samples = 100000;
    plan.tau = 50.0;
    plan.seed_base = static_cast<std::uint64_t>(seed);
    const RateEstimate r = estimate_rate(q, plan);
    const double bound = rd_lower_max_error(n, 0.5) + kLog2E + 0.1;
    v.detail << " " << name << ": " << format_double(r.normalized()) << " <= " << format_double(bound);
    v.require(r.normalized() <= bound, std::string(name) + " rate bound");
  }
}

void criterion_channel(Verdict& v) {
  const LrsuqTrial q(builtin_lattice("Zn", 2));
  TrialPlan plan;
  plan.samples = 200000;
  plan.input_law = InputLaw::FixedPoint;
  plan.fixed_point = Eigen::Vector2d(0.0, 0.0);
  plan.seed_base = 5001;
  const TrialRecord at_zero = run_trials(q, plan);
  const TestResult g = test_gaussian(at_zero.errors, 0.01, 0.02);
  v.detail << " " << g.detail;
  v.require(g.pass, "gaussian fit");

  plan.fixed_point = Eigen::Vector2d(10.0, 10.0);
  plan.seed_base = 5002;
  const TrialRecord shifted = run_trials(q, plan);
  auto row = [](const Eigen::MatrixXd& m, int i) { return std::vector<double>(m.row(i).begin(), m.row(i).end()); };
  auto norms = [](const Eigen::MatrixXd& m) {
    const Eigen::VectorXd s = m.colwise().norm();
    return std::vector<double>(s.data(), s.data() + s.size());
  };
  const TestResult c0 = two_sample_ks(row(at_zero.errors, 0), row(shifted.errors, 0));
  const TestResult c1 = two_sample_ks(row(at_zero.errors, 1), row(shifted.errors, 1));
  const TestResult nr = two_sample_ks(norms(at_zero.errors), norms(shifted.errors));
  v.detail << " shift: z0 " << c0.detail << ", z1 " << c1.detail << ", norm " << nr.detail;
  v.require(c0.pass && c1.pass && nr.pass, "two-sample KS between inputs");
}

void criterion_redundancy(Verdict& v) {
  constexpr double kTol = 1e-9;
  const ConstantsRegistry reg = ConstantsRegistry::builtin();

  // Independent evaluations of the closed forms.
  auto log_kappa2 = [](int n) { return (0.5 * n * std::log(M_PI) - std::lgamma(0.5 * n + 1.0)) / std::log(2.0); };
  auto rsuq_tight = [](double delta, int n) {
    return delta >= 1.0 ? 0.0 : -(1.0 - delta) / delta * std::log2(1.0 - delta) / n;
  };
  auto covering = [&](int n, double theta) { return std::log2(theta) / n; };
  auto ordentlich = [](int n) {
    const double t = 2.0 / n;
    return 0.5 * std::log2((n + 2.0) / (n * std::sin(M_PI * t) / (M_PI * t)));
  };

  const double black48 = kLog2E / 48;
  v.require(std::abs(rsuq_redundancy(0.5, 48, false) - black48) < kTol, "log e / n curve");
  v.require(std::abs(ordentlich_ub(48) - ordentlich(48)) < kTol, "Ordentlich value");
  v.require(black48 < ordentlich_ub(48), "log e / 48 below Ordentlich at 48");
  v.require(std::abs(rsuq_redundancy(0.5, 24, false) - 0.06011) < 1e-5, "log e / 24");
  v.detail << " n=48: " << format_double(black48) << " < " << format_double(ordentlich_ub(48));

  std::vector<std::pair<double, double>> pairs;  // (rsuq tight, lattice covering)
  for (int n : {1, 2, 4, 8}) {
    const RegistryEntry* e = reg.find(n);
    if (!e || !e->packing_density || !e->covering_density) {
      v.require(false, "registry row missing for n=" + std::to_string(n));
      return;
    }
    const double rs = rsuq_redundancy(*e->packing_density, n, true);
    const double lat = lattice_covering_redundancy(n, *e->covering_density);
    v.require(std::abs(rs - rsuq_tight(*e->packing_density, n)) < kTol, "RSUQ formula n=" + std::to_string(n));
    v.require(std::abs(lat - covering(n, *e->covering_density)) < kTol, "covering formula n=" + std::to_string(n));
    pairs.emplace_back(rs, lat);
    v.detail << " n=" << n << ": rsuq=" << format_double(rs) << " lattice=" << format_double(lat);
  }
  // Packing density of A2 and the lower bound on kappa_2 cross-check.
  v.require(std::abs(*reg.find(2)->packing_density - M_PI / (2.0 * std::sqrt(3.0))) < kTol, "A2 packing density");
  v.require(std::abs(rd_lower_max_error(2, 0.5) - (-2.0 * std::log2(0.5) - log_kappa2(2))) < kTol,
            "max-error lower bound");
  v.require(std::abs(pairs[0].first - pairs[0].second) < kTol, "n=1 both zero");
  v.require(pairs[1].first > pairs[1].second, "n=2 RSUQ above A2");
  v.require(pairs[2].first > pairs[2].second, "n=4 RSUQ above best lattice");
  v.require(pairs[3].first < pairs[3].second, "n=8 RSUQ below E8");
  v.require(kLog2E / 8 < pairs[3].second, "n=8 log e / n below lattice");
}

void criterion_coding(Verdict& v) {
  // Prefix-freeness: sorted codewords are prefix-free iff no word prefixes
  // its successor.
  bool prefix_free = true;
  for (std::uint64_t m = 1; m <= 16; ++m) {
    const GolombCode g = GolombCode::with_parameter(m);
    std::vector<std::string> words;
    for (std::uint64_t k = 1; k <= 1000; ++k) words.push_back(g.codeword(k));
    std::sort(words.begin(), words.end());
    for (std::size_t i = 0; i + 1 < words.size(); ++i) {
      if (words[i + 1].compare(0, words[i].size(), words[i]) == 0) prefix_free = false;
    }
  }
  v.require(prefix_free, "prefix-freeness");

  const Philox4x32 rng(7001);
  for (double p : {0.2, 0.5, M_PI / 4}) {
    const GolombCode g = GolombCode::for_probability(p);
    double total = 0.0;
    constexpr int kDraws = 1000000;
    for (int i = 0; i < kDraws; ++i) {
      const double u = open_unit_uniform(rng.word(static_cast<std::uint64_t>(i)));
      const auto k = 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-p)));
      total += static_cast<double>(g.length(k));
    }
    const double mean = total / kDraws;
    v.detail << " p=" << format_double(p) << ": " << format_double(mean) << " <= "
             << format_double(geometric_entropy(p) + 1.0);
    v.require(mean <= geometric_entropy(p) + 1.0, "mean length at p=" + format_double(p));
  }

  std::vector<Description> ds;
  const Philox4x32 drng(7002);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    Description d;
    const double u = open_unit_uniform(drng.word(5 * i));
    d.index = 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-0.3)));
    d.coords = IntVector(4);
    for (int k = 0; k < 4; ++k) {
      d.coords[k] = static_cast<std::int64_t>(drng.word(5 * i + 1 + k) % 4001) - 2000;
    }
    ds.push_back(std::move(d));
  }
  StreamHeader h;
  h.n = 4;
  h.lattice_id = "Dn";
  h.scale = 0.7;
  h.parameter = 0.5;
  h.seed = 7002;
  h.count = ds.size();
  h.coord_bound = coordinate_bound(ds);
  const GolombCode code = GolombCode::for_probability(0.3);
  const auto bytes = encode_stream(h, ds, code);
  const DecodedStream back = decode_stream(bytes, code);
  v.require(back.header == h && back.descriptions == ds, "RSQ1 round trip");
  v.require(encode_stream(back.header, back.descriptions, code) == bytes, "RSQ1 re-encode");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void criterion_determinism(Verdict& v, const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / ("rsuq_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  Eigen::MatrixXd x(2, 300);
  const Philox4x32 rng(8001);
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (int k = 0; k < 2; ++k) x(k, c) = 40.0 * unit_uniform(rng.word(static_cast<std::uint64_t>(2 * c + k))) - 20.0;
  }
  // Each run works in its own directory with identical relative paths.
  for (int run = 0; run < 2; ++run) {
    fs::create_directories(dir / std::to_string(run));
    write_file((dir / std::to_string(run) / "x.vqf").string(), encode_vqf1(x));
  }

  struct Command {
    std::string name;
    std::string args;
    std::vector<std::string> outputs;
  };
  const std::string in = "x.vqf";
  const std::vector<Command> commands = {
      {"encode", "encode --input " + in + " --lattice A2 --dim 2 --radius 0.5 --seed 11 --output x.rsq", {"x.rsq"}},
      {"decode", "decode --input x.rsq --output y.vqf", {"y.vqf"}},
      {"simulate",
       "simulate --noise gaussian --dim 2 --lattice Zn --seed 12 --input " + in + " --output s.vqf --stream s.rsq",
       {"s.vqf", "s.rsq"}},
      {"bounds table1", "bounds --table table1 --dims 1..8,24 --seed 13 --out t1.csv", {"t1.csv"}},
      {"bounds figure2-left", "bounds --table figure2-left --dims 1..48 --seed 13 --out f2l.csv",
       {"f2l.csv", "f2l.plot.py"}},
      {"bounds figure2-right", "bounds --table figure2-right --dims 1..48 --seed 13 --out f2r.csv",
       {"f2r.csv", "f2r.plot.py"}},
      {"selftest", "selftest --quick --seed 14 --report report.csv", {"report.csv"}},
  };

  std::string mismatched;
  for (const Command& c : commands) {
    std::string results[2];
    for (int run = 0; run < 2; ++run) {
      const fs::path cwd = dir / std::to_string(run);
      const std::string cmd = "cd \"" + cwd.string() + "\" && \"" + cli + "\" " + c.args + " > stdout.txt 2>&1";
      const int rc = std::system(cmd.c_str());
      results[run] = "rc=" + std::to_string(rc) + "\n" + slurp(cwd / "stdout.txt");
      for (const auto& f : c.outputs) {
        if (!fs::exists(cwd / f)) v.require(false, c.name + " did not write " + f);
        results[run] += slurp(cwd / f);
      }
      if (rc != 0) v.require(false, c.name + " exit status " + std::to_string(rc));
    }
    if (results[0] != results[1]) mismatched += " " + c.name;
  }
  v.detail << " commands=" << commands.size();
  v.require(mismatched.empty(), "outputs differ:" + mismatched);
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-cli>\n";
    return 2;
  }
  const std::string cli = fs::absolute(argv[1]).string();
  bool all = true;
  all &= run_criterion(1, "layered entropy and excess information table", 5, criterion_table);
  all &= run_criterion(2, "RSUQ error uniform on the ball (Z^2, r = 0.5)", 30, criterion_exactness);
  all &= run_criterion(3, "geometric stopping index (Z^2, E8)", 60, criterion_stopping);
  all &= run_criterion(4, "rate bound (Z^2, A2, D4)", 120, criterion_rate);
  all &= run_criterion(5, "Gaussian channel simulation (Z^2)", 180, criterion_channel);
  all &= run_criterion(6, "redundancy arithmetic and ordering", 1, criterion_redundancy);
  all &= run_criterion(7, "coding layer", 30, criterion_coding);
  all &= run_criterion(8, "CLI determinism", 600, [&](Verdict& v) { criterion_determinism(v, cli); });
  std::cout << (all ? "all criteria passed" : "some criteria failed") << std::endl;
  return all ? 0 : 1;
}
