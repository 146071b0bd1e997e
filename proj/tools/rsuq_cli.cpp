#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rsuq/bounds.hpp"
#include "rsuq/coding.hpp"
#include "rsuq/lrsuq.hpp"
#include "rsuq/mc.hpp"
#include "rsuq/philox.hpp"
#include "rsuq/rsuq.hpp"
#include "rsuq/special_functions.hpp"

namespace {

using namespace rsuq;

constexpr int kExitOk = 0;
constexpr int kExitVerify = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("RSUQ_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError("RSUQ_SEED is not an unsigned integer");
    }
  }
  return 0;
}

bool is_builtin_name(const std::string& name) {
  return name == "Zn" || name == "Z" || name == "Dn" || name == "D" || name == "A2" || name == "E8";
}

// Built-in names resolve through the registry of lattices; anything else is
// read as a lattice config file.
Lattice resolve_lattice(const std::string& name, int n) {
  Lattice lat = is_builtin_name(name) ? builtin_lattice(name, n) : load_lattice_config(name);
  if (n > 0 && lat.dim() != n) {
    throw UsageError("lattice '" + name + "' has dimension " + std::to_string(lat.dim()) + ", expected " +
                     std::to_string(n));
  }
  return lat;
}

Eigen::MatrixXd read_vectors(const std::string& path, int n) {
  Eigen::MatrixXd x = decode_vqf1(read_file(path));
  if (x.cols() > 0 && x.rows() != n) {
    throw UsageError("input vectors have dimension " + std::to_string(x.rows()) + ", expected " + std::to_string(n));
  }
  if (x.cols() == 0) x.resize(n, 0);
  return x;
}

struct EncodeArgs {
  std::string input, output, lattice = "Zn";
  int dim = 0;
  double radius = 0.5;
  std::uint64_t seed = 0;
};

int cmd_encode(const EncodeArgs& a) {
  const Lattice lat = resolve_lattice(a.lattice, a.dim);
  const Eigen::MatrixXd x = read_vectors(a.input, a.dim);
  const RsuqConfig base = RsuqConfig::ball(lat, a.radius, a.seed);

  std::vector<Description> descriptions;
  descriptions.reserve(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    RsuqConfig cfg = base;
    cfg.seed = mix_seed(a.seed, static_cast<std::uint64_t>(i));
    descriptions.push_back(rsuq_encode(cfg, x.col(i)));
  }

  StreamHeader header;
  header.n = static_cast<std::uint32_t>(a.dim);
  header.lattice_id = a.lattice;
  header.scale = base.scale;
  header.parameter = a.radius;
  header.mode = StreamMode::RsuqBall;
  header.seed = a.seed;
  header.count = descriptions.size();
  header.coord_bound = coordinate_bound(descriptions);
  const GolombCode code = GolombCode::for_probability(std::min(1.0, base.acceptance_probability()));
  const auto bytes = encode_stream(header, descriptions, code);
  write_file(a.output, bytes);

  const std::size_t header_bytes = encode_header(header).size();
  const double payload_bits = 8.0 * static_cast<double>(bytes.size() - header_bytes);
  std::cout << "vectors: " << descriptions.size() << "\n";
  if (!descriptions.empty()) {
    std::cout << "bits/dimension: " << format_double(payload_bits / (x.cols() * static_cast<double>(a.dim))) << "\n";
  }
  std::cout << "normalized-entropy bound (bits/dimension): "
            << format_double(rsuq_norment_ub(lat, a.radius, true) / a.dim) << "\n";
  std::cout << "max-error lower bound (bits/dimension): " << format_double(rd_lower_max_error(a.dim, a.radius) / a.dim)
            << "\n";
  return kExitOk;
}

int cmd_decode(const std::string& input, const std::string& output) {
  const auto bytes = read_file(input);
  std::size_t offset = 0;
  const StreamHeader header = decode_header(bytes, &offset);
  const int n = static_cast<int>(header.n);
  const Lattice lat = resolve_lattice(header.lattice_id, n);
  Eigen::MatrixXd y(n, static_cast<Eigen::Index>(header.count));

  if (header.mode == StreamMode::RsuqBall) {
    const RsuqConfig base = RsuqConfig::ball(lat, header.parameter, header.seed);
    const GolombCode code = GolombCode::for_probability(std::min(1.0, base.acceptance_probability()));
    const DecodedStream s = decode_stream(bytes, code);
    for (std::size_t i = 0; i < s.descriptions.size(); ++i) {
      RsuqConfig cfg = base;
      cfg.seed = mix_seed(header.seed, i);
      y.col(static_cast<Eigen::Index>(i)) = rsuq_decode(cfg, s.descriptions[i]);
    }
  } else {
    const GaussianNoise noise(n);
    const DecodedStream s = decode_stream(bytes, golomb_for_lattice(lat));
    for (std::size_t i = 0; i < s.descriptions.size(); ++i) {
      y.col(static_cast<Eigen::Index>(i)) =
          header.parameter * lrsuq_decode(noise, lat, mix_seed(header.seed, i), s.descriptions[i]);
    }
  }
  write_file(output, encode_vqf1(y));
  std::cout << "vectors: " << header.count << "\n";
  return kExitOk;
}

struct SimulateArgs {
  std::string noise = "gaussian", lattice = "Zn", input, output, stream;
  int dim = 0;
  std::uint64_t seed = 0;
};

int cmd_simulate(const SimulateArgs& a) {
  if (a.noise != "gaussian") throw UsageError("unsupported noise model: " + a.noise);
  const Lattice lat = resolve_lattice(a.lattice, a.dim);
  const Eigen::MatrixXd x = read_vectors(a.input, a.dim);
  const GaussianNoise noise(a.dim);

  std::vector<Description> descriptions;
  Eigen::MatrixXd y(a.dim, x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const std::uint64_t seed = mix_seed(a.seed, static_cast<std::uint64_t>(i));
    descriptions.push_back(lrsuq_encode(noise, lat, seed, x.col(i)));
    y.col(i) = lrsuq_decode(noise, lat, seed, descriptions.back());
  }
  write_file(a.output, encode_vqf1(y));

  StreamHeader header;
  header.n = static_cast<std::uint32_t>(a.dim);
  header.lattice_id = a.lattice;
  header.scale = 1.0;
  header.parameter = 1.0;
  header.mode = StreamMode::LrsuqGaussian;
  header.seed = a.seed;
  header.count = descriptions.size();
  header.coord_bound = coordinate_bound(descriptions);
  const auto bytes = encode_stream(header, descriptions, golomb_for_lattice(lat));
  if (!a.stream.empty()) write_file(a.stream, bytes);

  std::cout << "vectors: " << descriptions.size() << "\n";
  if (!descriptions.empty()) {
    const double payload_bits = 8.0 * static_cast<double>(bytes.size() - encode_header(header).size());
    std::cout << "bits/vector: " << format_double(payload_bits / static_cast<double>(descriptions.size())) << "\n";
  }
  return kExitOk;
}

std::vector<int> parse_dims(const std::string& spec) {
  std::vector<int> dims;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      const auto dots = part.find("..");
      if (dots == std::string::npos) {
        dims.push_back(std::stoi(part));
      } else {
        const int lo = std::stoi(part.substr(0, dots));
        const int hi = std::stoi(part.substr(dots + 2));
        if (hi < lo) throw UsageError("empty dimension range: " + part);
        for (int n = lo; n <= hi; ++n) dims.push_back(n);
      }
    } catch (const std::logic_error&) {
      throw UsageError("bad dimension list: " + spec);
    }
  }
  if (dims.empty()) throw UsageError("no dimensions given");
  for (int n : dims) {
    if (n < 1) throw UsageError("dimensions must be positive");
  }
  return dims;
}

std::string plot_script(const std::string& csv_name, const std::string& table) {
  std::ostringstream s;
  s << "import csv\n"
    << "import collections\n"
    << "import matplotlib.pyplot as plt\n\n"
    << "series = collections.defaultdict(list)\n"
    << "with open(" << '"' << csv_name << '"' << ", newline='') as f:\n"
    << "    for row in csv.DictReader(f):\n"
    << "        series[row['quantity']].append((int(row['n']), float(row['value_bits'])))\n\n"
    << "for name, pts in sorted(series.items()):\n"
    << "    pts.sort()\n"
    << "    plt.plot([p[0] for p in pts], [p[1] for p in pts], marker='.', label=name)\n"
    << "plt.xlabel('n')\n"
    << "plt.ylabel('bits')\n";
  if (table != "table1") s << "plt.yscale('log')\n";
  s << "plt.legend()\n"
    << "plt.savefig(" << '"' << std::filesystem::path(csv_name).stem().string() << ".png" << '"' << ")\n";
  return s.str();
}

int cmd_bounds(const std::string& table_name, const std::string& dims_spec, const std::string& registry_path,
               const std::string& out_path) {
  const BoundsTable table = parse_bounds_table(table_name);
  const std::vector<int> dims = parse_dims(dims_spec);
  ConstantsRegistry registry = ConstantsRegistry::builtin();
  if (!registry_path.empty()) registry.merge(ConstantsRegistry::from_csv_file(registry_path));

  std::vector<int> missing;
  const auto reports = build_bounds_table(table, dims, registry, &missing);
  std::ostringstream csv;
  write_bounds_csv(csv, reports);
  const std::string text = csv.str();
  write_file(out_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));

  if (table != BoundsTable::Table1) {
    if (!missing.empty()) {
      std::cerr << "warning: no registry row for n =";
      for (int n : missing) std::cerr << ' ' << n;
      std::cerr << "; only lattice-independent curves emitted\n";
    }
    const std::filesystem::path out(out_path);
    const std::string script = plot_script(out.filename().string(), table_name);
    auto script_path = out;
    script_path.replace_extension(".plot.py");
    write_file(script_path.string(), std::span(reinterpret_cast<const std::uint8_t*>(script.data()), script.size()));
  }
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

// Selftest

TestResult named(TestResult r, std::string name, std::uint64_t seed) {
  r.name = std::move(name);
  r.seed = seed;
  return r;
}

TestResult check(std::string name, double statistic, double threshold, bool pass, std::size_t samples,
                 std::uint64_t seed) {
  TestResult r;
  r.name = std::move(name);
  r.statistic = statistic;
  r.threshold = threshold;
  r.pass = pass;
  r.samples = samples;
  r.seed = seed;
  return r;
}

std::vector<TestResult> run_selftest(bool full, std::uint64_t seed) {
  std::vector<TestResult> out;
  const std::size_t scale = full ? 10 : 1;
  const std::size_t base = 100000 * scale;

  // Layered entropy and excess information against tabulated values.
  struct Row {
    int n;
    double h_l, lower, lrsuq, lspq;
  };
  const Row rows[] = {{1, 1.52632, 0.52077, 0.52077, 6.13777},
                      {2, 3.26144, 0.41637, 1.13772, 4.03337},
                      {8, 14.71250, 0.20803, 0.38837, 2.32503},
                      {24, 46.71338, 0.10071, 0.16082, 1.88437}};
  double worst = 0.0;
  for (const Row& r : rows) {
    worst = std::max({worst, std::abs(gaussian_layered_entropy(r.n) - r.h_l),
                      std::abs(excess_info(r.n, ExcessVariant::Lower) - r.lower),
                      std::abs(excess_info(r.n, ExcessVariant::Lrsuq) - r.lrsuq),
                      std::abs(excess_info(r.n, ExcessVariant::Lspq) - r.lspq)});
  }
  out.push_back(check("layered_entropy_table", worst, 1e-4, worst < 1e-4, 0, seed));

  const Lattice z2 = builtin_lattice("Zn", 2);
  const Lattice e8 = builtin_lattice("E8", 8);

  {
    const RsuqTrial q(z2, 0.5);
    TrialPlan plan;
    plan.samples = base;
    plan.tau = 50.0;
    plan.seed_base = seed;
    const TrialRecord rec = run_trials(q, plan);
    out.push_back(named(test_uniform_ball(rec.errors, 0.5), "rsuq_uniform_ball_z2", seed));
    const double mse = rec.errors.colwise().squaredNorm().mean();
    const double rel = std::abs(mse / ball_mse(2, 0.5) - 1.0);
    out.push_back(check("rsuq_mse_z2", rel, 0.01, rel < 0.01, plan.samples, seed));
    out.push_back(named(test_independence(rec.inputs, rec.errors), "rsuq_independence_z2", seed));
    KDistribution k = k_distribution_test(rec.descriptions, q.acceptance_probability());
    out.push_back(named(k.test, "k_geometric_z2", seed));
    const double k_rel = std::abs(k.mean_k * q.acceptance_probability() - 1.0);
    out.push_back(check("k_mean_z2", k_rel, 0.02, k_rel < 0.02, plan.samples, seed));

    const RateEstimate rate = estimate_rate(q, plan, rec);
    const double bound = rd_lower_max_error(2, 0.5) + kLog2E + 0.1;
    out.push_back(check("rate_bound_z2", rate.normalized(), bound, rate.normalized() <= bound, plan.samples, seed));
  }
  {
    const RsuqTrial q(e8, 0.5);
    TrialPlan plan;
    plan.samples = base;
    plan.seed_base = seed + 1;
    const KDistribution k = estimate_k_distribution(q, plan);
    out.push_back(named(k.test, "k_geometric_e8", plan.seed_base));
    const double k_rel = std::abs(k.mean_k * q.acceptance_probability() - 1.0);
    out.push_back(check("k_mean_e8", k_rel, 0.02, k_rel < 0.02, plan.samples, plan.seed_base));
  }
  {
    const LrsuqTrial q(z2);
    TrialPlan plan;
    plan.samples = 2 * base;
    plan.input_law = InputLaw::FixedPoint;
    plan.fixed_point = Eigen::Vector2d(0.0, 0.0);
    plan.seed_base = seed + 2;
    const TrialRecord at_zero = run_trials(q, plan);
    out.push_back(named(test_gaussian(at_zero.errors, 0.01, 0.02), "lrsuq_gaussian_z2", plan.seed_base));
    plan.fixed_point = Eigen::Vector2d(10.0, 10.0);
    plan.seed_base = seed + 3;
    const TrialRecord shifted = run_trials(q, plan);
    std::vector<double> a(at_zero.errors.row(0).begin(), at_zero.errors.row(0).end());
    std::vector<double> b(shifted.errors.row(0).begin(), shifted.errors.row(0).end());
    out.push_back(named(two_sample_ks(a, b), "lrsuq_shift_invariance_z2", plan.seed_base));
  }
  {
    Philox4x32 rng(seed + 4);
    std::vector<Description> ds;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      Description d;
      d.index = 1 + rng.word(3 * i, 7) % 20;
      d.coords = IntVector(2);
      d.coords << static_cast<std::int64_t>(rng.word(3 * i + 1, 7) % 201) - 100,
          static_cast<std::int64_t>(rng.word(3 * i + 2, 7) % 201) - 100;
      ds.push_back(std::move(d));
    }
    StreamHeader h;
    h.n = 2;
    h.lattice_id = "Zn";
    h.count = ds.size();
    h.coord_bound = coordinate_bound(ds);
    const GolombCode code = GolombCode::for_probability(0.3);
    const DecodedStream back = decode_stream(encode_stream(h, ds, code), code);
    const bool same = back.header == h && back.descriptions == ds;
    out.push_back(check("rsq1_round_trip", same ? 0.0 : 1.0, 0.0, same, ds.size(), seed + 4));
  }
  return out;
}

int cmd_selftest(bool full, std::uint64_t seed, const std::string& report) {
  const auto results = run_selftest(full, seed);
  std::ostringstream csv;
  write_results_csv(csv, results);
  std::cout << csv.str();
  if (!report.empty()) {
    const std::string text = csv.str();
    write_file(report, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  for (const auto& r : results) {
    if (!r.pass) return kExitVerify;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rejection-sampled universal quantization"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  bool seed_given = false;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& s) {
          seed = s;
          seed_given = true;
        },
        "Shared random seed (default: $RSUQ_SEED or 0)");
  };

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Quantize a VQF1 file into an RSQ1 stream");
  encode->add_option("--input", enc.input, "VQF1 input")->required();
  encode->add_option("--output", enc.output, "RSQ1 output")->required();
  encode->add_option("--lattice", enc.lattice, "Zn, Dn, A2, E8 or a lattice config file")->required();
  encode->add_option("--dim", enc.dim, "Dimension")->required()->check(CLI::PositiveNumber);
  encode->add_option("--radius", enc.radius, "Error ball radius")->required()->check(CLI::PositiveNumber);
  add_seed(encode);

  std::string dec_in, dec_out;
  auto* decode = app.add_subcommand("decode", "Reconstruct a VQF1 file from an RSQ1 stream");
  decode->add_option("--input", dec_in, "RSQ1 input")->required();
  decode->add_option("--output", dec_out, "VQF1 output")->required();
  add_seed(decode);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Pass vectors through a simulated additive-noise channel");
  simulate->add_option("--noise", sim.noise, "Noise model")->check(CLI::IsMember({"gaussian"}));
  simulate->add_option("--dim", sim.dim, "Dimension")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--lattice", sim.lattice, "Zn, Dn, A2, E8 or a lattice config file");
  simulate->add_option("--input", sim.input, "VQF1 input")->required();
  simulate->add_option("--output", sim.output, "VQF1 output")->required();
  simulate->add_option("--stream", sim.stream, "Also write the RSQ1 description stream");
  add_seed(simulate);

  std::string table = "table1", dims = "1..8,24", registry, bounds_out;
  auto* bounds = app.add_subcommand("bounds", "Evaluate redundancy curves and layered-entropy tables");
  bounds->add_option("--table", table, "figure2-left, figure2-right or table1")
      ->check(CLI::IsMember({"figure2-left", "figure2-right", "table1"}));
  bounds->add_option("--dims", dims, "Dimensions, e.g. 1..48 or 1..8,24");
  bounds->add_option("--registry", registry, "Extra lattice constants CSV");
  bounds->add_option("--out", bounds_out, "CSV output")->required();
  add_seed(bounds);

  bool quick = false, full = false;
  std::string report;
  auto* selftest = app.add_subcommand("selftest", "Run the statistical verification suite");
  auto* quick_flag = selftest->add_flag("--quick", quick, "Reduced trial budget (default)");
  selftest->add_flag("--full", full, "Full trial budget")->excludes(quick_flag);
  selftest->add_option("--report", report, "Also write the results CSV here");
  add_seed(selftest);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!seed_given) seed = default_seed();
    if (*encode) {
      enc.seed = seed;
      return cmd_encode(enc);
    }
    if (*decode) return cmd_decode(dec_in, dec_out);
    if (*simulate) {
      sim.seed = seed;
      return cmd_simulate(sim);
    }
    if (*bounds) return cmd_bounds(table, dims, registry, bounds_out);
    if (*selftest) return cmd_selftest(full, seed, report);
  } catch (const IterationLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerify;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
