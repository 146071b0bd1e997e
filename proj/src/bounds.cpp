#include "rsuq/bounds.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rsuq/special_functions.hpp"

namespace rsuq {

namespace {

double log2_kappa(int n) { return log2_unit_ball_volume(n); }

void require_dim(int n, int min_n, const char* what) {
  if (n < min_n) throw std::invalid_argument(std::string(what) + ": dimension out of range");
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

// -((1-p)/p) log2(1-p), tending to 0 as p -> 1 and to log2 e as p -> 0.
double geometric_correction(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("packing density must lie in (0, 1]");
  if (p == 1.0) return 0.0;
  return -(1.0 - p) / p * std::log1p(-p) * kLog2E;
}

// Covering density of A_n^*: kappa_n sqrt(n+1) (n(n+2) / (12(n+1)))^(n/2).
double an_star_covering_density(int n) {
  return std::exp(log_unit_ball_volume(n) + 0.5 * std::log(n + 1.0) +
                  0.5 * n * std::log(n * (n + 2.0) / (12.0 * (n + 1.0))));
}

}  // namespace

double rd_lower_max_error(int n, double r) {
  require_dim(n, 1, "rd_lower_max_error");
  require_positive(r, "radius");
  return -n * std::log2(r) - log2_kappa(n);
}

double shannon_lb_mse(int n, double mse) {
  require_dim(n, 1, "shannon_lb_mse");
  require_positive(mse, "distortion");
  return -0.5 * n * std::log2(2.0 * kPi * std::exp(1.0) * mse / n);
}

double zador_lb_mse(int n, double mse) {
  require_dim(n, 1, "zador_lb_mse");
  require_positive(mse, "distortion");
  return -0.5 * n * std::log2((n + 2.0) * mse / n) - log2_kappa(n);
}

double shannon_zador_gap(int n) {
  require_dim(n, 1, "shannon_zador_gap");
  return 0.5 * std::log2(2.0 * kPi * std::exp(1.0) / (n + 2.0)) - log2_kappa(n) / n;
}

double redundancy_max_error(double h_bar, int n, double r) {
  require_positive(r, "radius");
  return h_bar / n + std::log2(r) + log2_kappa(n) / n;
}

double shannon_red_mse(double h_bar, int n, double mse) {
  require_positive(mse, "distortion");
  return h_bar / n + 0.5 * std::log2(2.0 * kPi * std::exp(1.0) * mse / n);
}

double zador_red_mse(double h_bar, int n, double mse) {
  require_positive(mse, "distortion");
  return h_bar / n + 0.5 * std::log2((n + 2.0) * mse / n) + log2_kappa(n) / n;
}

double lattice_covering_redundancy(int n, double covering_density) {
  require_dim(n, 1, "lattice_covering_redundancy");
  require_positive(covering_density, "covering density");
  return std::log2(covering_density) / n;
}

double lattice_shannon_redundancy(double nsm) {
  require_positive(nsm, "NSM");
  return 0.5 * std::log2(2.0 * kPi * std::exp(1.0) * nsm);
}

double lattice_zador_redundancy(int n, double nsm) {
  require_dim(n, 1, "lattice_zador_redundancy");
  require_positive(nsm, "NSM");
  return 0.5 * std::log2((n + 2.0) * nsm) + log2_kappa(n) / n;
}

double zador_nsm_lower_bound(int n) {
  require_dim(n, 1, "zador_nsm_lower_bound");
  return 1.0 / ((n + 2.0) * std::exp(2.0 * log_unit_ball_volume(n) / n));
}

double rogers_bound(int n) {
  require_dim(n, 2, "rogers_bound");
  const double log_n = std::log2(static_cast<double>(n));
  return log_n / n + std::log2(std::sqrt(2.0 * kPi * std::exp(1.0))) * std::log2(log_n) / n;
}

double zador_ub(int n) {
  require_dim(n, 1, "zador_ub");
  return 0.5 * std::log2((n + 2.0) * std::tgamma(2.0 / n + 1.0) / n);
}

double ordentlich_ub(int n) {
  require_dim(n, 3, "ordentlich_ub");
  return 0.5 * std::log2((n + 2.0) / (n * sinc(2.0 / n)));
}

double ordentlich_relaxed(int n) {
  require_dim(n, 1, "ordentlich_relaxed");
  const double nd = n;
  return (1.0 / nd + 4.0 / (nd * nd) + 8.0 / (nd * nd * nd)) * kLog2E;
}

double rsuq_norment_ub(double delta, int n, double r, bool tight) {
  const double correction = tight ? geometric_correction(delta) : kLog2E;
  return rd_lower_max_error(n, r) + correction;
}

double rsuq_norment_ub(const Lattice& lat, double r, bool tight) {
  return rsuq_norment_ub(std::min(1.0, packing_density(lat)), lat.dim(), r, tight);
}

double rsuq_redundancy(double delta, int n, bool tight) {
  require_dim(n, 1, "rsuq_redundancy");
  return (tight ? geometric_correction(delta) : kLog2E) / n;
}

double ball_mse(int n, double r) { return n * r * r / (n + 2.0); }

double ball_nsm(int n) {
  require_dim(n, 1, "ball_nsm");
  return std::exp(2.0 / n * std::lgamma(0.5 * n + 1.0)) / ((n + 2.0) * kPi);
}

UniversalBoundTerms universal_bound_terms(int n, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("acceptance probability must lie in (0, 1]");
  return {-std::log2(p), 0.5 * n * std::log2(4.0 * kPi * std::exp(1.0) * ball_nsm(n)), kLog2E};
}

double gaussian_delta_eps(double eps, double sigma_min_eigenvalue, double mean_norm) {
  if (eps < 0.0) throw std::invalid_argument("epsilon must be nonnegative");
  require_positive(sigma_min_eigenvalue, "minimum eigenvalue");
  return eps / sigma_min_eigenvalue * (mean_norm + 0.5 * eps) * kLog2E;
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol, double abs_tol) {
  static constexpr std::array<double, 8> xgk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wgk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                               0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  struct Segment {
    double a, b, value, error;
  };
  auto rule = [&](double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    const double fc = f(c);
    double kronrod = fc * wgk[7];
    double gauss = fc * wg[3];
    for (int i = 0; i < 7; ++i) {
      const double s = f(c - h * xgk[i]) + f(c + h * xgk[i]);
      kronrod += wgk[i] * s;
      if (i % 2 == 1) gauss += wg[i / 2] * s;
    }
    return Segment{lo, hi, kronrod * h, std::abs((kronrod - gauss) * h)};
  };

  // Global adaptive bisection of the worst segment.
  std::vector<Segment> segments{rule(a, b)};
  for (int iter = 0; iter < 20000; ++iter) {
    double total = 0.0, error = 0.0;
    for (const auto& s : segments) {
      total += s.value;
      error += s.error;
    }
    if (error <= std::max(abs_tol, rel_tol * std::abs(total))) return total;
    auto worst = std::max_element(segments.begin(), segments.end(),
                                  [](const Segment& x, const Segment& y) { return x.error < y.error; });
    const Segment s = *worst;
    const double mid = 0.5 * (s.a + s.b);
    *worst = rule(s.a, mid);
    segments.push_back(rule(mid, s.b));
  }
  throw std::runtime_error("integrate: tolerance not reached");
}

double gaussian_layered_entropy(int n, double rel_tol) {
  require_dim(n, 1, "gaussian_layered_entropy");
  // With u = v/2 the integrand is the Gamma(n/2 + 1) density times
  // (n/2) log2(2 pi u) - log2 Gamma(n/2 + 1).
  const double a = 0.5 * n + 1.0;
  const double log_gamma = std::lgamma(a);
  auto integrand = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double density = std::exp((a - 1.0) * std::log(u) - u - log_gamma);
    return density * (0.5 * n * std::log2(2.0 * kPi * u) - log_gamma * kLog2E);
  };
  double upper = a + 20.0 * std::sqrt(a) + 40.0;
  while (gamma_q(a, upper) * (1.0 + 0.5 * n * std::log2(2.0 * kPi * upper) + log_gamma * kLog2E) > 1e-16) {
    upper *= 1.5;
  }
  // Split at the mode so the peak and the tail are resolved separately.
  const double mode = std::max(a - 1.0, 0.5);
  return integrate(integrand, 0.0, mode, rel_tol, 1e-14) + integrate(integrand, mode, upper, rel_tol, 1e-14);
}

double gaussian_differential_entropy(int n) {
  require_dim(n, 1, "gaussian_differential_entropy");
  return 0.5 * n * std::log2(2.0 * kPi * std::exp(1.0));
}

double h_inf_bound(double density_sup) {
  require_positive(density_sup, "density supremum");
  return -std::log2(density_sup);
}

double gaussian_h_inf(int n) {
  require_dim(n, 1, "gaussian_h_inf");
  return 0.5 * n * std::log2(2.0 * kPi);
}

double excess_info(int n, ExcessVariant variant) {
  const double h = gaussian_differential_entropy(n);
  const double h_l = gaussian_layered_entropy(n);
  switch (variant) {
    case ExcessVariant::Lower:
      return (h - h_l) / n;
    case ExcessVariant::Lrsuq:
      return (h - h_l + (n == 1 ? 0.0 : kLog2E)) / n;
    case ExcessVariant::Lspq:
      return (1.617 * n + 4.0 - h_l + h) / n;
  }
  throw std::invalid_argument("unknown excess-information variant");
}

ConstantsRegistry ConstantsRegistry::builtin() {
  ConstantsRegistry reg;
  const double r2 = std::sqrt(2.0);
  const double r3 = std::sqrt(3.0);
  reg.add({1, 1.0, 1.0, 1.0 / 12.0, "Z"});
  reg.add({2, kPi / (2.0 * r3), an_star_covering_density(2), 5.0 / (36.0 * r3), "A2"});
  reg.add({3, kPi / (3.0 * r2), an_star_covering_density(3), 19.0 / (192.0 * std::cbrt(2.0)), "D3/A3*"});
  reg.add({4, kPi * kPi / 16.0, an_star_covering_density(4), 0.0766032346, "D4/A4*"});
  reg.add({8, std::pow(kPi, 4) / 384.0, an_star_covering_density(8), 929.0 / 12960.0, "E8/A8*"});
  return reg;
}

void ConstantsRegistry::add(const RegistryEntry& entry) {
  if (entry.n < 1) throw std::invalid_argument("registry: dimension must be positive");
  constexpr double slack = 1e-12;
  if (entry.packing_density && !(*entry.packing_density > 0.0 && *entry.packing_density <= 1.0 + slack)) {
    throw std::invalid_argument("registry: packing density must lie in (0, 1] for n = " + std::to_string(entry.n));
  }
  if (entry.covering_density && !(*entry.covering_density >= 1.0 - slack)) {
    throw std::invalid_argument("registry: covering density must be >= 1 for n = " + std::to_string(entry.n));
  }
  if (entry.nsm && !(*entry.nsm >= zador_nsm_lower_bound(entry.n) * (1.0 - slack))) {
    throw std::invalid_argument("registry: NSM below Zador's lower bound for n = " + std::to_string(entry.n));
  }
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const RegistryEntry& e) { return e.n == entry.n; });
  if (it != entries_.end()) {
    *it = entry;
  } else {
    entries_.push_back(entry);
    std::sort(entries_.begin(), entries_.end(), [](const auto& x, const auto& y) { return x.n < y.n; });
  }
}

void ConstantsRegistry::merge(const ConstantsRegistry& other) {
  for (const auto& e : other.entries_) add(e);
}

const RegistryEntry* ConstantsRegistry::find(int n) const {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const RegistryEntry& e) { return e.n == n; });
  return it == entries_.end() ? nullptr : &*it;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_optional(const std::string& field, int line_no) {
  const std::string t = trim(field);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw std::runtime_error("registry line " + std::to_string(line_no) + ": bad number '" + t + "'");
  }
  return v;
}

}  // namespace

ConstantsRegistry ConstantsRegistry::from_csv(std::istream& in) {
  ConstantsRegistry reg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t[0] == 'n') continue;
    std::vector<std::string> fields;
    std::stringstream ss(t);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (t.back() == ',') fields.emplace_back();
    if (fields.size() < 4 || fields.size() > 5) {
      throw std::runtime_error("registry line " + std::to_string(line_no) + ": expected n,delta,theta,nsm,source");
    }
    RegistryEntry e;
    const auto n = parse_optional(fields[0], line_no);
    if (!n || *n != std::floor(*n)) throw std::runtime_error("registry line " + std::to_string(line_no) + ": bad n");
    e.n = static_cast<int>(*n);
    e.packing_density = parse_optional(fields[1], line_no);
    e.covering_density = parse_optional(fields[2], line_no);
    e.nsm = parse_optional(fields[3], line_no);
    if (fields.size() == 5) e.source = trim(fields[4]);
    reg.add(e);
  }
  return reg;
}

ConstantsRegistry ConstantsRegistry::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open registry " + path);
  return from_csv(in);
}

const BoundsEntry* BoundsReport::find(const std::string& quantity) const {
  for (const auto& e : entries) {
    if (e.quantity == quantity) return &e;
  }
  return nullptr;
}

double BoundsReport::value(const std::string& quantity) const {
  const BoundsEntry* e = find(quantity);
  if (!e) throw std::out_of_range("no quantity '" + quantity + "' for n = " + std::to_string(n));
  return e->value_bits;
}

BoundsTable parse_bounds_table(const std::string& name) {
  if (name == "figure2-left") return BoundsTable::Figure2Left;
  if (name == "figure2-right") return BoundsTable::Figure2Right;
  if (name == "table1") return BoundsTable::Table1;
  throw std::invalid_argument("unknown table '" + name + "'");
}

std::vector<BoundsReport> build_bounds_table(BoundsTable table, const std::vector<int>& dims,
                                             const ConstantsRegistry& registry, std::vector<int>* missing) {
  std::vector<BoundsReport> out;
  for (int n : dims) {
    require_dim(n, 1, "build_bounds_table");
    BoundsReport rep{n, {}};
    const RegistryEntry* reg = registry.find(n);
    if (table == BoundsTable::Table1) {
      const double h_l = gaussian_layered_entropy(n);
      rep.entries.push_back({"layered_entropy", h_l, "gaussian_layered_entropy"});
      rep.entries.push_back({"excess_lower", excess_info(n, ExcessVariant::Lower), "excess_info_lower_bound"});
      rep.entries.push_back({"excess_lrsuq", excess_info(n, ExcessVariant::Lrsuq), "excess_info_lrsuq_upper"});
      rep.entries.push_back({"excess_lspq", excess_info(n, ExcessVariant::Lspq), "excess_info_lspq"});
    } else {
      rep.entries.push_back({"rsuq_arbitrary_lattice", rsuq_redundancy(0.5, n, false), "rsuq_ball_log_e"});
      bool have_lattice_row = false;
      if (reg && reg->packing_density) {
        rep.entries.push_back({"rsuq_best_packing", rsuq_redundancy(std::min(1.0, *reg->packing_density), n, true),
                               "rsuq_ball_packing_density"});
        have_lattice_row = true;
      }
      if (table == BoundsTable::Figure2Left) {
        if (reg && reg->covering_density) {
          rep.entries.push_back({"lattice_best_covering", lattice_covering_redundancy(n, *reg->covering_density),
                                 "lattice_covering_density"});
        } else {
          have_lattice_row = false;
        }
        if (n >= 2) rep.entries.push_back({"rogers", rogers_bound(n), "rogers_covering"});
      } else {
        if (reg && reg->nsm) {
          rep.entries.push_back({"lattice_best_nsm", lattice_zador_redundancy(n, *reg->nsm), "lattice_nsm_zador"});
        } else {
          have_lattice_row = false;
        }
        rep.entries.push_back({"zador_ub", zador_ub(n), "zador_upper"});
        if (n >= 3) rep.entries.push_back({"ordentlich_ub", ordentlich_ub(n), "ordentlich_upper"});
      }
      if (!have_lattice_row && missing) missing->push_back(n);
    }
    out.push_back(std::move(rep));
  }
  return out;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), ptr);
}

void write_bounds_csv(std::ostream& out, const std::vector<BoundsReport>& reports) {
  out << "n,quantity,value_bits,equation_tag\n";
  for (const auto& rep : reports) {
    for (const auto& e : rep.entries) {
      out << rep.n << ',' << e.quantity << ',' << format_double(e.value_bits) << ',' << e.tag << '\n';
    }
  }
}

}  // namespace rsuq
