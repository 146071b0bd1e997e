#ifndef RSUQ_BOUNDS_HPP_
#define RSUQ_BOUNDS_HPP_

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rsuq/lattice.hpp"

/// Closed-form rate and redundancy quantities. Everything is in bits;
/// per-dimension quantities say so in their name or comment.
namespace rsuq {

// Lower bounds on normalized entropy.

/// Max-error lower bound: -n log r - log kappa_n.
double rd_lower_max_error(int n, double r);
/// Shannon MSE lower bound: -(n/2) log(2 pi e D / n).
double shannon_lb_mse(int n, double mse);
/// Zador MSE lower bound: -(n/2) log((n+2) D / n) - log kappa_n.
double zador_lb_mse(int n, double mse);
/// Per-dimension gap between the Shannon and Zador redundancies,
/// (1/2) log(2 pi e / (n+2)) - (1/n) log kappa_n. Independent of D.
double shannon_zador_gap(int n);

// Redundancies (bits/dimension) of a quantizer with normalized entropy h_bar.

double redundancy_max_error(double h_bar, int n, double r);
double shannon_red_mse(double h_bar, int n, double mse);
double zador_red_mse(double h_bar, int n, double mse);

// Lattice quantizers (bits/dimension).

/// Max-error redundancy of the Voronoi quantizer: (1/n) log Theta.
double lattice_covering_redundancy(int n, double covering_density);
/// Shannon MSE redundancy: (1/2) log(2 pi e G_n).
double lattice_shannon_redundancy(double nsm);
/// Zador MSE redundancy: (1/2) log((n+2) G_n) + (1/n) log kappa_n.
double lattice_zador_redundancy(int n, double nsm);
/// Zador's lower bound on the NSM, 1 / ((n+2) kappa_n^(2/n)).
double zador_nsm_lower_bound(int n);

// Achievability curves (bits/dimension).

/// log n / n + log(sqrt(2 pi e)) log log n / n, n >= 2.
double rogers_bound(int n);
/// (1/2) log((n+2) Gamma(2/n + 1) / n).
double zador_ub(int n);
/// (1/2) log((n+2) / (n sinc(2/n))), finite for n >= 3; stated for n >= 8.
double ordentlich_ub(int n);
/// The closed-form relaxation (1/n + 4/n^2 + 8/n^3) log e.
double ordentlich_relaxed(int n);

// Rejection-sampled quantizers.

/// Normalized-entropy bound for the ball of radius r against a cell of
/// packing density delta. tight = true keeps the geometric-entropy term
/// -((1-delta)/delta) log(1-delta); false replaces it with log e.
double rsuq_norment_ub(double delta, int n, double r, bool tight);
double rsuq_norment_ub(const Lattice& lat, double r, bool tight);
/// Max-error (equivalently Zador MSE) redundancy of ball RSUQ,
/// bits/dimension: the correction term divided by n.
double rsuq_redundancy(double delta, int n, bool tight);
/// E||Z||^2 for Z uniform on r·B^n: n r^2 / (n + 2).
double ball_mse(int n, double r);
/// NSM of the n-ball, Gamma(n/2+1)^(2/n) / ((n+2) pi).
double ball_nsm(int n);

struct UniversalBoundTerms {
  double neg_log_p;
  double capacity_bound;  // (n/2) log(4 pi e G_n(ball))
  double log_e;
  double total() const { return neg_log_p + capacity_bound + log_e; }
};
/// Computable part of R(D) - log p + C(D) + log e for ball RSUQ; R(D) is
/// left to the caller.
UniversalBoundTerms universal_bound_terms(int n, double p);

/// Smoothness slack for Gaussian inputs:
/// eps / lambda_min (E||X|| + eps / 2), converted from nats to bits.
double gaussian_delta_eps(double eps, double sigma_min_eigenvalue, double mean_norm);

// Layered entropy.

/// h_L of N(0, I_n) by adaptive Gauss-Kronrod quadrature.
double gaussian_layered_entropy(int n, double rel_tol = 1e-8);
/// h of N(0, I_n): (n/2) log(2 pi e).
double gaussian_differential_entropy(int n);
/// Order-infinity Renyi entropy -log sup f.
double h_inf_bound(double density_sup);
double gaussian_h_inf(int n);

enum class ExcessVariant { Lower, Lrsuq, Lspq };
/// Normalized excess information for the Gaussian channel, bits/dimension.
/// Lower: (h - h_L)/n. Lrsuq adds log e / n except at n = 1, where the
/// layered quantizer needs no rejection step. Lspq: (1.617 n + 4 - h_L + h)/n.
double excess_info(int n, ExcessVariant variant);

/// Adaptive 7/15-point Gauss-Kronrod quadrature on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol, double abs_tol = 0.0);

// Per-dimension constants of the best lattices known, used by the curve
// tables.

struct RegistryEntry {
  int n = 0;
  std::optional<double> packing_density;
  std::optional<double> covering_density;
  std::optional<double> nsm;
  std::string source;
};

class ConstantsRegistry {
 public:
  /// Analytically known entries for n = 1, 2, 3, 4, 8.
  static ConstantsRegistry builtin();
  /// CSV rows "n,delta,theta,nsm,source-tag"; empty fields are allowed and
  /// a header line starting with "n" is skipped.
  static ConstantsRegistry from_csv(std::istream& in);
  static ConstantsRegistry from_csv_file(const std::string& path);

  /// Inserts or replaces the row for entry.n after checking
  /// delta <= 1 <= Theta and G_n >= Zador's lower bound.
  void add(const RegistryEntry& entry);
  void merge(const ConstantsRegistry& other);
  const RegistryEntry* find(int n) const;
  const std::vector<RegistryEntry>& entries() const { return entries_; }

 private:
  std::vector<RegistryEntry> entries_;
};

struct BoundsEntry {
  std::string quantity;
  double value_bits;
  std::string tag;
};

struct BoundsReport {
  int n = 0;
  std::vector<BoundsEntry> entries;

  const BoundsEntry* find(const std::string& quantity) const;
  double value(const std::string& quantity) const;
};

enum class BoundsTable { Figure2Left, Figure2Right, Table1 };

BoundsTable parse_bounds_table(const std::string& name);

/// Evaluates a table for each dimension. Dimensions missing from the
/// registry get only the lattice-independent curves; they are listed in
/// `missing` when provided.
std::vector<BoundsReport> build_bounds_table(BoundsTable table, const std::vector<int>& dims,
                                             const ConstantsRegistry& registry, std::vector<int>* missing = nullptr);

/// CSV with header "n,quantity,value_bits,equation_tag", LF line endings,
/// locale-independent number formatting.
void write_bounds_csv(std::ostream& out, const std::vector<BoundsReport>& reports);

/// Shortest round-trip decimal form of v, independent of the locale.
std::string format_double(double v);

}  // namespace rsuq

#endif  // RSUQ_BOUNDS_HPP_
