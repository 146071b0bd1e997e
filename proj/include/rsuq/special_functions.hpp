#ifndef RSUQ_SPECIAL_FUNCTIONS_HPP_
#define RSUQ_SPECIAL_FUNCTIONS_HPP_

namespace rsuq {

inline constexpr double kLog2E = 1.4426950408889634074;
inline constexpr double kLn2 = 0.6931471805599453094;
inline constexpr double kPi = 3.14159265358979323846;

/// Natural log of the volume of the unit n-ball, via log-Gamma so that
/// large n does not overflow.
double log_unit_ball_volume(int n);

/// Same quantity in bits.
double log2_unit_ball_volume(int n);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Inverse of P(a, .): returns x with P(a, x) = p, for p in (0, 1).
double gamma_p_inv(double a, double p);

double chi_square_cdf(double dof, double x);
double chi_square_sf(double dof, double x);

double normal_cdf(double x);

/// Survival function of the Kolmogorov distribution,
/// Pr[sup |B(t)| > lambda] for the Brownian bridge B.
double kolmogorov_sf(double lambda);

/// Asymptotic p-value of a KS statistic `d` computed from an effective
/// sample size `n_eff` (Stephens' small-sample correction).
double ks_p_value(double d, double n_eff);

/// sin(pi t) / (pi t), with sinc(0) = 1.
double sinc(double t);

}  // namespace rsuq

#endif  // RSUQ_SPECIAL_FUNCTIONS_HPP_
