#pragma once

#include "condense/rng.hpp"

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace condense {

// Isotropic Gaussian kernel with covariance sigma^2 I.
double normal_pdf(std::span<const double> z, std::span<const double> mean, double sigma);
double log_normal_pdf(std::span<const double> z, std::span<const double> mean, double sigma);

// Scalar shortcut, no validation; hot loops call this.
inline double log_normal_pdf_1d(double z, double mean, double sigma);

double sample_exponential(RngStream& rng);
// Marsaglia-Tsang squeeze; shapes below 1 use the U^{1/a} boost.
double sample_gamma(double shape, double rate, RngStream& rng);
double sample_beta(double a, double b, RngStream& rng);

// sigma with 1/sigma ~ Gamma(alpha, rate beta); density beta^a/G(a) s^{-a-1} e^{-beta/s}.
double sample_inverse_gamma(double alpha, double beta, RngStream& rng);

// beta / (E_1 + ... + E_alpha) with unit-rate exponential summands.
double ig_from_exponentials(unsigned alpha, double beta, RngStream& rng);

// Normal N(mean, sd^2) truncated to [lo, hi], by inversion.
double sample_truncated_normal(double mean, double sd, double lo, double hi, RngStream& rng);

double normal_cdf(double x, double mean = 0.0, double sd = 1.0);
double gamma_cdf(double x, double shape, double rate);
double inverse_gamma_cdf(double x, double alpha, double beta);
double beta_cdf(double x, double a, double b);

// sup_x |F_m(x) - cdf(x)|; samples must be sorted ascending.
double ks_statistic(std::span<const double> sorted_samples,
                    const std::function<double(double)>& cdf);
// Two-sample Kolmogorov-Smirnov statistic; both inputs sorted.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

// Asymptotic Kolmogorov critical value c(level) (1.6276 at 0.01).
double kolmogorov_critical(double level);
bool ks_passes(double statistic, std::size_t m, double level = 0.01);
bool ks_two_sample_passes(double statistic, std::size_t m, std::size_t n, double level = 0.01);

double log_sum_exp(std::span<const double> values);

// ---------------------------------------------------------------------------

inline double log_normal_pdf_1d(double z, double mean, double sigma) {
    constexpr double half_log_2pi = 0.91893853320467274178;
    const double u = (z - mean) / sigma;
    return -half_log_2pi - std::log(sigma) - 0.5 * u * u;
}

} // namespace condense
