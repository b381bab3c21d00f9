#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace kpm {

struct CookieCutter {
    double r_sk = 10.0;  // [m]
};

// Erf-shaped damage function with mean lethal miss mu_w and spread sigma_w.
struct Probabilistic {
    double mu_w = 10.0;    // [m]
    double sigma_w = 0.5;  // [m]
};

struct WarheadModel {
    std::variant<CookieCutter, Probabilistic> variant;

    static WarheadModel cookie_cutter(double r_sk);
    static WarheadModel probabilistic(double mu_w, double sigma_w);
    // Named presets: htk, small, medium, large.
    static WarheadModel preset(const std::string& name);
    static std::vector<std::string> preset_names();

    void validate() const;
    std::string describe() const;
};

double kill_prob(const WarheadModel& model, double miss);
double miss_prob(const WarheadModel& model, double miss);

// mu_w - n_sigma sigma_w. Throws std::domain_error when n_sigma <= 0 or the radius is not positive.
double r_eff(const Probabilistic& model, double n_sigma);

// Standard normal CDF.
double std_normal_cdf(double x);

/// Smallest sample m with F_hat(m) >= kappa under the right-continuous empirical
/// CDF, i.e. the ceil(kappa N)-th order statistic.
double design_radius(std::span<const double> miss_samples, double kappa);

struct CdfPoint {
    double miss = 0.0;
    double cdf = 0.0;
};

// Sorted support with F_hat at each distinct value.
std::vector<CdfPoint> empirical_cdf(std::span<const double> miss_samples);

// F_hat(m) = fraction of samples <= m.
double empirical_cdf_at(std::span<const double> sorted_samples, double m);

}  // namespace kpm
