#include "kpm/lethality.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kpm {

WarheadModel WarheadModel::cookie_cutter(double r_sk) {
    WarheadModel m{CookieCutter{r_sk}};
    m.validate();
    return m;
}

WarheadModel WarheadModel::probabilistic(double mu_w, double sigma_w) {
    WarheadModel m{Probabilistic{mu_w, sigma_w}};
    m.validate();
    return m;
}

WarheadModel WarheadModel::preset(const std::string& name) {
    if (name == "htk") return probabilistic(0.5, 0.01);
    if (name == "small") return probabilistic(5.0, 0.5);
    if (name == "medium") return probabilistic(10.0, 0.5);
    if (name == "large") return probabilistic(15.0, 0.5);
    throw std::invalid_argument("unknown warhead preset '" + name + "'");
}

std::vector<std::string> WarheadModel::preset_names() { return {"htk", "small", "medium", "large"}; }

void WarheadModel::validate() const {
    if (const auto* cc = std::get_if<CookieCutter>(&variant)) {
        if (!(cc->r_sk > 0.0)) throw std::invalid_argument("warhead: r_sk must be positive");
    } else {
        const auto& p = std::get<Probabilistic>(variant);
        if (!(p.mu_w > 0.0)) throw std::invalid_argument("warhead: mu_w must be positive");
        if (!(p.sigma_w > 0.0)) throw std::invalid_argument("warhead: sigma_w must be positive");
    }
}

std::string WarheadModel::describe() const {
    std::ostringstream os;
    if (const auto* cc = std::get_if<CookieCutter>(&variant))
        os << "CC(r_sk=" << cc->r_sk << ")";
    else {
        const auto& p = std::get<Probabilistic>(variant);
        os << "PLM(mu_w=" << p.mu_w << ",sigma_w=" << p.sigma_w << ")";
    }
    return os.str();
}

double kill_prob(const WarheadModel& model, double miss) {
    if (miss < 0.0) throw std::domain_error("kill_prob: negative miss distance");
    if (const auto* cc = std::get_if<CookieCutter>(&model.variant)) return miss <= cc->r_sk ? 1.0 : 0.0;
    const auto& p = std::get<Probabilistic>(model.variant);
    // erfc keeps the far tail from rounding to exactly 0 or 1 too early.
    return 0.5 * std::erfc((miss - p.mu_w) / (std::sqrt(2.0) * p.sigma_w));
}

double miss_prob(const WarheadModel& model, double miss) {
    if (miss < 0.0) throw std::domain_error("miss_prob: negative miss distance");
    if (const auto* cc = std::get_if<CookieCutter>(&model.variant)) return miss <= cc->r_sk ? 0.0 : 1.0;
    const auto& p = std::get<Probabilistic>(model.variant);
    return 0.5 * std::erfc(-(miss - p.mu_w) / (std::sqrt(2.0) * p.sigma_w));
}

double r_eff(const Probabilistic& model, double n_sigma) {
    if (!(n_sigma > 0.0)) throw std::domain_error("r_eff: n_sigma must be positive");
    const double r = model.mu_w - n_sigma * model.sigma_w;
    if (!(r > 0.0)) throw std::domain_error("r_eff: warhead too weak for the requested confidence");
    return r;
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double design_radius(std::span<const double> samples, double kappa) {
    if (samples.empty()) throw std::invalid_argument("design_radius: no miss samples");
    if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("design_radius: kappa must lie in (0, 1]");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    const double dn = static_cast<double>(n);
    auto rank = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(kappa * dn)), 1, n);
    // Settle rounding in kappa*n with the same comparison the CDF uses.
    while (rank > 1 && static_cast<double>(rank - 1) / dn >= kappa) --rank;
    while (rank < n && static_cast<double>(rank) / dn < kappa) ++rank;
    return sorted[rank - 1];
}

std::vector<CdfPoint> empirical_cdf(std::span<const double> samples) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<CdfPoint> out;
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
        out.push_back({sorted[i], static_cast<double>(i + 1) / n});
    }
    return out;
}

double empirical_cdf_at(std::span<const double> sorted, double m) {
    if (sorted.empty()) return 0.0;
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), m);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

}  // namespace kpm
