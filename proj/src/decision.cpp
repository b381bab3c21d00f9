#include "kpm/decision.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "kpm/kernels.hpp"

namespace kpm {

GameCloud to_game_cloud(const ParticleCloud& cloud, const OwnState& own, const Speeds& speeds,
                        const GameParams& params, Exec exec) {
    GameCloud g;
    g.modes = cloud.modes;
    g.points.resize(cloud.size());
    game_point_kernel(cloud.columns(), own, speeds, params, g.points, exec);
    g.mode = cloud.mode;
    g.weight = cloud.weight;
    return g;
}

std::string hypothesis_label(int h, int modes) {
    std::ostringstream os;
    os << "H" << (h + 1);
    if (h == 0) os << "(D1+)";
    else if (h == modes + 1) os << "(D1-)";
    else os << "(D0,mode" << h << ")";
    return os.str();
}

namespace {

int hypothesis_of(Region r, int mode, int modes) {
    switch (r) {
        case Region::UpperRegular: return 0;
        case Region::LowerRegular: return modes + 1;
        case Region::Singular: return 1 + mode;
    }
    return 0;
}

}  // namespace

HypothesisPartition partition(const GameCloud& cloud, const GameSpace& game) {
    HypothesisPartition p;
    p.modes = cloud.modes;
    p.assignment.resize(cloud.size());
    p.region.resize(cloud.size());
    p.members.assign(static_cast<std::size_t>(p.count()), {});
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Region r = game.classify(cloud.points[i]);
        const int m = cloud.mode[i];
        if (m < 0 || m >= cloud.modes) throw std::invalid_argument("partition: particle mode out of range");
        const int h = hypothesis_of(r, m, cloud.modes);
        p.region[i] = r;
        p.assignment[i] = h;
        p.members[static_cast<std::size_t>(h)].push_back(i);
    }
    return p;
}

std::vector<double> likelihoods(const HypothesisPartition& part, std::span<const double> weights) {
    std::vector<double> l(static_cast<std::size_t>(part.count()), 0.0);
    for (std::size_t i = 0; i < part.assignment.size(); ++i) l[static_cast<std::size_t>(part.assignment[i])] += weights[i];
    return l;
}

std::string CostFunctional::describe() const {
    return kind == CostKind::MissDistance ? std::string("|Ms|") : "Pm[" + warhead.describe() + "]";
}

double switch_probability(std::span<const double> mode_probabilities, const Tpm& tpm) {
    double p = 0.0;
    for (int r = 0; r < tpm.modes(); ++r) p += mode_probabilities[static_cast<std::size_t>(r)] * (1.0 - tpm(r, r));
    return p;
}

PriorBreakdown priors(const ParticleCloud& prev, const ModePropagation& prop, const Tpm& tpm, const OwnState& own_now,
                      const Speeds& speeds, const GameSpace& game, Exec exec) {
    const int modes = prev.modes;
    const std::size_t n = prev.size();
    const std::size_t nh = static_cast<std::size_t>(modes + 2);
    if (prop.n() != n) throw std::invalid_argument("priors: propagation does not match cloud");

    std::vector<std::vector<GamePoint>> pts(static_cast<std::size_t>(modes), std::vector<GamePoint>(n));
    for (int r = 0; r < modes; ++r)
        game_point_kernel(prop.states[static_cast<std::size_t>(r)], own_now, speeds, game.params(),
                          pts[static_cast<std::size_t>(r)], exec);

    PriorBreakdown out;
    out.given_switch.assign(nh, 0.0);
    out.given_no_switch.assign(nh, 0.0);
    double mass_sw = 0.0, mass_nsw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int from = prev.mode[i];
        const double w = prev.weight[i];
        for (int to = 0; to < modes; ++to) {
            const double pt = tpm(from, to);
            if (pt == 0.0 && to != from) continue;
            const GamePoint& g = pts[static_cast<std::size_t>(to)][i];
            const auto h = static_cast<std::size_t>(hypothesis_of(game.classify(g), to, modes));
            if (to == from) {
                out.given_no_switch[h] += w * pt;
                mass_nsw += w * pt;
            } else {
                out.given_switch[h] += w * pt;
                mass_sw += w * pt;
            }
        }
    }
    const double total = mass_sw + mass_nsw;
    out.p_switch = total > 0.0 ? mass_sw / total : 0.0;
    if (mass_sw > 0.0)
        for (double& v : out.given_switch) v /= mass_sw;
    if (mass_nsw > 0.0)
        for (double& v : out.given_no_switch) v /= mass_nsw;
    out.priors.assign(nh, 0.0);
    for (std::size_t h = 0; h < nh; ++h)
        out.priors[h] = out.given_switch[h] * out.p_switch + out.given_no_switch[h] * (1.0 - out.p_switch);
    return out;
}

PriorBreakdown priors(const ParticleCloud& prev, const OwnState& own_prev, double u_m, double dt,
                      const LagModel& model, const std::vector<double>& mode_commands, const Tpm& tpm,
                      const OwnState& own_now, const GameSpace& game) {
    const ModePropagation prop = propagate_all_modes(prev, own_prev, u_m, dt, model, mode_commands, Exec::Serial);
    return priors(prev, prop, tpm, own_now, model.speeds, game);
}

double empty_hypothesis_command(int h, int modes) {
    if (h == 0) return 1.0;
    if (h == modes + 1) return -1.0;
    return 0.0;
}

namespace {

struct CommandGroup {
    double u;
    double w;
};

// Within-hypothesis normalized pursuer commands, merged when equal.
std::vector<CommandGroup> pursuer_commands(const std::vector<std::size_t>& members, const GameCloud& cloud,
                                           const std::vector<double>& u, double mass, std::size_t max_rep) {
    std::vector<CommandGroup> g;
    if (max_rep > 0 && members.size() > max_rep) {
        // Systematic weight-proportional representatives with a fixed offset.
        const double step = mass / static_cast<double>(max_rep);
        double target = 0.5 * step;
        double cum = 0.0;
        std::size_t k = 0;
        for (std::size_t rep = 0; rep < max_rep; ++rep) {
            while (k < members.size() && cum + cloud.weight[members[k]] < target) cum += cloud.weight[members[k++]];
            const std::size_t idx = members[std::min(k, members.size() - 1)];
            g.push_back({u[idx], 1.0 / static_cast<double>(max_rep)});
            target += step;
        }
    } else {
        g.reserve(members.size());
        for (std::size_t idx : members) g.push_back({u[idx], cloud.weight[idx] / mass});
    }
    std::sort(g.begin(), g.end(), [](const CommandGroup& a, const CommandGroup& b) { return a.u < b.u; });
    std::vector<CommandGroup> merged;
    for (const auto& c : g) {
        if (!merged.empty() && merged.back().u == c.u) merged.back().w += c.w;
        else merged.push_back(c);
    }
    return merged;
}

}  // namespace

CostMatrix costs(const HypothesisPartition& part, const GameCloud& cloud, const CostFunctional& J,
                 const GameSpace& game, const CostOptions& opt) {
    const int nh = part.count();
    const auto n = cloud.size();
    const GameParams& gp = game.params();
    if (opt.mode_commands.size() != static_cast<std::size_t>(cloud.modes))
        throw std::invalid_argument("costs: one evader command per mode required");

    const std::vector<double> mass = likelihoods(part, cloud.weight);
    CostMatrix c(static_cast<std::size_t>(nh), std::vector<double>(static_cast<std::size_t>(nh), 0.0));

    // Per-particle pursuer command, and the affine map u -> propagated ZEM.
    std::vector<double> u(n), base(n), slope(n), g_end(n), zstar(n);
    const double e = gp.eps;
    const double scale = gp.zem_scale();
    for (std::size_t i = 0; i < n; ++i) {
        const GamePoint& p = cloud.points[i];
        u[i] = game.command(p, part.region[i]);
        const double v = part.region[i] == Region::Singular
                             ? opt.mode_commands[static_cast<std::size_t>(cloud.mode[i])]
                             : sign0(p.z_bar);
        const double te = std::max(0.0, p.tau - opt.horizon);
        const double dp = psi_integral(p.tau) - psi_integral(te);
        const double de = psi_integral(p.tau / e) - psi_integral(te / e);
        base[i] = p.z_bar + e * e * v * de;
        slope[i] = gp.mu * dp;
        g_end[i] = gamma_integral(te, gp);
        zstar[i] = te >= game.tau_s() ? game.singular_boundary(te) : -1.0;
    }
    const double singular_cost = J(game.singular_miss());

    // Regular-region miss at propagated ZEM z of particle j (same arithmetic as miss_value).
    auto regular_miss = [&](std::size_t j, double z) { return std::max(0.0, scale * (std::abs(z) - g_end[j])); };
    auto cost_at = [&](std::size_t j, double uu) {
        const double z = base[j] - slope[j] * uu;
        return std::abs(z) < zstar[j] ? singular_cost : J(regular_miss(j, z));
    };

    // Pursuer command groups and their weighted mean, per deciding hypothesis.
    std::vector<std::vector<CommandGroup>> groups(static_cast<std::size_t>(nh));
    std::vector<double> u_mean(static_cast<std::size_t>(nh), 0.0);
    for (int i = 0; i < nh; ++i) {
        auto& g = groups[static_cast<std::size_t>(i)];
        const double mi = mass[static_cast<std::size_t>(i)];
        if (mi > 0.0) g = pursuer_commands(part.members[static_cast<std::size_t>(i)], cloud, u, mi, opt.max_representatives);
        else g.push_back({empty_hypothesis_command(i, part.modes), 1.0});
        double sw = 0.0, su = 0.0;
        for (const auto& x : g) {
            sw += x.w;
            su += x.w * x.u;
        }
        u_mean[static_cast<std::size_t>(i)] = su / sw;
    }
    const bool linear_cost = J.kind == CostKind::MissDistance;

    for (int j = 0; j < nh; ++j) {
        const auto& hj = part.members[static_cast<std::size_t>(j)];
        const double mj = mass[static_cast<std::size_t>(j)];
        if (!(mj > 0.0)) continue;  // zero likelihood: entries are arbitrary, left at 0

        double cjj = 0.0;
        for (std::size_t idx : hj)
            cjj += cloud.weight[idx] / mj * J(game.miss_value(cloud.points[idx], part.region[idx]));
        c[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = cjj;

        for (int i = 0; i < nh; ++i) {
            if (i == j) continue;
            const auto& gi = groups[static_cast<std::size_t>(i)];
            const double u_lo = gi.front().u;
            const double u_hi = gi.back().u;

            double cij = 0.0;
            for (std::size_t jp : hj) {
                const double wj = cloud.weight[jp] / mj;
                const double z_lo = base[jp] - slope[jp] * u_lo;
                const double z_hi = base[jp] - slope[jp] * u_hi;
                // z is affine in u, so the extreme commands bound every other one.
                const bool in_lo = std::abs(z_lo) < zstar[jp], in_hi = std::abs(z_hi) < zstar[jp];
                if (in_lo && in_hi) {
                    cij += wj * singular_cost;
                    continue;
                }
                if (!in_lo && !in_hi && sign0(z_lo) == sign0(z_hi)) {
                    // One side of the band throughout: the miss is monotone in u.
                    const double m_lo = regular_miss(jp, z_lo), m_hi = regular_miss(jp, z_hi);
                    if (linear_cost && scale * (std::abs(z_lo) - g_end[jp]) >= 0.0 &&
                        scale * (std::abs(z_hi) - g_end[jp]) >= 0.0) {
                        cij += wj * regular_miss(jp, base[jp] - slope[jp] * u_mean[static_cast<std::size_t>(i)]);
                        continue;
                    }
                    const double c_lo = J(m_lo);
                    if (c_lo == J(m_hi)) {
                        cij += wj * c_lo;
                        continue;
                    }
                }
                double inner = 0.0;
                for (const auto& g : gi) inner += g.w * cost_at(jp, g.u);
                cij += wj * inner;
            }
            c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = cij;
        }
    }
    return c;
}

std::vector<double> risks(std::span<const double> p, std::span<const double> l, const CostMatrix& c) {
    const std::size_t m = p.size();
    std::vector<double> out(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (j != i) out[i] += p[j] * l[j] * (c[i][j] - c[j][j]);
    return out;
}

GamePoint weighted_mean_point(const GameCloud& cloud) {
    GamePoint m{0.0, 0.0};
    double total = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        m.z_bar += cloud.weight[i] * cloud.points[i].z_bar;
        m.tau += cloud.weight[i] * cloud.points[i].tau;
        total += cloud.weight[i];
    }
    if (total > 0.0) {
        m.z_bar /= total;
        m.tau /= total;
    }
    return m;
}

double command(const RiskReport& report, const HypothesisPartition& part, const GameCloud& cloud,
               const GameSpace& game) {
    if (report.fallback || report.chosen < 0) return game.command(weighted_mean_point(cloud));
    const int h = report.chosen;
    if (h == part.upper()) return 1.0;
    if (h == part.lower()) return -1.0;
    const auto& members = part.members[static_cast<std::size_t>(h)];
    double mass = 0.0;
    for (std::size_t i : members) mass += cloud.weight[i];
    if (!(mass > 0.0)) return empty_hypothesis_command(h, part.modes);
    double u = 0.0;
    for (std::size_t i : members) u += cloud.weight[i] / mass * game.command(cloud.points[i], part.region[i]);
    return sat(u);
}

GameCloud example_cloud(const GameSpace& game, int singular) {
    if (singular < 2) throw std::invalid_argument("example_cloud: need at least two singular particles");
    const double tau = 2.0;
    const double scale = game.params().zem_scale();
    const double g = gamma_integral(tau, game.params());
    const double zs = game.singular_boundary(tau);
    GameCloud c;
    c.modes = 2;
    auto add = [&](double z, int mode) {
        c.points.push_back({z, tau});
        c.mode.push_back(mode);
        c.weight.push_back(1.0);
    };
    for (double m : {8.0, 8.8, 9.5, 10.5}) add(m / scale + g, 0);
    for (int k = 0; k < 16; ++k) add(-((1.0 + 0.25 * k) / scale + g), 1);
    for (int k = 0; k < singular; ++k) add(zs * (-0.45 + 0.9 * k / (singular - 1.0)), k % 2);
    for (double& w : c.weight) w /= static_cast<double>(c.size());
    return c;
}

RiskReport decide(const GameCloud& cloud, std::span<const double> priors_in, const CostFunctional& functional,
                  const GameSpace& game, const CostOptions& options) {
    const HypothesisPartition part = partition(cloud, game);
    RiskReport rep;
    rep.priors.assign(priors_in.begin(), priors_in.end());
    if (rep.priors.size() != static_cast<std::size_t>(part.count()))
        throw std::invalid_argument("decide: prior vector size does not match hypothesis count");
    rep.likelihoods = likelihoods(part, cloud.weight);
    rep.cost = costs(part, cloud, functional, game, options);
    rep.risks = risks(rep.priors, rep.likelihoods, rep.cost);
    // All-zero risks and a tied minimum both leave the rule indifferent.
    const auto best = std::min_element(rep.risks.begin(), rep.risks.end());
    const auto ties = std::count_if(rep.risks.begin(), rep.risks.end(), [&](double v) { return v - *best <= kZeroRisk; });
    rep.fallback = ties > 1 ||
                   std::all_of(rep.risks.begin(), rep.risks.end(), [](double v) { return std::abs(v) <= kZeroRisk; });
    if (!rep.fallback) rep.chosen = static_cast<int>(best - rep.risks.begin());
    rep.command = command(rep, part, cloud, game);
    return rep;
}

}  // namespace kpm
