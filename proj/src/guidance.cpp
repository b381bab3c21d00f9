#include "kpm/guidance.hpp"

#include <algorithm>
#include <stdexcept>

#include "kpm/zem_bridge.hpp"

namespace kpm {

void GuidanceVariant::validate() const {
    if (!(horizon_s > 0.0)) throw std::invalid_argument("guidance: horizon must be positive");
    if (!(k_lin > 0.0 && k_lin <= 1.0)) throw std::invalid_argument("guidance: k_lin must lie in (0, 1]");
    warhead.validate();
}

std::string GuidanceVariant::kind_name(Kind k) {
    switch (k) {
        case Kind::Regular: return "regular";
        case Kind::EA: return "ea";
        case Kind::KPM: return "kpm";
    }
    return "?";
}

GuidanceVariant::Kind GuidanceVariant::parse_kind(const std::string& s) {
    if (s == "regular") return Kind::Regular;
    if (s == "ea") return Kind::EA;
    if (s == "kpm") return Kind::KPM;
    throw std::invalid_argument("unknown guidance variant '" + s + "' (expected regular|ea|kpm)");
}

std::string GuidanceVariant::name() const { return "DGL1-" + kind_name(kind); }

CostFunctional GuidanceVariant::cost() const {
    return kind == Kind::KPM ? CostFunctional::miss_probability(warhead) : CostFunctional::miss_distance();
}

namespace {

GuidanceOutput finish(double u_bar, const GameSpace& game) {
    GuidanceOutput out;
    out.u_bar = sat(u_bar);
    out.u_m = out.u_bar * game.params().a_m_max();
    return out;
}

GamePoint map_point(const GameCloud& cloud) {
    const auto it = std::max_element(cloud.weight.begin(), cloud.weight.end());
    return cloud.points[static_cast<std::size_t>(it - cloud.weight.begin())];
}

}  // namespace

GuidanceOutput guide_game_cloud(const GuidanceVariant& v, const GameCloud& cloud, std::span<const double> priors,
                                const GameSpace& game) {
    if (cloud.size() == 0) throw std::invalid_argument("guide: empty cloud");
    if (v.kind == GuidanceVariant::Kind::Regular) {
        const GamePoint p = v.regular_point == GuidanceVariant::RegularPoint::Mean ? weighted_mean_point(cloud)
                                                                                   : map_point(cloud);
        return finish(game.command(p), game);
    }
    CostOptions opt;
    opt.horizon = v.horizon_s / game.params().tau_m;
    opt.max_representatives = v.max_representatives;
    opt.mode_commands.assign(static_cast<std::size_t>(cloud.modes), 0.0);
    if (cloud.modes == 2) opt.mode_commands = {1.0, -1.0};
    RiskReport rep = decide(cloud, priors, v.cost(), game, opt);
    GuidanceOutput out = finish(rep.command, game);
    out.report = std::move(rep);
    return out;
}

GuidanceOutput guide(const GuidanceVariant& v, const GuidanceInputs& in, const GameSpace& game, const Tpm& tpm,
                     const Speeds& speeds, Exec exec) {
    if (in.cloud == nullptr) throw std::invalid_argument("guide: no cloud");
    const ParticleCloud& cloud = *in.cloud;

    bool closing = false;
    zem_point(cloud.weighted_mean(), in.own, speeds, game.params(), &closing);
    if (!closing) {
        GuidanceOutput out;
        out.terminal = true;
        return out;
    }

    const GameCloud gc = to_game_cloud(cloud, in.own, speeds, game.params(), exec);
    if (v.kind == GuidanceVariant::Kind::Regular) return guide_game_cloud(v, gc, {}, game);

    std::vector<double> pri;
    if (in.prev != nullptr && in.prev_propagated != nullptr) {
        pri = priors(*in.prev, *in.prev_propagated, tpm, in.own, speeds, game, exec).priors;
    } else if (in.first_step_priors != nullptr) {
        pri = *in.first_step_priors;
    } else {
        pri = likelihoods(partition(gc, game), gc.weight);
    }
    return guide_game_cloud(v, gc, pri, game);
}

}  // namespace kpm
