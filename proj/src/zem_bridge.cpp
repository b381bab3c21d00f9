#include "kpm/zem_bridge.hpp"

#include <cmath>

namespace kpm {

GamePoint zem_point(const RelativeState& rel, const OwnState& own, const Speeds& speeds,
                    const GameParams& params, bool* closing) {
    const ClosingRates c = closing_rates(rel, own, speeds);
    const double scale = params.zem_scale();
    if (!(c.v_rho < 0.0) || !(rel.rho > 0.0)) {
        if (closing) *closing = false;
        const double s = c.v_lambda >= 0.0 ? 1.0 : -1.0;
        return {s * std::abs(rel.rho) / scale, 0.0};
    }
    if (closing) *closing = true;
    const double t_go = -rel.rho / c.v_rho;
    const double a_m_perp = own.a_m * std::cos(c.delta_m);
    const double a_t_perp = rel.a_t * std::cos(c.delta_t);
    const double z = zem_dimensional(0.0, c.v_lambda, a_m_perp, a_t_perp, t_go, params);
    return {z / scale, t_go / params.tau_m};
}

GamePoint zem_from_polar(const RelativeState& rel, const OwnState& own, const Speeds& speeds,
                         const GameParams& params) {
    bool closing = false;
    const GamePoint p = zem_point(rel, own, speeds, params, &closing);
    if (!closing) throw EngagementOver("zem_from_polar: range rate is not negative, no time-to-go");
    return p;
}

}  // namespace kpm
