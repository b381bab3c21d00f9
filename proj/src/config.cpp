#include "kpm/config.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"

namespace kpm {

using nlohmann::json;

namespace {

// Reads keys from one JSON object, remembering which ones were consumed.
class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ConfigError("config: section '" + name_ + "' must be an object");
    }

    template <class T>
    void get(const std::string& key, T& out) {
        if (!j_.contains(key)) return;
        used_.insert(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError("config: " + name_ + "." + key + ": " + e.what());
        }
    }

    // Acceleration in m/s^2 under `key`, or in g under `key_g`; not both.
    void accel(const std::string& key, double& out) {
        const std::string kg = key + "_g";
        if (j_.contains(key) && j_.contains(kg))
            throw ConfigError("config: " + name_ + " sets both " + key + " and " + kg);
        get(key, out);
        if (j_.contains(kg)) {
            double g = 0.0;
            get(kg, g);
            out = g * kGravity;
        }
    }

    const json* sub(const std::string& key) {
        if (!j_.contains(key)) return nullptr;
        used_.insert(key);
        return &j_.at(key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError("config: unknown key '" + name_ + "." + it.key() + "'");
    }

private:
    const json& j_;
    std::string name_;
    std::set<std::string> used_;
};

WarheadModel warhead_from_json(const json& j) {
    if (j.is_string()) return WarheadModel::preset(j.get<std::string>());
    Section s(j, "guidance.warhead");
    std::string model = "plm";
    s.get("model", model);
    WarheadModel w;
    if (model == "plm") {
        Probabilistic p;
        s.get("mu_w", p.mu_w);
        s.get("sigma_w", p.sigma_w);
        w = WarheadModel::probabilistic(p.mu_w, p.sigma_w);
    } else if (model == "cookie_cutter") {
        CookieCutter c;
        s.get("r_sk", c.r_sk);
        w = WarheadModel::cookie_cutter(c.r_sk);
    } else {
        throw ConfigError("config: unknown warhead model '" + model + "' (expected plm|cookie_cutter)");
    }
    s.finish();
    return w;
}

json warhead_to_json(const WarheadModel& w) {
    if (const auto* p = std::get_if<Probabilistic>(&w.variant))
        return {{"model", "plm"}, {"mu_w", p->mu_w}, {"sigma_w", p->sigma_w}};
    return {{"model", "cookie_cutter"}, {"r_sk", std::get<CookieCutter>(w.variant).r_sk}};
}

std::string mixing_name(MixingScheme m) { return m == MixingScheme::Interaction ? "interaction" : "markov_jump"; }

MixingScheme parse_mixing(const std::string& s) {
    if (s == "interaction") return MixingScheme::Interaction;
    if (s == "markov_jump") return MixingScheme::MarkovJump;
    throw ConfigError("config: unknown mixing scheme '" + s + "' (expected interaction|markov_jump)");
}

std::string jitter_name(JitterScheme j) {
    switch (j) {
        case JitterScheme::EveryPredict: return "every_predict";
        case JitterScheme::AfterResample: return "after_resample";
        case JitterScheme::Off: return "off";
    }
    return "?";
}

JitterScheme parse_jitter(const std::string& s) {
    if (s == "every_predict") return JitterScheme::EveryPredict;
    if (s == "after_resample") return JitterScheme::AfterResample;
    if (s == "off") return JitterScheme::Off;
    throw ConfigError("config: unknown jitter scheme '" + s + "' (expected every_predict|after_resample|off)");
}

void read_interval(Section& s, const std::string& key, double& lo, double& hi) {
    std::vector<double> v{lo, hi};
    s.get(key, v);
    if (v.size() != 2) throw ConfigError("config: scenario." + key + " must be [lo, hi]");
    lo = v[0];
    hi = v[1];
}

json to_json(const McConfig& c) {
    const ScenarioConfig& s = c.scenario;
    const FilterConfig& f = c.filter;
    const GuidanceVariant& g = c.variant;
    json j;
    j["scenario"] = {
        {"v_m", s.v_m},
        {"v_t", s.v_t},
        {"tau_m", s.tau_m},
        {"tau_t", s.tau_t},
        {"a_m_max", s.a_m_max},
        {"a_t_max", s.a_t_max},
        {"sigma_nu", s.sigma_nu},
        {"f_hz", s.f_hz},
        {"rho0", s.rho0},
        {"gamma_t0", s.gamma_t0},
        {"heading_error", s.heading_error},
        {"a_t0", s.a_t0},
        {"substeps", s.substeps},
        {"t_cap", s.t_cap},
        {"target", target_name(s.switch_law)},
        {"nominal_switch", {s.nominal_switch_lo, s.nominal_switch_hi}},
        {"smart_switch", {s.smart_switch_lo, s.smart_switch_hi}},
    };
    j["filter"] = {
        {"particles_per_mode", f.particles_per_mode},
        {"sigma_nu", f.sigma_nu},
        {"prior_sd", {{"rho", f.prior_sd[0]}, {"lambda", f.prior_sd[1]}, {"gamma_t", f.prior_sd[2]}, {"a_t", f.prior_sd[3]}}},
        {"mixing", mixing_name(f.mixing)},
        {"jitter", jitter_name(f.jitter)},
        {"jitter_c", f.jitter_c},
        {"ess_threshold", f.ess_threshold},
        {"parallel_kernels", f.exec == Exec::Parallel},
    };
    j["guidance"] = {
        {"variant", GuidanceVariant::kind_name(g.kind)},
        {"warhead", warhead_to_json(g.warhead)},
        {"horizon_s", g.horizon_s},
        {"k_lin", g.k_lin},
        {"regular_point", g.regular_point == GuidanceVariant::RegularPoint::Mean ? "mean" : "map"},
        {"max_representatives", g.max_representatives},
    };
    j["mc"] = {
        {"n_runs", c.n_runs},
        {"base_seed", c.base_seed},
        {"parallelism", c.parallelism},
        {"tpm_stay", c.tpm_stay},
        {"scoring", c.scoring},
        {"perfect_information", c.perfect_information},
    };
    return j;
}

}  // namespace

McConfig config_from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    McConfig c;
    try {
        Section top(root, "<root>");
        if (const json* js = top.sub("scenario")) {
            ScenarioConfig& s = c.scenario;
            Section sec(*js, "scenario");
            sec.get("v_m", s.v_m);
            sec.get("v_t", s.v_t);
            sec.get("tau_m", s.tau_m);
            sec.get("tau_t", s.tau_t);
            sec.accel("a_m_max", s.a_m_max);
            sec.accel("a_t_max", s.a_t_max);
            sec.get("sigma_nu", s.sigma_nu);
            sec.get("f_hz", s.f_hz);
            sec.get("rho0", s.rho0);
            sec.get("gamma_t0", s.gamma_t0);
            sec.get("heading_error", s.heading_error);
            sec.accel("a_t0", s.a_t0);
            sec.get("substeps", s.substeps);
            sec.get("t_cap", s.t_cap);
            std::string target = target_name(s.switch_law);
            sec.get("target", target);
            s.switch_law = parse_target(target);
            read_interval(sec, "nominal_switch", s.nominal_switch_lo, s.nominal_switch_hi);
            read_interval(sec, "smart_switch", s.smart_switch_lo, s.smart_switch_hi);
            sec.finish();
        }
        if (const json* jf = top.sub("filter")) {
            FilterConfig& f = c.filter;
            Section sec(*jf, "filter");
            sec.get("particles_per_mode", f.particles_per_mode);
            sec.get("sigma_nu", f.sigma_nu);
            if (const json* jp = sec.sub("prior_sd")) {
                Section p(*jp, "filter.prior_sd");
                p.get("rho", f.prior_sd[0]);
                p.get("lambda", f.prior_sd[1]);
                p.get("gamma_t", f.prior_sd[2]);
                p.accel("a_t", f.prior_sd[3]);
                p.finish();
            }
            std::string mixing = mixing_name(f.mixing), jitter = jitter_name(f.jitter);
            sec.get("mixing", mixing);
            sec.get("jitter", jitter);
            f.mixing = parse_mixing(mixing);
            f.jitter = parse_jitter(jitter);
            sec.get("jitter_c", f.jitter_c);
            sec.get("ess_threshold", f.ess_threshold);
            bool par = f.exec == Exec::Parallel;
            sec.get("parallel_kernels", par);
            f.exec = par ? Exec::Parallel : Exec::Serial;
            sec.finish();
        }
        if (const json* jg = top.sub("guidance")) {
            GuidanceVariant& g = c.variant;
            Section sec(*jg, "guidance");
            std::string kind = GuidanceVariant::kind_name(g.kind);
            sec.get("variant", kind);
            g.kind = GuidanceVariant::parse_kind(kind);
            if (const json* jw = sec.sub("warhead")) g.warhead = warhead_from_json(*jw);
            sec.get("horizon_s", g.horizon_s);
            sec.get("k_lin", g.k_lin);
            std::string rp = g.regular_point == GuidanceVariant::RegularPoint::Mean ? "mean" : "map";
            sec.get("regular_point", rp);
            if (rp == "mean") g.regular_point = GuidanceVariant::RegularPoint::Mean;
            else if (rp == "map") g.regular_point = GuidanceVariant::RegularPoint::Map;
            else throw ConfigError("config: guidance.regular_point must be mean|map");
            sec.get("max_representatives", g.max_representatives);
            sec.finish();
        }
        if (const json* jm = top.sub("mc")) {
            Section sec(*jm, "mc");
            sec.get("n_runs", c.n_runs);
            sec.get("base_seed", c.base_seed);
            sec.get("parallelism", c.parallelism);
            sec.get("tpm_stay", c.tpm_stay);
            sec.get("scoring", c.scoring);
            sec.get("perfect_information", c.perfect_information);
            sec.finish();
        }
        top.finish();
        c.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
    }
    return c;
}

McConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

std::string canonical_json(const McConfig& cfg) { return to_json(cfg).dump(2); }

std::string config_digest(const McConfig& cfg) {
    const std::string s = to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::string manifest_json(const RunManifest& m, const McConfig& cfg) {
    json j;
    j["config_digest"] = m.digest;
    j["tool_version"] = m.tool_version;
    j["base_seed"] = m.base_seed;
    j["started_utc"] = m.started_utc;
    j["finished_utc"] = m.finished_utc;
    j["command"] = m.command;
    j["outputs"] = m.outputs;
    j["config"] = to_json(cfg);
    return j.dump(2);
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace kpm
