#include "dmpi/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dmpi {

using nlohmann::json;

namespace {

// Strict object reader: every key must be consumed, unknown keys are errors.
class StrictObject {
public:
    StrictObject(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw Error("ConfigError", where_ + " must be an object");
    }

    ~StrictObject() = default;

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& at(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key))
            throw Error("ConfigError", where_ + " is missing required key '" + key + "'");
        return j_.at(key);
    }

    template <typename T>
    T get(const std::string& key, const T& fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw Error("ConfigError", where_ + "." + key + ": " + e.what());
        }
    }

    template <typename T>
    T require(const std::string& key) {
        const json& v = at(key);
        try {
            return v.get<T>();
        } catch (const json::exception& e) {
            throw Error("ConfigError", where_ + "." + key + ": " + e.what());
        }
    }

    void finish() const {
        for (const auto& item : j_.items())
            if (seen_.find(item.key()) == seen_.end())
                throw Error("ConfigError", where_ + " has unknown key '" + item.key() + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

json grid_to_json(const SupportGrid& g) {
    return json{{"lower", g.lower}, {"upper", g.upper}, {"bins", g.bins}};
}

SupportGrid grid_from_json(const json& j, const std::string& where) {
    StrictObject o(j, where);
    SupportGrid g;
    g.lower = o.require<double>("lower");
    g.upper = o.require<double>("upper");
    g.bins = o.require<int>("bins");
    o.finish();
    g.validate();
    return g;
}

json param_to_json(const ParamConfig& p) {
    json j;
    j["name"] = p.name;
    j["family"] = to_string(p.prior.family);
    if (p.prior.family != PriorFamily::Uniform) {
        j["mean"] = p.prior.mean;
        j["sd"] = p.prior.sd;
    }
    if (p.prior.bounds)
        j["bounds"] = json::array({p.prior.bounds->first, p.prior.bounds->second});
    j["units"] = p.variance_units ? "variance" : "sd";
    if (p.grid_override) j["grid"] = grid_to_json(*p.grid_override);
    return j;
}

ParamConfig param_from_json(const json& j, const std::string& where) {
    StrictObject o(j, where);
    ParamConfig p;
    p.name = o.require<std::string>("name");
    p.prior.family = prior_family_from_string(o.require<std::string>("family"));
    if (p.prior.family != PriorFamily::Uniform) {
        p.prior.mean = o.require<double>("mean");
        p.prior.sd = o.require<double>("sd");
    } else {
        p.prior.mean = o.get<double>("mean", 0.0);
        p.prior.sd = o.get<double>("sd", 0.0);
    }
    if (o.has("bounds")) {
        const json& b = o.at("bounds");
        if (!b.is_array() || b.size() != 2)
            throw Error("ConfigError", where + ".bounds must be [lower, upper]");
        p.prior.bounds = {b[0].get<double>(), b[1].get<double>()};
    }
    const std::string units = o.get<std::string>("units", "sd");
    if (units == "variance") p.variance_units = true;
    else if (units != "sd")
        throw Error("ConfigError", where + ".units must be 'sd' or 'variance'");
    if (o.has("grid")) p.grid_override = grid_from_json(o.at("grid"), where + ".grid");
    o.finish();
    parameterize(p.prior); // feasibility check
    return p;
}

constexpr const char* moment_names[n_nkpc_moments] = {"a12", "a22", "sigma11_sq", "sigma12",
                                                      "sigma22_sq"};

} // namespace

std::vector<PriorSpec> ExperimentConfig::prior_specs() const {
    std::vector<PriorSpec> out;
    out.reserve(params.size());
    for (const auto& p : params) out.push_back(p.prior);
    return out;
}

std::vector<SupportGrid> ExperimentConfig::moment_grids() const {
    std::vector<SupportGrid> grids(n_nkpc_moments);
    for (int i = 0; i < n_nkpc_moments; ++i) {
        grids[static_cast<std::size_t>(i)] =
            SupportGrid{moment_supports[static_cast<std::size_t>(i)].first,
                        moment_supports[static_cast<std::size_t>(i)].second, moment_bins};
        grids[static_cast<std::size_t>(i)].validate();
    }
    return grids;
}

std::vector<SupportGrid> ExperimentConfig::param_grids() const {
    std::vector<SupportGrid> grids;
    grids.reserve(params.size());
    for (const auto& p : params)
        grids.push_back(p.grid_override ? *p.grid_override
                                        : default_param_grid(p.prior, param_bins));
    return grids;
}

std::vector<std::pair<double, double>> ExperimentConfig::param_supports() const {
    std::vector<std::pair<double, double>> out;
    out.reserve(params.size());
    for (const auto& p : params) out.push_back(prior_support(p.prior));
    return out;
}

std::vector<bool> ExperimentConfig::variance_flags() const {
    std::vector<bool> out;
    out.reserve(params.size());
    for (const auto& p : params) out.push_back(p.variance_units);
    return out;
}

void ExperimentConfig::validate() const {
    const int expected = variant == ModelVariant::CorrectFullRank ? 5 : 4;
    if (n_params() != expected)
        throw Error("ConfigError", "variant '" + to_string(variant) + "' needs " +
                                       std::to_string(expected) + " parameters, got " +
                                       std::to_string(n_params()));
    if (sim_keep < 12 || sim_total < sim_keep)
        throw Error("ConfigError", "kept sample must be at least 12 and fit in sim_total");
    if (n_draws < 1) throw Error("ConfigError", "need at least one empirical draw");
    if (h_draws < 1) throw Error("ConfigError", "need at least one reference draw");
    if (moment_bins < 2 || param_bins < 2) throw Error("ConfigError", "bin counts must be >= 2");
    if (particles < 1) throw Error("ConfigError", "need at least one particle");
    if (m_values.empty()) throw Error("ConfigError", "m_values must be non-empty");
    for (int m : m_values)
        if (m < 1) throw Error("ConfigError", "every M must be positive");
    if (iterations < 2 || burn_in < 0 || burn_in >= iterations)
        throw Error("ConfigError", "burn_in must lie inside iterations");
    if (thin < 1) throw Error("ConfigError", "thin must be positive");
    if (init_rwmh) {
        int max_m = 1;
        for (int m : m_values) max_m = std::max(max_m, m);
        if (init_iterations < 2 * max_m)
            throw Error("ConfigError", "init_iterations too short to seed the largest M");
    }
    if (!(ess_threshold >= 0.0 && ess_threshold <= 1.0))
        throw Error("ConfigError", "ess_threshold is a fraction of Z");
    if (!(truncation_prob > 0.0 && truncation_prob < 1.0))
        throw Error("ConfigError", "truncation_prob must lie in (0,1)");
    if (replications < 1) throw Error("ConfigError", "need at least one replication");
    if (!(delta.initial >= delta.floor) || !(delta.floor > 0.0))
        throw Error("ConfigError", "delta schedule needs initial >= floor > 0");
    if (likelihood_mode == LikelihoodMode::SingleDrawPredictive)
        for (int m : m_values)
            if (m != 1)
                throw Error("ConfigError", "predictive likelihood mode requires M = 1");
    hyper.validate();
    for (const auto& s : moment_supports)
        if (!(s.second > s.first)) throw Error("ConfigError", "moment support out of order");
    for (const auto& p : params) parameterize(p.prior);
    if (!params_valid(true_params, dgp_variant))
        throw Error("ConfigError", "true calibration violates the model invariants");
}

std::vector<ParamConfig> default_params(ModelVariant variant) {
    std::vector<ParamConfig> out;
    out.push_back({"beta", {PriorFamily::Beta, 0.98, 0.001, std::nullopt}, false, std::nullopt});
    out.push_back({"mu_p", {PriorFamily::Beta, 0.8, 0.0316, std::nullopt}, false, std::nullopt});
    out.push_back({"rho", {PriorFamily::Beta, 0.8, 0.0316, std::nullopt}, false, std::nullopt});
    out.push_back(
        {"sigma_eps", {PriorFamily::TruncatedNormal, 0.001, 0.0001, std::nullopt}, false,
         std::nullopt});
    if (variant == ModelVariant::CorrectFullRank)
        out.push_back(
            {"sigma_v", {PriorFamily::TruncatedNormal, 0.00025, 0.0001, std::nullopt}, false,
             std::nullopt});
    return out;
}

ExperimentConfig default_config(ModelVariant variant) {
    ExperimentConfig cfg;
    cfg.variant = variant;
    cfg.params = default_params(variant);
    return cfg;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error("ConfigError", std::string("invalid JSON: ") + e.what());
    }
    StrictObject o(root, "config");
    ExperimentConfig cfg;

    {
        StrictObject m(o.at("model"), "model");
        cfg.variant = model_variant_from_string(m.require<std::string>("variant"));
        cfg.dgp_variant = model_variant_from_string(m.get<std::string>("dgp_variant", "correct"));
        StrictObject tp(m.at("true_params"), "model.true_params");
        cfg.true_params.beta = tp.require<double>("beta");
        cfg.true_params.mu_p = tp.require<double>("mu_p");
        cfg.true_params.rho = tp.require<double>("rho");
        cfg.true_params.sigma_eps = tp.require<double>("sigma_eps");
        cfg.true_params.sigma_v = tp.get<double>("sigma_v", 0.0);
        tp.finish();
        m.finish();
    }
    {
        StrictObject d(o.at("data"), "data");
        cfg.sim_total = d.require<std::int64_t>("sim_total");
        cfg.sim_keep = d.require<int>("sim_keep");
        d.finish();
    }
    {
        StrictObject e(o.at("empirical"), "empirical");
        cfg.n_draws = e.require<std::int64_t>("n_draws");
        if (e.has("hyper")) {
            StrictObject h(e.at("hyper"), "empirical.hyper");
            cfg.hyper.coef_prior_mean = h.get<double>("coef_prior_mean", cfg.hyper.coef_prior_mean);
            cfg.hyper.coef_prior_precision =
                h.get<double>("coef_prior_precision", cfg.hyper.coef_prior_precision);
            cfg.hyper.iw_scale = h.get<double>("iw_scale", cfg.hyper.iw_scale);
            cfg.hyper.iw_dof = h.get<double>("iw_dof", cfg.hyper.iw_dof);
            h.finish();
        }
        e.finish();
    }
    {
        StrictObject m(o.at("moments"), "moments");
        cfg.moment_bins = m.require<int>("bins");
        StrictObject s(m.at("supports"), "moments.supports");
        for (int i = 0; i < n_nkpc_moments; ++i) {
            const json& b = s.at(moment_names[i]);
            if (!b.is_array() || b.size() != 2)
                throw Error("ConfigError", "moment support must be [lower, upper]");
            cfg.moment_supports[static_cast<std::size_t>(i)] = {b[0].get<double>(),
                                                                b[1].get<double>()};
        }
        s.finish();
        m.finish();
    }
    {
        const json& arr = o.at("params");
        if (!arr.is_array() || arr.empty())
            throw Error("ConfigError", "params must be a non-empty array");
        cfg.params.clear();
        for (std::size_t i = 0; i < arr.size(); ++i)
            cfg.params.push_back(param_from_json(arr[i], "params[" + std::to_string(i) + "]"));
    }
    {
        StrictObject r(o.at("reference"), "reference");
        cfg.h_draws = r.require<std::int64_t>("h_draws");
        cfg.param_bins = r.get<int>("bins", cfg.moment_bins);
        r.finish();
    }
    {
        StrictObject s(o.at("sampler"), "sampler");
        cfg.particles = s.get<int>("particles", cfg.particles);
        cfg.m_values = s.require<std::vector<int>>("m_values");
        cfg.iterations = s.require<std::int64_t>("iterations");
        cfg.burn_in = s.require<std::int64_t>("burn_in");
        cfg.thin = s.get<std::int64_t>("thin", cfg.thin);
        cfg.init_rwmh = s.get<bool>("init_rwmh", cfg.init_rwmh);
        cfg.init_iterations = s.get<std::int64_t>("init_iterations", cfg.init_iterations);
        cfg.psi0 = s.get<double>("psi0", cfg.psi0);
        if (s.has("acceptance_band")) {
            const json& b = s.at("acceptance_band");
            if (!b.is_array() || b.size() != 2)
                throw Error("ConfigError", "acceptance_band must be [lo, hi]");
            cfg.accept_lo = b[0].get<double>();
            cfg.accept_hi = b[1].get<double>();
        }
        cfg.adapt_window = s.get<std::int64_t>("adapt_window", cfg.adapt_window);
        cfg.adapt_psi = s.get<bool>("adapt_psi", cfg.adapt_psi);
        cfg.ess_threshold = s.get<double>("ess_threshold", cfg.ess_threshold);
        const std::string resampling = s.get<std::string>("resampling", "multinomial");
        if (resampling == "systematic") cfg.systematic_resampling = true;
        else if (resampling != "multinomial")
            throw Error("ConfigError", "resampling must be 'multinomial' or 'systematic'");
        if (s.has("delta")) {
            StrictObject d(s.at("delta"), "sampler.delta");
            cfg.delta.initial = d.get<double>("initial", cfg.delta.initial);
            cfg.delta.floor = d.get<double>("floor", cfg.delta.floor);
            cfg.delta.adaptive = d.get<bool>("adaptive", cfg.delta.adaptive);
            cfg.delta.increase_step = d.get<double>("increase_step", cfg.delta.increase_step);
            cfg.delta.low_acceptance = d.get<double>("low_acceptance", cfg.delta.low_acceptance);
            cfg.delta.decay_every = d.get<int>("decay_every", cfg.delta.decay_every);
            const std::string mode = d.get<std::string>("decay", "multiply");
            if (mode == "subtract") cfg.delta.decay_subtract = true;
            else if (mode != "multiply")
                throw Error("ConfigError", "delta.decay must be 'multiply' or 'subtract'");
            d.finish();
        }
        const std::string lmode = s.get<std::string>("likelihood_mode", "js");
        if (lmode == "single_draw_predictive")
            cfg.likelihood_mode = LikelihoodMode::SingleDrawPredictive;
        else if (lmode != "js")
            throw Error("ConfigError", "likelihood_mode must be 'js' or 'single_draw_predictive'");
        cfg.trace_every = s.get<std::int64_t>("trace_every", cfg.trace_every);
        s.finish();
    }
    {
        StrictObject e(o.at("evaluation"), "evaluation");
        cfg.truncation_prob = e.get<double>("truncation_prob", cfg.truncation_prob);
        e.finish();
    }
    cfg.replications = o.require<int>("replications");
    cfg.seed = o.require<std::uint64_t>("seed");
    o.finish();
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("ConfigError", "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& cfg) {
    json j;
    j["model"] = {{"variant", to_string(cfg.variant)},
                  {"dgp_variant", to_string(cfg.dgp_variant)},
                  {"true_params",
                   {{"beta", cfg.true_params.beta},
                    {"mu_p", cfg.true_params.mu_p},
                    {"rho", cfg.true_params.rho},
                    {"sigma_eps", cfg.true_params.sigma_eps},
                    {"sigma_v", cfg.true_params.sigma_v}}}};
    j["data"] = {{"sim_total", cfg.sim_total}, {"sim_keep", cfg.sim_keep}};
    j["empirical"] = {{"n_draws", cfg.n_draws},
                      {"hyper",
                       {{"coef_prior_mean", cfg.hyper.coef_prior_mean},
                        {"coef_prior_precision", cfg.hyper.coef_prior_precision},
                        {"iw_scale", cfg.hyper.iw_scale},
                        {"iw_dof", cfg.hyper.iw_dof}}}};
    json supports;
    for (int i = 0; i < n_nkpc_moments; ++i)
        supports[moment_names[i]] =
            json::array({cfg.moment_supports[static_cast<std::size_t>(i)].first,
                         cfg.moment_supports[static_cast<std::size_t>(i)].second});
    j["moments"] = {{"bins", cfg.moment_bins}, {"supports", supports}};
    json params = json::array();
    for (const auto& p : cfg.params) params.push_back(param_to_json(p));
    j["params"] = params;
    j["reference"] = {{"h_draws", cfg.h_draws}, {"bins", cfg.param_bins}};
    j["sampler"] = {{"particles", cfg.particles},
                    {"m_values", cfg.m_values},
                    {"iterations", cfg.iterations},
                    {"burn_in", cfg.burn_in},
                    {"thin", cfg.thin},
                    {"init_rwmh", cfg.init_rwmh},
                    {"init_iterations", cfg.init_iterations},
                    {"psi0", cfg.psi0},
                    {"acceptance_band", json::array({cfg.accept_lo, cfg.accept_hi})},
                    {"adapt_window", cfg.adapt_window},
                    {"adapt_psi", cfg.adapt_psi},
                    {"ess_threshold", cfg.ess_threshold},
                    {"resampling", cfg.systematic_resampling ? "systematic" : "multinomial"},
                    {"delta",
                     {{"initial", cfg.delta.initial},
                      {"floor", cfg.delta.floor},
                      {"adaptive", cfg.delta.adaptive},
                      {"increase_step", cfg.delta.increase_step},
                      {"low_acceptance", cfg.delta.low_acceptance},
                      {"decay_every", cfg.delta.decay_every},
                      {"decay", cfg.delta.decay_subtract ? "subtract" : "multiply"}}},
                    {"likelihood_mode", cfg.likelihood_mode == LikelihoodMode::Js
                                            ? "js"
                                            : "single_draw_predictive"},
                    {"trace_every", cfg.trace_every}};
    j["evaluation"] = {{"truncation_prob", cfg.truncation_prob}};
    j["replications"] = cfg.replications;
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string text = emit_config(cfg);
    std::uint64_t h = 1469598103934665603ull; // FNV-1a
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string emit_manifest(const RunManifest& m) {
    json j;
    std::ostringstream hash_hex;
    hash_hex << std::hex << m.config_hash;
    j["config_hash"] = hash_hex.str();
    j["seed"] = m.seed;
    j["version"] = m.version;
    j["wall_clock_sec"] = m.wall_clock_sec;
    j["artifacts"] = m.artifacts;
    return j.dump(2) + "\n";
}

} // namespace dmpi
