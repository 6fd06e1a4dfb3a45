#include "aggpi/config.hpp"

#include "aggpi/error.hpp"
#include "aggpi/io.hpp"

#include <cmath>
#include <set>

namespace aggpi::config {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& msg)
{
    throw Error(ErrorCode::ConfigInvalid, "field '" + path + "': " + msg);
}

// Typed access to the members of one JSON object. Every key that is read is
// remembered so finish() can reject the rest as unknown.
class Fields {
public:
    Fields(const Json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix))
    {
        if (!obj_.is_object()) bad(prefix_.empty() ? "<root>" : prefix_, "expected an object");
    }

    std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

    const Json* get(const std::string& key)
    {
        seen_.insert(key);
        const auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) return nullptr;
        return &*it;
    }

    void number(const std::string& key, double& out)
    {
        if (const Json* v = get(key)) out = as_number(*v, path(key));
    }

    void number(const std::string& key, std::optional<double>& out)
    {
        if (const Json* v = get(key)) out = as_number(*v, path(key));
    }

    template <class T>
    void count(const std::string& key, T& out)
    {
        if (const Json* v = get(key)) out = static_cast<T>(as_count(*v, path(key)));
    }

    template <class T>
    void count(const std::string& key, std::optional<T>& out)
    {
        if (const Json* v = get(key)) out = static_cast<T>(as_count(*v, path(key)));
    }

    void seed(const std::string& key, std::uint64_t& out)
    {
        if (const Json* v = get(key)) {
            if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0))
                bad(path(key), "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void flag(const std::string& key, bool& out)
    {
        if (const Json* v = get(key)) {
            if (!v->is_boolean()) bad(path(key), "expected true or false");
            out = v->get<bool>();
        }
    }

    void text(const std::string& key, std::string& out)
    {
        if (const Json* v = get(key)) out = as_string(*v, path(key));
    }

    // Parses a string value with `parse`, turning its errors into field errors.
    template <class T, class Parse>
    void choice(const std::string& key, T& out, Parse parse)
    {
        if (const Json* v = get(key)) out = parse_choice(*v, path(key), parse);
    }

    template <class T, class Parse>
    void choices(const std::string& key, std::vector<T>& out, Parse parse)
    {
        const Json* v = get(key);
        if (!v) return;
        if (!v->is_array()) bad(path(key), "expected an array");
        out.clear();
        for (std::size_t i = 0; i < v->size(); ++i)
            out.push_back(parse_choice((*v)[i], path(key) + "[" + std::to_string(i) + "]", parse));
    }

    template <class T>
    void counts(const std::string& key, std::vector<T>& out)
    {
        const Json* v = get(key);
        if (!v) return;
        if (!v->is_array()) bad(path(key), "expected an array");
        out.clear();
        for (std::size_t i = 0; i < v->size(); ++i)
            out.push_back(static_cast<T>(as_count((*v)[i], path(key) + "[" + std::to_string(i) + "]")));
    }

    void numbers(const std::string& key, std::vector<double>& out)
    {
        const Json* v = get(key);
        if (!v) return;
        if (!v->is_array()) bad(path(key), "expected an array");
        out.clear();
        for (std::size_t i = 0; i < v->size(); ++i)
            out.push_back(as_number((*v)[i], path(key) + "[" + std::to_string(i) + "]"));
    }

    void finish() const
    {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) bad(path(it.key()), "unknown field");
    }

private:
    static double as_number(const Json& v, const std::string& where)
    {
        if (!v.is_number()) bad(where, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) bad(where, "expected a finite number");
        return x;
    }

    static std::uint64_t as_count(const Json& v, const std::string& where)
    {
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
        bad(where, "expected a non-negative integer");
    }

    static std::string as_string(const Json& v, const std::string& where)
    {
        if (!v.is_string()) bad(where, "expected a string");
        return v.get<std::string>();
    }

    template <class Parse>
    static auto parse_choice(const Json& v, const std::string& where, Parse parse)
    {
        const std::string s = as_string(v, where);
        try {
            return parse(s);
        } catch (const Error& e) {
            bad(where, e.what());
        }
    }

    const Json& obj_;
    std::string prefix_;
    std::set<std::string> seen_;
};

DgpSpec dgp_from_json(const Json& j, DgpSpec spec)
{
    Fields f(j, "dgp");
    f.choice("kind", spec.kind, [](const std::string& s) { return parse_dgp_kind(s); });
    f.number("phi1", spec.phi1);
    f.number("phi2", spec.phi2);
    f.number("gamma", spec.gamma);
    f.number("delta", spec.delta);
    f.number("threshold", spec.threshold);
    f.number("sigma", spec.sigma);
    f.number("alpha_star", spec.alpha_star);
    f.count("burn_in", spec.burn_in);
    f.count("truncation_J", spec.truncation_J);
    f.finish();
    return spec;
}

BetaSpec beta_from_json(const Json& j, BetaSpec spec)
{
    Fields f(j, "beta");
    f.number("sparsity_pct", spec.sparsity_pct);
    f.choice("dist", spec.dist, [](const std::string& s) { return parse_beta_dist(s); });
    f.seed("rng_seed", spec.rng_seed);
    f.finish();
    return spec;
}

CustomLayout custom_from_json(const Json& j, CustomLayout c)
{
    Fields f(j, "custom");
    f.count("n_weather", c.n_weather);
    f.number("weather_ar", c.weather_ar);
    f.count("n_freqs", c.n_freqs);
    f.count("period", c.period);
    f.flag("weekend_dummies", c.weekend_dummies);
    f.finish();
    return c;
}

template <class T>
Json optional_json(const std::optional<T>& v)
{
    return v ? Json(*v) : Json(nullptr);
}

LinearProcessSpec process_from_json(const Json& j, const std::string& where)
{
    LinearProcessSpec spec;
    Fields f(j, where);
    std::string kind = "explicit";
    f.text("coefficients", kind);
    f.numbers("a", spec.a);
    double rho = 0.5, gamma = -1.5;
    std::size_t length = 0;
    f.number("rho", rho);
    f.number("gamma", gamma);
    f.count("length", length);
    f.choice("innovation", spec.innovation, [](const std::string& s) {
        if (s == "gaussian" || s == "normal") return Innovation::Gaussian;
        if (s == "stable") return Innovation::Stable;
        throw Error(ErrorCode::ConfigInvalid, "innovation must be gaussian or stable");
    });
    f.number("alpha_star", spec.alpha_star);
    f.number("sigma", spec.sigma);
    f.finish();

    if (kind == "geometric" || kind == "power") {
        if (length < 1) bad(f.path("length"), "must be at least 1 for generated coefficients");
        spec.a.resize(length);
        for (std::size_t k = 0; k < length; ++k)
            spec.a[k] = kind == "geometric" ? std::pow(rho, static_cast<double>(k))
                                            : std::pow(1.0 + static_cast<double>(k), gamma);
    } else if (kind != "explicit") {
        bad(f.path("coefficients"), "must be explicit, geometric or power");
    }
    if (spec.a.empty()) bad(f.path("a"), "coefficient vector must not be empty");
    if (!(spec.sigma > 0.0)) bad(f.path("sigma"), "must be positive");
    if (spec.innovation == Innovation::Stable && !(spec.alpha_star > 0.0 && spec.alpha_star <= 2.0))
        bad(f.path("alpha_star"), "must lie in (0, 2]");
    return spec;
}

}  // namespace

Json parse(const std::string& text, const std::string& source)
{
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ConfigInvalid, source + ": " + e.what());
    }
}

Json load(const std::filesystem::path& path)
{
    std::string text;
    try {
        text = io::read_text(path);
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigInvalid, e.what());
    }
    return parse(text, path.string());
}

std::string canonical(const Json& j)
{
    // nlohmann's default object type is an std::map, so keys come out sorted
    return j.dump();
}

ExperimentConfig experiment_from_json(const Json& j)
{
    Fields f(j, "");
    ExperimentConfig cfg;
    if (const Json* p = f.get("preset")) {
        if (!p->is_string()) bad("preset", "expected a string");
        try {
            cfg = preset(p->get<std::string>());
        } catch (const Error& e) {
            bad("preset", e.what());
        }
    }
    f.text("name", cfg.name);
    if (const Json* v = f.get("dgp")) cfg.dgp = dgp_from_json(*v, cfg.dgp);
    if (const Json* v = f.get("beta")) cfg.beta = beta_from_json(*v, cfg.beta);
    f.count("n", cfg.n);
    f.counts("horizons", cfg.horizons);
    f.choices("methods", cfg.methods, [](const std::string& s) { return parse_method(s); });
    f.choices("estimators", cfg.estimators, [](const std::string& s) { return parse_estimator(s); });
    f.count("n_reps", cfg.n_reps);
    f.number("level", cfg.level);
    f.seed("rng_seed", cfg.rng_seed);
    f.choice("covariate_layout", cfg.covariate_layout, [](const std::string& s) { return parse_layout(s); });
    if (const Json* v = f.get("custom")) cfg.custom = custom_from_json(*v, cfg.custom);
    f.flag("redraw_covariates", cfg.redraw_covariates);
    f.number("weights_delta", cfg.weights_delta);
    f.count("cv_folds", cfg.cv_folds);
    f.count("clt_block_len", cfg.clt_block_len);
    f.count("boot_B", cfg.boot_B);
    f.number("boot_block_len", cfg.boot_block_len);
    f.finish();
    validate(cfg);
    return cfg;
}

Json to_json(const DgpSpec& spec)
{
    return Json{{"kind", to_string(spec.kind)},
                {"phi1", spec.phi1},
                {"phi2", spec.phi2},
                {"gamma", spec.gamma},
                {"delta", spec.delta},
                {"threshold", spec.threshold},
                {"sigma", spec.sigma},
                {"alpha_star", spec.alpha_star},
                {"burn_in", spec.burn_in},
                {"truncation_J", spec.truncation_J}};
}

Json to_json(const ExperimentConfig& cfg)
{
    Json methods = Json::array();
    for (auto m : cfg.methods) methods.push_back(to_string(m));
    Json estimators = Json::array();
    for (auto e : cfg.estimators) estimators.push_back(to_string(e));
    return Json{{"name", cfg.name},
                {"dgp", to_json(cfg.dgp)},
                {"beta",
                 {{"sparsity_pct", cfg.beta.sparsity_pct},
                  {"dist", to_string(cfg.beta.dist)},
                  {"rng_seed", cfg.beta.rng_seed}}},
                {"n", cfg.n},
                {"horizons", cfg.horizons},
                {"methods", methods},
                {"estimators", estimators},
                {"n_reps", cfg.n_reps},
                {"level", cfg.level},
                {"rng_seed", cfg.rng_seed},
                {"covariate_layout", to_string(cfg.covariate_layout)},
                {"custom",
                 {{"n_weather", cfg.custom.n_weather},
                  {"weather_ar", cfg.custom.weather_ar},
                  {"n_freqs", cfg.custom.n_freqs},
                  {"period", cfg.custom.period},
                  {"weekend_dummies", cfg.custom.weekend_dummies}}},
                {"redraw_covariates", cfg.redraw_covariates},
                {"weights_delta", optional_json(cfg.weights_delta)},
                {"cv_folds", cfg.cv_folds},
                {"clt_block_len", optional_json(cfg.clt_block_len)},
                {"boot_B", cfg.boot_B},
                {"boot_block_len", optional_json(cfg.boot_block_len)}};
}

PredictConfig predict_from_json(const Json& j)
{
    Fields f(j, "");
    PredictConfig cfg;
    f.text("data", cfg.data);
    f.text("covariates", cfg.covariates);
    f.text("future_covariates", cfg.future_covariates);
    f.flag("future_mean", cfg.future_mean);
    f.choice("method", cfg.method, [](const std::string& s) { return parse_method(s); });
    f.choice("estimator", cfg.estimator, [](const std::string& s) { return parse_estimator(s); });
    f.count("m", cfg.m);
    f.number("level", cfg.level);
    f.number("weights_delta", cfg.weights_delta);
    f.count("block_len", cfg.block_len);
    f.count("boot_B", cfg.boot_B);
    f.number("boot_block_len", cfg.boot_block_len);
    f.count("cv_folds", cfg.cv_folds);
    f.seed("rng_seed", cfg.rng_seed);
    f.finish();
    return cfg;
}

Json to_json(const PredictConfig& cfg)
{
    return Json{{"data", cfg.data},
                {"covariates", cfg.covariates},
                {"future_covariates", cfg.future_covariates},
                {"future_mean", cfg.future_mean},
                {"method", to_string(cfg.method)},
                {"estimator", to_string(cfg.estimator)},
                {"m", cfg.m},
                {"level", cfg.level},
                {"weights_delta", optional_json(cfg.weights_delta)},
                {"block_len", optional_json(cfg.block_len)},
                {"boot_B", cfg.boot_B},
                {"boot_block_len", optional_json(cfg.boot_block_len)},
                {"cv_folds", cfg.cv_folds},
                {"rng_seed", cfg.rng_seed}};
}

NagaevCheckConfig nagaev_from_json(const Json& j)
{
    Fields f(j, "");
    NagaevCheckConfig cfg;
    f.count("n", cfg.n);
    f.numbers("b", cfg.b);
    f.numbers("x", cfg.xs);
    f.count("n_mc", cfg.n_mc);
    f.seed("rng_seed", cfg.rng_seed);
    const Json* cases = f.get("cases");
    f.finish();
    if (cfg.xs.empty()) bad("x", "at least one threshold is required");
    for (std::size_t i = 0; i < cfg.xs.size(); ++i)
        if (cfg.xs[i] < 0.0) bad("x[" + std::to_string(i) + "]", "thresholds must be non-negative");
    if (cfg.n_mc < 10000) bad("n_mc", "must be at least 10000");
    if (!cases || !cases->is_array() || cases->empty()) bad("cases", "expected a non-empty array");

    for (std::size_t k = 0; k < cases->size(); ++k) {
        const std::string where = "cases[" + std::to_string(k) + "]";
        Fields c(cases->at(k), where);
        NagaevCheckCase item;
        c.choice("case", item.which, [](const std::string& s) { return parse_nagaev_case(s); });
        c.number("q", item.q);
        if (const Json* p = c.get("process")) item.process = process_from_json(*p, c.path("process"));
        std::optional<double> q_moment, second_moment, c_q;
        c.number("eps_q_moment", q_moment);
        c.number("eps_second_moment", second_moment);
        c.number("c_q", c_q);
        c.number("C1", item.consts.C1);
        c.number("C2", item.consts.C2);
        c.number("beta", item.consts.beta);
        c.finish();
        item.consts.c_q = c_q;
        item.consts.eps_q_moment = q_moment.value_or(innovation_abs_moment(item.process, item.q));
        item.consts.eps_second_moment = second_moment.value_or(innovation_abs_moment(item.process, 2.0));
        cfg.cases.push_back(std::move(item));
    }
    return cfg;
}

Json to_json(const NagaevCheckConfig& cfg)
{
    Json cases = Json::array();
    for (const auto& c : cfg.cases) {
        cases.push_back({{"case", to_string(c.which)},
                         {"q", c.q},
                         {"process",
                          {{"coefficients", "explicit"},
                           {"a", c.process.a},
                           {"innovation", c.process.innovation == Innovation::Gaussian ? "gaussian" : "stable"},
                           {"alpha_star", c.process.alpha_star},
                           {"sigma", c.process.sigma}}},
                         {"eps_q_moment", c.consts.eps_q_moment},
                         {"eps_second_moment", std::isfinite(c.consts.eps_second_moment)
                                                   ? Json(c.consts.eps_second_moment)
                                                   : Json(nullptr)},
                         {"c_q", optional_json(c.consts.c_q)},
                         {"C1", c.consts.C1},
                         {"C2", c.consts.C2},
                         {"beta", c.consts.beta}});
    }
    return Json{{"n", cfg.n}, {"b", cfg.b}, {"x", cfg.xs}, {"n_mc", cfg.n_mc}, {"rng_seed", cfg.rng_seed},
                {"cases", cases}};
}

}  // namespace aggpi::config
