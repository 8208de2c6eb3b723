#include "carma_hawkes/serialize.hpp"

namespace carma_hawkes::serialize {

namespace {

Json vec(const Eigen::VectorXd& v, int upto) {
    Json a = Json::array();
    for (int i = 0; i <= upto && i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Json vec(const Eigen::VectorXd& v) { return vec(v, static_cast<int>(v.size()) - 1); }

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::vector<double> read_vector(const Json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) {
        throw model::SpecError(std::string("model JSON needs an array '") + key + "'");
    }
    std::vector<double> out;
    for (const auto& x : j.at(key)) {
        if (!x.is_number()) throw model::SpecError(std::string("model JSON '") + key + "' must hold numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

int read_int(const Json& j, const char* what) {
    if (!j.is_number_integer()) throw model::SpecError(std::string("model JSON order entry '") + what + "' must be an integer");
    return j.get<int>();
}

Json selection_json(const pipeline::SelectionResult& s) {
    Json j;
    j["order"] = std::visit([](const auto& o) { return to_json(o); }, s.order);
    j["fit"] = to_json(s.fit);
    Json steps = Json::array();
    for (const auto& st : s.steps) {
        Json x;
        x["candidate"] = st.candidate;
        x["alternative"] = st.alternative;
        x["test"] = st.test;
        x["candidate_loglik"] = st.candidate_loglik;
        x["alternative_loglik"] = st.alternative_loglik;
        x["statistic"] = st.statistic;
        if (st.test == "lr") {
            x["df"] = st.df;
            x["p_value"] = st.p_value;
        }
        x["candidate_aic"] = st.candidate_aic;
        x["alternative_aic"] = st.alternative_aic;
        x["alternative_wins"] = st.alternative_wins;
        steps.push_back(std::move(x));
    }
    j["steps"] = std::move(steps);
    return j;
}

}  // namespace

Json to_json(const model::UnivariateOrder& o) { return Json{{"p", o.p}, {"q", o.q}}; }

Json to_json(const model::BivariateOrder& o) {
    return Json{{"p", {o.p1, o.p2}}, {"q", {o.q1, o.q12, o.q21, o.q2}}};
}

Json to_json(const model::UnivariateSpec& s) {
    Json j;
    j["model"] = "univariate";
    j["order"] = to_json(s.order);
    j["mu"] = s.mu;
    j["a"] = vec(s.a);
    j["b"] = vec(s.b, s.order.q);
    return j;
}

Json to_json(const model::BivariateSpec& s) {
    Json j;
    j["model"] = "bivariate";
    j["order"] = to_json(s.order);
    j["mu"] = {s.mu(0), s.mu(1)};
    j["a1"] = vec(s.a1);
    j["a2"] = vec(s.a2);
    j["b11"] = vec(s.b11, s.order.q1);
    j["b12"] = vec(s.b12, s.order.q12);
    j["b21"] = vec(s.b21, s.order.q21);
    j["b22"] = vec(s.b22, s.order.q2);
    return j;
}

Json to_json(const estimate::FitResult& f) {
    Json j;
    j["spec"] = std::visit([](const auto& s) { return to_json(s); }, f.spec);
    j["loglik"] = f.loglik;
    j["aic"] = f.aic;
    j["n_params"] = f.n_params;
    j["converged"] = f.converged;
    j["n_evaluations"] = f.n_evaluations;
    if (f.optimizer_trace) {
        Json starts = Json::array();
        for (const auto& s : f.optimizer_trace->starts) {
            starts.push_back(Json{{"index", s.index},
                                  {"from_init", s.from_init},
                                  {"valid", s.valid},
                                  {"initial_loglik", s.valid ? Json(s.initial_loglik) : Json(nullptr)},
                                  {"final_loglik", s.valid ? Json(s.final_loglik) : Json(nullptr)},
                                  {"evaluations", s.evaluations},
                                  {"converged", s.converged}});
        }
        j["optimizer_trace"] = Json{{"best_start", f.optimizer_trace->best_start}, {"starts", std::move(starts)}};
    }
    return j;
}

Json to_json(const jumps::JumpDetectionResult& r) {
    Json j;
    j["window"] = r.window;
    j["n_returns"] = r.n_returns;
    j["zero_returns_dropped"] = r.zero_returns_dropped;
    j["day_boundary_excluded"] = r.day_boundary_excluded;
    j["untestable"] = r.untestable;
    j["n_tested"] = r.stats.n;
    j["c"] = r.stats.c_constant;
    j["c_n"] = r.stats.c_n;
    j["s_n"] = r.stats.s_n;
    Json levels = Json::array();
    for (const auto& lv : r.levels) {
        Json l;
        l["alpha"] = lv.alpha;
        l["beta_star"] = lv.beta_star;
        l["critical"] = lv.critical;
        l["n_flagged"] = lv.flagged.size();
        l["jump_fraction"] = lv.jump_fraction;
        Json flags = Json::array();
        for (std::size_t k = 0; k < lv.flagged.size(); ++k) {
            flags.push_back(Json{{"tick_index", lv.tick_index[k]}, {"sign", lv.signs[k]}, {"statistic", lv.statistics[k]}});
        }
        l["flags"] = std::move(flags);
        levels.push_back(std::move(l));
    }
    j["levels"] = std::move(levels);
    return j;
}

Json to_json(const pipeline::PipelineReport& r) {
    Json j;
    Json attempted = Json::array();
    for (auto f : r.frameworks_attempted) attempted.push_back(pipeline::to_string(f));
    j["frameworks_attempted"] = std::move(attempted);
    j["success"] = r.success;
    j["final_framework"] = r.final_framework ? Json(pipeline::to_string(*r.final_framework)) : Json(nullptr);
    j["final_alpha"] = optional_number(r.final_alpha);
    j["final_order"] = r.success ? Json(r.final_order) : Json(nullptr);
    j["lm_window"] = r.lm_window;
    Json stages = Json::array();
    for (const auto& s : r.stages) {
        Json x;
        x["framework"] = pipeline::to_string(s.framework);
        x["alpha"] = optional_number(s.alpha);
        x["n_events"] = s.n_events;
        x["truncated"] = s.truncated;
        x["jump_fraction"] = optional_number(s.jump_fraction);
        x["selection"] = s.selection ? selection_json(*s.selection) : Json(nullptr);
        Json ks = Json::array();
        for (const auto& k : s.ks) ks.push_back(Json{{"statistic", k.statistic}, {"p_value", k.p_value}, {"n", k.n}});
        x["ks"] = std::move(ks);
        x["passed"] = s.passed;
        x["error"] = s.error ? Json(*s.error) : Json(nullptr);
        stages.push_back(std::move(x));
    }
    j["stages"] = std::move(stages);
    j["warnings"] = r.warnings;
    return j;
}

Json to_json(const data::SpreadStats& s) {
    Json j;
    j["mean"] = s.mean;
    j["median"] = s.median;
    j["mode"] = s.mode;
    j["std"] = s.std;
    j["excess_kurtosis"] = optional_number(s.excess_kurtosis);
    j["skewness"] = optional_number(s.skewness);
    j["iqr"] = s.iqr;
    j["min"] = s.min;
    j["max"] = s.max;
    j["n"] = s.n;
    return j;
}

Json to_json(const data::IngestReport& r) {
    return Json{{"rows", r.rows},
                {"duplicates_dropped", r.duplicates_dropped},
                {"ties_shifted", r.ties_shifted},
                {"out_of_session_dropped", r.out_of_session_dropped},
                {"warnings", r.warnings}};
}

std::variant<model::UnivariateSpec, model::BivariateSpec> spec_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("model") || !j.contains("order")) {
        throw model::SpecError("model JSON needs 'model' and 'order'");
    }
    const auto kind = j.at("model").get<std::string>();
    const auto& o = j.at("order");
    if (kind == "univariate") {
        model::UnivariateOrder order{read_int(o.at("p"), "p"), read_int(o.at("q"), "q")};
        if (!j.at("mu").is_number()) throw model::SpecError("model JSON 'mu' must be a number");
        return model::make_univariate(order, j.at("mu").get<double>(), read_vector(j, "a"), read_vector(j, "b"));
    }
    if (kind == "bivariate") {
        const auto& p = o.at("p");
        const auto& q = o.at("q");
        if (!p.is_array() || p.size() != 2 || !q.is_array() || q.size() != 4) {
            throw model::SpecError("bivariate order needs p = [p1, p2] and q = [q1, q12, q21, q2]");
        }
        model::BivariateOrder order{read_int(p[0], "p1"), read_int(p[1], "p2"), read_int(q[0], "q1"),
                                    read_int(q[1], "q12"), read_int(q[2], "q21"), read_int(q[3], "q2")};
        const auto mu = read_vector(j, "mu");
        if (mu.size() != 2) throw model::SpecError("bivariate 'mu' needs two entries");
        return model::make_bivariate(order, {mu[0], mu[1]}, read_vector(j, "a1"), read_vector(j, "a2"),
                                     read_vector(j, "b11"), read_vector(j, "b12"), read_vector(j, "b21"),
                                     read_vector(j, "b22"));
    }
    throw model::SpecError("model JSON 'model' must be 'univariate' or 'bivariate'");
}

}  // namespace carma_hawkes::serialize
