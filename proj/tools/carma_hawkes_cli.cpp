// carma-hawkes: batch front end for ingestion, jump detection, simulation,
// fitting and the framework-selection pipeline. Every command writes its
// outputs plus manifest.json into one run directory.

#include "manifest.hpp"

#include "carma_hawkes/data.hpp"
#include "carma_hawkes/estimate.hpp"
#include "carma_hawkes/jumps.hpp"
#include "carma_hawkes/pipeline.hpp"
#include "carma_hawkes/serialize.hpp"
#include "carma_hawkes/simulate.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace carma_hawkes;

namespace {

constexpr const char* kVersion = "0.1.0";

/// Problems with arguments or input files (exit code 1).
class UserError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string out;
    unsigned threads{0};
    std::uint64_t seed{0};
};

struct TickInput {
    std::string path;
    std::string instrument;
    std::string side;
    std::string calendar{"eur"};
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--out", c.out, "Output directory (default runs/<UTC time>_<input digest>)");
    sub->add_option("--threads", c.threads, "Worker threads; 0 uses all cores")
        ->envname("CARMA_HAWKES_THREADS")
        ->capture_default_str();
    sub->add_option("--seed", c.seed, "Seed for simulation and optimizer starts")->capture_default_str();
}

void add_tick_input(CLI::App* sub, TickInput& in) {
    sub->add_option("--input", in.path, "Tick CSV (timestamp,price,side,instrument)")->required();
    sub->add_option("--instrument", in.instrument, "Instrument to analyse when the file holds several");
    sub->add_option("--side", in.side, "Side to analyse: bid or ask")->check(CLI::IsMember({"bid", "ask"}));
    sub->add_option("--calendar", in.calendar, "Session calendar: eur, sgd or utc24")
        ->check(CLI::IsMember({"eur", "sgd", "utc24"}))
        ->capture_default_str();
}

const CLI::Validator kOpenUnit(
    [](std::string& s) -> std::string {
        double v = 0.0;
        try {
            std::size_t pos = 0;
            v = std::stod(s, &pos);
            if (pos != s.size()) return "not a number: " + s;
        } catch (const std::exception&) {
            return "not a number: " + s;
        }
        return v > 0.0 && v < 1.0 ? std::string() : "value must lie in (0, 1), got " + s;
    },
    "in (0,1)");

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot open input file '" + path + "'");
    return in;
}

data::TickSeries load_ticks(const TickInput& in, data::IngestReport* report) {
    auto stream = open_input(in.path);
    data::IngestConfig cfg;
    cfg.calendar = data::calendar_by_name(in.calendar);
    if (!in.instrument.empty()) cfg.instrument = in.instrument;
    if (!in.side.empty()) cfg.side = data::parse_side(in.side);
    try {
        return data::parse_ticks(stream, cfg, report);
    } catch (const data::DataError& e) {
        throw UserError(in.path + ": " + e.what());
    }
}

class Run {
public:
    Run(const std::string& command, const Common& common, CLI::App* sub)
        : manifest_(command, kVersion), common_(common), sub_(sub) {
        manifest_.set_seed(common.seed);
    }

    void input(const std::string& path) {
        if (!fs::exists(path)) throw UserError("cannot open input file '" + path + "'");
        manifest_.add_input(path);
    }

    fs::path dir() {
        if (dir_.empty()) {
            manifest_.set_config(sub_->config_to_str(true, false));
            dir_ = common_.out.empty() ? fs::path("runs") / (stamp() + "_" + manifest_.short_digest()) : fs::path(common_.out);
            std::error_code ec;
            fs::create_directories(dir_, ec);
            if (ec) throw UserError("cannot create output directory '" + dir_.string() + "': " + ec.message());
        }
        return dir_;
    }

    std::ofstream output(const std::string& name) {
        std::ofstream out(dir() / name, std::ios::binary);
        if (!out) throw UserError("cannot write " + (dir() / name).string());
        manifest_.add_output(name);
        return out;
    }

    void json(const std::string& name, const serialize::Json& j) { output(name) << j.dump(2) << '\n'; }

    void finish() {
        manifest_.write(dir());
        std::cout << dir().string() << '\n';
    }

private:
    static std::string stamp() {
        std::string s = cli::utc_now_iso();
        std::string out;
        for (char c : s) {
            if (c != '-' && c != ':') out += c;
        }
        return out;
    }

    cli::RunManifest manifest_;
    Common common_;
    CLI::App* sub_;
    fs::path dir_;
};

std::vector<int> parse_ints(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stoi(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UserError("order entries must be integers: '" + text + "'");
        }
    }
    return out;
}

void warn_all(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

// ---- ingest -------------------------------------------------------------------

struct IngestArgs {
    Common common;
    std::string input;
    std::string calendar{"eur"};
    double tick_size{0.001};
};

void cmd_ingest(const IngestArgs& a, CLI::App* sub) {
    Run run("ingest", a.common, sub);
    run.input(a.input);
    auto in = open_input(a.input);
    auto cal = data::calendar_by_name(a.calendar);
    std::vector<data::IngestReport> reports;
    std::vector<data::TickSeries> groups;
    try {
        groups = data::parse_tick_groups(in, cal, &reports);
    } catch (const data::DataError& e) {
        throw UserError(a.input + ": " + e.what());
    }
    serialize::Json rep = serialize::Json::array();
    for (std::size_t i = 0; i < groups.size(); ++i) {
        warn_all(reports[i].warnings);
        auto r = serialize::to_json(reports[i]);
        r["instrument"] = groups[i].instrument_id;
        r["side"] = data::to_string(groups[i].side);
        r["ticks"] = groups[i].size();
        r["days"] = groups[i].day_count();
        rep.push_back(std::move(r));
    }
    {
        auto out = run.output("ticks_clean.csv");
        data::write_ticks(out, groups);
    }
    run.json("ingest.json", rep);
    for (std::size_t i = 0; i + 1 < groups.size(); ++i) {
        const auto& b = groups[i];
        const auto& k = groups[i + 1];
        if (b.instrument_id != k.instrument_id || b.side != data::Side::Bid || k.side != data::Side::Ask) continue;
        try {
            const auto stats = data::spread_stats(b, k, a.tick_size);
            auto out = run.output("spread_stats_" + b.instrument_id + ".csv");
            data::write_spread_stats(out, stats);
        } catch (const data::DataError& e) {
            std::cerr << "warning: " << b.instrument_id << ": " << e.what() << '\n';
        }
    }
    run.finish();
}

// ---- spread-stats -------------------------------------------------------------

struct SpreadArgs {
    Common common;
    std::string input;
    std::string instrument;
    std::string calendar{"eur"};
    double tick_size{0.001};
};

void cmd_spread(const SpreadArgs& a, CLI::App* sub) {
    Run run("spread-stats", a.common, sub);
    run.input(a.input);
    TickInput ti{a.input, a.instrument, "bid", a.calendar};
    const auto bid = load_ticks(ti, nullptr);
    ti.side = "ask";
    const auto ask = load_ticks(ti, nullptr);
    data::SpreadStats stats;
    try {
        stats = data::spread_stats(bid, ask, a.tick_size);
    } catch (const data::DataError& e) {
        throw UserError(e.what());
    }
    {
        auto out = run.output("spread_stats.csv");
        data::write_spread_stats(out, stats);
    }
    run.json("spread_stats.json", serialize::to_json(stats));
    run.finish();
}

// ---- detect-jumps -------------------------------------------------------------

struct JumpArgs {
    Common common;
    TickInput ticks;
    std::vector<double> alphas{jumps::kDefaultAlphas};
    int window{0};
    double exponent{-0.6};
    bool keep_zero{false};
    bool span_days{false};
};

jumps::LMConfig lm_config(const std::vector<double>& alphas, int window, double exponent, bool keep_zero,
                          bool span_days) {
    jumps::LMConfig cfg;
    cfg.alpha_levels = alphas;
    cfg.window = window;
    cfg.window_exponent = exponent;
    cfg.drop_zero_returns = !keep_zero;
    cfg.span_days = span_days;
    try {
        cfg.check();
    } catch (const std::invalid_argument& e) {
        throw UserError(e.what());
    }
    return cfg;
}

void add_lm_options(CLI::App* sub, std::vector<double>& alphas, int& window, double& exponent, bool& keep_zero,
                    bool& span_days) {
    sub->add_option("--alpha", alphas, "LM confidence levels, each in (0,1)")
        ->check(kOpenUnit)
        ->delimiter(',')
        ->capture_default_str();
    sub->add_option("--window", window, "LM window K (>= 3); 0 picks ceil(n^-exponent) per day")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--window-exponent", exponent, "Exponent for the automatic window, in (-1,-0.5]")
        ->capture_default_str();
    sub->add_flag("--keep-zero-returns", keep_zero, "Test zero returns instead of dropping them");
    sub->add_flag("--span-days", span_days, "Let LM windows run across session days");
}

void cmd_jumps(const JumpArgs& a, CLI::App* sub) {
    Run run("detect-jumps", a.common, sub);
    run.input(a.ticks.path);
    const auto cfg = lm_config(a.alphas, a.window, a.exponent, a.keep_zero, a.span_days);
    data::IngestReport rep;
    const auto ticks = load_ticks(a.ticks, &rep);
    warn_all(rep.warnings);
    jumps::JumpDetectionResult res;
    try {
        res = jumps::detect_jumps(ticks, cfg);
    } catch (const std::invalid_argument& e) {
        throw UserError(e.what());
    }
    auto j = serialize::to_json(res);
    j["instrument"] = ticks.instrument_id;
    j["side"] = data::to_string(ticks.side);
    run.json("jumps.json", j);
    {
        auto out = run.output("jumps.csv");
        jumps::write_jump_csv(out, res, ticks);
    }
    run.finish();
}

// ---- simulate -----------------------------------------------------------------

struct SimArgs {
    Common common;
    std::string model;
    double horizon{1000.0};
    std::size_t max_events{10'000'000};
    std::size_t stop_after{0};
};

serialize::Json read_json(const std::string& path) {
    auto in = open_input(path);
    try {
        return serialize::Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UserError(path + ": " + e.what());
    }
}

std::variant<model::UnivariateSpec, model::BivariateSpec> read_spec(const std::string& path) {
    const auto j = read_json(path);
    try {
        return serialize::spec_from_json(j);
    } catch (const std::exception& e) {
        throw UserError(path + ": " + e.what());
    }
}

void cmd_simulate(const SimArgs& a, CLI::App* sub) {
    Run run("simulate", a.common, sub);
    run.input(a.model);
    const auto spec = read_spec(a.model);
    simulate::SimulationConfig cfg;
    cfg.horizon = a.horizon;
    cfg.seed = a.common.seed;
    cfg.max_events = a.max_events;
    if (a.stop_after > 0) cfg.stop_after_events = a.stop_after;
    try {
        cfg.check();
        std::visit([](const auto& s) { model::require_valid(s); }, spec);
    } catch (const std::invalid_argument& e) {
        throw UserError(e.what());
    }
    simulate::SimulationDiagnostics diag;
    serialize::Json summary;
    if (const auto* uni = std::get_if<model::UnivariateSpec>(&spec)) {
        const auto ev = simulate::simulate_univariate(*uni, cfg, &diag);
        auto out = run.output("events.csv");
        data::write_events(out, ev);
        summary["n_events"] = ev.size();
        summary["horizon"] = ev.horizon();
    } else {
        const auto ev = simulate::simulate_bivariate(std::get<model::BivariateSpec>(spec), cfg, &diag);
        auto out = run.output("events.csv");
        data::write_events(out, ev);
        summary["n_events"] = ev.size();
        summary["n_positive"] = ev.counts()[0];
        summary["n_negative"] = ev.counts()[1];
        summary["horizon"] = ev.horizon();
    }
    summary["proposals"] = diag.proposals;
    summary["refreshes"] = diag.refreshes;
    summary["max_bound_ratio"] = diag.max_bound_ratio;
    run.json("simulation.json", summary);
    run.finish();
}

// ---- fit ----------------------------------------------------------------------

struct FitArgs {
    Common common;
    std::string events;
    std::string order;
    std::string init;
    int starts{5};
    std::size_t max_evals{20000};
    double tolerance{1e-8};
    bool std_errors{false};
    std::string window{"last"};
};

void cmd_fit(const FitArgs& a, CLI::App* sub) {
    Run run("fit", a.common, sub);
    run.input(a.events);
    if (!a.init.empty()) run.input(a.init);
    data::EventFile file;
    {
        auto in = open_input(a.events);
        try {
            file = data::read_events(in);
        } catch (const data::DataError& e) {
            throw UserError(a.events + ": " + e.what());
        }
    }
    estimate::FitOptions opt;
    opt.n_starts = a.starts;
    opt.max_evaluations = a.max_evals;
    opt.tolerance = a.tolerance;
    opt.seed = a.common.seed;
    opt.threads = a.common.threads;
    opt.window = a.window == "horizon" ? likelihood::WindowEnd::Horizon : likelihood::WindowEnd::LastEvent;
    const auto ints = parse_ints(a.order);
    std::optional<std::variant<model::UnivariateSpec, model::BivariateSpec>> init;
    if (!a.init.empty()) init = read_spec(a.init);

    serialize::Json j;
    try {
        if (ints.size() == 2) {
            const model::UnivariateOrder order{ints[0], ints[1]};
            order.check();
            const auto ev = file.unmarked_series();
            std::optional<model::UnivariateSpec> start;
            if (init) {
                if (!std::holds_alternative<model::UnivariateSpec>(*init)) throw UserError("--init must be a univariate model");
                start = std::get<model::UnivariateSpec>(*init);
            }
            const auto fit = estimate::fit_univariate(ev, order, opt, start);
            j = serialize::to_json(fit);
            if (a.std_errors) {
                const auto se = estimate::standard_errors(fit.univariate(), ev);
                j["standard_errors"] = se ? serialize::Json(*se) : serialize::Json(nullptr);
            }
        } else if (ints.size() == 6) {
            const model::BivariateOrder order{ints[0], ints[1], ints[2], ints[3], ints[4], ints[5]};
            order.check();
            const auto ev = file.marked_series();
            std::optional<model::BivariateSpec> start;
            if (init) {
                if (!std::holds_alternative<model::BivariateSpec>(*init)) throw UserError("--init must be a bivariate model");
                start = std::get<model::BivariateSpec>(*init);
            }
            const auto fit = estimate::fit_bivariate(ev, order, opt, start);
            j = serialize::to_json(fit);
            if (a.std_errors) {
                const auto se = estimate::standard_errors(fit.bivariate(), ev);
                j["standard_errors"] = se ? serialize::Json(*se) : serialize::Json(nullptr);
            }
        } else {
            throw UserError("--order takes p,q or p1,p2,q1,q12,q21,q2");
        }
    } catch (const model::SpecError& e) {
        throw UserError(e.what());
    } catch (const data::DataError& e) {
        throw UserError(a.events + ": " + e.what());
    } catch (const estimate::FitError& e) {
        throw UserError(e.what());
    }
    run.json("fit.json", j);
    run.finish();
}

// ---- pipeline -----------------------------------------------------------------

struct PipeArgs {
    Common common;
    TickInput ticks;
    std::vector<double> alphas{jumps::kDefaultAlphas};
    int window{0};
    double exponent{-0.6};
    bool keep_zero{false};
    bool span_days{false};
    double ks_level{0.05};
    double lr_level{0.05};
    int p_max{3};
    std::size_t max_events{50000};
    int starts{5};
    std::size_t max_evals{20000};
};

void cmd_pipeline(const PipeArgs& a, CLI::App* sub) {
    Run run("pipeline", a.common, sub);
    run.input(a.ticks.path);
    pipeline::PipelineConfig cfg;
    cfg.lm = lm_config(a.alphas, a.window, a.exponent, a.keep_zero, a.span_days);
    cfg.ks_level = a.ks_level;
    cfg.lr_level = a.lr_level;
    cfg.p_max = a.p_max;
    cfg.max_events = a.max_events;
    cfg.fit.n_starts = a.starts;
    cfg.fit.max_evaluations = a.max_evals;
    cfg.fit.seed = a.common.seed;
    cfg.fit.threads = a.common.threads;
    data::IngestReport rep;
    const auto ticks = load_ticks(a.ticks, &rep);
    warn_all(rep.warnings);
    pipeline::PipelineReport report;
    try {
        report = pipeline::run_pipeline(ticks, cfg);
    } catch (const std::invalid_argument& e) {
        throw UserError(e.what());
    }
    warn_all(report.warnings);
    run.json("report.json", serialize::to_json(report));
    {
        auto out = run.output("stages.csv");
        pipeline::write_stage_table(out, report);
    }
    run.finish();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CARMA(p,q)-Hawkes toolkit: tick ingestion, Lee-Mykland jumps, simulation, MLE and framework selection"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "Configuration file of key = value lines ([subcommand] sections); flags win");
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* s_ingest = app.add_subcommand("ingest", "Clean a tick CSV and compute bid-ask spread statistics");
    add_common(s_ingest, ingest.common);
    s_ingest->add_option("--input", ingest.input, "Tick CSV (timestamp,price,side,instrument)")->required();
    s_ingest->add_option("--calendar", ingest.calendar, "Session calendar: eur, sgd or utc24")
        ->check(CLI::IsMember({"eur", "sgd", "utc24"}))
        ->capture_default_str();
    s_ingest->add_option("--tick-size", ingest.tick_size, "Price grid for the spread mode")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    SpreadArgs spread;
    auto* s_spread = app.add_subcommand("spread-stats", "Bid-ask spread statistics for one instrument");
    add_common(s_spread, spread.common);
    s_spread->add_option("--input", spread.input, "Tick CSV holding both bid and ask rows")->required();
    s_spread->add_option("--instrument", spread.instrument, "Instrument when the file holds several");
    s_spread->add_option("--calendar", spread.calendar, "Session calendar: eur, sgd or utc24")
        ->check(CLI::IsMember({"eur", "sgd", "utc24"}))
        ->capture_default_str();
    s_spread->add_option("--tick-size", spread.tick_size, "Price grid for the spread mode")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    JumpArgs jumps_args;
    auto* s_jumps = app.add_subcommand("detect-jumps", "Lee-Mykland jump test on one tick series");
    add_common(s_jumps, jumps_args.common);
    add_tick_input(s_jumps, jumps_args.ticks);
    add_lm_options(s_jumps, jumps_args.alphas, jumps_args.window, jumps_args.exponent, jumps_args.keep_zero,
                   jumps_args.span_days);

    SimArgs sim;
    auto* s_sim = app.add_subcommand("simulate", "Simulate events from a model JSON by thinning");
    add_common(s_sim, sim.common);
    s_sim->add_option("--model", sim.model, "Model JSON (univariate or bivariate)")->required();
    s_sim->add_option("--horizon", sim.horizon, "Simulation horizon in business seconds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    s_sim->add_option("--max-events", sim.max_events, "Abort when more events than this are generated")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    s_sim->add_option("--stop-after", sim.stop_after, "Stop at this many events (0 runs to the horizon)")
        ->capture_default_str();

    FitArgs fit;
    auto* s_fit = app.add_subcommand("fit", "Maximum-likelihood fit of one order to an events CSV");
    add_common(s_fit, fit.common);
    s_fit->add_option("--events", fit.events, "Events CSV (business_time,mark)")->required();
    s_fit->add_option("--order", fit.order, "p,q (univariate) or p1,p2,q1,q12,q21,q2 (bivariate)")->required();
    s_fit->add_option("--init", fit.init, "Model JSON used as an extra starting point");
    s_fit->add_option("--starts", fit.starts, "Number of default starting points")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    s_fit->add_option("--max-evals", fit.max_evals, "Likelihood evaluations per start")
        ->check(CLI::Range(std::size_t{10}, std::size_t{100'000'000}))
        ->capture_default_str();
    s_fit->add_option("--tolerance", fit.tolerance, "Relative log-likelihood tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    s_fit->add_flag("--std-errors", fit.std_errors, "Add numerical-Hessian standard errors");
    s_fit->add_option("--window", fit.window, "Compensator window end: last (event) or horizon")
        ->check(CLI::IsMember({"last", "horizon"}))
        ->capture_default_str();

    PipeArgs pipe;
    auto* s_pipe = app.add_subcommand("pipeline", "Run the bCH -> uCHLM -> bCHLM selection routine");
    add_common(s_pipe, pipe.common);
    add_tick_input(s_pipe, pipe.ticks);
    add_lm_options(s_pipe, pipe.alphas, pipe.window, pipe.exponent, pipe.keep_zero, pipe.span_days);
    s_pipe->add_option("--ks-level", pipe.ks_level, "Residual KS p-value needed to accept a fit")
        ->check(kOpenUnit)
        ->capture_default_str();
    s_pipe->add_option("--lr-level", pipe.lr_level, "LR test level for nested comparisons")
        ->check(kOpenUnit)
        ->capture_default_str();
    s_pipe->add_option("--p-max", pipe.p_max, "Largest autoregressive order in the lattices")
        ->check(CLI::Range(1, 3))
        ->capture_default_str();
    s_pipe->add_option("--max-events", pipe.max_events, "Cap on events per fitted point process")
        ->check(CLI::Range(std::size_t{5}, std::size_t{100'000'000}))
        ->capture_default_str();
    s_pipe->add_option("--starts", pipe.starts, "Default starting points per fit")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    s_pipe->add_option("--max-evals", pipe.max_evals, "Likelihood evaluations per start")
        ->check(CLI::Range(std::size_t{10}, std::size_t{100'000'000}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        // Test hook for the internal-error exit path.
        if (const char* f = std::getenv("CARMA_HAWKES_FAULT_INJECT"); f != nullptr && std::string(f) == "1") {
            throw std::logic_error("fault injected by CARMA_HAWKES_FAULT_INJECT");
        }
        if (s_ingest->parsed()) cmd_ingest(ingest, s_ingest);
        else if (s_spread->parsed()) cmd_spread(spread, s_spread);
        else if (s_jumps->parsed()) cmd_jumps(jumps_args, s_jumps);
        else if (s_sim->parsed()) cmd_simulate(sim, s_sim);
        else if (s_fit->parsed()) cmd_fit(fit, s_fit);
        else if (s_pipe->parsed()) cmd_pipeline(pipe, s_pipe);
    } catch (const UserError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const data::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const model::SpecError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const simulate::SimulationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
