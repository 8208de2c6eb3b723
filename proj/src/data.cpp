#include "carma_hawkes/data.hpp"

#include "carma_hawkes/rng.hpp"
#include "carma_hawkes/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace carma_hawkes::data {

namespace {

constexpr Micros kMicrosPerMinute = 60 * kMicrosPerSecond;
const char* const kTickHeader = "timestamp,price,side,instrument";
const char* const kEventHeader = "business_time,mark";

Micros floor_div(Micros a, Micros b) {
    Micros q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::string line_error(std::size_t line, const std::string& what) {
    return "line " + std::to_string(line) + ": " + what;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

void chomp(std::string& s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
}

bool parse_double(const std::string& s, double& v) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size();
}

template <typename Int>
bool parse_int(std::string_view s, Int& v) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size();
}

Micros days_from_date(int y, unsigned m, unsigned d) {
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw DataError("invalid calendar date");
    return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

Micros parse_date(const std::string& s) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !parse_int(std::string_view(s).substr(0, 4), y) ||
        !parse_int(std::string_view(s).substr(5, 2), m) || !parse_int(std::string_view(s).substr(8, 2), d)) {
        throw DataError("date must be YYYY-MM-DD: '" + s + "'");
    }
    return days_from_date(y, m, d);
}

bool is_weekday(Micros day) {
    const std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{day}}};
    return wd != std::chrono::Saturday && wd != std::chrono::Sunday;
}

// Local day number and time of day of a UTC instant.
struct LocalTime {
    Micros day;
    Micros tod;
};

LocalTime to_local(Micros t, const SessionCalendar& cal) {
    const Micros local = t + cal.utc_offset_minutes * kMicrosPerMinute;
    const Micros day = floor_div(local, kMicrosPerDay);
    return {day, local - day * kMicrosPerDay};
}

bool in_session(const LocalTime& lt, const SessionCalendar& cal) {
    if (cal.weekdays_only && !is_weekday(lt.day)) return false;
    return lt.tod >= cal.open_minute * kMicrosPerMinute && lt.tod < cal.close_minute * kMicrosPerMinute;
}

// Session time is accumulated over the days that carry ticks; the first tick
// sits at business time 0.
void assign_business_time(TickSeries& ts, const SessionCalendar& cal) {
    const Micros open = cal.open_minute * kMicrosPerMinute;
    const Micros length = cal.session_length();
    ts.business_times.clear();
    ts.day_index.clear();
    Micros prev_day = 0;
    int ordinal = -1;
    Micros origin = 0;
    Micros prev = 0;
    for (std::size_t i = 0; i < ts.timestamps.size(); ++i) {
        const auto lt = to_local(ts.timestamps[i], cal);
        if (ordinal < 0 || lt.day != prev_day) {
            ++ordinal;
            prev_day = lt.day;
        }
        Micros bt = ordinal * length + (lt.tod - open);
        if (i == 0) origin = bt;
        bt -= origin;
        if (i > 0 && bt <= prev) bt = prev + 1;
        prev = bt;
        ts.business_times.push_back(static_cast<double>(bt) / static_cast<double>(kMicrosPerSecond));
        ts.day_index.push_back(ordinal);
    }
}

struct Row {
    Micros t;
    double price;
    std::size_t line;
};

using GroupKey = std::pair<std::string, int>;

TickSeries clean_group(const GroupKey& key, std::vector<Row> rows, const SessionCalendar& cal,
                       IngestReport& rep) {
    rep.rows = rows.size();
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
    std::vector<Row> kept;
    kept.reserve(rows.size());
    std::size_t run_start = 0;
    for (const auto& r : rows) {
        if (kept.empty() || kept.back().t != r.t) run_start = kept.size();
        bool dup = false;
        for (std::size_t j = run_start; j < kept.size(); ++j) dup = dup || kept[j].price == r.price;
        if (dup) {
            ++rep.duplicates_dropped;
            continue;
        }
        kept.push_back(r);
    }
    std::vector<Row> session;
    session.reserve(kept.size());
    for (const auto& r : kept) {
        if (in_session(to_local(r.t, cal), cal)) session.push_back(r);
        else ++rep.out_of_session_dropped;
    }
    TickSeries ts;
    ts.instrument_id = key.first;
    ts.side = key.second == 0 ? Side::Bid : Side::Ask;
    for (const auto& r : session) {
        Micros t = r.t;
        if (!ts.timestamps.empty() && t <= ts.timestamps.back()) {
            t = ts.timestamps.back() + 1;
            ++rep.ties_shifted;
        }
        ts.timestamps.push_back(t);
        ts.prices.push_back(r.price);
    }
    const std::string label = key.first + "/" + to_string(ts.side);
    if (rep.duplicates_dropped > 0) {
        rep.warnings.push_back(label + ": dropped " + std::to_string(rep.duplicates_dropped) + " duplicate rows");
    }
    if (rep.ties_shifted > 0) {
        rep.warnings.push_back(label + ": shifted " + std::to_string(rep.ties_shifted) +
                               " same-timestamp ticks by 1us");
    }
    if (rep.out_of_session_dropped > 0) {
        rep.warnings.push_back(label + ": dropped " + std::to_string(rep.out_of_session_dropped) +
                               " ticks outside " + cal.name + " session hours");
    }
    if (ts.empty()) throw DataError(label + ": no ticks inside " + cal.name + " session hours");
    assign_business_time(ts, cal);
    return ts;
}

double quantile7(const std::vector<double>& sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

// n ticks on a grid of width `tick` as a double, exact when 1/tick is integral.
double grid_price(long long n, double tick) {
    const double inv = 1.0 / tick;
    const double rinv = std::round(inv);
    if (std::abs(inv - rinv) < 1e-9 * rinv) return static_cast<double>(n) / rinv;
    return static_cast<double>(n) * tick;
}

long long grid_index(double x, double tick) {
    const double inv = 1.0 / tick;
    const double rinv = std::round(inv);
    if (std::abs(inv - rinv) < 1e-9 * rinv) return std::llround(x * rinv);
    return std::llround(x / tick);
}

// UTC instant of business offset `bt` microseconds, where session days are
// counted from the local start date.
class SessionClock {
public:
    SessionClock(const SessionCalendar& cal, const std::string& start_date)
        : cal_(cal), first_(parse_date(start_date)) {}

    Micros to_utc(Micros bt) {
        const Micros length = cal_.session_length();
        const auto k = static_cast<std::size_t>(bt / length);
        while (days_.size() <= k) {
            Micros d = days_.empty() ? first_ : days_.back() + 1;
            while (cal_.weekdays_only && !is_weekday(d)) ++d;
            days_.push_back(d);
        }
        const Micros local = days_[k] * kMicrosPerDay + cal_.open_minute * kMicrosPerMinute + bt % length;
        return local - cal_.utc_offset_minutes * kMicrosPerMinute;
    }

private:
    SessionCalendar cal_;
    Micros first_;
    std::vector<Micros> days_;
};

Micros to_micros(double seconds) { return std::llround(seconds * static_cast<double>(kMicrosPerSecond)); }

}  // namespace

std::string to_string(Side side) { return side == Side::Bid ? "bid" : "ask"; }

Side parse_side(const std::string& text) {
    if (text == "bid") return Side::Bid;
    if (text == "ask") return Side::Ask;
    throw DataError("side must be 'bid' or 'ask', got '" + text + "'");
}

Micros SessionCalendar::session_length() const noexcept {
    return static_cast<Micros>(close_minute - open_minute) * kMicrosPerMinute;
}

void SessionCalendar::check() const {
    if (open_minute < 0 || close_minute > 24 * 60 || open_minute >= close_minute) {
        throw DataError("calendar " + name + ": need 0 <= open < close <= 1440 minutes");
    }
    if (!(tick_size > 0.0)) throw DataError("calendar " + name + ": tick size must be > 0");
}

SessionCalendar SessionCalendar::eur() { return {"eur", 60, 8 * 60, 17 * 60 + 30, true, 0.001}; }
SessionCalendar SessionCalendar::sgd() { return {"sgd", 480, 9 * 60, 12 * 60, true, 0.001}; }
SessionCalendar SessionCalendar::utc24() { return {"utc24", 0, 0, 24 * 60, false, 0.001}; }

SessionCalendar calendar_by_name(const std::string& name) {
    if (name == "eur") return SessionCalendar::eur();
    if (name == "sgd") return SessionCalendar::sgd();
    if (name == "utc24") return SessionCalendar::utc24();
    throw DataError("unknown calendar '" + name + "' (expected eur, sgd or utc24)");
}

Micros parse_timestamp(const std::string& s) {
    // YYYY-MM-DDTHH:MM:SS[.f{1,6}]Z
    auto fail = [&]() -> Micros { throw DataError("bad timestamp '" + s + "'"); };
    if (s.size() < 20 || s.back() != 'Z' || s[10] != 'T' || s[13] != ':' || s[16] != ':') return fail();
    int hh = 0;
    int mm = 0;
    int ss = 0;
    const std::string_view v(s);
    if (!parse_int(v.substr(11, 2), hh) || !parse_int(v.substr(14, 2), mm) || !parse_int(v.substr(17, 2), ss)) {
        return fail();
    }
    if (hh > 23 || mm > 59 || ss > 59 || hh < 0 || mm < 0 || ss < 0) return fail();
    Micros frac = 0;
    const std::size_t tail = s.size() - 1;
    if (tail > 19) {
        if (s[19] != '.' || tail - 20 < 1 || tail - 20 > 6) return fail();
        const auto digits = v.substr(20, tail - 20);
        if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) return fail();
        if (!parse_int(digits, frac)) return fail();
        for (std::size_t k = digits.size(); k < 6; ++k) frac *= 10;
    }
    Micros days = 0;
    try {
        days = parse_date(s.substr(0, 10));
    } catch (const DataError&) {
        return fail();
    }
    return days * kMicrosPerDay + ((hh * 60 + mm) * 60 + ss) * kMicrosPerSecond + frac;
}

std::string format_timestamp(Micros t) {
    const Micros day = floor_div(t, kMicrosPerDay);
    Micros rem = t - day * kMicrosPerDay;
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{day}}};
    const Micros us = rem % kMicrosPerSecond;
    rem /= kMicrosPerSecond;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%06lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                  static_cast<long long>(rem % 60), static_cast<long long>(us));
    return buf;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<TickSeries> parse_tick_groups(std::istream& in, const SessionCalendar& calendar,
                                          std::vector<IngestReport>* reports) {
    calendar.check();
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    std::map<GroupKey, std::vector<Row>> groups;
    while (std::getline(in, line)) {
        ++lineno;
        chomp(line);
        if (!header) {
            if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
            if (line != kTickHeader) {
                throw DataError(line_error(lineno, std::string("expected header '") + kTickHeader + "'"));
            }
            header = true;
            continue;
        }
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 4) {
            throw DataError(line_error(lineno, "expected 4 fields, got " + std::to_string(f.size())));
        }
        Row r{};
        r.line = lineno;
        try {
            r.t = parse_timestamp(f[0]);
        } catch (const DataError& e) {
            throw DataError(line_error(lineno, e.what()));
        }
        if (!parse_double(f[1], r.price) || !std::isfinite(r.price)) {
            throw DataError(line_error(lineno, "bad price '" + f[1] + "'"));
        }
        if (!(r.price > 0.0)) throw DataError(line_error(lineno, "price must be > 0, got " + f[1]));
        int side = 0;
        try {
            side = parse_side(f[2]) == Side::Bid ? 0 : 1;
        } catch (const DataError& e) {
            throw DataError(line_error(lineno, e.what()));
        }
        if (f[3].empty()) throw DataError(line_error(lineno, "empty instrument"));
        groups[{f[3], side}].push_back(r);
    }
    if (!header) throw DataError("empty tick file");
    if (groups.empty()) throw DataError("tick file has a header but no rows");
    std::vector<TickSeries> out;
    for (auto& [key, rows] : groups) {
        IngestReport rep;
        out.push_back(clean_group(key, std::move(rows), calendar, rep));
        if (reports) reports->push_back(std::move(rep));
    }
    return out;
}

TickSeries parse_ticks(std::istream& in, const IngestConfig& config, IngestReport* report) {
    std::vector<IngestReport> reports;
    auto groups = parse_tick_groups(in, config.calendar, &reports);
    std::vector<std::size_t> match;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (config.instrument && groups[i].instrument_id != *config.instrument) continue;
        if (config.side && groups[i].side != *config.side) continue;
        match.push_back(i);
    }
    if (match.empty()) throw DataError("no ticks match the requested instrument/side");
    if (match.size() > 1) {
        throw DataError("tick file holds " + std::to_string(match.size()) +
                        " instrument/side groups; select one with instrument and side");
    }
    if (report) *report = reports[match.front()];
    return std::move(groups[match.front()]);
}

void write_ticks(std::ostream& out, const TickSeries& ticks) { write_ticks(out, std::vector<TickSeries>{ticks}); }

void write_ticks(std::ostream& out, const std::vector<TickSeries>& groups) {
    out << kTickHeader << '\n';
    for (const auto& g : groups) {
        const std::string side = to_string(g.side);
        for (std::size_t i = 0; i < g.size(); ++i) {
            out << format_timestamp(g.timestamps[i]) << ',' << format_double(g.prices[i]) << ',' << side << ','
                << g.instrument_id << '\n';
        }
    }
}

ReturnSeries log_returns(const TickSeries& ticks) {
    if (ticks.size() < 2) throw DataError("log returns need at least 2 ticks");
    ReturnSeries r;
    r.values.reserve(ticks.size() - 1);
    for (std::size_t i = 1; i < ticks.size(); ++i) {
        r.values.push_back(std::log(ticks.prices[i] / ticks.prices[i - 1]));
        r.day_boundary.push_back(ticks.day_index[i] != ticks.day_index[i - 1]);
    }
    return r;
}

std::vector<double> aligned_spread(const TickSeries& bid, const TickSeries& ask) {
    if (bid.empty() || ask.empty()) throw DataError("spread needs non-empty bid and ask series");
    const Micros start = std::max(bid.timestamps.front(), ask.timestamps.front());
    const Micros end = std::min(bid.timestamps.back(), ask.timestamps.back());
    if (start > end) throw DataError("bid and ask series do not overlap in time");
    std::vector<double> out;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < bid.size() || j < ask.size()) {
        const Micros ti = i < bid.size() ? bid.timestamps[i] : INT64_MAX;
        const Micros tj = j < ask.size() ? ask.timestamps[j] : INT64_MAX;
        const Micros t = std::min(ti, tj);
        if (t > end) break;
        while (i < bid.size() && bid.timestamps[i] == t) ++i;
        while (j < ask.size() && ask.timestamps[j] == t) ++j;
        if (t < start) continue;
        out.push_back(ask.prices[j - 1] - bid.prices[i - 1]);
    }
    return out;
}

SpreadStats describe_spread(const std::vector<double>& spread, double tick_size) {
    if (spread.empty()) throw DataError("spread statistics need a non-empty sample");
    if (!(tick_size > 0.0)) throw DataError("tick size must be > 0");
    std::vector<double> x(spread);
    std::sort(x.begin(), x.end());
    SpreadStats s;
    s.n = x.size();
    s.min = x.front();
    s.max = x.back();
    s.median = quantile7(x, 0.5);
    s.iqr = quantile7(x, 0.75) - quantile7(x, 0.25);

    std::map<long long, std::size_t> counts;
    for (double v : x) ++counts[grid_index(v, tick_size)];
    long long mode_k = counts.begin()->first;
    std::size_t best = 0;
    for (const auto& [k, c] : counts) {
        if (c > best) {
            best = c;
            mode_k = k;
        }
    }
    s.mode = grid_price(mode_k, tick_size);

    if (s.min == s.max) {
        s.mean = s.min;
        s.std = 0.0;
        return s;
    }
    const double n = static_cast<double>(x.size());
    s.mean = std::accumulate(spread.begin(), spread.end(), 0.0) / n;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (double v : spread) {
        const double d = v - s.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    s.std = x.size() > 1 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 > 0.0) {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return s;
}

SpreadStats spread_stats(const TickSeries& bid, const TickSeries& ask, double tick_size) {
    return describe_spread(aligned_spread(bid, ask), tick_size);
}

void write_spread_stats(std::ostream& out, const SpreadStats& s) {
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("undefined"); };
    out << "mean,median,mode,std,excess_kurtosis,skewness,iqr,min,max\n";
    out << format_double(s.mean) << ',' << format_double(s.median) << ',' << format_double(s.mode) << ','
        << format_double(s.std) << ',' << opt(s.excess_kurtosis) << ',' << opt(s.skewness) << ','
        << format_double(s.iqr) << ',' << format_double(s.min) << ',' << format_double(s.max) << '\n';
}

// ---- synthetic fixtures ------------------------------------------------------

void SynthConfig::check() const {
    calendar.check();
    (void)parse_date(start_date);
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DataError("synth: horizon must be > 0");
    if (!(initial_price > 0.0)) throw DataError("synth: initial price must be > 0");
    if (!(volatility >= 0.0) || !std::isfinite(volatility)) throw DataError("synth: volatility must be >= 0");
    if (!(tick_rate > 0.0) || !std::isfinite(tick_rate)) throw DataError("synth: tick rate must be > 0");
    if (jump_times.size() != jump_sizes.size()) throw DataError("synth: jump times and sizes differ in length");
    for (double t : jump_times) {
        if (!(t >= 0.0 && t <= horizon)) throw DataError("synth: jump time outside [0, horizon]");
    }
    if (jump_process && signed_jump_process) {
        throw DataError("synth: give either a univariate or a bivariate jump process, not both");
    }
    if (!std::isfinite(jump_size)) throw DataError("synth: jump size must be finite");
}

SynthOutput synth_ticks(const SynthConfig& cfg) {
    cfg.check();
    const Micros horizon = to_micros(cfg.horizon);

    std::vector<std::pair<Micros, double>> jumps;
    for (std::size_t i = 0; i < cfg.jump_times.size(); ++i) {
        jumps.emplace_back(to_micros(cfg.jump_times[i]), cfg.jump_sizes[i]);
    }
    simulate::SimulationConfig sim;
    sim.horizon = cfg.horizon;
    sim.seed = cfg.seed;
    sim.stream = 3;
    if (cfg.jump_process) {
        Rng sign_rng(cfg.seed, 2);
        const auto ev = simulate::simulate_univariate(*cfg.jump_process, sim);
        for (double t : ev.times()) {
            jumps.emplace_back(to_micros(t), sign_rng.bernoulli(0.5) ? cfg.jump_size : -cfg.jump_size);
        }
    }
    if (cfg.signed_jump_process) {
        const auto ev = simulate::simulate_bivariate(*cfg.signed_jump_process, sim);
        for (std::size_t i = 0; i < ev.size(); ++i) {
            jumps.emplace_back(to_micros(ev.times()[i]),
                               ev.marks()[i] == model::Mark::Positive ? cfg.jump_size : -cfg.jump_size);
        }
    }
    std::stable_sort(jumps.begin(), jumps.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<Micros> grid{0};
    Rng arrivals(cfg.seed, 0);
    if (cfg.arrivals == Arrivals::Exponential) {
        double t = 0.0;
        while (true) {
            t += arrivals.exponential(cfg.tick_rate);
            if (t > cfg.horizon) break;
            grid.push_back(to_micros(t));
        }
    } else {
        for (long long k = 1;; ++k) {
            const double t = static_cast<double>(k) / cfg.tick_rate;
            if (t > cfg.horizon) break;
            grid.push_back(to_micros(t));
        }
    }
    if (cfg.tick_at_jumps) {
        for (const auto& j : jumps) grid.push_back(j.first);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    while (!grid.empty() && grid.back() > horizon) grid.pop_back();

    Rng diffusion(cfg.seed, 1);
    SessionClock clock(cfg.calendar, cfg.start_date);
    SynthOutput out;
    out.ticks.instrument_id = cfg.instrument;
    out.ticks.side = cfg.side;
    double w = 0.0;
    double jump_sum = 0.0;
    std::size_t next_jump = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i > 0) {
            const double dt = static_cast<double>(grid[i] - grid[i - 1]) / static_cast<double>(kMicrosPerSecond);
            w += std::sqrt(dt) * diffusion.normal();
        }
        while (next_jump < jumps.size() && jumps[next_jump].first <= grid[i]) {
            jump_sum += jumps[next_jump].second;
            out.jump_times.push_back(static_cast<double>(jumps[next_jump].first) / static_cast<double>(kMicrosPerSecond));
            out.jump_sizes.push_back(jumps[next_jump].second);
            ++next_jump;
        }
        out.ticks.timestamps.push_back(clock.to_utc(grid[i]));
        out.ticks.prices.push_back(cfg.initial_price * std::exp(cfg.volatility * w + jump_sum));
    }
    assign_business_time(out.ticks, cfg.calendar);
    return out;
}

Micros business_to_utc(double business_seconds, const SessionCalendar& calendar, const std::string& start_date) {
    if (!(business_seconds >= 0.0)) throw DataError("business time must be >= 0");
    SessionClock clock(calendar, start_date);
    return clock.to_utc(to_micros(business_seconds));
}

TickSeries ticks_from_events(const model::MarkedEventSeries& events, const SessionCalendar& calendar,
                             const std::string& start_date, double initial_price, double tick,
                             const std::string& instrument, Side side) {
    calendar.check();
    if (!(tick > 0.0) || !(initial_price > 0.0)) throw DataError("ticks_from_events: price and tick must be > 0");
    SessionClock clock(calendar, start_date);
    TickSeries ts;
    ts.instrument_id = instrument;
    ts.side = side;
    long long level = grid_index(initial_price, tick);
    Micros last = 0;
    ts.timestamps.push_back(clock.to_utc(0));
    ts.prices.push_back(grid_price(level, tick));
    for (std::size_t i = 0; i < events.size(); ++i) {
        Micros bt = std::max(to_micros(events.times()[i]), last + 1);
        last = bt;
        level += events.marks()[i] == model::Mark::Positive ? 1 : -1;
        if (level <= 0) throw DataError("ticks_from_events: price walk reached zero");
        ts.timestamps.push_back(clock.to_utc(bt));
        ts.prices.push_back(grid_price(level, tick));
    }
    assign_business_time(ts, calendar);
    return ts;
}

// ---- events CSV --------------------------------------------------------------

void write_events(std::ostream& out, const model::EventSeries& events) {
    out << kEventHeader << '\n';
    for (double t : events.times()) out << format_double(t) << ",0\n";
}

void write_events(std::ostream& out, const model::MarkedEventSeries& events) {
    out << kEventHeader << '\n';
    for (std::size_t i = 0; i < events.size(); ++i) {
        out << format_double(events.times()[i]) << ',' << (events.marks()[i] == model::Mark::Positive ? "1" : "-1")
            << '\n';
    }
}

bool EventFile::marked() const {
    return !marks.empty() && std::none_of(marks.begin(), marks.end(), [](int m) { return m == 0; });
}

model::EventSeries EventFile::unmarked_series() const {
    try {
        return model::EventSeries(times);
    } catch (const model::SpecError& e) {
        throw DataError(std::string("events: ") + e.what());
    }
}

model::MarkedEventSeries EventFile::marked_series() const {
    std::vector<model::Mark> m;
    m.reserve(marks.size());
    for (int v : marks) {
        if (v == 0) throw DataError("events: bivariate input needs marks 1 or -1 on every row");
        m.push_back(v > 0 ? model::Mark::Positive : model::Mark::Negative);
    }
    try {
        return model::MarkedEventSeries(times, std::move(m));
    } catch (const model::SpecError& e) {
        throw DataError(std::string("events: ") + e.what());
    }
}

EventFile read_events(std::istream& in) {
    EventFile f;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        chomp(line);
        if (!header) {
            if (line != kEventHeader) {
                throw DataError(line_error(lineno, std::string("expected header '") + kEventHeader + "'"));
            }
            header = true;
            continue;
        }
        if (line.empty()) continue;
        const auto cols = split_csv(line);
        double t = 0.0;
        int mark = 0;
        if (cols.size() != 2 || !parse_double(cols[0], t) || !std::isfinite(t) || !parse_int(cols[1], mark) ||
            (mark != 0 && mark != 1 && mark != -1)) {
            throw DataError(line_error(lineno, "expected 'business_time,mark' with mark in {1,-1,0}"));
        }
        f.times.push_back(t);
        f.marks.push_back(mark);
    }
    if (!header) throw DataError("empty events file");
    if (f.times.empty()) throw DataError("events file has no rows");
    return f;
}

}  // namespace carma_hawkes::data
