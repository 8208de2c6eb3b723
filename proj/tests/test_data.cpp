#include "carma_hawkes/data.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace carma_hawkes;
using data::Micros;

namespace {

const std::string kHeader = "timestamp,price,side,instrument\n";

data::TickSeries parse(const std::string& text, data::IngestReport* rep = nullptr,
                       data::SessionCalendar cal = data::SessionCalendar::utc24()) {
    std::istringstream in(text);
    data::IngestConfig cfg;
    cfg.calendar = cal;
    return data::parse_ticks(in, cfg, rep);
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const data::DataError& e) {
        return e.what();
    }
    return "";
}

data::TickSeries series(std::vector<double> prices, Micros step = data::kMicrosPerSecond) {
    std::ostringstream csv;
    csv << kHeader;
    Micros t = data::parse_timestamp("2024-01-08T10:00:00Z");
    for (double p : prices) {
        csv << data::format_timestamp(t) << ',' << data::format_double(p) << ",bid,X\n";
        t += step;
    }
    return parse(csv.str());
}

}  // namespace

TEST_CASE("timestamps") {
    CHECK(data::parse_timestamp("1970-01-01T00:00:00Z") == 0);
    CHECK(data::parse_timestamp("1970-01-01T00:00:01.5Z") == 1'500'000);
    CHECK(data::parse_timestamp("2024-01-08T07:01:45.673820Z") == 1704697305673820);
    CHECK(data::format_timestamp(1704697305673820) == "2024-01-08T07:01:45.673820Z");
    CHECK(data::format_timestamp(data::parse_timestamp("2023-12-31T23:59:59.000001Z")) ==
          "2023-12-31T23:59:59.000001Z");
    CHECK_THROWS_AS(data::parse_timestamp("2024-01-08 07:00:00"), data::DataError);
    CHECK_THROWS_AS(data::parse_timestamp("2024-13-08T07:00:00Z"), data::DataError);
}

TEST_CASE("calendars") {
    CHECK(data::calendar_by_name("eur").utc_offset_minutes == 60);
    CHECK(data::calendar_by_name("sgd").session_length() == 3 * 3600 * data::kMicrosPerSecond);
    CHECK(data::calendar_by_name("utc24").session_length() == data::kMicrosPerDay);
    CHECK_THROWS_AS(data::calendar_by_name("nyse"), data::DataError);
}

TEST_CASE("parse well-formed file") {
    const auto t = parse(kHeader + "2024-01-08T10:00:00.000000Z,100.5,bid,XS1\n"
                                   "2024-01-08T10:00:01.250000Z,100.6,bid,XS1\n"
                                   "2024-01-08T10:00:03.000000Z,100.4,bid,XS1\n");
    REQUIRE(t.size() == 3);
    CHECK(t.business_times == std::vector<double>{0.0, 1.25, 3.0});
    CHECK(t.prices == std::vector<double>{100.5, 100.6, 100.4});
    CHECK(t.instrument_id == "XS1");
    CHECK(t.side == data::Side::Bid);
    CHECK(t.day_count() == 1);
}

TEST_CASE("duplicates and ties") {
    data::IngestReport rep;
    const auto t = parse(kHeader + "2024-01-08T10:00:00Z,100.5,bid,XS1\n"
                                   "2024-01-08T10:00:00Z,100.5,bid,XS1\n"
                                   "2024-01-08T10:00:05Z,100.7,bid,XS1\n",
                         &rep);
    CHECK(t.size() == 2);
    CHECK(rep.duplicates_dropped == 1);

    data::IngestReport rep2;
    const auto u = parse(kHeader + "2024-01-08T10:00:00Z,100.5,bid,XS1\n"
                                   "2024-01-08T10:00:00Z,100.6,bid,XS1\n"
                                   "2024-01-08T10:00:01Z,100.7,bid,XS1\n",
                         &rep2);
    REQUIRE(u.size() == 3);
    CHECK(u.prices == std::vector<double>{100.5, 100.6, 100.7});
    CHECK(u.timestamps[1] - u.timestamps[0] == 1);
    CHECK(rep2.ties_shifted == 1);
    CHECK_FALSE(rep2.warnings.empty());

    // Unsorted input is sorted stably.
    const auto s = parse(kHeader + "2024-01-08T10:00:02Z,100.7,bid,XS1\n"
                                   "2024-01-08T10:00:00Z,100.5,bid,XS1\n");
    CHECK(s.prices == std::vector<double>{100.5, 100.7});
}

TEST_CASE("parse errors carry line numbers") {
    CHECK(error_of("") == "empty tick file");
    CHECK(error_of(kHeader).find("no rows") != std::string::npos);
    CHECK(error_of("time,price\n").find("line 1") != std::string::npos);
    CHECK(error_of(kHeader + "2024-01-08T10:00:00Z,100.5,bid,XS1\n2024-01-08T10:00:01Z,abc,bid,XS1\n")
              .find("line 3") != std::string::npos);
    CHECK(error_of(kHeader + "2024-01-08T10:00:00Z,-1,bid,XS1\n").find("line 2") != std::string::npos);
    CHECK(error_of(kHeader + "2024-01-08T10:00:00Z,0,bid,XS1\n").find("> 0") != std::string::npos);
    CHECK(error_of(kHeader + "2024-01-08T10:00:00Z,1,mid,XS1\n").find("line 2") != std::string::npos);
    CHECK(error_of(kHeader + "2024-01-08T10:00:00Z,1,bid\n").find("line 2") != std::string::npos);
    CHECK(error_of(kHeader + "yesterday,1,bid,XS1\n").find("line 2") != std::string::npos);
}

TEST_CASE("bundled fixture") {
    std::ifstream in(std::string(CARMA_FIXTURE_DIR) + "/ticks_small.csv");
    REQUIRE(in);
    std::vector<data::IngestReport> reps;
    const auto groups = data::parse_tick_groups(in, data::SessionCalendar::eur(), &reps);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].side == data::Side::Bid);
    CHECK(groups[1].side == data::Side::Ask);
    CHECK(reps[0].duplicates_dropped == 1);
    CHECK(reps[0].ties_shifted == 1);
    CHECK(groups[0].size() == 601);
    CHECK(groups[1].size() == 600);
    CHECK(groups[0].day_count() == 2);

    std::ifstream again(std::string(CARMA_FIXTURE_DIR) + "/ticks_small.csv");
    data::IngestConfig cfg;
    CHECK_THROWS_AS(data::parse_ticks(again, cfg), data::DataError);
}

TEST_CASE("round trip is lossless") {
    std::ifstream in(std::string(CARMA_FIXTURE_DIR) + "/ticks_small.csv");
    const auto groups = data::parse_tick_groups(in, data::SessionCalendar::eur());
    std::ostringstream out;
    data::write_ticks(out, groups);
    std::istringstream back(out.str());
    const auto again = data::parse_tick_groups(back, data::SessionCalendar::eur());
    REQUIRE(again.size() == groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        CHECK(again[g].timestamps == groups[g].timestamps);
        CHECK(again[g].prices == groups[g].prices);
        CHECK(again[g].business_times == groups[g].business_times);
        CHECK(again[g].day_index == groups[g].day_index);
        CHECK(again[g].instrument_id == groups[g].instrument_id);
        CHECK(again[g].side == groups[g].side);
    }
    std::ostringstream out2;
    data::write_ticks(out2, again);
    CHECK(out2.str() == out.str());

    // Awkward decimals survive too.
    const auto odd = series({0.1, 1.0 / 3.0, 123456.789012345, 5e-7});
    std::ostringstream o;
    data::write_ticks(o, odd);
    std::istringstream i(o.str());
    data::IngestConfig cfg;
    cfg.calendar = data::SessionCalendar::utc24();
    CHECK(data::parse_ticks(i, cfg).prices == odd.prices);
}

TEST_CASE("business time collapses closures") {
    auto cal = data::SessionCalendar::eur();
    // Friday 16:00 local, Friday 17:20, Monday 08:10.
    const auto t = parse(kHeader + "2024-01-12T15:00:00Z,100,bid,X\n"
                                   "2024-01-12T16:20:00Z,101,bid,X\n"
                                   "2024-01-12T17:00:00Z,99,bid,X\n"
                                   "2024-01-15T07:10:00Z,102,bid,X\n",
                         nullptr, cal);
    REQUIRE(t.size() == 3);
    CHECK(t.business_times[1] == 4800.0);
    CHECK(t.day_index == std::vector<int>{0, 0, 1});
    // Monday 08:10 is the remaining Friday session plus 10 minutes.
    const double friday_rest = 5400.0;  // 16:00 to the 17:30 close
    CHECK(t.business_times[2] == friday_rest + 600.0);
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double wall = static_cast<double>(t.timestamps[i] - t.timestamps[i - 1]) / 1e6;
        const double bt = t.business_times[i] - t.business_times[i - 1];
        CHECK(bt <= wall);
        if (t.day_index[i] == t.day_index[i - 1]) CHECK(bt == wall);
    }
}

TEST_CASE("log returns") {
    const auto flat = series({100.0, 100.0});
    CHECK(data::log_returns(flat).values == std::vector<double>{0.0});
    const auto up = series({100.0, 100.0 * std::exp(0.01)});
    CHECK(data::log_returns(up).values[0] == doctest::Approx(0.01).epsilon(1e-14));

    std::vector<double> prices{50.0};
    std::uint64_t state = 7;
    for (int i = 0; i < 200; ++i) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        prices.push_back(prices.back() * (1.0 + 0.01 * (static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5)));
    }
    const auto ts = series(prices);
    const auto r = data::log_returns(ts);
    double cum = 0.0;
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        cum += r.values[i];
        CHECK(std::abs(prices[0] * std::exp(cum) / prices[i + 1] - 1.0) <= 1e-12);
    }
    CHECK_THROWS_AS(data::log_returns(series({100.0})), data::DataError);
}

TEST_CASE("spread statistics: hand-computed fixture") {
    const std::vector<double> x{0.12, 0.15, 0.15, 0.18, 0.20, 0.25, 0.31};
    const auto s = data::describe_spread(x);
    // Reference values from a separate spreadsheet-style evaluation:
    // mean = sum / 7, std with n - 1, g1 and g2 from central moments.
    CHECK(s.mean == doctest::Approx(0.1942857142857143).epsilon(1e-14));
    CHECK(s.median == 0.18);
    CHECK(s.mode == 0.15);
    CHECK(s.std == doctest::Approx(0.06604471789556499).epsilon(1e-13));
    REQUIRE(s.skewness.has_value());
    REQUIRE(s.excess_kurtosis.has_value());
    CHECK(*s.skewness == doctest::Approx(0.7098565646541324).epsilon(1e-12));
    CHECK(*s.excess_kurtosis == doctest::Approx(-0.6789785187162738).epsilon(1e-12));
    CHECK(s.iqr == doctest::Approx(0.075).epsilon(1e-13));
    CHECK(s.min == 0.12);
    CHECK(s.max == 0.31);
    CHECK(s.n == 7);
}

TEST_CASE("spread statistics: degenerate and symmetric samples") {
    const auto d = data::describe_spread({0.25, 0.25, 0.25, 0.25});
    CHECK(d.mean == 0.25);
    CHECK(d.median == 0.25);
    CHECK(d.mode == 0.25);
    CHECK(d.min == 0.25);
    CHECK(d.max == 0.25);
    CHECK(d.std == 0.0);
    CHECK(d.iqr == 0.0);
    CHECK_FALSE(d.skewness.has_value());
    CHECK_FALSE(d.excess_kurtosis.has_value());
    std::ostringstream out;
    data::write_spread_stats(out, d);
    CHECK(out.str() == "mean,median,mode,std,excess_kurtosis,skewness,iqr,min,max\n"
                       "0.25,0.25,0.25,0,undefined,undefined,0,0.25,0.25\n");

    const auto two = data::describe_spread({0.2, 0.3, 0.2, 0.3});
    REQUIRE(two.skewness.has_value());
    CHECK(std::abs(*two.skewness) < 1e-12);
    CHECK(two.mode == 0.2);

    CHECK_THROWS_AS(data::describe_spread({}), data::DataError);
}

TEST_CASE("aligned spread") {
    auto bid = series({100.0, 100.0, 100.0, 100.0}, 2 * data::kMicrosPerSecond);
    std::ostringstream csv;
    csv << kHeader;
    Micros t = data::parse_timestamp("2024-01-08T10:00:01Z");
    for (int i = 0; i < 4; ++i) {
        csv << data::format_timestamp(t) << ",100.25,ask,X\n";
        t += 2 * data::kMicrosPerSecond;
    }
    auto ask = parse(csv.str());
    // Overlap [10:00:01, 10:00:06]: ask grid 1,3,5 and bid grid 2,4,6.
    const auto spread = data::aligned_spread(bid, ask);
    CHECK(spread.size() == 6);
    for (double v : spread) CHECK(v == 0.25);
    const auto st = data::spread_stats(bid, ask);
    CHECK(st.mean == 0.25);
    CHECK_FALSE(st.skewness.has_value());

    auto late = series({100.0, 100.0});
    for (auto& ts : late.timestamps) ts += 3600 * data::kMicrosPerSecond;
    CHECK_THROWS_AS(data::aligned_spread(bid, late), data::DataError);

    for (const auto& sample : {std::vector<double>{0.1, 0.5, 0.2}, std::vector<double>{3.0, -1.0, 2.0, 2.0, 8.0}}) {
        const auto s = data::describe_spread(sample);
        CHECK(s.min <= s.median);
        CHECK(s.median <= s.max);
        CHECK(s.iqr >= 0.0);
        CHECK(s.std >= 0.0);
    }
}

TEST_CASE("synthetic ticks") {
    data::SynthConfig flat;
    flat.volatility = 0.0;
    flat.horizon = 500.0;
    const auto f = data::synth_ticks(flat).ticks;
    for (double p : f.prices) CHECK(p == flat.initial_price);

    data::SynthConfig jc;
    jc.volatility = 0.0;
    jc.horizon = 500.0;
    jc.jump_times = {200.0};
    jc.jump_sizes = {0.01};
    jc.tick_at_jumps = false;
    const auto jt = data::synth_ticks(jc).ticks;
    const auto r = data::log_returns(jt);
    int elevated = 0;
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        if (r.values[i] != 0.0) {
            ++elevated;
            CHECK(r.values[i] == doctest::Approx(0.01).epsilon(1e-12));
            CHECK(jt.business_times[i + 1] >= 200.0);
            CHECK(jt.business_times[i] < 200.0);
        }
    }
    CHECK(elevated == 1);

    int within = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        data::SynthConfig c;
        c.horizon = 20000.0;
        c.volatility = 1e-3;
        c.seed = seed;
        const auto t = data::synth_ticks(c).ticks;
        double rv = 0.0;
        for (double v : data::log_returns(t).values) rv += v * v;
        const double elapsed = t.business_times.back() - t.business_times.front();
        within += std::abs(rv / (1e-6 * elapsed) - 1.0) < 0.10;
    }
    CHECK(within == 20);

    data::SynthConfig a;
    a.seed = 3;
    a.horizon = 1000.0;
    const auto x = data::synth_ticks(a);
    const auto y = data::synth_ticks(a);
    CHECK(x.ticks.timestamps == y.ticks.timestamps);
    CHECK(x.ticks.prices == y.ticks.prices);

    data::SynthConfig bad;
    bad.horizon = -1.0;
    CHECK_THROWS_AS(data::synth_ticks(bad), data::DataError);
    bad.horizon = 10.0;
    bad.jump_times = {20.0};
    bad.jump_sizes = {0.1};
    CHECK_THROWS_AS(data::synth_ticks(bad), data::DataError);
}

TEST_CASE("ticks from events") {
    const model::MarkedEventSeries ev({1.0, 2.5, 4.0}, {model::Mark::Positive, model::Mark::Positive,
                                                        model::Mark::Negative});
    const auto t = data::ticks_from_events(ev, data::SessionCalendar::utc24(), "2024-01-08", 100.0, 0.01);
    REQUIRE(t.size() == 4);
    CHECK(t.prices == std::vector<double>{100.0, 100.01, 100.02, 100.01});
    CHECK(t.business_times == std::vector<double>{0.0, 1.0, 2.5, 4.0});
}

TEST_CASE("events csv") {
    const model::MarkedEventSeries ev({0.5, 1.25, 3.0}, {model::Mark::Positive, model::Mark::Negative,
                                                         model::Mark::Positive});
    std::ostringstream out;
    data::write_events(out, ev);
    CHECK(out.str() == "business_time,mark\n0.5,1\n1.25,-1\n3,1\n");
    std::istringstream in(out.str());
    const auto f = data::read_events(in);
    CHECK(f.marked());
    CHECK(f.marked_series().times() == ev.times());
    CHECK(f.marked_series().marks() == ev.marks());

    std::ostringstream u;
    data::write_events(u, model::EventSeries({1.0, 2.0}));
    CHECK(u.str() == "business_time,mark\n1,0\n2,0\n");
    std::istringstream ui(u.str());
    const auto uf = data::read_events(ui);
    CHECK_FALSE(uf.marked());
    CHECK_THROWS_AS((void)uf.marked_series(), data::DataError);

    std::istringstream bad("business_time,mark\n1.0,2\n");
    CHECK_THROWS_AS(data::read_events(bad), data::DataError);
}
