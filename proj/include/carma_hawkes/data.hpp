#pragma once

#include "carma_hawkes/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace carma_hawkes::data {

/// Microseconds since 1970-01-01T00:00:00Z.
using Micros = std::int64_t;

inline constexpr Micros kMicrosPerSecond = 1'000'000;
inline constexpr Micros kMicrosPerDay = 86'400 * kMicrosPerSecond;

/// Input or format problem the user can fix (bad row, missing column, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Side { Bid, Ask };

std::string to_string(Side side);
/// Accepts "bid" or "ask".
Side parse_side(const std::string& text);

/// Trading session with a fixed UTC offset. Local session [open, close) in
/// minutes after local midnight.
struct SessionCalendar {
    std::string name{"utc24"};
    int utc_offset_minutes{0};
    int open_minute{0};
    int close_minute{24 * 60};
    bool weekdays_only{false};
    /// Price grid used for the spread mode.
    double tick_size{0.001};

    [[nodiscard]] Micros session_length() const noexcept;
    void check() const;

    /// 08:00-17:30 at UTC+1, weekdays.
    static SessionCalendar eur();
    /// 09:00-12:00 at UTC+8, weekdays.
    static SessionCalendar sgd();
    /// Whole day, every day, UTC.
    static SessionCalendar utc24();
};

/// Looks up "eur", "sgd" or "utc24".
SessionCalendar calendar_by_name(const std::string& name);

Micros parse_timestamp(const std::string& text);
/// YYYY-MM-DDTHH:MM:SS.ffffffZ
std::string format_timestamp(Micros t);

/// Cleaned observations of one side of one instrument. business_times are
/// seconds of session time, counted from the first tick.
struct TickSeries {
    std::string instrument_id;
    Side side{Side::Bid};
    std::vector<Micros> timestamps;
    std::vector<double> prices;
    std::vector<double> business_times;
    std::vector<int> day_index;

    [[nodiscard]] std::size_t size() const noexcept { return timestamps.size(); }
    [[nodiscard]] bool empty() const noexcept { return timestamps.empty(); }
    /// Number of distinct session days.
    [[nodiscard]] int day_count() const noexcept { return day_index.empty() ? 0 : day_index.back() + 1; }
};

struct IngestConfig {
    SessionCalendar calendar{SessionCalendar::eur()};
    /// Select one (instrument, side) group; required when the file has several.
    std::optional<std::string> instrument;
    std::optional<Side> side;
};

struct IngestReport {
    std::size_t rows{0};
    std::size_t duplicates_dropped{0};
    std::size_t ties_shifted{0};
    std::size_t out_of_session_dropped{0};
    std::vector<std::string> warnings;
};

/// Every (instrument, side) group of a tick CSV, each cleaned. Groups are
/// ordered by instrument then side (bid first).
std::vector<TickSeries> parse_tick_groups(std::istream& in, const SessionCalendar& calendar,
                                          std::vector<IngestReport>* reports = nullptr);

/// One cleaned series. Malformed rows raise DataError with the line number.
TickSeries parse_ticks(std::istream& in, const IngestConfig& config, IngestReport* report = nullptr);

/// Canonical CSV: `timestamp,price,side,instrument`.
void write_ticks(std::ostream& out, const TickSeries& ticks);
void write_ticks(std::ostream& out, const std::vector<TickSeries>& groups);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// r_i = ln(P_i / P_{i-1}) for ticks 1..n-1. day_boundary[i] is set when the
/// return spans two session days.
struct ReturnSeries {
    std::vector<double> values;
    std::vector<bool> day_boundary;
};

ReturnSeries log_returns(const TickSeries& ticks);

struct SpreadStats {
    double mean{0.0};
    double median{0.0};
    double mode{0.0};
    double std{0.0};
    /// Undefined (empty) for a zero-variance sample.
    std::optional<double> excess_kurtosis;
    std::optional<double> skewness;
    double iqr{0.0};
    double min{0.0};
    double max{0.0};
    std::size_t n{0};
};

/// ask - bid on the union of both timestamp grids over the common coverage
/// window, each side carried forward from its last observation.
std::vector<double> aligned_spread(const TickSeries& bid, const TickSeries& ask);

/// Descriptive statistics of a sample: std with n-1, population skewness
/// g1 = m3 / m2^{3/2}, excess kurtosis g2 = m4 / m2^2 - 3, type-7 quantiles,
/// and the mode of the sample rounded to `tick_size` (ties to the smaller).
SpreadStats describe_spread(const std::vector<double>& spread, double tick_size = 0.001);

SpreadStats spread_stats(const TickSeries& bid, const TickSeries& ask, double tick_size = 0.001);

/// Header plus one row, columns mean..max.
void write_spread_stats(std::ostream& out, const SpreadStats& stats);

// ---- synthetic fixtures ------------------------------------------------------

enum class Arrivals { Exponential, Regular };

struct SynthConfig {
    std::string instrument{"SYNTH"};
    Side side{Side::Bid};
    SessionCalendar calendar{SessionCalendar::utc24()};
    /// Local date of the first session, YYYY-MM-DD.
    std::string start_date{"2024-01-08"};
    /// Business seconds to generate.
    double horizon{3600.0};
    double initial_price{100.0};
    /// Log-price volatility per sqrt(business second).
    double volatility{1e-4};
    Arrivals arrivals{Arrivals::Exponential};
    /// Mean ticks per business second.
    double tick_rate{1.0};
    /// Explicit additive log-price jumps.
    std::vector<double> jump_times;
    std::vector<double> jump_sizes;
    /// Jump times drawn from a univariate process (random sign) or a
    /// bivariate process (positive marks jump up).
    std::optional<model::UnivariateSpec> jump_process;
    std::optional<model::BivariateSpec> signed_jump_process;
    double jump_size{0.0};
    /// Put a tick exactly at each jump time.
    bool tick_at_jumps{true};
    std::uint64_t seed{0};

    void check() const;
};

struct SynthOutput {
    TickSeries ticks;
    /// Business times and signed log sizes of all applied jumps.
    std::vector<double> jump_times;
    std::vector<double> jump_sizes;
};

SynthOutput synth_ticks(const SynthConfig& config);

/// Moves the price path onto a movement-driven stream: ticks at the given
/// business times, each moving the price one tick up (mark +) or down.
/// Used for closed-loop bCH fixtures.
TickSeries ticks_from_events(const model::MarkedEventSeries& events, const SessionCalendar& calendar,
                             const std::string& start_date, double initial_price, double tick,
                             const std::string& instrument = "SYNTH", Side side = Side::Bid);

/// Business time (seconds after the first session open) to a UTC instant.
Micros business_to_utc(double business_seconds, const SessionCalendar& calendar,
                       const std::string& start_date);

// ---- events CSV --------------------------------------------------------------

/// `business_time,mark` rows; mark is 1 or -1 for marked series and 0 otherwise.
void write_events(std::ostream& out, const model::EventSeries& events);
void write_events(std::ostream& out, const model::MarkedEventSeries& events);

struct EventFile {
    std::vector<double> times;
    std::vector<int> marks;

    [[nodiscard]] bool marked() const;
    [[nodiscard]] model::EventSeries unmarked_series() const;
    /// Throws DataError if any mark is 0.
    [[nodiscard]] model::MarkedEventSeries marked_series() const;
};

EventFile read_events(std::istream& in);

}  // namespace carma_hawkes::data
