#include "carma_hawkes/jumps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace carma_hawkes::jumps {

void LMConfig::check() const {
    if (window != 0 && window < 3) throw std::invalid_argument("LM window K must be >= 3");
    if (alpha_levels.empty()) throw std::invalid_argument("LM test needs at least one alpha level");
    for (double a : alpha_levels) {
        if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("alpha levels must lie in (0, 1)");
    }
    if (!(window_exponent > -1.0 && window_exponent <= -0.5)) {
        throw std::invalid_argument("window exponent must lie in (-1, -0.5]");
    }
}

double lm_c_constant() { return std::sqrt(2.0 / std::numbers::pi); }

std::optional<double> local_volatility(std::span<const double> r, std::size_t i, int window) {
    if (window < 3) throw std::invalid_argument("LM window K must be >= 3");
    const auto k = static_cast<std::size_t>(window);
    if (i >= r.size() || i + 1 < k) throw std::invalid_argument("not enough history for the LM window");
    double sum = 0.0;
    for (std::size_t j = i + 2 - k; j <= i - 1; ++j) sum += std::abs(r[j]) * std::abs(r[j - 1]);
    if (!(sum > 0.0)) return std::nullopt;
    return std::sqrt(sum / static_cast<double>(k - 2));
}

std::pair<double, double> cs_constants(std::size_t n) {
    if (n < 3) throw std::invalid_argument("C_n and S_n need n >= 3");
    const double c = lm_c_constant();
    const double l = std::log(static_cast<double>(n));
    const double root = std::sqrt(2.0 * l);
    const double cn = root / c - (std::log(std::numbers::pi) + std::log(l)) / (2.0 * c * root);
    return {cn, 1.0 / (c * root)};
}

double gumbel_threshold(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    return -std::log(-std::log(alpha));
}

int auto_window(std::size_t n_per_day, double bar_exponent) {
    if (!(bar_exponent > -1.0 && bar_exponent <= -0.5)) {
        throw std::invalid_argument("window exponent must lie in (-1, -0.5]");
    }
    const double x = std::pow(static_cast<double>(n_per_day), -bar_exponent);
    // Guard exact powers such as 10000^0.75 against rounding up an ulp.
    const double k = std::ceil(x * (1.0 - 1e-12));
    const double upper = std::floor(static_cast<double>(n_per_day) / 2.0);
    return static_cast<int>(std::max(3.0, std::min(k, upper)));
}

const LevelResult& JumpDetectionResult::level(double alpha) const {
    for (const auto& l : levels) {
        if (l.alpha == alpha) return l;
    }
    throw std::out_of_range("no LM result at alpha " + std::to_string(alpha));
}

JumpDetectionResult detect_jumps(const data::TickSeries& ticks, const LMConfig& config) {
    config.check();
    JumpDetectionResult res;
    if (ticks.size() < 2) throw std::invalid_argument("LM test needs at least 2 ticks");
    const auto rets = data::log_returns(ticks);
    res.n_returns = rets.values.size();

    // Segments of usable returns; each keeps (return value, tick index).
    std::vector<std::vector<std::pair<double, std::size_t>>> segments(1);
    for (std::size_t i = 0; i < rets.values.size(); ++i) {
        if (rets.day_boundary[i] && !config.span_days) {
            ++res.day_boundary_excluded;
            if (!segments.back().empty()) segments.emplace_back();
            continue;
        }
        if (config.drop_zero_returns && rets.values[i] == 0.0) {
            ++res.zero_returns_dropped;
            continue;
        }
        segments.back().emplace_back(rets.values[i], i + 1);
    }
    std::size_t kept = 0;
    for (const auto& s : segments) kept += s.size();

    int window = config.window;
    if (window == 0) {
        const auto days = static_cast<std::size_t>(std::max(1, config.span_days ? 1 : ticks.day_count()));
        window = auto_window(std::max<std::size_t>(kept / days, 6), config.window_exponent);
    }
    res.window = window;
    if (ticks.size() < static_cast<std::size_t>(window) + 2) {
        throw std::invalid_argument("series of " + std::to_string(ticks.size()) + " ticks is shorter than K + 2 = " +
                                    std::to_string(window + 2));
    }

    auto& st = res.stats;
    st.c_constant = lm_c_constant();
    std::vector<double> r;
    for (const auto& seg : segments) {
        r.clear();
        for (const auto& e : seg) r.push_back(e.first);
        for (std::size_t i = static_cast<std::size_t>(window) - 1; i < r.size(); ++i) {
            const auto sigma = local_volatility(r, i, window);
            if (!sigma) {
                ++res.untestable;
                continue;
            }
            st.m.push_back(r[i] / *sigma);
            st.sigma_hat.push_back(*sigma);
            st.tick_index.push_back(seg[i].second);
            st.returns.push_back(r[i]);
        }
    }
    st.n = st.m.size();
    if (st.n >= 3) {
        std::tie(st.c_n, st.s_n) = cs_constants(st.n);
    } else if (st.n > 0) {
        std::tie(st.c_n, st.s_n) = cs_constants(3);
    }

    for (double alpha : config.alpha_levels) {
        LevelResult lv;
        lv.alpha = alpha;
        lv.beta_star = gumbel_threshold(alpha);
        lv.critical = st.c_n + st.s_n * lv.beta_star;
        for (std::size_t k = 0; k < st.n; ++k) {
            const double stat = (std::abs(st.m[k]) - st.c_n) / st.s_n;
            if (stat > lv.beta_star) {
                lv.flagged.push_back(k);
                lv.tick_index.push_back(st.tick_index[k]);
                lv.signs.push_back(st.m[k] > 0.0 ? 1 : -1);
                lv.statistics.push_back(stat);
            }
        }
        lv.jump_fraction = st.n == 0 ? 0.0 : static_cast<double>(lv.flagged.size()) / static_cast<double>(st.n);
        res.levels.push_back(std::move(lv));
    }
    return res;
}

void write_jump_csv(std::ostream& out, const JumpDetectionResult& res, const data::TickSeries& ticks) {
    out << "timestamp,business_time,return,sigma_hat,m,statistic";
    for (const auto& lv : res.levels) out << ",flag_" << data::format_double(lv.alpha);
    out << ",sign\n";
    std::vector<std::size_t> cursor(res.levels.size(), 0);
    const auto& st = res.stats;
    for (std::size_t k = 0; k < st.n; ++k) {
        const auto t = st.tick_index[k];
        out << data::format_timestamp(ticks.timestamps[t]) << ',' << data::format_double(ticks.business_times[t])
            << ',' << data::format_double(st.returns[k]) << ',' << data::format_double(st.sigma_hat[k]) << ','
            << data::format_double(st.m[k]) << ',' << data::format_double((std::abs(st.m[k]) - st.c_n) / st.s_n);
        for (std::size_t l = 0; l < res.levels.size(); ++l) {
            const auto& f = res.levels[l].flagged;
            const bool hit = cursor[l] < f.size() && f[cursor[l]] == k;
            if (hit) ++cursor[l];
            out << ',' << (hit ? 1 : 0);
        }
        out << ',' << (st.m[k] > 0.0 ? 1 : -1) << '\n';
    }
}

}  // namespace carma_hawkes::jumps
