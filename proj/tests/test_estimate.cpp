#include "support.hpp"

#include "carma_hawkes/estimate.hpp"
#include "carma_hawkes/likelihood.hpp"
#include "carma_hawkes/nelder_mead.hpp"
#include "carma_hawkes/simulate.hpp"

#include <doctest.h>

#include <cmath>

using namespace carma_hawkes;
using model::make_univariate;
namespace est = carma_hawkes::estimate;
namespace lk = carma_hawkes::likelihood;

namespace {

model::EventSeries sim(const model::UnivariateSpec& s, std::size_t n, std::uint64_t seed) {
    simulate::SimulationConfig c;
    c.horizon = 1e9;
    c.seed = seed;
    c.stop_after_events = n;
    return simulate::simulate_univariate(s, c);
}

model::MarkedEventSeries sim(const model::BivariateSpec& s, std::size_t n, std::uint64_t seed) {
    simulate::SimulationConfig c;
    c.horizon = 1e9;
    c.seed = seed;
    c.stop_after_events = n;
    return simulate::simulate_bivariate(s, c);
}

}  // namespace

TEST_CASE("nelder_mead on Rosenbrock") {
    auto f = [](const Eigen::VectorXd& x) {
        return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
    };
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    est::NelderMeadOptions o;
    o.tolerance = 1e-14;
    const auto r = est::nelder_mead(f, x0, Eigen::VectorXd::Constant(2, 0.5), o);
    CHECK(r.converged);
    CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-4));

    auto barrier = [](const Eigen::VectorXd& x) {
        return x(0) <= 0.0 ? std::numeric_limits<double>::infinity() : (x(0) - 0.1) * (x(0) - 0.1);
    };
    Eigen::VectorXd y0(1);
    y0 << 2.0;
    const auto rb = est::nelder_mead(barrier, y0, Eigen::VectorXd::Constant(1, 3.0), o);
    CHECK(rb.x(0) == doctest::Approx(0.1).epsilon(1e-5));

    Eigen::VectorXd bad(1);
    bad << -1.0;
    CHECK_THROWS(est::nelder_mead(barrier, bad, Eigen::VectorXd::Constant(1, 1.0)));
}

TEST_CASE("lr_test, chi-square survival and aic") {
    const auto same = est::lr_test(-50.0, -50.0, 1);
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == 1.0);

    const auto ex = est::lr_test(-100.0, -102.0, 2);
    CHECK(ex.statistic == doctest::Approx(4.0));
    CHECK(std::abs(ex.p_value - std::exp(-2.0)) <= 1e-12);

    const auto neg = est::lr_test(-100.001, -100.0, 1);
    CHECK(neg.clamped);
    CHECK(neg.statistic == 0.0);
    CHECK(neg.p_value == 1.0);

    for (double x : {0.01, 0.5, 1.0, 3.84, 10.0, 40.0}) {
        CHECK(std::abs(est::chi_square_survival(x, 1) - std::erfc(std::sqrt(x / 2.0))) <= 1e-10);
        CHECK(std::abs(est::chi_square_survival(x, 2) - std::exp(-x / 2.0)) <= 1e-10);
        // df = 4: e^{-x/2} (1 + x/2).
        CHECK(std::abs(est::chi_square_survival(x, 4) - std::exp(-x / 2.0) * (1.0 + x / 2.0)) <= 1e-10);
    }

    Rng rng(1);
    for (int rep = 0; rep < 200; ++rep) {
        const int df = 1 + static_cast<int>(rng.uniform() * 20);
        const double a = 30.0 * rng.uniform();
        const double b = a + 0.01 + 5.0 * rng.uniform();
        CHECK(est::lr_test(-100.0 + b / 2, -100.0, df).p_value < est::lr_test(-100.0 + a / 2, -100.0, df).p_value);
    }

    CHECK(est::aic(-100.0, 3) == 206.0);
    CHECK(est::aic(0.0, 0) == 0.0);
    CHECK(est::aic(-50.0, 4) > est::aic(-50.0, 3));
}

TEST_CASE("is_nested") {
    CHECK(est::is_nested(model::BivariateOrder{1, 1, 0, 0, 0, 0}, model::BivariateOrder{2, 1, 1, 0, 1, 0}));
    CHECK_FALSE(est::is_nested(model::UnivariateOrder{2, 1}, model::UnivariateOrder{2, 0}));
    CHECK(est::is_nested(model::UnivariateOrder{2, 1}, model::UnivariateOrder{2, 1}));
    CHECK(est::is_nested(model::UnivariateOrder{2, 0}, model::UnivariateOrder{2, 1}));
    CHECK_FALSE(est::is_nested(model::UnivariateOrder{2, 1}, model::UnivariateOrder{3, 0}));
    CHECK_FALSE(est::is_nested(model::BivariateOrder{2, 2, 1, 1, 1, 1}, model::BivariateOrder{3, 3, 0, 0, 0, 0}));
}

TEST_CASE("embed_spec keeps the kernel when the MA order has room") {
    const auto s = make_univariate({1, 0}, 0.5, {2.0}, {1.0});
    const auto e = est::embed_spec(s, {2, 1});
    CHECK(model::validate(e).valid());
    for (double t : {0.0, 0.3, 1.0, 4.0}) {
        CHECK(model::kernel_eval(e, t) == doctest::Approx(model::kernel_eval(s, t)).epsilon(1e-10));
    }
    const auto ev = sim(s, 300, 3);
    CHECK(lk::loglik_univariate(e, ev) == doctest::Approx(lk::loglik_univariate(s, ev)).epsilon(1e-10));

    const auto approx = est::embed_spec(s, {2, 0});
    CHECK(model::validate(approx).valid());
    CHECK(approx.order == model::UnivariateOrder{2, 0});
    CHECK_THROWS_AS(est::embed_spec(e, {2, 0}), model::SpecError);

    const auto b = model::make_bivariate({1, 1, 0, 0, 0, 0}, {0.4, 0.4}, {2.0}, {2.0}, {0.6}, {0.4}, {0.4}, {0.6});
    const auto be = est::embed_spec(b, {2, 1, 1, 0, 1, 0});
    CHECK(model::validate(be).valid());
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            CHECK(model::kernel_eval(be, i, j, 0.7) == doctest::Approx(model::kernel_eval(b, i, j, 0.7)).epsilon(1e-10));
        }
    }
}

TEST_CASE("fit errors") {
    CHECK_THROWS_AS(est::fit_univariate(model::EventSeries({1.0, 2.0, 3.0, 4.0}), {1, 0}), est::FitError);
    CHECK_THROWS_AS(est::fit_bivariate(model::MarkedEventSeries({1.0, 2.0}, {model::Mark::Positive, model::Mark::Negative}),
                                       {1, 1, 0, 0, 0, 0}),
                    est::FitError);
}

TEST_CASE("fit identities, init dominance and determinism") {
    const auto truth = make_univariate({2, 1}, 0.5, {3.0, 2.0}, {1.0, 0.5});
    const auto ev = sim(truth, 1500, 5);
    const auto fit = est::fit_univariate(ev, {2, 1}, {}, truth);
    CHECK(fit.aic == 2.0 * fit.n_params - 2.0 * fit.loglik);
    CHECK(fit.n_params == 5);
    CHECK(model::validate(fit.univariate()).valid());
    CHECK(fit.loglik >= lk::loglik_univariate(truth, ev) - 1e-6);
    REQUIRE(fit.optimizer_trace.has_value());
    CHECK(fit.optimizer_trace->starts.size() == 6);

    const auto again = est::fit_univariate(ev, {2, 1}, {}, truth);
    CHECK(again.loglik == fit.loglik);
    CHECK(again.univariate().a == fit.univariate().a);
    CHECK(again.univariate().b == fit.univariate().b);
    CHECK(again.n_evaluations == fit.n_evaluations);

    est::FitOptions threaded;
    threaded.threads = 3;
    const auto par = est::fit_univariate(ev, {2, 1}, threaded, truth);
    CHECK(par.loglik == fit.loglik);

    // Monotone nesting against the smaller models.
    const auto small = est::fit_univariate(ev, {1, 0});
    CHECK(fit.loglik >= small.loglik - 1e-4);

    const auto bt = model::make_bivariate({1, 1, 0, 0, 0, 0}, {0.4, 0.4}, {2.0}, {2.0}, {0.6}, {0.4}, {0.4}, {0.6});
    const auto bev = sim(bt, 1500, 6);
    const auto bfit = est::fit_bivariate(bev, {1, 1, 0, 0, 0, 0}, {}, bt);
    CHECK(bfit.n_params == 8);
    CHECK(bfit.aic == 2.0 * bfit.n_params - 2.0 * bfit.loglik);
    CHECK(bfit.loglik >= lk::loglik_bivariate(bt, bev) - 1e-6);
    CHECK(model::validate(bfit.bivariate()).valid());
}

TEST_CASE("relaxed kernel sign widens the search") {
    const auto truth = make_univariate({2, 0}, 0.5, {3.0, 2.0}, {1.0});
    const auto ev = sim(truth, 1000, 21);
    const auto strict = est::fit_univariate(ev, {2, 1}, {}, est::embed_spec(truth, {2, 1}));
    CHECK(model::validate(strict.univariate()).valid());
    est::FitOptions relaxed;
    relaxed.kernel_nonnegative = false;
    const auto wide = est::fit_univariate(ev, {2, 1}, relaxed, est::embed_spec(truth, {2, 1}));
    CHECK(wide.loglik >= strict.loglik - 1e-6);
    CHECK(std::isfinite(wide.loglik));
    for (const auto& c : model::validate(wide.univariate()).checks) {
        if (c.name != "kernel_nonnegative") CHECK(c.passed);
    }
}

TEST_CASE("Poisson data gives a small branching ratio") {
    const auto pois = make_univariate({1, 0}, 1.0, {1.0}, {0.0});
    std::vector<double> eta;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto fit = est::fit_univariate(sim(pois, 2000, 200 + seed), {1, 0});
        eta.push_back(model::branching_ratio(fit.univariate()));
    }
    CHECK(oracle::median(eta) < 0.05);
}

TEST_CASE("decoupled bivariate baselines") {
    const auto s = model::make_bivariate({1, 1, 0, 0, 0, 0}, {0.6, 1.4}, {2.0}, {1.0}, {0.0}, {0.0}, {0.0}, {0.0});
    const auto ev = sim(s, 3000, 8);
    const auto fit = est::fit_bivariate(ev, {1, 1, 0, 0, 0, 0});
    const auto c = ev.counts();
    CHECK(std::abs(fit.bivariate().mu(0) / (static_cast<double>(c[0]) / ev.last_time()) - 1.0) < 0.10);
    CHECK(std::abs(fit.bivariate().mu(1) / (static_cast<double>(c[1]) / ev.last_time()) - 1.0) < 0.10);
}

TEST_CASE("standard errors") {
    const auto truth = make_univariate({1, 0}, 0.5, {2.0}, {1.0});
    const auto ev = sim(truth, 3000, 12);
    const auto fit = est::fit_univariate(ev, {1, 0});
    const auto se = est::standard_errors(fit.univariate(), ev);
    REQUIRE(se.has_value());
    REQUIRE(se->size() == 3);
    const auto est_params = est::natural_parameters(fit.univariate());
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK((*se)[k] > 0.0);
        CHECK((*se)[k] < 0.5 * est_params[k]);
    }
}

TEST_CASE("cross-exciting bivariate recovery" * doctest::timeout(600)) {
    const auto truth =
        model::make_bivariate({1, 1, 0, 0, 0, 0}, {0.4, 0.3}, {2.0}, {1.5}, {0.8}, {0.3}, {0.4}, {0.6});
    const auto want = est::natural_parameters(truth);
    std::vector<std::vector<double>> rel(want.size());
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto ev = sim(truth, 8000, 500 + seed);
        const auto fit = est::fit_bivariate(ev, {1, 1, 0, 0, 0, 0});
        const auto got = est::natural_parameters(fit.bivariate());
        for (std::size_t k = 0; k < want.size(); ++k) rel[k].push_back(std::abs(got[k] / want[k] - 1.0));
    }
    for (std::size_t k = 0; k < want.size(); ++k) {
        INFO("parameter " << k);
        CHECK(oracle::median(rel[k]) < 0.15);
    }
}
