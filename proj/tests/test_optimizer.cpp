// Copyright 2026 The cfee Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "cfee/optimizer.hpp"
#include "test_support.hpp"

using namespace cfee;
using cfee::testing::blank_coefficients;
using cfee::testing::random_feasible;
using doctest::Approx;

namespace {

// Six users on five secondary pilots: user 5 shares with user 0 and users
// 3 and 4 share with primary users, so every term of f2 is active.
SystemConfig contaminated_config(std::uint64_t seed) {
    SystemConfig cfg;
    cfg.num_secondary_users = 6;
    cfg.seed = seed;
    return cfg;
}

struct OneLink {
    SinrCoefficients c;
    SystemConfig cfg;
    double ith;
};

OneLink one_link(double a, double b, double varsigma_sq, double theta, double pmax, double ith) {
    OneLink x{blank_coefficients(1, 1, 1, varsigma_sq), cfee::testing::tiny_config(1, 1, 1, 1, 1), ith};
    x.c.a(0, 0, 0) = a;
    x.c.b(0, 0, 0) = b;
    x.c.theta(0, 0, 0) = theta;
    x.cfg.max_ap_power_w = pmax;
    return x;
}

double upper_limit(const OneLink& x) {
    double hi = x.cfg.max_ap_power_w;
    if (x.c.theta(0, 0, 0) > 0) hi = std::min(hi, x.ith / x.c.theta(0, 0, 0));
    return hi;
}

template <class F>
std::pair<double, double> grid_argmax(double hi, double step, F&& f) {
    double best_p = 0, best = -INFINITY;
    const long n = static_cast<long>(std::floor(hi / step));
    for (long i = 0; i <= n + 1; ++i) {
        const double p = std::min(hi, i * step);
        const double v = f(p);
        if (v > best) {
            best = v;
            best_p = p;
        }
    }
    return {best_p, best};
}

// SE / reduced power of a single link, in bit/s/Hz per W.
double true_ratio(const OneLink& x, double p) {
    const double a = x.c.a(0, 0, 0), b = x.c.b(0, 0, 0), s = x.c.varsigma_sq[0];
    const double w = 1.0 - double(x.cfg.pilot_length) / x.cfg.coherence_length;
    return w * std::log2(1.0 + p * a * a / (p * b + s)) /
           (x.cfg.amplifier_inefficiency * p + x.cfg.circuit_power_w);
}

std::vector<OneLink> one_link_cases() {
    return {
        one_link(10.0, 10.0, 1.0, 0.0, 1.0, 1.0),            // interior optimum
        one_link(10.0, 0.0, 1.0, 0.0, 1.0, 1.0),             // no self interference
        one_link(3e-6, 4e-11, 6e-13, 1e-12, 0.0316, 1e-13),  // interference limit binds
        one_link(3e-6, 4e-11, 6e-13, 0.0, 0.0316, 1.0),      // realistic scale, P_max binds
        one_link(2.0, 0.5, 1.0, 0.0, 2.0, 1.0),
    };
}

}  // namespace

TEST_CASE("objective parts at zero power") {
    const SystemConfig cfg = contaminated_config(2);
    const auto c = compute_coefficients(build_scenario(cfg));
    const PowerAllocation p(c.Ks, c.L);
    double expected = 0;
    for (double v : c.varsigma_sq) expected += 0.996 * std::log2(v);
    CHECK(f1(p, c, 0.996) == Approx(expected).epsilon(1e-14));
    CHECK(f2(p, c, 0.996) == Approx(expected).epsilon(1e-14));
}

TEST_CASE("objective difference is the sum spectral efficiency") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const SystemConfig cfg = contaminated_config(seed);
        const Scenario sc = build_scenario(cfg);
        const auto c = compute_coefficients(sc);
        const PowerProblem prob(c, cfg);
        Rng rng = make_stream(seed, StreamDomain::test);
        for (int t = 0; t < 20; ++t) {
            const auto p = random_feasible(c, cfg.max_ap_power_w, sc.interference_threshold_w(), rng);
            double sum_se = 0;
            for (int k = 0; k < c.Ks; ++k)
                sum_se += spectral_efficiency(sinr(p, c, k), cfg.pilot_length, cfg.coherence_length);
            CHECK(std::abs(f1(p, c, prob.se_weight) - f2(p, c, prob.se_weight) - sum_se) < 1e-10);
        }
    }
}

TEST_CASE("objective parts are concave") {
    const SystemConfig cfg = contaminated_config(4);
    const Scenario sc = build_scenario(cfg);
    const auto c = compute_coefficients(sc);
    Rng rng = make_stream(4, StreamDomain::test);
    for (int t = 0; t < 1000; ++t) {
        const auto p = random_feasible(c, cfg.max_ap_power_w, sc.interference_threshold_w(), rng);
        const auto q = random_feasible(c, cfg.max_ap_power_w, sc.interference_threshold_w(), rng);
        PowerAllocation mid(c.Ks, c.L);
        for (std::size_t i = 0; i < mid.values().size(); ++i) mid.values()[i] = 0.5 * (p.values()[i] + q.values()[i]);
        CHECK(f1(mid, c, 1.0) >= 0.5 * (f1(p, c, 1.0) + f1(q, c, 1.0)) - 1e-12);
        CHECK(f2(mid, c, 1.0) >= 0.5 * (f2(p, c, 1.0) + f2(q, c, 1.0)) - 1e-12);
    }
}

TEST_CASE("single user f2 and its derivative") {
    auto x = one_link(2.0, 0.5, 0.7, 0.0, 1.0, 1.0);
    const PowerAllocation p(1, 1, 0.3);
    CHECK(f2(p, x.c, 0.9) == Approx(0.9 * std::log2(0.7 + 0.3 * 0.5)).epsilon(1e-15));
    const auto g = grad_f2(p, x.c, 0.9);
    CHECK(g[0] == Approx(0.9 * 0.5 / ((0.7 + 0.3 * 0.5) * std::log(2.0))).epsilon(1e-14));
}

TEST_CASE("f2 gradient does not depend on the own-signal coefficients") {
    SystemConfig cfg;
    cfg.pilots_shared = 0;
    cfg.pilots_primary = 4;
    cfg.pilots_secondary = 4;
    const Scenario sc = build_scenario(cfg);
    auto c = compute_coefficients(sc);
    Rng rng = make_stream(8, StreamDomain::test);
    const auto p = random_feasible(c, cfg.max_ap_power_w, sc.interference_threshold_w(), rng, 0.1);
    const auto g = grad_f2(p, c, 1.0);
    for (std::size_t i = 0; i < c.a.dim0() * c.a.dim1() * c.a.dim2(); ++i) c.a.data()[i] *= 3.0;
    CHECK(grad_f2(p, c, 1.0) == g);
}

TEST_CASE("f2 gradient matches central differences") {
    int points = 0;
    for (std::uint64_t seed = 1; points < 100; ++seed) {
        const SystemConfig cfg = contaminated_config(seed);
        const Scenario sc = build_scenario(cfg);
        const auto c = compute_coefficients(sc);
        Rng rng = make_stream(seed, StreamDomain::test, 1);
        for (int t = 0; t < 10; ++t, ++points) {
            const auto p = random_feasible(c, cfg.max_ap_power_w, sc.interference_threshold_w(), rng, 0.05);
            const auto g = grad_f2(p, c, 0.996);
            double gmax = 0;
            for (double v : g) gmax = std::max(gmax, std::abs(v));
            for (std::size_t i = 0; i < g.size(); ++i) {
                PowerAllocation hi = p, lo = p;
                const double h = 1e-6 * (1.0 + p.values()[i]);
                hi.values()[i] += h;
                lo.values()[i] -= h;
                const double fd = (f2(hi, c, 0.996) - f2(lo, c, 0.996)) / (2 * h);
                CHECK(std::abs(fd - g[i]) <= 1e-5 * std::max(std::abs(g[i]), 1e-6 * gmax));
            }
        }
    }
}

TEST_CASE("first-order bound dominates f2") {
    int pairs = 0;
    for (std::uint64_t seed = 1; pairs < 1000; ++seed) {
        const SystemConfig cfg = contaminated_config(seed);
        const Scenario sc = build_scenario(cfg);
        const auto c = compute_coefficients(sc);
        const PowerProblem prob(c, cfg);
        Rng rng = make_stream(seed, StreamDomain::test, 2);
        for (int t = 0; t < 100; ++t, ++pairs) {
            const auto p0 = random_feasible(c, cfg.max_ap_power_w, sc.interference_threshold_w(), rng);
            const auto p = random_feasible(c, cfg.max_ap_power_w, sc.interference_threshold_w(), rng);
            const auto st = BoundState::build(p0, c, prob.se_weight);
            CHECK(taylor_bound(p0, st) == f2(p0, c, prob.se_weight));
            const double f2p = f2(p, c, prob.se_weight);
            CHECK(taylor_bound(p, st) >= f2p - 1e-12 * std::abs(f2p));
            double sum_se = 0;
            for (int k = 0; k < c.Ks; ++k)
                sum_se += spectral_efficiency(sinr(p, c, k), cfg.pilot_length, cfg.coherence_length);
            CHECK(f1(p, c, prob.se_weight) - taylor_bound(p, st) <= sum_se + 1e-10);
        }
    }
}

TEST_CASE("sub-problem with an expensive power price shuts down") {
    const SystemConfig cfg = contaminated_config(3);
    const Scenario sc = build_scenario(cfg);
    const auto c = compute_coefficients(sc);
    const PowerProblem prob(c, cfg);
    const auto p0 = equal_power_allocation(c, cfg.max_ap_power_w, sc.interference_threshold_w());
    const auto st = BoundState::build(p0, c, prob.se_weight);
    const auto res = solve_subproblem(1e12, st, prob, cfg.optimizer);
    CHECK(res.p.sum() < 1e-9);
}

TEST_CASE("sub-problem at zero price fills the tighter limit") {
    auto x = one_link(10.0, 0.0, 1.0, 2.0, 1.0, 0.5);
    const PowerProblem prob(x.c, x.cfg, x.ith);
    const auto st = BoundState::build(PowerAllocation(1, 1, 0.1), x.c, prob.se_weight);
    CHECK(solve_subproblem(0.0, st, prob, x.cfg.optimizer).p(0, 0) == Approx(0.25).epsilon(1e-6));
    x.c.theta(0, 0, 0) = 0.1;
    const PowerProblem prob2(x.c, x.cfg, x.ith);
    CHECK(solve_subproblem(0.0, st, prob2, x.cfg.optimizer).p(0, 0) == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sub-problem matches a fine grid in one dimension") {
    for (const auto& x : one_link_cases()) {
        const PowerProblem prob(x.c, x.cfg, x.ith);
        const double hi = upper_limit(x);
        for (double frac : {0.1, 0.5, 0.9}) {
            const auto st = BoundState::build(PowerAllocation(1, 1, frac * hi), x.c, prob.se_weight);
            const double lambda = true_ratio(x, 0.3 * hi);
            const auto res = solve_subproblem(lambda, st, prob, x.cfg.optimizer);
            auto F = [&](double p) {
                const PowerAllocation q(1, 1, p);
                return f1(q, x.c, prob.se_weight) - taylor_bound(q, st) - lambda * prob.reduced_power(q);
            };
            const auto [p_grid, f_grid] = grid_argmax(hi, std::min(1e-5, hi * 1e-5), F);
            CHECK(std::abs(res.p(0, 0) - p_grid) <= std::max(1e-4 * std::min(1.0, hi * 10), 2 * hi * 1e-5));
            CHECK(F(res.p(0, 0)) >= f_grid - 1e-9 * std::abs(f_grid));
        }
    }
}

TEST_CASE("Dinkelbach on a concave-over-affine toy") {
    // log2(1 + c p) / (zeta p + PC): f2 is constant, so the bound is exact.
    auto x = one_link(std::sqrt(40.0), 0.0, 1.0, 0.0, 1.0, 1.0);
    const PowerProblem prob(x.c, x.cfg, x.ith);
    const auto st = BoundState::build(PowerAllocation(1, 1, 0.5), x.c, prob.se_weight);
    const auto res = dinkelbach(st, prob, x.cfg.optimizer);
    const auto [p_grid, r_grid] = grid_argmax(1.0, 1e-5, [&](double p) { return true_ratio(x, p); });
    CHECK(std::abs(res.p(0, 0) - p_grid) < 1e-4);
    CHECK(res.lambda == Approx(r_grid).epsilon(1e-6));
    CHECK(res.F.back() <= x.cfg.optimizer.inner_epsilon);
    CHECK(std::is_sorted(res.lambdas.begin(), res.lambdas.end()));
    CHECK(ee_lower_bound(res.p, st, prob) == Approx(res.lambda).epsilon(1e-4));

    SUBCASE("started at the optimum") {
        const auto st2 = BoundState::build(res.p, x.c, prob.se_weight);
        const auto again = dinkelbach(st2, prob, x.cfg.optimizer);
        CHECK(again.iterations <= 2);
        CHECK(again.F.back() <= x.cfg.optimizer.inner_epsilon);
    }
}

TEST_CASE("sequential Dinkelbach matches a fine grid in one dimension") {
    for (const auto& x : one_link_cases()) {
        const PowerProblem prob(x.c, x.cfg, x.ith);
        // The default relative stopping rule on EE leaves ~1e-3 W of slack on a
        // flat optimum; the allocation comparison needs a converged outer loop.
        OptimizerOptions opt = x.cfg.optimizer;
        opt.outer_tolerance = 1e-9;
        const auto res = sequential_dinkelbach(prob, opt);
        const double hi = upper_limit(x);
        const auto [p_grid, r_grid] = grid_argmax(hi, std::min(1e-5, hi * 1e-5), [&](double p) { return true_ratio(x, p); });
        CHECK(std::abs(res.p_star(0, 0) - p_grid) <= 1e-4 * std::min(1.0, hi * 10));
        CHECK(res.ee_lb_trajectory.back() / x.cfg.bandwidth_hz == Approx(r_grid).epsilon(1e-3));
        for (const auto& inner : res.inner_lambdas) CHECK(std::is_sorted(inner.begin(), inner.end()));
        CHECK(res.final_F <= x.cfg.optimizer.inner_epsilon);
        CHECK(res.termination == Termination::converged);
    }
}

TEST_CASE("sequential Dinkelbach ascends and stays feasible") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const SystemConfig cfg = contaminated_config(seed);
        const Scenario sc = build_scenario(cfg);
        const auto c = compute_coefficients(sc);
        const auto res = sequential_dinkelbach(sc, c);
        for (std::size_t i = 1; i < res.ee_lb_trajectory.size(); ++i)
            CHECK(res.ee_lb_trajectory[i] >= res.ee_lb_trajectory[i - 1] * (1 - 1e-9));
        for (const auto& inner : res.inner_lambdas) CHECK(std::is_sorted(inner.begin(), inner.end()));
        CHECK(res.metrics.constraints.feasible);
        CHECK_NOTHROW(res.p_star.check());
        CHECK(res.trace.size() == std::size_t(res.inner_iterations));
    }
}

TEST_CASE("optimal policy beats equal power on 100 scenarios") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        SystemConfig cfg;
        cfg.seed = seed;
        const Scenario sc = build_scenario(cfg);
        const auto c = compute_coefficients(sc);
        const auto res = sequential_dinkelbach(sc, c);
        const double ith = sc.interference_threshold_w();
        const auto eq = evaluate(equal_power_allocation(c, cfg.max_ap_power_w, ith), c, cfg, ith);
        CHECK(res.metrics.ee >= eq.ee - 1e-9);
    }
}

TEST_CASE("equal power arithmetic") {
    SUBCASE("no interference coupling") {
        auto c = blank_coefficients(4, 3, 2, 1.0);
        const auto p = equal_power_allocation(c, 1.0, 1e-9);
        for (double v : p.values()) CHECK(v == 0.25);
    }
    SUBCASE("interference limit is tighter") {
        auto c = blank_coefficients(4, 2, 2, 1.0);
        // V_1 = 8 * 0.5 = 4 and V_2 = 2, so I_th / V = 0.05 and 0.1.
        for (int i = 0; i < 4; ++i)
            for (int l = 0; l < 2; ++l) {
                c.theta(i, 0, l) = 0.5;
                c.theta(i, 1, l) = 0.25;
            }
        const auto p = equal_power_allocation(c, 1.0, 0.2);
        for (double v : p.values()) CHECK(v == Approx(0.05).epsilon(1e-15));
        const auto q = equal_power_allocation(c, 1.0, 0.8);
        for (double v : q.values()) CHECK(v == Approx(0.2).epsilon(1e-15));
        auto c2 = blank_coefficients(4, 2, 1, 1.0);
        for (int i = 0; i < 4; ++i) c2.theta(i, 0, 0) = 0.5;  // V = 2, I_th / V = 0.1
        const auto r = equal_power_allocation(c2, 1.0, 0.2);
        for (double v : r.values()) CHECK(v == Approx(0.1).epsilon(1e-15));
    }
}

TEST_CASE("equal power is feasible with a tight constraint on 100 scenarios") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        SystemConfig cfg;
        cfg.seed = seed;
        cfg.interference_threshold_db = -15.0 + 0.3 * double(seed % 60);
        const Scenario sc = build_scenario(cfg);
        const auto c = compute_coefficients(sc);
        const double ith = sc.interference_threshold_w();
        const auto p = equal_power_allocation(c, cfg.max_ap_power_w, ith);
        const auto rep = constraint_report(p, c, cfg.max_ap_power_w, ith);
        CHECK(rep.feasible);
        bool tight = false;
        for (double s : rep.ap_power) tight |= std::abs(s - cfg.max_ap_power_w) <= 1e-9 * cfg.max_ap_power_w;
        for (double v : rep.primary_interference) tight |= std::abs(v - ith) <= 1e-9 * ith;
        CHECK(tight);
    }
}
