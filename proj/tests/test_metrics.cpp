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

#include <cmath>

#include <doctest.h>

#include "cfee/metrics.hpp"
#include "test_support.hpp"

using namespace cfee;
using cfee::testing::blank_coefficients;
using doctest::Approx;

TEST_CASE("zero power gives zero SINR and EE") {
    SystemConfig cfg;
    const auto c = compute_coefficients(build_scenario(cfg));
    const PowerAllocation p(cfg.num_secondary_users, cfg.num_aps);
    for (int k = 0; k < cfg.num_secondary_users; ++k) CHECK(sinr(p, c, k) == 0.0);
    CHECK(energy_efficiency(p, c, cfg) == 0.0);
    const auto rep = constraint_report(p, c, 1e-6, 1e-20);
    CHECK(rep.feasible);
}

TEST_CASE("single-link SINR") {
    auto c = blank_coefficients(1, 1, 1, 0.3);
    c.a(0, 0, 0) = 2.0;
    c.b(0, 0, 0) = 0.5;
    PowerAllocation p(1, 1, 0.8);
    CHECK(sinr(p, c, 0) == Approx(0.8 * 4.0 / (0.8 * 0.5 + 0.3)).epsilon(1e-15));
}

TEST_CASE("two-user SINR with coherent interference") {
    auto c = blank_coefficients(2, 2, 1, 0.1);
    // a(i, k, l), b(i, k, l): transmission to user i seen at user k.
    c.a(0, 0, 0) = 1.0; c.a(0, 0, 1) = 2.0;
    c.a(1, 1, 0) = 0.5; c.a(1, 1, 1) = 1.5;
    c.a(1, 0, 0) = 0.2; c.a(1, 0, 1) = 0.3;
    c.b(0, 0, 0) = 0.1; c.b(0, 0, 1) = 0.2;
    c.b(1, 0, 0) = 0.3; c.b(1, 0, 1) = 0.4;
    PowerAllocation p(2, 2);
    p(0, 0) = 0.25; p(0, 1) = 0.36; p(1, 0) = 0.49; p(1, 1) = 0.64;
    const double num = std::pow(0.5 * 1.0 + 0.6 * 2.0, 2);
    const double den = 0.25 * 0.1 + 0.36 * 0.2 + 0.49 * 0.3 + 0.64 * 0.4 + std::pow(0.7 * 0.2 + 0.8 * 0.3, 2) + 0.1;
    CHECK(sinr(p, c, 0) == Approx(num / den).epsilon(1e-14));
}

TEST_CASE("spectral efficiency") {
    CHECK(spectral_efficiency(0.0, 8, 2000) == 0.0);
    CHECK(spectral_efficiency(1.0, 0, 2000) == Approx(1.0).epsilon(1e-15));
    CHECK(spectral_efficiency(3.0, 8, 2000) == Approx(1.992).epsilon(1e-14));
}

TEST_CASE("power consumption model") {
    SystemConfig cfg;
    SUBCASE("idle network draws the circuit power") {
        const auto pw = total_power(PowerAllocation(2, 2), {0.0, 0.0}, cfg);
        CHECK(pw.total == Approx(1.0).epsilon(1e-15));
        CHECK(pw.reduced == Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("one watt radiated") {
        PowerAllocation p(2, 2, 0.25);
        const auto pw = total_power(p, {0.0, 0.0}, cfg);
        CHECK(pw.reduced == Approx(2.4).epsilon(1e-15));
        CHECK(pw.total == Approx(2.4).epsilon(1e-15));
    }
    SUBCASE("fronthaul cost of 1 Gbit/s") {
        // 50 bit/s/Hz over 20 MHz.
        const auto pw = total_power(PowerAllocation(1, 1), {50.0}, cfg);
        CHECK(pw.total - pw.reduced == Approx(0.25).epsilon(1e-12));
    }
}

TEST_CASE("EE by hand for a single link") {
    SystemConfig cfg = cfee::testing::tiny_config(1, 1, 1, 1, 1);
    auto c = blank_coefficients(1, 1, 1, 2e-13);
    c.a(0, 0, 0) = 3e-6;
    c.b(0, 0, 0) = 1e-12;
    PowerAllocation p(1, 1, 0.01);
    const double gamma = 0.01 * 9e-12 / (0.01 * 1e-12 + 2e-13);
    const double se = (1.0 - 8.0 / 2000.0) * std::log2(1.0 + gamma);
    const double power = 1.4 * 0.01 + 0.25e-9 * 20e6 * se + 1.0;
    CHECK(energy_efficiency(p, c, cfg) == Approx(20e6 * se / power).epsilon(1e-13));
    const auto m = evaluate(p, c, cfg, 1.0);
    CHECK(m.ee == Approx(20e6 * se / power).epsilon(1e-13));
    CHECK(m.sum_throughput == Approx(20e6 * se).epsilon(1e-13));
}

TEST_CASE("EE falls with radiated power at fixed SINR") {
    SystemConfig cfg = cfee::testing::tiny_config(1, 1, 1, 1, 1);
    double previous = INFINITY;
    for (double s : {0.01, 0.1, 1.0, 10.0}) {
        auto c = blank_coefficients(1, 1, 1, 1.0);
        c.a(0, 0, 0) = 2.0 / std::sqrt(s);
        c.b(0, 0, 0) = 0.5 / s;
        const PowerAllocation p(1, 1, s);
        CHECK(sinr(p, c, 0) == Approx(4.0 / 1.5).epsilon(1e-13));
        const double ee = energy_efficiency(p, c, cfg);
        CHECK(ee < previous);
        previous = ee;
    }
}

TEST_CASE("constraint report boundaries") {
    auto c = blank_coefficients(2, 2, 1, 1.0);
    c.theta(0, 0, 0) = 1.0;
    c.theta(1, 0, 1) = 2.0;
    PowerAllocation p(2, 2);
    p(0, 0) = 0.6; p(1, 0) = 0.4;  // AP 0 exactly at the limit
    p(0, 1) = 0.1; p(1, 1) = 0.2;
    auto rep = constraint_report(p, c, 1.0, 1.0);
    CHECK(rep.ap_power[0] == Approx(1.0));
    CHECK(rep.primary_interference[0] == Approx(0.6 + 0.4).epsilon(1e-15));
    CHECK(rep.feasible);
    p(1, 1) = 0.21;
    CHECK_FALSE(constraint_report(p, c, 1.0, 1.0).feasible);
    p(1, 1) = 0.2;
    CHECK_FALSE(constraint_report(p, c, 0.99, 1.0).feasible);
}

TEST_CASE("allocation validity checks") {
    PowerAllocation p(2, 2, 0.1);
    CHECK_NOTHROW(p.check());
    p(1, 0) = -1e-3;
    CHECK_THROWS_AS(p.check(), std::invalid_argument);
    p(1, 0) = NAN;
    CHECK_THROWS_AS(p.check(), std::invalid_argument);
    CHECK(PowerAllocation(3, 2, 0.5).sum() == Approx(3.0));
}

TEST_CASE("metrics CSV row") {
    SystemConfig cfg = cfee::testing::tiny_config(1, 1, 2, 1, 1);
    cfg.seed = 17;
    auto c = blank_coefficients(2, 1, 1, 1.0);
    c.a(0, 0, 0) = 1.0;
    c.a(1, 1, 0) = 1.0;
    const auto m = evaluate(PowerAllocation(2, 1, 0.01), c, cfg, 1.0);
    const std::string row = to_csv_row(m, cfg);
    CHECK(row.rfind("17,", 0) == 0);
    CHECK(row.back() == '1');
    CHECK(std::count(row.begin(), row.end(), ',') == 7);
}
