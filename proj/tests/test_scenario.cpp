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
#include <numbers>
#include <random>

#include <doctest.h>

#include "cfee/rng.hpp"
#include "cfee/scenario.hpp"

using namespace cfee;
using doctest::Approx;

TEST_CASE("noise power at the reference bandwidth") {
    CHECK(watt_to_dbm(noise_power(20e6, 9.0)) == Approx(-91.9897).epsilon(1e-5));
    CHECK(noise_power(20e6, 9.0) == Approx(6.3245e-13).epsilon(1e-4));
    CHECK(watt_to_dbm(noise_power(1.0, 0.0)) == Approx(-174.0).epsilon(1e-12));
    CHECK(watt_to_dbm(noise_power(10.0, 0.0)) == Approx(-164.0).epsilon(1e-12));
}

TEST_CASE("path loss decades") {
    CHECK(channel_gain_db(1.0) == Approx(-30.5).epsilon(1e-12));
    CHECK(channel_gain_db(10.0) == Approx(-67.2).epsilon(1e-12));
    CHECK(channel_gain_db(100.0) == Approx(-103.9).epsilon(1e-12));
}

TEST_CASE("local scattering degenerate cases") {
    SUBCASE("single antenna is the gain") {
        for (double angle : {-1.0, 0.0, 0.7, 2.5}) {
            const auto r = local_scattering_covariance(angle, 0.3, 1, 3.5e-9);
            REQUIRE(r.dimension() == 1);
            CHECK(r.matrix()(0, 0).real() == Approx(3.5e-9).epsilon(1e-14));
            CHECK(r.matrix()(0, 0).imag() == 0.0);
        }
    }
    SUBCASE("no angular spread at broadside is rank one") {
        const auto r = local_scattering_covariance(0.0, 1e-9, 4, 2.0);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) CHECK(std::abs(r.matrix()(i, j) - Complex(2.0, 0.0)) < 1e-12);
    }
    SUBCASE("trace is n times the gain") {
        const auto r = local_scattering_covariance(0.4, 0.26, 8, 1e-10);
        CHECK(r.trace() == Approx(8e-10).epsilon(1e-12));
    }
}

// Inverse standard normal CDF by Newton iteration on erfc.
static double normal_quantile(double u) {
    double x = 0.0;
    for (int it = 0; it < 60; ++it) {
        const double f = 0.5 * std::erfc(-x / std::numbers::sqrt2) - u;
        const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi);
        const double step = f / pdf;
        x -= step;
        if (std::abs(step) < 1e-14) break;
    }
    return x;
}

TEST_CASE("local scattering matches a sampled angular expectation") {
    const double mean = 30.0 * std::numbers::pi / 180.0;
    const double sd = 15.0 * std::numbers::pi / 180.0;
    const int n = 4;
    const auto r = local_scattering_covariance(mean, sd, n, 1.0);

    // Jittered stratified draws of the angle, 1e6 samples.
    const int samples = 1000000;
    Rng rng = make_stream(7, StreamDomain::test);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    std::vector<Complex> acc(n, Complex(0, 0));
    for (int s = 0; s < samples; ++s) {
        const double phi = mean + sd * normal_quantile((s + jitter(rng)) / samples);
        const double arg = std::numbers::pi * std::sin(phi);
        for (int d = 0; d < n; ++d) acc[d] += std::polar(1.0, arg * d);
    }
    for (int row = 0; row < n; ++row) {
        CHECK(r.matrix()(row, row).real() == Approx(1.0).epsilon(1e-14));
        for (int col = 0; col < n; ++col) {
            const int lag = row - col;
            const Complex expected = lag >= 0 ? acc[lag] / double(samples) : std::conj(acc[-lag] / double(samples));
            CHECK(std::abs(r.matrix()(row, col) - expected) < 1e-3);
            if (row != col) CHECK(std::abs(r.matrix()(row, col)) < 1.0);
        }
    }
}

TEST_CASE("correlation matrix rejects non-Hermitian or indefinite input") {
    CMatrix m(2, 2);
    m << 1, Complex(0, 1), Complex(0, 1), 1;
    CHECK_THROWS_AS(CorrelationMatrix{m}, std::invalid_argument);
    CMatrix d = CMatrix::Identity(2, 2);
    d(1, 1) = -1;
    CHECK_THROWS_AS(CorrelationMatrix{d}, std::invalid_argument);
    CHECK_NOTHROW(CorrelationMatrix{CMatrix::Zero(3, 3)});
}

TEST_CASE("pilot assignment without any shared pilots") {
    SystemConfig cfg;
    cfg.num_secondary_users = 2;
    cfg.num_primary_users = 2;
    cfg.pilot_length = 4;
    cfg.pilots_shared = 0;
    cfg.pilots_primary = 2;
    cfg.pilots_secondary = 2;
    const auto pa = assign_pilots(cfg);
    CHECK(pa.secondary[0] != pa.secondary[1]);
    for (int k = 0; k < 2; ++k) {
        CHECK(pa.primary_sharing(k).empty());
        CHECK(pa.secondary_sharing(k) == std::vector<int>{k});
    }
}

TEST_CASE("pilot assignment spills onto the shared pilots") {
    SystemConfig cfg;
    cfg.num_secondary_users = 4;
    cfg.num_primary_users = 4;
    cfg.pilot_length = 4;
    cfg.pilots_shared = 2;
    cfg.pilots_primary = 1;
    cfg.pilots_secondary = 1;
    const auto pa = assign_pilots(cfg);
    // Pilot layout [shared 0, 1 | primary 2 | secondary 3], round robin per pool.
    CHECK(pa.secondary == std::vector<int>{3, 0, 1, 3});
    CHECK(pa.primary == std::vector<int>{2, 0, 1, 2});
    int sharing = 0;
    for (int k = 0; k < 4; ++k) {
        const auto s = pa.primary_sharing(k);
        if (pa.secondary[k] < 2) {
            CHECK_FALSE(s.empty());
            ++sharing;
        } else {
            CHECK(s.empty());
        }
    }
    CHECK(sharing >= 1);
    CHECK(pa.secondary_sharing(0) == std::vector<int>{0, 3});
}

TEST_CASE("orthogonal secondary pilots") {
    SystemConfig cfg;
    cfg.num_secondary_users = 4;
    cfg.pilot_length = 8;
    cfg.pilots_shared = 0;
    cfg.pilots_primary = 4;
    cfg.pilots_secondary = 4;
    const auto pa = assign_pilots(cfg);
    for (int k = 0; k < 4; ++k) CHECK(pa.secondary_sharing(k) == std::vector<int>{k});
}

TEST_CASE("pilot split must add up") {
    SystemConfig cfg;
    cfg.pilots_shared = 1;
    CHECK_THROWS_AS(assign_pilots(cfg), std::invalid_argument);
}

TEST_CASE("access points on the perimeter") {
    const auto aps = perimeter_positions(6, 125.0, 5.0);
    REQUIRE(aps.size() == 6);
    const double t = 125.0 / 3.0;
    const double expected[6][2] = {{t, 0}, {125, 0}, {125, 2 * t}, {2 * t, 125}, {0, 125}, {0, t}};
    for (int l = 0; l < 6; ++l) {
        CHECK(aps[l].x == Approx(expected[l][0]).epsilon(1e-12));
        CHECK(aps[l].y == Approx(expected[l][1]).epsilon(1e-12));
        CHECK(aps[l].z == 5.0);
    }
    CHECK(distance(aps[0], aps[1]) == Approx(2 * t).epsilon(1e-12));
    CHECK(distance(aps[1], aps[2]) == Approx(2 * t).epsilon(1e-12));
    CHECK(distance(aps[0], aps[3]) == Approx(std::hypot(t, 125.0)).epsilon(1e-12));
    CHECK(distance(aps[0], aps[4]) == Approx(std::hypot(t, 125.0)).epsilon(1e-12));
    CHECK(distance(aps[1], aps[4]) == Approx(125.0 * std::numbers::sqrt2).epsilon(1e-12));
}

TEST_CASE("scenario construction is deterministic in the seed") {
    SystemConfig cfg;
    cfg.seed = 42;
    const Scenario a = build_scenario(cfg);
    const Scenario b = build_scenario(cfg);
    REQUIRE(a.secondary_channels.size() == b.secondary_channels.size());
    for (std::size_t i = 0; i < a.secondary_users.size(); ++i) {
        CHECK(a.secondary_users[i].x == b.secondary_users[i].x);
        CHECK(a.secondary_users[i].y == b.secondary_users[i].y);
    }
    for (std::size_t i = 0; i < a.secondary_channels.size(); ++i)
        CHECK(a.secondary_channels[i].matrix() == b.secondary_channels[i].matrix());
    for (std::size_t i = 0; i < a.cross_channels.size(); ++i)
        CHECK(a.cross_channels[i].matrix() == b.cross_channels[i].matrix());

    cfg.seed = 43;
    const Scenario c = build_scenario(cfg);
    CHECK(c.secondary_users[0].x != a.secondary_users[0].x);
}

TEST_CASE("scenario covariances are valid and follow the path loss") {
    SystemConfig cfg;
    cfg.seed = 5;
    const Scenario sc = build_scenario(cfg);
    CHECK(sc.secondary_channels.size() == std::size_t(cfg.num_secondary_users * cfg.num_aps));
    CHECK(sc.cross_channels.size() == std::size_t(cfg.num_primary_users * cfg.num_aps));
    for (int k = 0; k < sc.Ks(); ++k) {
        CHECK(sc.secondary_users[k].x >= 0);
        CHECK(sc.secondary_users[k].x <= cfg.room_side_m);
        for (int l = 0; l < sc.L(); ++l) {
            CHECK(is_hermitian_psd(sc.R(k, l)));
            const double gain = db_to_linear(channel_gain_db(distance(sc.aps[l], sc.secondary_users[k])));
            CHECK(sc.R(k, l).trace().real() / sc.N() == Approx(gain).epsilon(1e-9));
        }
    }
    for (int j = 0; j < sc.Kp(); ++j) {
        CHECK(is_hermitian_psd(sc.G(j)));
        for (int l = 0; l < sc.L(); ++l) CHECK(is_hermitian_psd(sc.S(j, l)));
    }
    for (int k = 0; k < sc.Ks(); ++k) CHECK(is_hermitian_psd(sc.C(k)));
}

TEST_CASE("random streams are keyed by domain and index") {
    Rng a = make_stream(1, StreamDomain::monte_carlo, 3);
    Rng b = make_stream(1, StreamDomain::monte_carlo, 3);
    Rng c = make_stream(1, StreamDomain::monte_carlo, 4);
    Rng d = make_stream(1, StreamDomain::geometry, 3);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
}
