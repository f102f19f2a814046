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

#include "cfee/scenario.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cfee/rng.hpp"

namespace cfee {

namespace {

constexpr int kHermiteNodes = 50;

struct HermiteRule {
    std::array<double, kHermiteNodes> nodes{};
    // Normalised so that the weights sum to one (probabilists' expectation).
    std::array<double, kHermiteNodes> weights{};
};

// Golub-Welsch on the Jacobi matrix of the physicists' Hermite polynomials.
HermiteRule make_hermite_rule() {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(kHermiteNodes, kHermiteNodes);
    for (int k = 1; k < kHermiteNodes; ++k) {
        const double beta = std::sqrt(0.5 * k);
        jacobi(k, k - 1) = beta;
        jacobi(k - 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    HermiteRule rule;
    double total = 0;
    for (int i = 0; i < kHermiteNodes; ++i) {
        rule.nodes[i] = eig.eigenvalues()(i);
        rule.weights[i] = eig.eigenvectors()(0, i) * eig.eigenvectors()(0, i);
        total += rule.weights[i];
    }
    for (auto& w : rule.weights) w /= total;
    return rule;
}

const HermiteRule& hermite_rule() {
    static const HermiteRule rule = make_hermite_rule();
    return rule;
}

double horizontal_angle(const Point3& from, const Point3& to) {
    return std::atan2(to.y - from.y, to.x - from.x);
}

CorrelationMatrix link_covariance(const Point3& tx, const Point3& rx, int antennas,
                                  double angular_std_rad) {
    const double gain = db_to_linear(channel_gain_db(distance(tx, rx)));
    return local_scattering_covariance(horizontal_angle(tx, rx), angular_std_rad, antennas, gain);
}

}  // namespace

double noise_power(double bandwidth_hz, double noise_figure_db) {
    if (!(bandwidth_hz > 0)) throw std::invalid_argument("noise_power: bandwidth must be positive");
    const double dbm = -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
    return dbm_to_watt(dbm);
}

double channel_gain_db(double distance_m) {
    if (!(distance_m > 0)) throw std::invalid_argument("channel_gain_db: distance must be positive");
    return -(30.5 + 36.7 * std::log10(distance_m));
}

bool is_hermitian_psd(const CMatrix& m, double hermitian_tol, double eig_tol) {
    if (m.rows() != m.cols()) return false;
    if (m.size() == 0) return true;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > hermitian_tol * scale) return false;
    const CMatrix sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(sym, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff() >= -eig_tol * scale;
}

CorrelationMatrix::CorrelationMatrix(CMatrix value) : value_(std::move(value)) {
    if (!is_hermitian_psd(value_))
        throw std::invalid_argument("CorrelationMatrix: matrix is not Hermitian PSD");
}

CorrelationMatrix local_scattering_covariance(double nominal_angle_rad, double angular_std_rad,
                                              int antennas, double gain) {
    if (antennas < 1) throw std::invalid_argument("local_scattering_covariance: antennas < 1");
    if (!(gain > 0)) throw std::invalid_argument("local_scattering_covariance: gain must be positive");
    if (!(angular_std_rad > 0 && angular_std_rad < std::numbers::pi / 2))
        throw std::invalid_argument("local_scattering_covariance: angular std outside (0, pi/2)");

    const auto& rule = hermite_rule();
    // Toeplitz: one expectation per lag.
    std::vector<Complex> lag(antennas);
    for (int d = 0; d < antennas; ++d) {
        Complex acc = 0;
        for (int q = 0; q < kHermiteNodes; ++q) {
            const double phi = nominal_angle_rad + std::numbers::sqrt2 * angular_std_rad * rule.nodes[q];
            acc += rule.weights[q] * std::polar(1.0, std::numbers::pi * d * std::sin(phi));
        }
        lag[d] = gain * acc;
    }
    CMatrix r(antennas, antennas);
    for (int row = 0; row < antennas; ++row) {
        for (int col = 0; col < antennas; ++col) {
            r(row, col) = row >= col ? lag[row - col] : std::conj(lag[col - row]);
        }
        r(row, row) = gain;
    }
    return CorrelationMatrix(std::move(r));
}

std::vector<int> PilotAssignment::secondary_sharing(int k) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(secondary.size()); ++i)
        if (secondary[i] == secondary[k]) out.push_back(i);
    return out;
}

std::vector<int> PilotAssignment::primary_sharing(int k) const {
    std::vector<int> out;
    for (int j = 0; j < static_cast<int>(primary.size()); ++j)
        if (primary[j] == secondary[k]) out.push_back(j);
    return out;
}

PilotAssignment assign_pilots(const SystemConfig& config) {
    if (config.pilot_length <= 0) throw std::invalid_argument("assign_pilots: tau_p must be positive");
    const int shared = config.pilots_shared;
    const int primary_only = config.pilots_primary;
    const int secondary_only = config.pilots_secondary;
    if (shared < 0 || primary_only < 0 || secondary_only < 0 ||
        shared + primary_only + secondary_only != config.pilot_length)
        throw std::invalid_argument("assign_pilots: pilot split must sum to tau_p");

    std::vector<int> secondary_pool;
    for (int t = 0; t < secondary_only; ++t) secondary_pool.push_back(shared + primary_only + t);
    for (int t = 0; t < shared; ++t) secondary_pool.push_back(t);
    std::vector<int> primary_pool;
    for (int t = 0; t < primary_only; ++t) primary_pool.push_back(shared + t);
    for (int t = 0; t < shared; ++t) primary_pool.push_back(t);

    PilotAssignment out;
    if (config.num_secondary_users > 0 && secondary_pool.empty())
        throw std::invalid_argument("assign_pilots: no pilots available to the secondary network");
    if (config.num_primary_users > 0 && primary_pool.empty())
        throw std::invalid_argument("assign_pilots: no pilots available to the primary network");
    for (int k = 0; k < config.num_secondary_users; ++k)
        out.secondary.push_back(secondary_pool[k % secondary_pool.size()]);
    for (int j = 0; j < config.num_primary_users; ++j)
        out.primary.push_back(primary_pool[j % primary_pool.size()]);
    return out;
}

double distance(const Point3& a, const Point3& b) {
    return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

std::vector<Point3> perimeter_positions(int count, double side, double height) {
    std::vector<Point3> out;
    const double perimeter = 4.0 * side;
    for (int l = 0; l < count; ++l) {
        double s = (l + 0.5) * perimeter / count;
        Point3 p{0, 0, height};
        if (s < side) {
            p.x = s;
        } else if (s < 2 * side) {
            p.x = side;
            p.y = s - side;
        } else if (s < 3 * side) {
            p.x = 3 * side - s;
            p.y = side;
        } else {
            p.y = 4 * side - s;
        }
        out.push_back(p);
    }
    return out;
}

Scenario build_scenario(const SystemConfig& config) {
    config.validate();

    Scenario sc;
    sc.config = config;
    sc.noise_power_w = noise_power(config.bandwidth_hz, config.noise_figure_db);
    sc.pilots = assign_pilots(config);

    const double side = config.room_side_m;
    const double half_pn = 0.5 * config.pn_side_m;
    const Point3 pn_centre{0.5 * side + config.pn_offset_m, 0.5 * side, 0.0};

    Rng rng = make_stream(config.seed, StreamDomain::geometry);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    sc.aps = perimeter_positions(config.num_aps, side, config.ap_height_m);
    for (int k = 0; k < config.num_secondary_users; ++k) {
        const double x = side * unit(rng);
        const double y = side * unit(rng);
        sc.secondary_users.push_back({x, y, 0.0});
    }
    for (int j = 0; j < config.num_primary_users; ++j) {
        const double x = pn_centre.x + half_pn * (2 * unit(rng) - 1);
        const double y = pn_centre.y + half_pn * (2 * unit(rng) - 1);
        sc.primary_users.push_back({x, y, 0.0});
    }
    sc.primary_bs = {pn_centre.x, pn_centre.y, config.ap_height_m};

    const double std_rad = config.angular_std_deg * std::numbers::pi / 180.0;
    const int N = config.antennas_per_ap;
    const int M = config.primary_antennas;
    for (const auto& ue : sc.secondary_users)
        for (const auto& ap : sc.aps) sc.secondary_channels.push_back(link_covariance(ap, ue, N, std_rad));
    for (const auto& ue : sc.primary_users)
        for (const auto& ap : sc.aps) sc.cross_channels.push_back(link_covariance(ap, ue, N, std_rad));
    for (const auto& ue : sc.secondary_users)
        sc.bs_to_secondary.push_back(link_covariance(sc.primary_bs, ue, M, std_rad));
    for (const auto& ue : sc.primary_users)
        sc.bs_to_primary.push_back(link_covariance(sc.primary_bs, ue, M, std_rad));
    return sc;
}

}  // namespace cfee
