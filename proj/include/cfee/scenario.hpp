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

#pragma once

#include <cstdint>
#include <vector>

#include "cfee/config.hpp"
#include "cfee/types.hpp"

namespace cfee {

/// Thermal noise power of a receiver, in W.
double noise_power(double bandwidth_hz, double noise_figure_db);

/// Large-scale channel gain in dB at the given 3-D distance.
double channel_gain_db(double distance_m);

/// Hermitian positive-semidefinite spatial covariance of one link.
class CorrelationMatrix {
public:
    CorrelationMatrix() = default;
    /// Throws std::invalid_argument unless the matrix is square, Hermitian
    /// within 1e-12 (relative to its largest entry) and PSD up to round-off.
    explicit CorrelationMatrix(CMatrix value);

    const CMatrix& matrix() const { return value_; }
    Eigen::Index dimension() const { return value_.rows(); }
    double trace() const { return value_.trace().real(); }

private:
    CMatrix value_;
};

bool is_hermitian_psd(const CMatrix& m, double hermitian_tol = 1e-12, double eig_tol = 1e-10);

/// Local scattering model for a half-wavelength ULA with Gaussian angular
/// spread around `nominal_angle_rad`. Entry (r, c) is
/// gain * E{exp(i*pi*(r-c)*sin(phi))}, evaluated by 50-node Gauss-Hermite
/// quadrature.
CorrelationMatrix local_scattering_covariance(double nominal_angle_rad, double angular_std_rad,
                                              int antennas, double gain);

/// Pilot indices for both networks. Pilot columns are laid out as
/// [shared | primary-only | secondary-only].
struct PilotAssignment {
    std::vector<int> secondary;  // t_k
    std::vector<int> primary;    // t_j

    /// S-UEs on the same pilot as S-UE k (k included).
    std::vector<int> secondary_sharing(int k) const;
    /// P-UEs on the same pilot as S-UE k.
    std::vector<int> primary_sharing(int k) const;
    bool secondary_share(int i, int k) const { return secondary[i] == secondary[k]; }
};

PilotAssignment assign_pilots(const SystemConfig& config);

struct Point3 {
    double x = 0, y = 0, z = 0;
};

double distance(const Point3& a, const Point3& b);

struct Scenario {
    SystemConfig config;
    double noise_power_w = 0;

    std::vector<Point3> aps;
    std::vector<Point3> secondary_users;
    std::vector<Point3> primary_users;
    Point3 primary_bs;

    std::vector<CorrelationMatrix> secondary_channels;  // R_kl at k * L + l
    std::vector<CorrelationMatrix> cross_channels;      // S_jl (S-AP l -> P-UE j) at j * L + l
    std::vector<CorrelationMatrix> bs_to_secondary;     // C_k, M x M
    std::vector<CorrelationMatrix> bs_to_primary;       // G_j, M x M

    PilotAssignment pilots;

    int L() const { return config.num_aps; }
    int N() const { return config.antennas_per_ap; }
    int Ks() const { return config.num_secondary_users; }
    int Kp() const { return config.num_primary_users; }
    int M() const { return config.primary_antennas; }

    const CMatrix& R(int k, int l) const { return secondary_channels[k * L() + l].matrix(); }
    const CMatrix& S(int j, int l) const { return cross_channels[j * L() + l].matrix(); }
    const CMatrix& C(int k) const { return bs_to_secondary[k].matrix(); }
    const CMatrix& G(int j) const { return bs_to_primary[j].matrix(); }

    double interference_threshold_w() const {
        return noise_power_w * db_to_linear(config.interference_threshold_db);
    }
};

/// Access points at equal arc-length spacing along the room perimeter,
/// starting half a spacing from the (0, 0) corner.
std::vector<Point3> perimeter_positions(int count, double side, double height);

/// Deterministic in `config.seed`.
Scenario build_scenario(const SystemConfig& config);

}  // namespace cfee
