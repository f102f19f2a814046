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

namespace cfee {

/// Tolerances and iteration caps of the sequential Dinkelbach optimizer.
struct OptimizerOptions {
    /// Dinkelbach stops once F(lambda) <= inner_epsilon (bit/s/Hz).
    double inner_epsilon = 1e-4;
    /// Relative change of the lower-bound EE between outer iterations.
    double outer_tolerance = 1e-4;
    int max_inner_iterations = 50;
    int max_outer_iterations = 200;
    /// Square roots inside the sub-problem are evaluated at p + smoothing.
    double sqrt_smoothing_w = 1e-12;
    /// Barrier stages stop when (number of constraints) / t falls below this.
    double barrier_gap = 1e-8;
    int max_newton_iterations = 200;
};

/// Every tunable of one problem instance. Powers in W, lengths in m.
struct SystemConfig {
    int num_aps = 6;                // L
    int antennas_per_ap = 4;        // N
    int num_secondary_users = 4;    // K_s
    int primary_antennas = 5;       // M
    int num_primary_users = 4;      // K_p

    double bandwidth_hz = 20e6;
    double noise_figure_db = 9.0;
    int coherence_length = 2000;    // tau_c
    int pilot_length = 8;           // tau_p
    int pilots_shared = 2;          // tau_1, usable by both networks
    int pilots_primary = 3;         // tau_2
    int pilots_secondary = 3;       // tau_3

    double secondary_pilot_power_w = 0.1;
    double primary_pilot_power_w = 0.1;

    double amplifier_inefficiency = 1.4;      // zeta
    double fronthaul_w_per_bps = 0.25e-9;     // xi
    double circuit_power_w = 1.0;             // PC
    double max_ap_power_w = 0.031622776601683794;  // 15 dBm
    double interference_threshold_db = -3.0;  // I_th relative to noise power
    double primary_power_scale = 1.0;         // multiplies Q_p

    double angular_std_deg = 15.0;
    double room_side_m = 125.0;
    double pn_side_m = 100.0;
    double pn_offset_m = 300.0;     // horizontal shift of the PN centre from the room centre
    double ap_height_m = 5.0;

    std::uint64_t seed = 1;

    OptimizerOptions optimizer;

    /// Throws ConfigError naming the first offending field.
    void validate() const;
};

}  // namespace cfee
