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

#include <string>
#include <vector>

#include "cfee/config.hpp"
#include "cfee/estimation.hpp"

namespace cfee {

/// Downlink powers p_il in W, K_s rows by L columns.
class PowerAllocation {
public:
    PowerAllocation() = default;
    PowerAllocation(int users, int aps, double fill = 0.0);

    double operator()(int i, int l) const { return p_[i * aps_ + l]; }
    double& operator()(int i, int l) { return p_[i * aps_ + l]; }

    int users() const { return users_; }
    int aps() const { return aps_; }
    std::vector<double>& values() { return p_; }
    const std::vector<double>& values() const { return p_; }
    double sum() const;

    /// Throws std::invalid_argument on a negative or non-finite entry.
    void check() const;

private:
    int users_ = 0, aps_ = 0;
    std::vector<double> p_;
};

double sinr(const PowerAllocation& p, const SinrCoefficients& c, int k);

double spectral_efficiency(double sinr, int tau_p, int tau_c);

struct PowerConsumption {
    double total = 0;    // with throughput-dependent fronthaul power
    double reduced = 0;  // without it
};

PowerConsumption total_power(const PowerAllocation& p, const std::vector<double>& se,
                             const SystemConfig& config);

struct ConstraintReport {
    std::vector<double> ap_power;          // Σ_i p_il
    std::vector<double> primary_interference;  // Σ_l Σ_i p_il θ_iml
    bool feasible = true;
};

/// Feasible iff every AP sum <= P_max (1 + 1e-9) and every interference <= I_th (1 + 1e-9).
ConstraintReport constraint_report(const PowerAllocation& p, const SinrCoefficients& c,
                                   double max_ap_power_w, double interference_threshold_w);

struct MetricsReport {
    std::vector<double> sinr;
    std::vector<double> se;   // bit/s/Hz
    double sum_se = 0;
    double sum_throughput = 0;  // bit/s
    double power_total = 0;
    double power_reduced = 0;
    double ee = 0;  // bit/J, full power model
    ConstraintReport constraints;
};

MetricsReport evaluate(const PowerAllocation& p, const SinrCoefficients& c, const SystemConfig& config,
                       double interference_threshold_w);

/// Full-model energy efficiency in bit/J.
double energy_efficiency(const PowerAllocation& p, const SinrCoefficients& c, const SystemConfig& config);

/// One CSV row: seed, P_max_dBm, Ith_over_sigma2_dB, EE, sumSE, SE_1..SE_K, feasible.
std::string to_csv_row(const MetricsReport& report, const SystemConfig& config);

}  // namespace cfee
