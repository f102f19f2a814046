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

#include "cfee/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace cfee {

PowerAllocation::PowerAllocation(int users, int aps, double fill)
    : users_(users), aps_(aps), p_(static_cast<std::size_t>(users) * aps, fill) {}

double PowerAllocation::sum() const {
    double s = 0;
    for (double v : p_) s += v;
    return s;
}

void PowerAllocation::check() const {
    for (double v : p_)
        if (!(v >= 0) || !std::isfinite(v)) throw std::invalid_argument("power allocation entries must be finite and >= 0");
}

double sinr(const PowerAllocation& p, const SinrCoefficients& c, int k) {
    p.check();
    double signal = 0;
    for (int l = 0; l < c.L; ++l) signal += std::sqrt(p(k, l)) * c.a(k, k, l);
    signal *= signal;
    if (signal == 0) return 0;

    double denom = c.varsigma_sq[k];
    for (int i = 0; i < c.Ks; ++i) {
        double coherent = 0;
        for (int l = 0; l < c.L; ++l) {
            denom += p(i, l) * c.b(i, k, l);
            coherent += std::sqrt(p(i, l)) * c.a(i, k, l);
        }
        if (i != k) denom += coherent * coherent;
    }
    return signal / denom;
}

double spectral_efficiency(double sinr, int tau_p, int tau_c) {
    return (1.0 - static_cast<double>(tau_p) / tau_c) * std::log2(1.0 + sinr);
}

PowerConsumption total_power(const PowerAllocation& p, const std::vector<double>& se, const SystemConfig& cfg) {
    double sum_se = 0;
    for (double s : se) sum_se += s;
    PowerConsumption out;
    out.reduced = cfg.amplifier_inefficiency * p.sum() + cfg.circuit_power_w;
    out.total = out.reduced + cfg.fronthaul_w_per_bps * cfg.bandwidth_hz * sum_se;
    return out;
}

ConstraintReport constraint_report(const PowerAllocation& p, const SinrCoefficients& c, double max_ap_power_w,
                                   double interference_threshold_w) {
    constexpr double rel_tol = 1e-9;
    ConstraintReport out;
    out.ap_power.assign(p.aps(), 0.0);
    out.primary_interference.assign(c.Kp, 0.0);
    for (int i = 0; i < p.users(); ++i) {
        for (int l = 0; l < p.aps(); ++l) {
            out.ap_power[l] += p(i, l);
            for (int m = 0; m < c.Kp; ++m) out.primary_interference[m] += p(i, l) * c.theta(i, m, l);
        }
    }
    for (double s : out.ap_power)
        if (s > max_ap_power_w * (1 + rel_tol)) out.feasible = false;
    for (double v : out.primary_interference)
        if (v > interference_threshold_w * (1 + rel_tol)) out.feasible = false;
    for (double v : p.values())
        if (v < 0) out.feasible = false;
    return out;
}

MetricsReport evaluate(const PowerAllocation& p, const SinrCoefficients& c, const SystemConfig& cfg,
                       double interference_threshold_w) {
    MetricsReport r;
    for (int k = 0; k < c.Ks; ++k) {
        r.sinr.push_back(sinr(p, c, k));
        r.se.push_back(spectral_efficiency(r.sinr.back(), cfg.pilot_length, cfg.coherence_length));
        r.sum_se += r.se.back();
    }
    r.sum_throughput = cfg.bandwidth_hz * r.sum_se;
    const PowerConsumption pc = total_power(p, r.se, cfg);
    r.power_total = pc.total;
    r.power_reduced = pc.reduced;
    r.ee = r.sum_throughput / r.power_total;
    r.constraints = constraint_report(p, c, cfg.max_ap_power_w, interference_threshold_w);
    return r;
}

double energy_efficiency(const PowerAllocation& p, const SinrCoefficients& c, const SystemConfig& cfg) {
    std::vector<double> se;
    double sum_se = 0;
    for (int k = 0; k < c.Ks; ++k) {
        se.push_back(spectral_efficiency(sinr(p, c, k), cfg.pilot_length, cfg.coherence_length));
        sum_se += se.back();
    }
    return cfg.bandwidth_hz * sum_se / total_power(p, se, cfg).total;
}

std::string to_csv_row(const MetricsReport& r, const SystemConfig& cfg) {
    std::string row = fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g}", cfg.seed, watt_to_dbm(cfg.max_ap_power_w),
                                  cfg.interference_threshold_db, r.ee, r.sum_se);
    for (double s : r.se) row += fmt::format(",{:.17g}", s);
    row += r.constraints.feasible ? ",1" : ",0";
    return row;
}

}  // namespace cfee
