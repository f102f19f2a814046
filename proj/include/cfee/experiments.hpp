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
#include <string>
#include <vector>

#include "cfee/config.hpp"
#include "cfee/estimation.hpp"
#include "cfee/mc_oracle.hpp"
#include "cfee/optimizer.hpp"

namespace cfee {

enum class SweepKind { pmax, ith };
enum class Policy { optimal, equal };

std::string to_string(SweepKind kind);
std::string to_string(Policy policy);
SweepKind parse_sweep_kind(const std::string& s);
Policy parse_policy(const std::string& s);

/// Default grids: P_max in dBm, I_th / σ² in dB.
std::vector<double> default_grid(SweepKind kind);

/// I_th / σ² used to emulate an unconstrained interference regime.
inline constexpr double kUnconstrainedInterferenceDb = 60.0;

struct SweepSpec {
    SweepKind kind = SweepKind::pmax;
    std::vector<double> grid;
    int trials = 100;                  // scenario seeds base_seed, base_seed + 1, ...
    std::uint64_t base_seed = 1;
    std::vector<Policy> policies{Policy::optimal, Policy::equal};
    SystemConfig base;                 // the swept quantity is overwritten per grid point
    unsigned threads = 0;              // 0: hardware concurrency
    bool trace = false;

    /// Throws std::invalid_argument on an empty or unsorted grid, or trials < 1.
    void validate() const;
};

struct SweepRow {
    SweepKind kind = SweepKind::pmax;
    double grid_value = 0;
    std::uint64_t seed = 0;
    Policy policy = Policy::optimal;
    double ee = 0;       // bit/J
    double sum_se = 0;   // bit/s/Hz
    bool feasible = false;
    int outer_iterations = 0;
    int inner_iterations = 0;
    bool failed = false;
    std::string error;

    bool operator==(const SweepRow&) const = default;
};

struct TraceRecord {
    double grid_value = 0;
    std::uint64_t seed = 0;
    TraceRow row;
};

struct SweepResult {
    std::vector<SweepRow> rows;   // grid-major, then seed, then policy
    std::vector<TraceRecord> trace;
    int failures = 0;

    /// Mean EE over successful runs at one grid point; NaN when there are none.
    double mean_ee(Policy policy, double grid_value) const;
};

/// Deterministic for fixed settings: scenarios depend only on the seed and the
/// per-seed work is reduced in a fixed order regardless of thread count.
SweepResult run_sweep(const SweepSpec& spec);

inline constexpr const char* kSweepCsvHeader =
    "sweep,grid_value,seed,policy,EE_bit_per_J,sumSE_bps_Hz,feasible,iters_outer,iters_inner";

std::string sweep_csv(const std::vector<SweepRow>& rows);
/// Throws std::runtime_error if the file cannot be written.
void emit_csv(const std::vector<SweepRow>& rows, const std::string& path);
std::vector<SweepRow> parse_sweep_csv(const std::string& text);

std::string trace_csv(const std::vector<TraceRecord>& trace);

struct GridSummary {
    double grid_value = 0;
    Policy policy = Policy::optimal;
    double mean_ee = 0;
    double mean_sum_se = 0;
    int runs = 0;
    int failures = 0;
};

std::vector<GridSummary> summarize(const SweepResult& result, const SweepSpec& spec);

/// Small instance for the closed-form versus Monte-Carlo suite:
/// L = 2, N = 2, K_s = 2, K_p = 1, M = 2, seed 1, no pilot sharing.
SystemConfig reference_validation_config();
/// Same size with K_s = 3 secondary users on two secondary pilots, so that
/// coherent pilot-contamination terms are exercised.
SystemConfig shared_pilot_validation_config();

struct ValidationReport {
    std::vector<ValidationRow> rows;
    int failures = 0;
    int inconclusive = 0;
    bool passed() const { return failures == 0; }
};

/// Runs the suite on the equal-power allocation of the given instance.
ValidationReport run_validation(const SystemConfig& config, const ValidationOptions& options);

/// Long-format dump: coefficient,i,k,l,value (varsigma_sq rows use k only).
std::string coefficients_csv(const SinrCoefficients& c);

}  // namespace cfee
