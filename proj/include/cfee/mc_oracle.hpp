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

#include "cfee/estimation.hpp"
#include "cfee/metrics.hpp"
#include "cfee/rng.hpp"

namespace cfee {

/// Hermitian square root with negative eigenvalues clipped to zero.
CMatrix psd_sqrt(const CMatrix& m);

/// One draw of every channel plus the pilot-phase noise and the P-BS signal.
struct ChannelRealization {
    std::vector<CVector> h;            // S-AP l -> S-UE k at k * L + l
    std::vector<CVector> u;            // S-AP l -> P-UE j at j * L + l
    std::vector<CVector> a;            // P-BS -> S-UE k
    std::vector<CVector> g;            // P-BS -> P-UE j
    std::vector<CVector> pilot_noise;  // projected noise n_{t l} at t * L + l
    CVector primary_signal;            // x̄_p ~ CN(0, Q_p)
};

/// Caches the covariance square roots of a scenario.
class ChannelSampler {
public:
    ChannelSampler(const Scenario& scenario, const CMatrix& Qp);
    ChannelRealization sample(Rng& rng) const;

private:
    const Scenario* sc_;
    std::vector<CMatrix> h_, u_, a_, g_;
    CMatrix qp_;
};

ChannelRealization sample_channels(const Scenario& scenario, const CMatrix& Qp, Rng& rng);

/// Pilot projection at AP l on the pilot of S-UE k, including every
/// contaminating S-UE and P-UE and the projected noise.
CVector pilot_projection(const ChannelRealization& r, int k, int l, const Scenario& scenario);

/// ĥ_kl = sqrt(η_s τ_p) R_kl Ψ_kl^{-1} y.
CVector mmse_estimate(const ChannelRealization& r, int k, int l, const Scenario& scenario,
                      const EstimationStatistics& stats);

/// ĥ / sqrt(tr R̂). A zero trace yields a zero precoder and a diagnostic.
CVector mr_precoder(const CVector& estimate, double estimate_trace, std::vector<std::string>* diagnostics = nullptr);

/// Sample moments gathered over all trials, plus per-batch SINR and
/// interference estimates for standard errors.
struct MonteCarloSummary {
    int trials = 0;
    int batches = 0;
    std::vector<double> dk_sq;         // |E{DK}|² per S-UE
    std::vector<double> du_sq;         // E|DU|²
    std::vector<double> ui_sq;         // E|UI|²
    std::vector<double> varsigma_sq;   // E|d_k|² + σ²
    std::vector<double> varsigma_stderr;
    std::vector<double> sinr;
    std::vector<double> sinr_stderr;
    std::vector<double> interference;  // E|y_m^sp|²
    std::vector<double> interference_stderr;
    std::vector<CMatrix> estimate_cov;  // sample E{ĥ ĥ^H}, k * L + l
    std::vector<double> estimate_cov_stderr;  // batch spread of ||sample cov||_F
    std::vector<CMatrix> cross_cov;     // sample E{ĥ h̃^H}
    std::vector<Complex> mean_gain;     // E{h_kl^H w_kl}
    std::vector<double> precoder_power; // E||w_kl||²
    std::vector<std::string> diagnostics;
};

/// Trials are independent streams keyed by (seed, trial index) and reduced in
/// fixed-size batches in index order; results do not depend on thread count.
MonteCarloSummary run_monte_carlo(const Scenario& scenario, const PowerAllocation& p, int trials,
                                  std::uint64_t seed, unsigned threads = 0);

struct EmpiricalEstimate {
    std::vector<double> value;
    std::vector<double> std_error;
};

EmpiricalEstimate empirical_sinr(const Scenario& scenario, const PowerAllocation& p, int trials, std::uint64_t seed);
EmpiricalEstimate empirical_interference(const Scenario& scenario, const PowerAllocation& p, int trials,
                                         std::uint64_t seed);

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

struct ValidationRow {
    std::string quantity;
    double closed_form = 0;
    double empirical = 0;
    double std_error = 0;
    double rel_err = 0;
    Verdict verdict = Verdict::pass;
};

struct ValidationOptions {
    int trials = 100000;
    std::uint64_t seed = 1;
    double tolerance = 0.02;
    /// Test hook: multiplies every closed-form b coefficient by (1 + fault).
    double fault = 0.0;
    unsigned threads = 0;
};

/// Compares every closed-form statistic with its Monte-Carlo counterpart.
/// A row is inconclusive when its relative standard error exceeds tolerance / 2.
std::vector<ValidationRow> validate_closed_forms(const Scenario& scenario, const PowerAllocation& p,
                                                 const ValidationOptions& options);

std::string validation_csv(const std::vector<ValidationRow>& rows);

}  // namespace cfee
