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

#include "cfee/scenario.hpp"
#include "cfee/types.hpp"

namespace cfee {

/// Ψ = η_s τ_p Σ_{i∈S_k^s} R_il + η_p τ_p Σ_{j∈S_k^p} S_jl + σ² I.
CMatrix pilot_correlation_matrix(const Scenario& scenario, int k, int l);

struct EstimateCovariance {
    CMatrix estimate;  // R̂_kl
    CMatrix error;     // R̃_kl
};

/// MMSE estimate and error covariances of link (k, l). Ψ is factorised, never inverted.
EstimateCovariance estimate_covariance(const Scenario& scenario, int k, int l);

/// Per-link second-order statistics of the MMSE estimator, indexed k * L + l.
struct EstimationStatistics {
    int L = 0;
    std::vector<CMatrix> psi;
    std::vector<CMatrix> estimate;
    std::vector<CMatrix> error;
    /// Ψ_kl^{-1} R_kl, reused by the coefficient formulas.
    std::vector<CMatrix> psi_inv_r;

    const CMatrix& Psi(int k, int l) const { return psi[k * L + l]; }
    const CMatrix& Rhat(int k, int l) const { return estimate[k * L + l]; }
    const CMatrix& Rtilde(int k, int l) const { return error[k * L + l]; }
    const CMatrix& PsiInvR(int k, int l) const { return psi_inv_r[k * L + l]; }
};

EstimationStatistics estimation_statistics(const Scenario& scenario);

/// Closed-form coefficients feeding the SINR, the interference constraint and
/// the optimizer.
struct SinrCoefficients {
    int Ks = 0, L = 0, Kp = 0;
    Tensor3 a;      // a(i, k, l)
    Tensor3 b;      // b(i, k, l)
    Tensor3 theta;  // theta(i, m, l)
    std::vector<double> varsigma_sq;  // interference-plus-noise power at each S-UE
    CMatrix Qp;
    double noise_power_w = 0;
    /// Zero-denominator cases that were resolved by setting a coefficient to 0.
    std::vector<std::string> diagnostics;
};

/// Fills a and b (and the dimensions) from the estimation statistics.
void sinr_coefficients(const Scenario& scenario, const EstimationStatistics& stats,
                       SinrCoefficients& out);

/// theta(i, m, l) = tr(R̂_il S_ml) / tr(R̂_il).
Tensor3 interference_coefficients(const Scenario& scenario, const EstimationStatistics& stats,
                                  std::vector<std::string>* diagnostics = nullptr);

struct PrimaryStatistics {
    CMatrix Qp;
    std::vector<double> varsigma_sq;
    /// D̂_j, the P-BS estimate covariance of each P-UE.
    std::vector<CMatrix> estimate;
};

/// MMSE estimation at the P-BS (pilot sharing seen from the P-BS side),
/// Q_p = scale * Σ_j D̂_j / tr(D̂_j) and ς_k² = tr(Q_p C_k) + σ².
PrimaryStatistics primary_statistics(const Scenario& scenario);

/// All of the above in one call.
SinrCoefficients compute_coefficients(const Scenario& scenario);

}  // namespace cfee
