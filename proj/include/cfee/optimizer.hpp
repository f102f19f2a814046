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
#include "cfee/metrics.hpp"

namespace cfee {

/// Everything the power-allocation problem needs: coefficients, limits and
/// the power model. `coeffs` must outlive the problem.
struct PowerProblem {
    PowerProblem(const SinrCoefficients& coeffs, const SystemConfig& config);
    PowerProblem(const SinrCoefficients& coeffs, const SystemConfig& config, double interference_threshold_w);

    const SinrCoefficients* coeffs;
    SystemConfig config;
    double interference_threshold_w;
    /// Pre-log factor 1 - tau_p / tau_c folded into f1 and f2.
    double se_weight;

    double reduced_power(const PowerAllocation& p) const {
        return config.amplifier_inefficiency * p.sum() + config.circuit_power_w;
    }
};

/// Σ_k w log2(ς_k² + Σ_i Σ_l p_il b_ikl + Σ_i (Σ_l sqrt(p_il) a_ikl)²).
double f1(const PowerAllocation& p, const SinrCoefficients& c, double weight);
/// As f1 without the own-signal term i = k.
double f2(const PowerAllocation& p, const SinrCoefficients& c, double weight);
/// Analytic gradient of f2, row-major over (i, l). Zero entries use
/// sqrt(smoothing) in place of sqrt(p).
std::vector<double> grad_f2(const PowerAllocation& p, const SinrCoefficients& c, double weight,
                            double smoothing = 1e-12);

/// First-order expansion of f2 around a feasible point.
struct BoundState {
    PowerAllocation center;
    double f2_center = 0;
    std::vector<double> gradient;

    static BoundState build(const PowerAllocation& center, const SinrCoefficients& c, double weight,
                            double smoothing = 1e-12);
};

/// f̄2(p, p0) = f2(p0) + ∇f2(p0)ᵀ(p - p0).
double taylor_bound(const PowerAllocation& p, const BoundState& state);

/// (f1(p) - f̄2(p, p0)) / P̄_T(p) in bit/s/Hz per W; multiply by B for bit/J.
double ee_lower_bound(const PowerAllocation& p, const BoundState& state, const PowerProblem& problem);

struct SubproblemResult {
    PowerAllocation p;
    double duality_gap = 0;      // (number of inequality constraints) / t at exit
    double kkt_residual = 0;     // ||∇φ_t||_∞ / t, stationarity of the centred point
    int newton_iterations = 0;
};

/// Maximises F(p) = f1(p) - f̄2(p, p0) - λ P̄_T(p) over
/// {p >= 0, Σ_i p_il <= P_max, Σ p_il θ_iml <= I_th} with a primal log-barrier
/// method (damped Newton, barrier weight x10 per stage). λ is in bit/s/Hz per W.
SubproblemResult solve_subproblem(double lambda, const BoundState& state, const PowerProblem& problem,
                                  const OptimizerOptions& options);

struct TraceRow {
    int outer = 0;
    int inner = 0;
    double lambda = 0;   // bit/J
    double F = 0;        // bit/s
    double ee_lb = 0;    // bit/J
};

struct DinkelbachResult {
    PowerAllocation p;
    double lambda = 0;               // bit/s/Hz per W
    std::vector<double> lambdas;     // λ_0, λ_1, ...
    std::vector<double> F;           // F(λ_n) at each iteration, bit/s/Hz
    int iterations = 0;
};

/// Inner Dinkelbach loop for a fixed expansion point. Starts from
/// λ_0 = EE_lb(p0, p0); an iterate whose F(λ_n) is negative (a sub-problem
/// solved less accurately than the previous one) is discarded so that λ never
/// decreases. Throws NumericalFailure past the iteration cap.
DinkelbachResult dinkelbach(const BoundState& state, const PowerProblem& problem, const OptimizerOptions& options);

enum class Termination { converged, outer_iteration_cap };

struct OptimizerResult {
    PowerAllocation p_star;
    std::vector<double> lambda_trajectory;   // every λ_n, bit/J
    std::vector<double> ee_lb_trajectory;    // one per outer iteration, bit/J
    std::vector<std::vector<double>> inner_lambdas;  // per outer iteration, bit/s/Hz per W
    int outer_iterations = 0;
    int inner_iterations = 0;
    double final_F = 0;
    MetricsReport metrics;
    Termination termination = Termination::converged;
    std::vector<TraceRow> trace;
};

/// Outer successive-convex-approximation loop around Dinkelbach, starting at
/// half the equal-power allocation.
OptimizerResult sequential_dinkelbach(const PowerProblem& problem, const OptimizerOptions& options);
OptimizerResult sequential_dinkelbach(const Scenario& scenario, const SinrCoefficients& coeffs);

/// p_il = min{P_max / K_s, I_th / V_1, ..., I_th / V_Kp}, V_m = Σ_l Σ_i θ_iml.
PowerAllocation equal_power_allocation(const SinrCoefficients& c, double max_ap_power_w,
                                       double interference_threshold_w);

std::string to_string(Termination t);

}  // namespace cfee
