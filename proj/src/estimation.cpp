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

#include "cfee/estimation.hpp"

#include <cmath>

#include <fmt/format.h>

namespace cfee {

namespace {

// Ψ^{-1} X for Hermitian positive-definite Ψ.
CMatrix hpd_solve(const CMatrix& psi, const CMatrix& rhs) {
    Eigen::LLT<CMatrix> llt(psi);
    if (llt.info() != Eigen::Success) throw NumericalFailure("pilot correlation matrix is not positive definite");
    return llt.solve(rhs);
}

double real_trace_of_product(const CMatrix& a, const CMatrix& b) {
    // tr(A B) without forming the product.
    return (a.transpose().cwiseProduct(b)).sum().real();
}

double pilot_scale(double power, int tau_p) { return power * tau_p; }

}  // namespace

CMatrix pilot_correlation_matrix(const Scenario& sc, int k, int l) {
    const auto& cfg = sc.config;
    const double ss = pilot_scale(cfg.secondary_pilot_power_w, cfg.pilot_length);
    const double sp = pilot_scale(cfg.primary_pilot_power_w, cfg.pilot_length);
    CMatrix psi = sc.noise_power_w * CMatrix::Identity(sc.N(), sc.N());
    for (int i : sc.pilots.secondary_sharing(k)) psi += ss * sc.R(i, l);
    for (int j : sc.pilots.primary_sharing(k)) psi += sp * sc.S(j, l);
    return psi;
}

EstimateCovariance estimate_covariance(const Scenario& sc, int k, int l) {
    const double ss = pilot_scale(sc.config.secondary_pilot_power_w, sc.config.pilot_length);
    const CMatrix& r = sc.R(k, l);
    const CMatrix psi_inv_r = hpd_solve(pilot_correlation_matrix(sc, k, l), r);
    CMatrix rhat = ss * r * psi_inv_r;
    rhat = 0.5 * (rhat + rhat.adjoint()).eval();
    return {rhat, r - rhat};
}

EstimationStatistics estimation_statistics(const Scenario& sc) {
    const double ss = pilot_scale(sc.config.secondary_pilot_power_w, sc.config.pilot_length);
    EstimationStatistics st;
    st.L = sc.L();
    for (int k = 0; k < sc.Ks(); ++k) {
        for (int l = 0; l < sc.L(); ++l) {
            const CMatrix& r = sc.R(k, l);
            CMatrix psi = pilot_correlation_matrix(sc, k, l);
            CMatrix psi_inv_r = hpd_solve(psi, r);
            CMatrix rhat = ss * r * psi_inv_r;
            rhat = 0.5 * (rhat + rhat.adjoint()).eval();
            st.error.push_back(r - rhat);
            st.estimate.push_back(std::move(rhat));
            st.psi.push_back(std::move(psi));
            st.psi_inv_r.push_back(std::move(psi_inv_r));
        }
    }
    return st;
}

void sinr_coefficients(const Scenario& sc, const EstimationStatistics& st, SinrCoefficients& out) {
    const int Ks = sc.Ks(), L = sc.L();
    const double ss = pilot_scale(sc.config.secondary_pilot_power_w, sc.config.pilot_length);
    out.Ks = Ks;
    out.L = L;
    out.Kp = sc.Kp();
    out.a = Tensor3(Ks, Ks, L);
    out.b = Tensor3(Ks, Ks, L);
    for (int i = 0; i < Ks; ++i) {
        for (int l = 0; l < L; ++l) {
            const CMatrix& r_i = sc.R(i, l);
            // R_il Ψ_il^{-1} = (Ψ_il^{-1} R_il)^H
            const CMatrix r_psi_inv = st.PsiInvR(i, l).adjoint();
            const CMatrix r_psi_inv_r = r_psi_inv * r_i;
            const double denom = r_psi_inv_r.trace().real();
            if (!(denom > 0)) {
                out.diagnostics.push_back(fmt::format("a/b for user {} at AP {}: tr(R Psi^-1 R) = 0, set to 0", i, l));
                continue;
            }
            for (int k = 0; k < Ks; ++k) {
                const CMatrix& r_k = sc.R(k, l);
                out.b(i, k, l) = std::max(0.0, real_trace_of_product(r_psi_inv_r, r_k) / denom);
                if (sc.pilots.secondary_share(i, k)) {
                    // Real for Toeplitz (centro-Hermitian) covariances.
                    out.a(i, k, l) = ss * real_trace_of_product(r_psi_inv, r_k) / std::sqrt(ss * denom);
                }
            }
        }
    }
}

Tensor3 interference_coefficients(const Scenario& sc, const EstimationStatistics& st,
                                  std::vector<std::string>* diagnostics) {
    Tensor3 theta(sc.Ks(), sc.Kp(), sc.L());
    for (int i = 0; i < sc.Ks(); ++i) {
        for (int l = 0; l < sc.L(); ++l) {
            const double tr = st.Rhat(i, l).trace().real();
            if (!(tr > 0)) {
                if (diagnostics)
                    diagnostics->push_back(fmt::format("theta for user {} at AP {}: tr(Rhat) = 0, set to 0", i, l));
                continue;
            }
            for (int m = 0; m < sc.Kp(); ++m)
                theta(i, m, l) = std::max(0.0, real_trace_of_product(st.Rhat(i, l), sc.S(m, l)) / tr);
        }
    }
    return theta;
}

PrimaryStatistics primary_statistics(const Scenario& sc) {
    const auto& cfg = sc.config;
    const double ss = pilot_scale(cfg.secondary_pilot_power_w, cfg.pilot_length);
    const double sp = pilot_scale(cfg.primary_pilot_power_w, cfg.pilot_length);
    const int M = sc.M();

    PrimaryStatistics out;
    out.Qp = CMatrix::Zero(M, M);
    for (int j = 0; j < sc.Kp(); ++j) {
        const int pilot = sc.pilots.primary[j];
        CMatrix psi = sc.noise_power_w * CMatrix::Identity(M, M);
        for (int jj = 0; jj < sc.Kp(); ++jj)
            if (sc.pilots.primary[jj] == pilot) psi += sp * sc.G(jj);
        for (int k = 0; k < sc.Ks(); ++k)
            if (sc.pilots.secondary[k] == pilot) psi += ss * sc.C(k);
        const CMatrix& g = sc.G(j);
        CMatrix dhat = sp * g * hpd_solve(psi, g);
        dhat = 0.5 * (dhat + dhat.adjoint()).eval();
        const double tr = dhat.trace().real();
        if (tr > 0) out.Qp += dhat / tr;
        out.estimate.push_back(std::move(dhat));
    }
    out.Qp *= cfg.primary_power_scale;
    for (int k = 0; k < sc.Ks(); ++k)
        out.varsigma_sq.push_back(std::max(0.0, real_trace_of_product(out.Qp, sc.C(k))) + sc.noise_power_w);
    return out;
}

SinrCoefficients compute_coefficients(const Scenario& sc) {
    const EstimationStatistics st = estimation_statistics(sc);
    SinrCoefficients out;
    sinr_coefficients(sc, st, out);
    out.theta = interference_coefficients(sc, st, &out.diagnostics);
    PrimaryStatistics prim = primary_statistics(sc);
    out.Qp = std::move(prim.Qp);
    out.varsigma_sq = std::move(prim.varsigma_sq);
    out.noise_power_w = sc.noise_power_w;
    return out;
}

}  // namespace cfee
