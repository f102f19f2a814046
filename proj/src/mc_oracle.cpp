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

#include "cfee/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <fmt/format.h>

namespace cfee {

namespace {

constexpr int kBatchSize = 1000;

CVector draw(const CMatrix& root, Rng& rng) {
    if (root.rows() == 0) return CVector();
    return root * standard_complex_gaussian(rng, root.cols());
}

// Running sums for one batch of trials.
struct Accumulator {
    int n = 0;
    std::vector<Complex> signal;      // Σ X_k
    std::vector<double> signal_sq;    // Σ |X_k|²
    std::vector<double> inter_user;   // Σ |UI_k|² (symbols averaged analytically)
    std::vector<double> primary;      // Σ |d_k|²
    std::vector<double> interference; // Σ |y_m^sp|²
    std::vector<CMatrix> est_cov;
    std::vector<CMatrix> cross_cov;
    std::vector<Complex> gain;
    std::vector<double> precoder;

    Accumulator(int Ks, int Kp, int L, int N)
        : signal(Ks), signal_sq(Ks), inter_user(Ks), primary(Ks), interference(Kp),
          est_cov(Ks * L, CMatrix::Zero(N, N)), cross_cov(Ks * L, CMatrix::Zero(N, N)),
          gain(Ks * L), precoder(Ks * L) {}

    void merge(const Accumulator& o) {
        n += o.n;
        for (std::size_t i = 0; i < signal.size(); ++i) {
            signal[i] += o.signal[i];
            signal_sq[i] += o.signal_sq[i];
            inter_user[i] += o.inter_user[i];
            primary[i] += o.primary[i];
        }
        for (std::size_t m = 0; m < interference.size(); ++m) interference[m] += o.interference[m];
        for (std::size_t j = 0; j < est_cov.size(); ++j) {
            est_cov[j] += o.est_cov[j];
            cross_cov[j] += o.cross_cov[j];
            gain[j] += o.gain[j];
            precoder[j] += o.precoder[j];
        }
    }

    double sinr(int k, double noise) const {
        const Complex mean = signal[k] / double(n);
        const double dk = std::norm(mean);
        const double du = signal_sq[k] / n - dk;
        const double denom = du + inter_user[k] / n + primary[k] / n + noise;
        return dk == 0 ? 0.0 : dk / denom;
    }
};

double batch_stderr(const std::vector<double>& values) {
    const std::size_t nb = values.size();
    if (nb < 2) return std::numeric_limits<double>::infinity();
    double mean = 0;
    for (double v : values) mean += v;
    mean /= nb;
    double var = 0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= (nb - 1);
    return std::sqrt(var / nb);
}

}  // namespace

CMatrix psd_sqrt(const CMatrix& m) {
    if (m.size() == 0) return m;
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (m + m.adjoint()));
    const Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().adjoint();
}

ChannelSampler::ChannelSampler(const Scenario& sc, const CMatrix& Qp) : sc_(&sc), qp_(psd_sqrt(Qp)) {
    for (const auto& c : sc.secondary_channels) h_.push_back(psd_sqrt(c.matrix()));
    for (const auto& c : sc.cross_channels) u_.push_back(psd_sqrt(c.matrix()));
    for (const auto& c : sc.bs_to_secondary) a_.push_back(psd_sqrt(c.matrix()));
    for (const auto& c : sc.bs_to_primary) g_.push_back(psd_sqrt(c.matrix()));
}

ChannelRealization ChannelSampler::sample(Rng& rng) const {
    ChannelRealization r;
    for (const auto& root : h_) r.h.push_back(draw(root, rng));
    for (const auto& root : u_) r.u.push_back(draw(root, rng));
    for (const auto& root : a_) r.a.push_back(draw(root, rng));
    for (const auto& root : g_) r.g.push_back(draw(root, rng));
    const double noise_std = std::sqrt(sc_->noise_power_w);
    for (int t = 0; t < sc_->config.pilot_length; ++t)
        for (int l = 0; l < sc_->L(); ++l) r.pilot_noise.push_back(noise_std * standard_complex_gaussian(rng, sc_->N()));
    r.primary_signal = draw(qp_, rng);
    return r;
}

ChannelRealization sample_channels(const Scenario& scenario, const CMatrix& Qp, Rng& rng) {
    return ChannelSampler(scenario, Qp).sample(rng);
}

CVector pilot_projection(const ChannelRealization& r, int k, int l, const Scenario& sc) {
    const double ss = std::sqrt(sc.config.secondary_pilot_power_w * sc.config.pilot_length);
    const double sp = std::sqrt(sc.config.primary_pilot_power_w * sc.config.pilot_length);
    CVector y = r.pilot_noise[sc.pilots.secondary[k] * sc.L() + l];
    for (int i : sc.pilots.secondary_sharing(k)) y += ss * r.h[i * sc.L() + l];
    for (int j : sc.pilots.primary_sharing(k)) y += sp * r.u[j * sc.L() + l];
    return y;
}

CVector mmse_estimate(const ChannelRealization& r, int k, int l, const Scenario& sc,
                      const EstimationStatistics& stats) {
    const double ss = std::sqrt(sc.config.secondary_pilot_power_w * sc.config.pilot_length);
    return ss * (stats.PsiInvR(k, l).adjoint() * pilot_projection(r, k, l, sc));
}

CVector mr_precoder(const CVector& estimate, double estimate_trace, std::vector<std::string>* diagnostics) {
    if (!(estimate_trace > 0)) {
        if (diagnostics) diagnostics->push_back("mr_precoder: tr(Rhat) = 0, precoder set to zero");
        return CVector::Zero(estimate.size());
    }
    return estimate / std::sqrt(estimate_trace);
}

MonteCarloSummary run_monte_carlo(const Scenario& sc, const PowerAllocation& p, int trials, std::uint64_t seed,
                                  unsigned threads) {
    if (trials < 1) throw std::invalid_argument("run_monte_carlo: trials must be >= 1");
    p.check();
    const int Ks = sc.Ks(), Kp = sc.Kp(), L = sc.L(), N = sc.N();
    const EstimationStatistics stats = estimation_statistics(sc);
    const PrimaryStatistics prim = primary_statistics(sc);
    const ChannelSampler sampler(sc, prim.Qp);

    MonteCarloSummary out;
    std::vector<double> traces(Ks * L);
    for (int j = 0; j < Ks * L; ++j) {
        traces[j] = stats.estimate[j].trace().real();
        if (!(traces[j] > 0))
            out.diagnostics.push_back(fmt::format("mr_precoder: tr(Rhat) = 0 for link {}, precoder set to zero", j));
    }
    std::vector<double> sqrt_p(p.values().size());
    for (std::size_t j = 0; j < sqrt_p.size(); ++j) sqrt_p[j] = std::sqrt(p.values()[j]);

    auto run_trial = [&](std::uint64_t trial, Accumulator& acc) {
        Rng rng = make_stream(seed, StreamDomain::monte_carlo, trial);
        const ChannelRealization r = sampler.sample(rng);
        std::vector<CVector> w(Ks * L);
        for (int k = 0; k < Ks; ++k) {
            for (int l = 0; l < L; ++l) {
                const int j = k * L + l;
                const CVector est = mmse_estimate(r, k, l, sc, stats);
                w[j] = mr_precoder(est, traces[j]);
                const CVector err = r.h[j] - est;
                acc.est_cov[j].noalias() += est * est.adjoint();
                acc.cross_cov[j].noalias() += est * err.adjoint();
                acc.gain[j] += r.h[j].dot(w[j]);
                acc.precoder[j] += w[j].squaredNorm();
            }
        }
        for (int k = 0; k < Ks; ++k) {
            for (int i = 0; i < Ks; ++i) {
                Complex s = 0;
                for (int l = 0; l < L; ++l) s += sqrt_p[i * L + l] * r.h[k * L + l].dot(w[i * L + l]);
                if (i == k) {
                    acc.signal[k] += s;
                    acc.signal_sq[k] += std::norm(s);
                } else {
                    acc.inter_user[k] += std::norm(s);
                }
            }
            acc.primary[k] += std::norm(r.a[k].dot(r.primary_signal));
        }
        for (int m = 0; m < Kp; ++m) {
            double y = 0;
            for (int i = 0; i < Ks; ++i) {
                Complex s = 0;
                for (int l = 0; l < L; ++l) s += sqrt_p[i * L + l] * r.u[m * L + l].dot(w[i * L + l]);
                y += std::norm(s);
            }
            acc.interference[m] += y;
        }
        ++acc.n;
    };

    const int batches = (trials + kBatchSize - 1) / kBatchSize;
    std::vector<Accumulator> parts(batches, Accumulator(Ks, Kp, L, N));
    const unsigned workers = std::max(1u, std::min<unsigned>(threads ? threads : std::thread::hardware_concurrency(),
                                                             static_cast<unsigned>(batches)));
    auto work = [&](unsigned worker) {
        for (int b = static_cast<int>(worker); b < batches; b += static_cast<int>(workers)) {
            const int first = b * kBatchSize;
            const int last = std::min(trials, first + kBatchSize);
            for (int t = first; t < last; ++t) run_trial(static_cast<std::uint64_t>(t), parts[b]);
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }

    Accumulator total(Ks, Kp, L, N);
    for (const auto& part : parts) total.merge(part);

    const double noise = sc.noise_power_w;
    const double n = total.n;
    out.trials = total.n;
    out.batches = batches;
    for (int k = 0; k < Ks; ++k) {
        const Complex mean = total.signal[k] / n;
        out.dk_sq.push_back(std::norm(mean));
        out.du_sq.push_back(total.signal_sq[k] / n - std::norm(mean));
        out.ui_sq.push_back(total.inter_user[k] / n);
        out.varsigma_sq.push_back(total.primary[k] / n + noise);
        out.sinr.push_back(total.sinr(k, noise));
        std::vector<double> per_batch;
        for (const auto& part : parts) per_batch.push_back(part.sinr(k, noise));
        out.sinr_stderr.push_back(batch_stderr(per_batch));
        per_batch.clear();
        for (const auto& part : parts) per_batch.push_back(part.primary[k] / part.n + noise);
        out.varsigma_stderr.push_back(batch_stderr(per_batch));
    }
    for (int m = 0; m < Kp; ++m) {
        out.interference.push_back(total.interference[m] / n);
        std::vector<double> per_batch;
        for (const auto& part : parts) per_batch.push_back(part.interference[m] / part.n);
        out.interference_stderr.push_back(batch_stderr(per_batch));
    }
    for (int j = 0; j < Ks * L; ++j) {
        out.estimate_cov.push_back(total.est_cov[j] / n);
        out.cross_cov.push_back(total.cross_cov[j] / n);
        out.mean_gain.push_back(total.gain[j] / n);
        out.precoder_power.push_back(total.precoder[j] / n);
        std::vector<double> per_batch;
        for (const auto& part : parts) per_batch.push_back((part.est_cov[j] / double(part.n)).norm());
        out.estimate_cov_stderr.push_back(batch_stderr(per_batch));
    }
    return out;
}

EmpiricalEstimate empirical_sinr(const Scenario& sc, const PowerAllocation& p, int trials, std::uint64_t seed) {
    const MonteCarloSummary s = run_monte_carlo(sc, p, trials, seed);
    return {s.sinr, s.sinr_stderr};
}

EmpiricalEstimate empirical_interference(const Scenario& sc, const PowerAllocation& p, int trials,
                                         std::uint64_t seed) {
    const MonteCarloSummary s = run_monte_carlo(sc, p, trials, seed);
    return {s.interference, s.interference_stderr};
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

std::vector<ValidationRow> validate_closed_forms(const Scenario& sc, const PowerAllocation& p,
                                                 const ValidationOptions& opt) {
    SinrCoefficients coeffs = compute_coefficients(sc);
    for (double& v : coeffs.b.data()) v *= 1.0 + opt.fault;
    const EstimationStatistics stats = estimation_statistics(sc);
    const MonteCarloSummary mc = run_monte_carlo(sc, p, opt.trials, opt.seed, opt.threads);
    const ConstraintReport cr = constraint_report(p, coeffs, std::numeric_limits<double>::max(),
                                                  std::numeric_limits<double>::max());

    std::vector<ValidationRow> rows;
    auto add = [&](std::string name, double closed, double empirical, double err, double rel_err_override = -1) {
        ValidationRow row;
        row.quantity = std::move(name);
        row.closed_form = closed;
        row.empirical = empirical;
        row.std_error = err;
        const double scale = std::abs(closed) > 0 ? std::abs(closed) : 1.0;
        row.rel_err = rel_err_override >= 0 ? rel_err_override : std::abs(empirical - closed) / scale;
        if (!(err / scale <= 0.5 * opt.tolerance))
            row.verdict = Verdict::inconclusive;
        else
            row.verdict = row.rel_err <= opt.tolerance ? Verdict::pass : Verdict::fail;
        rows.push_back(std::move(row));
    };

    const int L = sc.L();
    for (int k = 0; k < sc.Ks(); ++k)
        add(fmt::format("sinr[{}]", k), sinr(p, coeffs, k), mc.sinr[k], mc.sinr_stderr[k]);
    for (int m = 0; m < sc.Kp(); ++m)
        add(fmt::format("interference[{}]", m), cr.primary_interference[m], mc.interference[m],
            mc.interference_stderr[m]);
    for (int k = 0; k < sc.Ks(); ++k)
        add(fmt::format("varsigma_sq[{}]", k), coeffs.varsigma_sq[k], mc.varsigma_sq[k], mc.varsigma_stderr[k]);
    for (int k = 0; k < sc.Ks(); ++k) {
        for (int l = 0; l < L; ++l) {
            const int j = k * L + l;
            const CMatrix& rhat = stats.estimate[j];
            const double ref = rhat.norm();
            const double frob = (mc.estimate_cov[j] - rhat).norm() / (ref > 0 ? ref : 1.0);
            add(fmt::format("rhat_frobenius[{},{}]", k, l), ref, mc.estimate_cov[j].norm(), mc.estimate_cov_stderr[j], frob);
            const double gain_sd = std::sqrt(coeffs.b(k, k, l) / std::max(1, mc.trials));
            add(fmt::format("mean_gain[{},{}]", k, l), coeffs.a(k, k, l), mc.mean_gain[j].real(), gain_sd);
            add(fmt::format("precoder_power[{},{}]", k, l), 1.0, mc.precoder_power[j], 1.0 / std::sqrt(std::max(1, mc.trials)));
        }
    }
    return rows;
}

std::string validation_csv(const std::vector<ValidationRow>& rows) {
    std::string out = "quantity,closed_form,empirical,stderr,rel_err,verdict\n";
    for (const auto& r : rows)
        out += fmt::format("{},{:.10g},{:.10g},{:.6g},{:.6g},{}\n", r.quantity, r.closed_form, r.empirical, r.std_error,
                           r.rel_err, to_string(r.verdict));
    return out;
}

}  // namespace cfee
