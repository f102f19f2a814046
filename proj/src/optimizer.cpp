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

#include "cfee/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace cfee {

namespace {

double log_argument(const PowerAllocation& p, const SinrCoefficients& c, int k, bool include_own) {
    double h = c.varsigma_sq[k];
    for (int i = 0; i < c.Ks; ++i) {
        double coherent = 0;
        for (int l = 0; l < c.L; ++l) {
            h += p(i, l) * c.b(i, k, l);
            coherent += std::sqrt(p(i, l)) * c.a(i, k, l);
        }
        if (i != k || include_own) h += coherent * coherent;
    }
    return h;
}

bool user_is_active(const SinrCoefficients& c, int i) {
    for (int l = 0; l < c.L; ++l)
        if (c.a(i, i, l) > 0) return true;
    return false;
}

// Log-barrier formulation of one Dinkelbach sub-problem over the active
// variables. Maximises phi_t(x) = t G(x) + Σ log(slack).
class BarrierSubproblem {
public:
    BarrierSubproblem(double lambda, const BoundState& state, const PowerProblem& problem,
                      const OptimizerOptions& options)
        : c_(*problem.coeffs), eps_(options.sqrt_smoothing_w) {
        coef_ = problem.se_weight / std::numbers::ln2;
        for (int i = 0; i < c_.Ks; ++i) {
            if (!user_is_active(c_, i)) continue;
            for (int l = 0; l < c_.L; ++l) {
                user_.push_back(i);
                ap_.push_back(l);
                cost_.push_back(state.gradient[i * c_.L + l] +
                                lambda * problem.config.amplifier_inefficiency);
            }
        }
        n_ = static_cast<int>(user_.size());
        // Per-AP power rows, only for APs that carry a variable.
        for (int l = 0; l < c_.L; ++l) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(n_);
            bool any = false;
            for (int j = 0; j < n_; ++j)
                if (ap_[j] == l) row(j) = 1.0, any = true;
            if (any) {
                rows_.push_back(std::move(row));
                limits_.push_back(problem.config.max_ap_power_w);
            }
        }
        for (int m = 0; m < c_.Kp; ++m) {
            Eigen::VectorXd row(n_);
            for (int j = 0; j < n_; ++j) row(j) = c_.theta(user_[j], m, ap_[j]);
            if (row.size() > 0 && row.maxCoeff() > 0) {
                rows_.push_back(std::move(row));
                limits_.push_back(problem.interference_threshold_w);
            }
        }
    }

    int size() const { return n_; }
    int constraint_count() const { return n_ + static_cast<int>(rows_.size()); }

    Eigen::VectorXd to_variables(const PowerAllocation& p) const {
        Eigen::VectorXd x(n_);
        for (int j = 0; j < n_; ++j) x(j) = p(user_[j], ap_[j]);
        return x;
    }

    PowerAllocation to_allocation(const Eigen::VectorXd& x) const {
        PowerAllocation p(c_.Ks, c_.L);
        for (int j = 0; j < n_; ++j) p(user_[j], ap_[j]) = x(j);
        return p;
    }

    bool strictly_feasible(const Eigen::VectorXd& x) const {
        if (n_ > 0 && x.minCoeff() <= 0) return false;
        for (std::size_t r = 0; r < rows_.size(); ++r)
            if (limits_[r] - rows_[r].dot(x) <= 0) return false;
        return true;
    }

    // Largest step keeping every slack positive.
    double max_step(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) const {
        double alpha = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n_; ++j)
            if (dx(j) < 0) alpha = std::min(alpha, -x(j) / dx(j));
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            const double rate = rows_[r].dot(dx);
            if (rate > 0) alpha = std::min(alpha, (limits_[r] - rows_[r].dot(x)) / rate);
        }
        return alpha;
    }

    // Gradient and negated Hessian of phi_t.
    void derivatives(const Eigen::VectorXd& x, double t, Eigen::VectorXd& grad, Eigen::MatrixXd& neg_hess) const {
        const int Ks = c_.Ks;
        Eigen::VectorXd s = (x.array() + eps_).sqrt();
        Eigen::MatrixXd u = coherent_sums(s);

        grad = Eigen::VectorXd::Zero(n_);
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n_, n_);
        Eigen::VectorXd dh(n_);
        for (int k = 0; k < Ks; ++k) {
            const double h = log_argument_at(x, u, k);
            for (int j = 0; j < n_; ++j) {
                const int i = user_[j], l = ap_[j];
                dh(j) = c_.b(i, k, l) + u(i, k) * c_.a(i, k, l) / s(j);
            }
            grad += (coef_ / h) * dh;
            hess.noalias() -= (coef_ / (h * h)) * dh * dh.transpose();
            for (int j = 0; j < n_; ++j) {
                const int i = user_[j];
                const double aj = c_.a(i, k, ap_[j]);
                if (aj == 0) continue;
                for (int jj = 0; jj < n_; ++jj) {
                    if (user_[jj] != i) continue;
                    const double ajj = c_.a(i, k, ap_[jj]);
                    hess(j, jj) += (coef_ / h) * aj * ajj / (2 * s(j) * s(jj));
                }
                hess(j, j) -= (coef_ / h) * u(i, k) * aj / (2 * s(j) * s(j) * s(j));
            }
        }
        for (int j = 0; j < n_; ++j) grad(j) -= cost_[j];

        grad *= t;
        neg_hess = -t * hess;
        for (int j = 0; j < n_; ++j) {
            grad(j) += 1.0 / x(j);
            neg_hess(j, j) += 1.0 / (x(j) * x(j));
        }
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            const double slack = limits_[r] - rows_[r].dot(x);
            grad -= rows_[r] / slack;
            neg_hess.noalias() += rows_[r] * rows_[r].transpose() / (slack * slack);
        }
    }

    // phi_t(x + alpha dx) - phi_t(x), formed from differences so that small
    // changes survive cancellation at large t.
    double change(const Eigen::VectorXd& x, const Eigen::VectorXd& dx, double alpha, double t) const {
        const Eigen::VectorXd step = alpha * dx;
        const Eigen::VectorXd xn = x + step;
        const Eigen::VectorXd s0 = (x.array() + eps_).sqrt();
        const Eigen::VectorXd s1 = (xn.array() + eps_).sqrt();
        const Eigen::VectorXd ds = step.array() / (s0 + s1).array();
        const Eigen::MatrixXd u0 = coherent_sums(s0);
        const Eigen::MatrixXd du = coherent_sums(ds);

        double dG = 0;
        for (int k = 0; k < c_.Ks; ++k) {
            const double h0 = log_argument_at(x, u0, k);
            double dh = 0;
            for (int j = 0; j < n_; ++j) dh += step(j) * c_.b(user_[j], k, ap_[j]);
            for (int i = 0; i < c_.Ks; ++i) dh += du(i, k) * (2 * u0(i, k) + du(i, k));
            dG += coef_ * std::log1p(dh / h0);
        }
        for (int j = 0; j < n_; ++j) dG -= cost_[j] * step(j);

        double dbar = 0;
        for (int j = 0; j < n_; ++j) dbar += std::log1p(step(j) / x(j));
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            const double slack = limits_[r] - rows_[r].dot(x);
            dbar += std::log1p(-rows_[r].dot(step) / slack);
        }
        return t * dG + dbar;
    }

private:
    Eigen::MatrixXd coherent_sums(const Eigen::VectorXd& s) const {
        Eigen::MatrixXd u = Eigen::MatrixXd::Zero(c_.Ks, c_.Ks);
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < c_.Ks; ++k) u(user_[j], k) += s(j) * c_.a(user_[j], k, ap_[j]);
        return u;
    }

    double log_argument_at(const Eigen::VectorXd& x, const Eigen::MatrixXd& u, int k) const {
        double h = c_.varsigma_sq[k];
        for (int j = 0; j < n_; ++j) h += x(j) * c_.b(user_[j], k, ap_[j]);
        for (int i = 0; i < c_.Ks; ++i) h += u(i, k) * u(i, k);
        return h;
    }

    const SinrCoefficients& c_;
    double eps_;
    double coef_ = 0;
    int n_ = 0;
    std::vector<int> user_, ap_;
    std::vector<double> cost_;
    std::vector<Eigen::VectorXd> rows_;
    std::vector<double> limits_;
};

}  // namespace

PowerProblem::PowerProblem(const SinrCoefficients& c, const SystemConfig& cfg)
    : PowerProblem(c, cfg, c.noise_power_w * db_to_linear(cfg.interference_threshold_db)) {}

PowerProblem::PowerProblem(const SinrCoefficients& c, const SystemConfig& cfg, double ith)
    : coeffs(&c),
      config(cfg),
      interference_threshold_w(ith),
      se_weight(1.0 - static_cast<double>(cfg.pilot_length) / cfg.coherence_length) {}

double f1(const PowerAllocation& p, const SinrCoefficients& c, double weight) {
    double acc = 0;
    for (int k = 0; k < c.Ks; ++k) acc += std::log2(log_argument(p, c, k, true));
    return weight * acc;
}

double f2(const PowerAllocation& p, const SinrCoefficients& c, double weight) {
    double acc = 0;
    for (int k = 0; k < c.Ks; ++k) acc += std::log2(log_argument(p, c, k, false));
    return weight * acc;
}

std::vector<double> grad_f2(const PowerAllocation& p, const SinrCoefficients& c, double weight, double smoothing) {
    const double coef = weight / std::numbers::ln2;
    std::vector<double> g(static_cast<std::size_t>(c.Ks) * c.L, 0.0);
    for (int k = 0; k < c.Ks; ++k) {
        const double h = log_argument(p, c, k, false);
        for (int j = 0; j < c.Ks; ++j) {
            double u = 0;
            if (j != k)
                for (int l = 0; l < c.L; ++l) u += std::sqrt(p(j, l)) * c.a(j, k, l);
            for (int m = 0; m < c.L; ++m) {
                double d = c.b(j, k, m);
                if (j != k && c.a(j, k, m) != 0) {
                    const double root = p(j, m) > 0 ? std::sqrt(p(j, m)) : std::sqrt(smoothing);
                    d += u * c.a(j, k, m) / root;
                }
                g[j * c.L + m] += coef * d / h;
            }
        }
    }
    return g;
}

BoundState BoundState::build(const PowerAllocation& center, const SinrCoefficients& c, double weight,
                             double smoothing) {
    BoundState s;
    s.center = center;
    s.f2_center = f2(center, c, weight);
    s.gradient = grad_f2(center, c, weight, smoothing);
    return s;
}

double taylor_bound(const PowerAllocation& p, const BoundState& state) {
    double v = state.f2_center;
    const auto& x = p.values();
    const auto& x0 = state.center.values();
    for (std::size_t j = 0; j < x.size(); ++j) v += state.gradient[j] * (x[j] - x0[j]);
    return v;
}

double ee_lower_bound(const PowerAllocation& p, const BoundState& state, const PowerProblem& problem) {
    return (f1(p, *problem.coeffs, problem.se_weight) - taylor_bound(p, state)) / problem.reduced_power(p);
}

SubproblemResult solve_subproblem(double lambda, const BoundState& state, const PowerProblem& problem,
                                  const OptimizerOptions& options) {
    if (!(lambda >= 0)) throw std::invalid_argument("solve_subproblem: lambda must be >= 0");
    const SinrCoefficients& c = *problem.coeffs;
    BarrierSubproblem bp(lambda, state, problem, options);

    SubproblemResult out;
    if (bp.size() == 0) {
        out.p = PowerAllocation(c.Ks, c.L);
        return out;
    }

    // Strictly interior start: half of the equal-power point.
    PowerAllocation start = equal_power_allocation(c, problem.config.max_ap_power_w, problem.interference_threshold_w);
    for (double& v : start.values()) v *= 0.5;
    Eigen::VectorXd x = bp.to_variables(start);
    if (!bp.strictly_feasible(x)) throw NumericalFailure("solve_subproblem: no strictly feasible starting point");

    const double m = bp.constraint_count();
    double t = 1.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd neg_hess;
    for (;;) {
        int steps = 0;
        for (;;) {
            bp.derivatives(x, t, grad, neg_hess);
            Eigen::LLT<Eigen::MatrixXd> llt(neg_hess);
            if (llt.info() != Eigen::Success) throw NumericalFailure("solve_subproblem: barrier Hessian not definite");
            const Eigen::VectorXd dx = llt.solve(grad);
            const double decrement = grad.dot(dx);
            if (decrement <= 2e-10) break;
            if (++steps > options.max_newton_iterations)
                throw NumericalFailure(fmt::format("solve_subproblem: Newton did not converge at t = {:g} (decrement {:g})",
                                                   t, decrement));
            double alpha = std::min(1.0, 0.99 * bp.max_step(x, dx));
            while (bp.change(x, dx, alpha, t) < 0.25 * alpha * decrement) {
                alpha *= 0.5;
                if (alpha < 1e-14) break;
            }
            if (alpha < 1e-14) break;
            x += alpha * dx;
            ++out.newton_iterations;
        }
        if (m / t <= options.barrier_gap) break;
        t *= 10.0;
    }
    out.p = bp.to_allocation(x);
    out.duality_gap = m / t;
    out.kkt_residual = grad.lpNorm<Eigen::Infinity>() / t;
    return out;
}

DinkelbachResult dinkelbach(const BoundState& state, const PowerProblem& problem, const OptimizerOptions& options) {
    const SinrCoefficients& c = *problem.coeffs;
    DinkelbachResult r;
    r.p = state.center;
    r.lambda = std::max(0.0, ee_lower_bound(state.center, state, problem));
    r.lambdas.push_back(r.lambda);

    for (int n = 1; n <= options.max_inner_iterations; ++n) {
        r.iterations = n;
        const SubproblemResult sub = solve_subproblem(r.lambda, state, problem, options);
        const double numer = f1(sub.p, c, problem.se_weight) - taylor_bound(sub.p, state);
        const double denom = problem.reduced_power(sub.p);
        const double F = numer - r.lambda * denom;
        r.F.push_back(F);
        if (F <= options.inner_epsilon) {
            if (F > 0) {
                r.p = sub.p;
                r.lambda = numer / denom;
                r.lambdas.push_back(r.lambda);
            }
            return r;
        }
        r.p = sub.p;
        r.lambda = numer / denom;
        r.lambdas.push_back(r.lambda);
    }
    throw NumericalFailure(fmt::format("dinkelbach: F(lambda) = {:g} still above {:g} after {} iterations",
                                       r.F.back(), options.inner_epsilon, options.max_inner_iterations));
}

OptimizerResult sequential_dinkelbach(const PowerProblem& problem, const OptimizerOptions& options) {
    const SinrCoefficients& c = *problem.coeffs;
    const double bandwidth = problem.config.bandwidth_hz;

    PowerAllocation p = equal_power_allocation(c, problem.config.max_ap_power_w, problem.interference_threshold_w);
    for (int i = 0; i < c.Ks; ++i)
        for (int l = 0; l < c.L; ++l) p(i, l) = user_is_active(c, i) ? 0.5 * p(i, l) : 0.0;

    OptimizerResult res;
    res.termination = Termination::outer_iteration_cap;
    for (int t = 0; t < options.max_outer_iterations; ++t) {
        const BoundState state = BoundState::build(p, c, problem.se_weight, options.sqrt_smoothing_w);
        DinkelbachResult dk;
        try {
            dk = dinkelbach(state, problem, options);
        } catch (const NumericalFailure& e) {
            std::string traj;
            for (double v : res.ee_lb_trajectory) traj += fmt::format(" {:.6g}", v);
            throw NumericalFailure(fmt::format("outer iteration {} (EE_lb so far:{}): {}", t, traj, e.what()));
        }
        res.outer_iterations = t + 1;
        res.inner_iterations += dk.iterations;
        res.final_F = dk.F.empty() ? 0.0 : dk.F.back();
        for (int n = 0; n < static_cast<int>(dk.F.size()); ++n) {
            const double lam = dk.lambdas[std::min<std::size_t>(n, dk.lambdas.size() - 1)];
            res.trace.push_back({t, n + 1, lam * bandwidth, dk.F[n] * bandwidth, dk.lambdas.back() * bandwidth});
        }
        for (double lam : dk.lambdas) res.lambda_trajectory.push_back(lam * bandwidth);
        res.inner_lambdas.push_back(dk.lambdas);
        res.ee_lb_trajectory.push_back(dk.lambda * bandwidth);
        p = dk.p;

        if (t > 0) {
            const double prev = res.ee_lb_trajectory[t - 1];
            const double cur = res.ee_lb_trajectory[t];
            const bool converged = prev > 0 ? std::abs(cur - prev) / prev <= options.outer_tolerance : cur == prev;
            if (converged) {
                res.termination = Termination::converged;
                break;
            }
        }
    }
    res.p_star = p;
    res.metrics = evaluate(p, c, problem.config, problem.interference_threshold_w);
    return res;
}

OptimizerResult sequential_dinkelbach(const Scenario& scenario, const SinrCoefficients& coeffs) {
    const PowerProblem problem(coeffs, scenario.config, scenario.interference_threshold_w());
    return sequential_dinkelbach(problem, scenario.config.optimizer);
}

PowerAllocation equal_power_allocation(const SinrCoefficients& c, double max_ap_power_w,
                                       double interference_threshold_w) {
    double level = max_ap_power_w / c.Ks;
    for (int m = 0; m < c.Kp; ++m) {
        double v = 0;
        for (int i = 0; i < c.Ks; ++i)
            for (int l = 0; l < c.L; ++l) v += c.theta(i, m, l);
        if (v > 0) level = std::min(level, interference_threshold_w / v);
    }
    return PowerAllocation(c.Ks, c.L, level);
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::outer_iteration_cap: return "outer_iteration_cap";
    }
    return "unknown";
}

}  // namespace cfee
