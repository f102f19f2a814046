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

// Command-line entry point: sweep, validate and solve.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cfee/config_file.hpp"
#include "cfee/estimation.hpp"
#include "cfee/experiments.hpp"
#include "cfee/mc_oracle.hpp"
#include "cfee/metrics.hpp"
#include "cfee/optimizer.hpp"
#include "cfee/scenario.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kNumerical = 3, kValidation = 4 };

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string metrics_text(const cfee::MetricsReport& m, const cfee::PowerAllocation& p) {
    std::string s;
    s += fmt::format("EE_bit_per_J      {:.6e}\n", m.ee);
    s += fmt::format("sumSE_bps_Hz      {:.6f}\n", m.sum_se);
    s += fmt::format("throughput_bps    {:.6e}\n", m.sum_throughput);
    s += fmt::format("power_total_W     {:.6f}\n", m.power_total);
    s += fmt::format("power_reduced_W   {:.6f}\n", m.power_reduced);
    s += fmt::format("feasible          {}\n", m.constraints.feasible ? "yes" : "no");
    for (std::size_t k = 0; k < m.se.size(); ++k)
        s += fmt::format("user {:<3} SINR {:.6e}  SE {:.6f}\n", k, m.sinr[k], m.se[k]);
    for (std::size_t l = 0; l < m.constraints.ap_power.size(); ++l)
        s += fmt::format("AP {:<3} power {:.6e} W\n", l, m.constraints.ap_power[l]);
    for (std::size_t j = 0; j < m.constraints.primary_interference.size(); ++j)
        s += fmt::format("P-UE {:<3} interference {:.6e} W\n", j, m.constraints.primary_interference[j]);
    s += "allocation (rows: users, columns: APs, W)\n";
    for (int i = 0; i < p.users(); ++i) {
        for (int l = 0; l < p.aps(); ++l) s += fmt::format("{}{:.6e}", l ? " " : "  ", p(i, l));
        s += '\n';
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-efficient downlink power allocation for an underlay cell-free network"};
    app.require_subcommand(1);

    std::string config_path, out_path, kind = "pmax", policies = "optimal,equal", trace_path, coeff_path,
                                       instance = "reference";
    std::vector<std::string> overrides;
    std::vector<double> grid;
    int trials = 100;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    bool trace = false;
    double tolerance = 0.02, fault = 0.0;
    std::string policy = "optimal";

    auto* sweep = app.add_subcommand("sweep", "Sweep P_max or I_th over randomized scenarios");
    sweep->add_option("--kind", kind, "pmax or ith")->check(CLI::IsMember({"pmax", "ith"}));
    sweep->add_option("--config", config_path, "key=value configuration file");
    sweep->add_option("--out", out_path, "output CSV")->required();
    sweep->add_option("--trials", trials, "number of scenario seeds")->check(CLI::PositiveNumber);
    sweep->add_option("--seed", seed, "first scenario seed");
    sweep->add_option("--policy", policies, "comma-separated subset of optimal,equal");
    sweep->add_option("--grid", grid, "grid values (dBm for pmax, dB re noise for ith)")->delimiter(',');
    sweep->add_option("--threads", threads, "worker threads (0: all cores)");
    sweep->add_flag("--trace", trace, "also write the optimizer trace to <out>.trace.csv");
    sweep->add_option("--set", overrides, "configuration override key=value (repeatable)");

    auto* validate = app.add_subcommand("validate", "Check closed forms against Monte-Carlo estimates");
    validate->add_option("--trials", trials, "Monte-Carlo trials")->check(CLI::PositiveNumber);
    validate->add_option("--seed", seed, "Monte-Carlo seed");
    validate->add_option("--tolerance", tolerance, "relative tolerance");
    validate->add_option("--instance", instance, "reference or shared-pilot")
        ->check(CLI::IsMember({"reference", "shared-pilot"}));
    validate->add_option("--out", out_path, "write the report as CSV");
    validate->add_option("--threads", threads, "worker threads (0: all cores)");
    validate->add_option("--set", overrides, "instance override key=value (repeatable)");
    validate->add_option("--inject-fault", fault, "perturb closed-form b coefficients by this fraction")
        ->group("");

    auto* solve = app.add_subcommand("solve", "Solve one instance and print its metrics");
    solve->add_option("--config", config_path, "key=value configuration file");
    solve->add_option("--set", overrides, "configuration override key=value (repeatable)");
    solve->add_option("--policy", policy, "optimal or equal")->check(CLI::IsMember({"optimal", "equal"}));
    solve->add_flag("--trace", trace, "print the optimizer trace as CSV");
    solve->add_option("--dump-coefficients", coeff_path, "write the closed-form coefficients as CSV");

    // Positional key=value pairs are accepted as overrides as well.
    std::vector<std::string> positional;
    for (auto* sub : {sweep, solve}) sub->add_option("overrides", positional, "key=value overrides");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }
    overrides.insert(overrides.end(), positional.begin(), positional.end());

    try {
        if (*sweep) {
            cfee::SweepSpec spec;
            spec.kind = cfee::parse_sweep_kind(kind);
            spec.base = cfee::parse_config(config_path, overrides);
            spec.grid = grid.empty() ? cfee::default_grid(spec.kind) : grid;
            spec.trials = trials;
            spec.base_seed = seed;
            spec.threads = threads;
            spec.trace = trace;
            spec.policies.clear();
            std::stringstream ps(policies);
            for (std::string item; std::getline(ps, item, ',');) spec.policies.push_back(cfee::parse_policy(item));
            try {
                spec.validate();
            } catch (const std::invalid_argument& e) {
                std::cerr << "error: " << e.what() << '\n';
                return kUsage;
            }
            if (!std::ofstream(out_path, std::ios::app)) throw std::runtime_error("cannot open '" + out_path + "' for writing");
            const cfee::SweepResult result = cfee::run_sweep(spec);
            cfee::emit_csv(result.rows, out_path);
            if (trace) write_file(out_path + ".trace.csv", cfee::trace_csv(result.trace));
            std::cout << fmt::format("{:>10} {:>8} {:>16} {:>12} {:>5}\n", "grid", "policy", "mean_EE_bit/J",
                                     "mean_sumSE", "fail");
            for (const auto& s : cfee::summarize(result, spec))
                std::cout << fmt::format("{:>10g} {:>8} {:>16.6e} {:>12.6f} {:>5}\n", s.grid_value,
                                         cfee::to_string(s.policy), s.mean_ee, s.mean_sum_se, s.failures);
            if (result.failures) std::cerr << result.failures << " optimizer run(s) failed; see NaN rows\n";
            return kOk;
        }

        if (*validate) {
            cfee::SystemConfig cfg = instance == "reference" ? cfee::reference_validation_config()
                                                             : cfee::shared_pilot_validation_config();
            for (const auto& kv : overrides) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) throw cfee::ConfigError(kv, "override must have the form key=value");
                cfee::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
            }
            cfee::ValidationOptions opt;
            opt.trials = trials;
            opt.seed = seed;
            opt.tolerance = tolerance;
            opt.fault = fault;
            opt.threads = threads;
            const cfee::ValidationReport report = cfee::run_validation(cfg, opt);
            if (!out_path.empty()) write_file(out_path, cfee::validation_csv(report.rows));
            for (const auto& r : report.rows)
                std::cout << fmt::format("{:<24} closed {:.6e} empirical {:.6e} stderr {:.2e} rel_err {:.3e} {}\n",
                                         r.quantity, r.closed_form, r.empirical, r.std_error, r.rel_err,
                                         cfee::to_string(r.verdict));
            for (const auto& r : report.rows)
                if (r.verdict == cfee::Verdict::fail)
                    std::cerr << "validation failed: " << r.quantity << " rel_err " << r.rel_err << '\n';
            if (report.inconclusive)
                std::cout << report.inconclusive << " quantity(ies) inconclusive: increase --trials\n";
            return report.passed() ? kOk : kValidation;
        }

        if (*solve) {
            const cfee::SystemConfig cfg = cfee::parse_config(config_path, overrides);
            const cfee::Scenario sc = cfee::build_scenario(cfg);
            const cfee::SinrCoefficients coeffs = cfee::compute_coefficients(sc);
            if (!coeff_path.empty()) write_file(coeff_path, cfee::coefficients_csv(coeffs));
            for (const auto& d : coeffs.diagnostics) std::cerr << "note: " << d << '\n';
            const double ith = sc.interference_threshold_w();
            if (policy == "equal") {
                const auto p = cfee::equal_power_allocation(coeffs, cfg.max_ap_power_w, ith);
                std::cout << "policy            equal\n" << metrics_text(cfee::evaluate(p, coeffs, cfg, ith), p);
                return kOk;
            }
            const cfee::PowerProblem problem(coeffs, cfg, ith);
            const cfee::OptimizerResult res = cfee::sequential_dinkelbach(problem, cfg.optimizer);
            std::cout << "policy            optimal\n"
                      << fmt::format("termination       {}\nouter_iterations  {}\ninner_iterations  {}\n",
                                     cfee::to_string(res.termination), res.outer_iterations, res.inner_iterations)
                      << metrics_text(res.metrics, res.p_star);
            if (trace) {
                std::cout << "outer_iter,inner_iter,lambda,F_lambda,EE_lb\n";
                for (const auto& t : res.trace)
                    std::cout << fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", t.outer, t.inner, t.lambda, t.F,
                                             t.ee_lb);
            }
            return kOk;
        }
    } catch (const cfee::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfig;
    } catch (const cfee::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfig;
    }
    return kUsage;
}
