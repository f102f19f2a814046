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

#include "cfee/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "cfee/estimation.hpp"
#include "cfee/scenario.hpp"

namespace cfee {

std::string to_string(SweepKind kind) { return kind == SweepKind::pmax ? "pmax" : "ith"; }
std::string to_string(Policy policy) { return policy == Policy::optimal ? "optimal" : "equal"; }

SweepKind parse_sweep_kind(const std::string& s) {
    if (s == "pmax") return SweepKind::pmax;
    if (s == "ith") return SweepKind::ith;
    throw std::invalid_argument("unknown sweep kind '" + s + "' (expected pmax or ith)");
}

Policy parse_policy(const std::string& s) {
    if (s == "optimal") return Policy::optimal;
    if (s == "equal") return Policy::equal;
    throw std::invalid_argument("unknown policy '" + s + "' (expected optimal or equal)");
}

std::vector<double> default_grid(SweepKind kind) {
    if (kind == SweepKind::pmax) return {-10, -5, 0, 5, 10, 15, 20, 25, 30};
    return {-20, -15, -10, -5, -3, 0, 4};
}

void SweepSpec::validate() const {
    if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
    if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("sweep grid must be sorted");
    if (trials < 1) throw std::invalid_argument("sweep needs at least one trial");
    if (policies.empty()) throw std::invalid_argument("sweep needs at least one policy");
    base.validate();
}

double SweepResult::mean_ee(Policy policy, double grid_value) const {
    double sum = 0;
    int n = 0;
    for (const auto& r : rows) {
        if (r.policy != policy || r.grid_value != grid_value || r.failed) continue;
        sum += r.ee;
        ++n;
    }
    return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

namespace {

struct SeedOutput {
    std::vector<SweepRow> rows;  // grid-major, then policy
    std::vector<TraceRecord> trace;
};

SeedOutput run_seed(const SweepSpec& spec, std::uint64_t seed) {
    SeedOutput out;
    SystemConfig cfg = spec.base;
    cfg.seed = seed;
    const Scenario sc = build_scenario(cfg);
    const SinrCoefficients coeffs = compute_coefficients(sc);

    for (double value : spec.grid) {
        SystemConfig point = cfg;
        if (spec.kind == SweepKind::pmax)
            point.max_ap_power_w = dbm_to_watt(value);
        else
            point.interference_threshold_db = value;
        const double ith = sc.noise_power_w * db_to_linear(point.interference_threshold_db);
        const PowerProblem problem(coeffs, point, ith);

        for (Policy policy : spec.policies) {
            SweepRow row;
            row.kind = spec.kind;
            row.grid_value = value;
            row.seed = seed;
            row.policy = policy;
            if (policy == Policy::equal) {
                const PowerAllocation p = equal_power_allocation(coeffs, point.max_ap_power_w, ith);
                const MetricsReport m = evaluate(p, coeffs, point, ith);
                row.ee = m.ee;
                row.sum_se = m.sum_se;
                row.feasible = m.constraints.feasible;
            } else {
                try {
                    const OptimizerResult res = sequential_dinkelbach(problem, point.optimizer);
                    row.ee = res.metrics.ee;
                    row.sum_se = res.metrics.sum_se;
                    row.feasible = res.metrics.constraints.feasible;
                    row.outer_iterations = res.outer_iterations;
                    row.inner_iterations = res.inner_iterations;
                    if (spec.trace)
                        for (const auto& t : res.trace) out.trace.push_back({value, seed, t});
                } catch (const NumericalFailure& e) {
                    row.failed = true;
                    row.error = e.what();
                    row.ee = std::numeric_limits<double>::quiet_NaN();
                    row.sum_se = std::numeric_limits<double>::quiet_NaN();
                }
            }
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    std::vector<SeedOutput> per_seed(spec.trials);
    const unsigned hw = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(spec.trials));

    std::atomic<int> next{0};
    auto work = [&] {
        for (int s = next++; s < spec.trials; s = next++) per_seed[s] = run_seed(spec, spec.base_seed + s);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    SweepResult result;
    const std::size_t per_grid = spec.policies.size();
    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
        for (const auto& seed_out : per_seed) {
            for (std::size_t q = 0; q < per_grid; ++q) {
                const SweepRow& row = seed_out.rows[g * per_grid + q];
                if (row.failed) ++result.failures;
                result.rows.push_back(row);
            }
        }
    }
    if (spec.trace) {
        for (double value : spec.grid)
            for (const auto& seed_out : per_seed)
                for (const auto& t : seed_out.trace)
                    if (t.grid_value == value) result.trace.push_back(t);
    }
    return result;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = kSweepCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += fmt::format("{},{:.17g},{},{},{:.17g},{:.17g},{},{},{}\n", to_string(r.kind), r.grid_value, r.seed,
                           to_string(r.policy), r.ee, r.sum_se, r.feasible ? 1 : 0, r.outer_iterations,
                           r.inner_iterations);
    }
    return out;
}

void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << sweep_csv(rows);
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kSweepCsvHeader) throw std::runtime_error("unexpected sweep CSV header");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 9) throw std::runtime_error("malformed sweep CSV row: " + line);
        SweepRow r;
        r.kind = parse_sweep_kind(cells[0]);
        r.grid_value = std::stod(cells[1]);
        r.seed = std::stoull(cells[2]);
        r.policy = parse_policy(cells[3]);
        r.ee = std::stod(cells[4]);
        r.sum_se = std::stod(cells[5]);
        r.feasible = cells[6] == "1";
        r.outer_iterations = std::stoi(cells[7]);
        r.inner_iterations = std::stoi(cells[8]);
        r.failed = std::isnan(r.ee);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string trace_csv(const std::vector<TraceRecord>& trace) {
    std::string out = "grid_value,seed,outer_iter,inner_iter,lambda,F_lambda,EE_lb\n";
    for (const auto& t : trace)
        out += fmt::format("{:.17g},{},{},{},{:.17g},{:.17g},{:.17g}\n", t.grid_value, t.seed, t.row.outer, t.row.inner,
                           t.row.lambda, t.row.F, t.row.ee_lb);
    return out;
}

std::vector<GridSummary> summarize(const SweepResult& result, const SweepSpec& spec) {
    std::vector<GridSummary> out;
    for (double value : spec.grid) {
        for (Policy policy : spec.policies) {
            GridSummary s;
            s.grid_value = value;
            s.policy = policy;
            for (const auto& r : result.rows) {
                if (r.grid_value != value || r.policy != policy) continue;
                if (r.failed) {
                    ++s.failures;
                    continue;
                }
                s.mean_ee += r.ee;
                s.mean_sum_se += r.sum_se;
                ++s.runs;
            }
            if (s.runs) {
                s.mean_ee /= s.runs;
                s.mean_sum_se /= s.runs;
            }
            out.push_back(s);
        }
    }
    return out;
}

SystemConfig reference_validation_config() {
    SystemConfig cfg;
    cfg.num_aps = 2;
    cfg.antennas_per_ap = 2;
    cfg.num_secondary_users = 2;
    cfg.num_primary_users = 1;
    cfg.primary_antennas = 2;
    cfg.seed = 1;
    return cfg;
}

SystemConfig shared_pilot_validation_config() {
    SystemConfig cfg = reference_validation_config();
    cfg.num_secondary_users = 3;
    cfg.pilots_shared = 0;
    cfg.pilots_primary = 6;
    cfg.pilots_secondary = 2;
    return cfg;
}

ValidationReport run_validation(const SystemConfig& config, const ValidationOptions& options) {
    config.validate();
    const Scenario sc = build_scenario(config);
    const SinrCoefficients coeffs = compute_coefficients(sc);
    const PowerAllocation p = equal_power_allocation(coeffs, config.max_ap_power_w, sc.interference_threshold_w());
    ValidationReport report;
    report.rows = validate_closed_forms(sc, p, options);
    for (const auto& r : report.rows) {
        if (r.verdict == Verdict::fail) ++report.failures;
        if (r.verdict == Verdict::inconclusive) ++report.inconclusive;
    }
    return report;
}

std::string coefficients_csv(const SinrCoefficients& c) {
    std::string out = "coefficient,i,k,l,value\n";
    auto dump = [&](const char* name, const Tensor3& t, int second) {
        for (int i = 0; i < c.Ks; ++i)
            for (int k = 0; k < second; ++k)
                for (int l = 0; l < c.L; ++l) out += fmt::format("{},{},{},{},{:.17g}\n", name, i, k, l, t(i, k, l));
    };
    dump("a", c.a, c.Ks);
    dump("b", c.b, c.Ks);
    dump("theta", c.theta, c.Kp);
    for (int k = 0; k < c.Ks; ++k) out += fmt::format("varsigma_sq,,{},,{:.17g}\n", k, c.varsigma_sq[k]);
    return out;
}

}  // namespace cfee
