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

#include "cfee/config_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "cfee/types.hpp"

namespace cfee {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    double v = 0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) throw ConfigError(key, "expected a number, got '" + value + "'");
    return v;
}

long long parse_integer(const std::string& key, const std::string& value) {
    long long v = 0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError(key, "expected an integer, got '" + value + "'");
    return v;
}

struct Field {
    const char* key;
    std::function<void(SystemConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const SystemConfig&)> get;
};

template <typename T>
Field int_field(const char* key, T SystemConfig::*member) {
    return {key,
            [member](SystemConfig& c, const std::string& k, const std::string& v) {
                c.*member = static_cast<T>(parse_integer(k, v));
            },
            [member](const SystemConfig& c) { return fmt::format("{}", c.*member); }};
}

Field real_field(const char* key, double SystemConfig::*member) {
    return {key,
            [member](SystemConfig& c, const std::string& k, const std::string& v) { c.*member = parse_double(k, v); },
            [member](const SystemConfig& c) { return fmt::format("{:.17g}", c.*member); }};
}

template <typename T>
Field opt_field(const char* key, T OptimizerOptions::*member) {
    return {key,
            [member](SystemConfig& c, const std::string& k, const std::string& v) {
                if constexpr (std::is_integral_v<T>)
                    c.optimizer.*member = static_cast<T>(parse_integer(k, v));
                else
                    c.optimizer.*member = parse_double(k, v);
            },
            [member](const SystemConfig& c) {
                if constexpr (std::is_integral_v<T>)
                    return fmt::format("{}", c.optimizer.*member);
                else
                    return fmt::format("{:.17g}", c.optimizer.*member);
            }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        int_field("L", &SystemConfig::num_aps),
        int_field("N", &SystemConfig::antennas_per_ap),
        int_field("K_s", &SystemConfig::num_secondary_users),
        int_field("M", &SystemConfig::primary_antennas),
        int_field("K_p", &SystemConfig::num_primary_users),
        real_field("B", &SystemConfig::bandwidth_hz),
        real_field("NF", &SystemConfig::noise_figure_db),
        int_field("tau_c", &SystemConfig::coherence_length),
        int_field("tau_p", &SystemConfig::pilot_length),
        int_field("tau1", &SystemConfig::pilots_shared),
        int_field("tau2", &SystemConfig::pilots_primary),
        int_field("tau3", &SystemConfig::pilots_secondary),
        real_field("eta_s", &SystemConfig::secondary_pilot_power_w),
        real_field("eta_p", &SystemConfig::primary_pilot_power_w),
        real_field("zeta", &SystemConfig::amplifier_inefficiency),
        real_field("xi", &SystemConfig::fronthaul_w_per_bps),
        real_field("PC", &SystemConfig::circuit_power_w),
        real_field("P_max", &SystemConfig::max_ap_power_w),
        {"P_max_dBm",
         [](SystemConfig& c, const std::string& k, const std::string& v) { c.max_ap_power_w = dbm_to_watt(parse_double(k, v)); },
         [](const SystemConfig& c) { return fmt::format("{:.17g}", watt_to_dbm(c.max_ap_power_w)); }},
        real_field("Ith_over_sigma2_dB", &SystemConfig::interference_threshold_db),
        real_field("Qp_scale", &SystemConfig::primary_power_scale),
        real_field("angular_std", &SystemConfig::angular_std_deg),
        real_field("room_side", &SystemConfig::room_side_m),
        real_field("pn_side", &SystemConfig::pn_side_m),
        real_field("pn_offset", &SystemConfig::pn_offset_m),
        real_field("ap_height", &SystemConfig::ap_height_m),
        {"seed",
         [](SystemConfig& c, const std::string& k, const std::string& v) {
             const long long s = parse_integer(k, v);
             if (s < 0) throw ConfigError(k, "must be nonnegative");
             c.seed = static_cast<std::uint64_t>(s);
         },
         [](const SystemConfig& c) { return fmt::format("{}", c.seed); }},
        opt_field("inner_eps", &OptimizerOptions::inner_epsilon),
        opt_field("outer_tol", &OptimizerOptions::outer_tolerance),
        opt_field("max_inner", &OptimizerOptions::max_inner_iterations),
        opt_field("max_outer", &OptimizerOptions::max_outer_iterations),
        opt_field("sqrt_smoothing", &OptimizerOptions::sqrt_smoothing_w),
        opt_field("barrier_gap", &OptimizerOptions::barrier_gap),
        opt_field("max_newton", &OptimizerOptions::max_newton_iterations),
    };
    return table;
}

}  // namespace

void SystemConfig::validate() const {
    auto require = [](bool ok, const char* key, const char* what) {
        if (!ok) throw ConfigError(key, what);
    };
    require(num_aps >= 1, "L", "must be >= 1");
    require(antennas_per_ap >= 1, "N", "must be >= 1");
    require(num_secondary_users >= 1, "K_s", "must be >= 1");
    require(primary_antennas >= 1, "M", "must be >= 1");
    require(num_primary_users >= 0, "K_p", "must be >= 0");
    require(bandwidth_hz > 0, "B", "must be positive");
    require(pilot_length >= 1, "tau_p", "must be >= 1");
    require(coherence_length > pilot_length, "tau_c", "must exceed tau_p");
    require(pilots_shared >= 0, "tau1", "must be >= 0");
    require(pilots_primary >= 0, "tau2", "must be >= 0");
    require(pilots_secondary >= 0, "tau3", "must be >= 0");
    require(pilots_shared + pilots_primary + pilots_secondary == pilot_length, "tau1",
            "tau1 + tau2 + tau3 must equal tau_p");
    require(pilots_shared + pilots_secondary >= 1, "tau3", "secondary network has no pilots");
    require(num_primary_users == 0 || pilots_shared + pilots_primary >= 1, "tau2", "primary network has no pilots");
    require(secondary_pilot_power_w > 0, "eta_s", "must be positive");
    require(primary_pilot_power_w > 0, "eta_p", "must be positive");
    require(amplifier_inefficiency >= 1, "zeta", "must be >= 1");
    require(fronthaul_w_per_bps >= 0, "xi", "must be >= 0");
    require(circuit_power_w > 0, "PC", "must be positive");
    require(max_ap_power_w > 0, "P_max", "must be positive");
    require(primary_power_scale >= 0, "Qp_scale", "must be >= 0");
    require(angular_std_deg > 0 && angular_std_deg < 90, "angular_std", "must lie in (0, 90) degrees");
    require(room_side_m > 0, "room_side", "must be positive");
    require(pn_side_m > 0, "pn_side", "must be positive");
    require(ap_height_m > 0, "ap_height", "must be positive");
    require(optimizer.inner_epsilon > 0, "inner_eps", "must be positive");
    require(optimizer.outer_tolerance > 0, "outer_tol", "must be positive");
    require(optimizer.max_inner_iterations >= 1, "max_inner", "must be >= 1");
    require(optimizer.max_outer_iterations >= 1, "max_outer", "must be >= 1");
    require(optimizer.sqrt_smoothing_w > 0, "sqrt_smoothing", "must be positive");
    require(optimizer.barrier_gap > 0, "barrier_gap", "must be positive");
    require(optimizer.max_newton_iterations >= 1, "max_newton", "must be >= 1");
}

void apply_setting(SystemConfig& config, const std::string& key, const std::string& value) {
    for (const auto& f : fields()) {
        if (key == f.key) {
            f.set(config, key, value);
            return;
        }
    }
    throw ConfigError(key, "unknown configuration key");
}

SystemConfig parse_config_text(const std::string& text, const SystemConfig& base) {
    SystemConfig cfg = base;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(fmt::format("line {}", line_no), "expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(fmt::format("line {}", line_no), "missing key");
        apply_setting(cfg, key, value);
    }
    return cfg;
}

SystemConfig parse_config(const std::string& path, const std::vector<std::string>& overrides) {
    SystemConfig cfg;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError(path, "cannot open configuration file");
        std::stringstream buf;
        buf << in.rdbuf();
        cfg = parse_config_text(buf.str());
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError(o, "override must be key=value");
        apply_setting(cfg, trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.emplace_back(f.key);
    return out;
}

std::string to_config_text(const SystemConfig& config) {
    std::string out;
    for (const auto& f : fields()) {
        if (std::string(f.key) == "P_max") continue;  // P_max_dBm carries the same value
        out += fmt::format("{} = {}\n", f.key, f.get(config));
    }
    return out;
}

}  // namespace cfee
