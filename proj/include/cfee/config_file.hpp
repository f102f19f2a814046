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

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cfee/config.hpp"

namespace cfee {

/// Parses `key = value` text (one pair per line, `#` starts a comment) on top
/// of the defaults. Throws ConfigError naming the offending key.
SystemConfig parse_config_text(const std::string& text, const SystemConfig& base = {});

/// Reads `path` (may be empty for defaults only), then applies `overrides`
/// given as `key=value` strings in order.
SystemConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Applies a single key/value pair. Throws ConfigError on unknown keys or bad values.
void apply_setting(SystemConfig& config, const std::string& key, const std::string& value);

/// Every accepted key, in documentation order.
std::vector<std::string> config_keys();

/// Renders the configuration in the same `key = value` format.
std::string to_config_text(const SystemConfig& config);

}  // namespace cfee
